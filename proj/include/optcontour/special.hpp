#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>

#include "optcontour/error.hpp"
#include "optcontour/log_value.hpp"

namespace optcontour::special {

namespace detail {

// Lanczos approximation, g = 7, nine coefficients.
inline constexpr double kLanczosG = 7.0;
inline constexpr std::array<double, 9> kLanczosCoeffs = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7,
};

inline cplx log_gamma_lanczos(cplx z) {
    z -= 1.0;
    cplx x = kLanczosCoeffs[0];
    for (std::size_t k = 1; k < kLanczosCoeffs.size(); ++k) {
        x += kLanczosCoeffs[k] / (z + static_cast<double>(k));
    }
    const cplx t = z + kLanczosG + 0.5;
    return 0.5 * std::log(kTwoPi) + (z + 0.5) * std::log(t) - t + std::log(x);
}

}  // namespace detail

/// A logarithm of sin(pi z), stable for large |Im z| where sin overflows.
/// The imaginary part is some branch of the argument.
inline cplx log_sin_pi(cplx z) {
    // sin(pi (z + 2k)) = sin(pi z): reduce Re z to [-1, 1] for phase accuracy.
    const double x = std::remainder(z.real(), 2.0);
    const double y = z.imag();
    const cplx w(x, y);
    const double pi = std::numbers::pi;
    if (std::abs(y) < 20.0) {
        const cplx s = std::sin(pi * w);
        if (s == cplx(0.0, 0.0)) return {-kInf, 0.0};
        return std::log(s);
    }
    const cplx i(0.0, 1.0);
    const cplx log_2i(std::log(2.0), 0.5 * pi);
    if (y > 0.0) {
        // sin(pi w) = -e^{-i pi w} (1 - e^{2 i pi w}) / (2i) with |e^{2 i pi w}| tiny.
        return -i * pi * w + std::log(1.0 - std::exp(2.0 * i * pi * w)) - log_2i + cplx(0.0, pi);
    }
    return i * pi * w + std::log(1.0 - std::exp(-2.0 * i * pi * w)) - log_2i;
}

/// log Gamma(z). Returns (+inf, 0) at the poles z = 0, -1, -2, ...
///
/// For Re z >= 1/2 this is the principal branch. Left of that the reflection
/// formula is used and the imaginary part is only defined modulo 2 pi.
inline cplx log_gamma(cplx z) {
    if (z.imag() == 0.0 && z.real() <= 0.0 && z.real() == std::floor(z.real())) {
        return {kInf, 0.0};
    }
    if (z.real() < 0.5) {
        return std::log(std::numbers::pi) - log_sin_pi(z) - detail::log_gamma_lanczos(1.0 - z);
    }
    return detail::log_gamma_lanczos(z);
}

inline constexpr double kBesselValidRadius = 30.0;
inline constexpr int kBesselMaxTerms = 50;

/// J0 by its ascending series sum_k (-z^2/4)^k / (k!)^2.
///
/// The series is only trusted on |z| <= 30; beyond that cancellation between
/// terms eats too many digits and an out_of_range error is thrown.
inline cplx bessel_j0(cplx z) {
    if (!(std::abs(z) <= kBesselValidRadius)) {
        throw Error(ErrorCode::out_of_range, "bessel_j0: |z| exceeds the validated radius 30");
    }
    const cplx q = -0.25 * z * z;
    cplx term = 1.0;
    cplx sum = 1.0;
    for (int k = 1; k <= kBesselMaxTerms; ++k) {
        term *= q / static_cast<double>(k * k);
        sum += term;
        if (std::abs(term) <= 1e-17 * std::abs(sum) && k > 2) break;
    }
    return sum;
}

/// Largest term magnitude of the J0 series at z; the natural scale of its rounding error.
inline double bessel_j0_max_term(cplx z) {
    const double q = 0.25 * std::norm(z);
    double term = 1.0;
    double best = 1.0;
    for (int k = 1; k <= kBesselMaxTerms; ++k) {
        term *= q / static_cast<double>(k * k);
        best = std::max(best, term);
    }
    return best;
}

}  // namespace optcontour::special

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

namespace optcontour {

using cplx = std::complex<double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// log(e^a + e^b) without overflow; -inf is the identity.
inline double logaddexp(double a, double b) {
    if (a == -kInf) return b;
    if (b == -kInf) return a;
    const double hi = std::max(a, b);
    const double lo = std::min(a, b);
    return hi + std::log1p(std::exp(lo - hi));
}

/// Reduces a phase to (-pi, pi].
inline double wrap_phase(double phi) {
    double r = std::remainder(phi, kTwoPi);
    if (r <= -std::numbers::pi) r += kTwoPi;
    return r;
}

/// A logarithm of a complex number: re = log|w|, im = some branch of arg w.
///
/// Only exp(*this) and re are meaningful; adding 2*pi*k to im represents the
/// same value. re == -inf encodes zero, a NaN or +inf re marks a point where
/// the function is not evaluable (pole, branch cut, out of validated range).
struct LogValue {
    double re = -kInf;
    double im = 0.0;

    constexpr LogValue() = default;
    constexpr LogValue(double r, double i) : re(r), im(i) {}
    explicit LogValue(cplx c) : re(c.real()), im(c.imag()) {}

    static LogValue of(cplx w) {
        if (w == cplx(0.0, 0.0)) return {-kInf, 0.0};
        return LogValue(std::log(w));
    }
    static constexpr LogValue zero() { return {-kInf, 0.0}; }
    static constexpr LogValue invalid() { return {kNaN, kNaN}; }

    bool finite() const { return std::isfinite(re) && std::isfinite(im); }
    bool is_zero() const { return re == -kInf; }

    cplx as_complex() const { return {re, im}; }
    cplx exp() const {
        if (re == -kInf) return {0.0, 0.0};
        return std::polar(std::exp(re), im);
    }

    friend LogValue operator+(LogValue a, LogValue b) { return {a.re + b.re, a.im + b.im}; }
    friend LogValue operator-(LogValue a, LogValue b) { return {a.re - b.re, a.im - b.im}; }
};

/// log(e^a + e^b) for complex logarithms. Cancellation is inherited from the sum.
inline LogValue log_add(LogValue a, LogValue b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    if (!a.finite() || !b.finite()) return LogValue::invalid();
    if (b.re > a.re) std::swap(a, b);
    const cplx ratio = std::exp(b.as_complex() - a.as_complex());
    const cplx one_plus = 1.0 + ratio;
    if (one_plus == cplx(0.0, 0.0)) return LogValue::zero();
    return LogValue(a.as_complex() + std::log(one_plus));
}

}  // namespace optcontour

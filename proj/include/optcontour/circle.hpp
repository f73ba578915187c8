#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include "optcontour/analytic_function.hpp"
#include "optcontour/error.hpp"
#include "optcontour/grid.hpp"
#include "optcontour/log_value.hpp"
#include "optcontour/quad.hpp"

namespace optcontour {

inline constexpr std::size_t kCircleSamples = 512;

/// Smallest and largest distance from 0 of a feature, inflated by its exclusion radius.
inline std::pair<double, double> feature_radial_range(const SingularFeature& f, double extent = 1.0) {
    const double pad = f.kind == FeatureKind::point ? std::max(f.exclusion_radius, default_point_exclusion(extent))
                                                    : f.exclusion_radius;
    switch (f.kind) {
        case FeatureKind::point: {
            const double d = std::abs(f.anchor);
            return {std::max(0.0, d - pad), d + pad};
        }
        case FeatureKind::ray_cut:
            return {std::max(0.0, geom::point_ray_distance(0.0, f.anchor, f.direction, kInf) - pad), kInf};
        case FeatureKind::segment_cut: {
            const double lo = geom::point_ray_distance(0.0, f.anchor, f.direction, f.length);
            const double hi = std::max(std::abs(f.anchor), std::abs(f.anchor + f.length * f.direction));
            return {std::max(0.0, lo - pad), hi + pad};
        }
    }
    return {0.0, kInf};
}

/// Distance from 0 to the nearest declared feature (inf if none).
inline double nearest_feature_distance(const AnalyticFunction& f) {
    double d = kInf;
    for (const auto& s : f.singularities()) d = std::min(d, feature_radial_range(s).first);
    return d;
}

namespace detail {

inline void check_circle(double r, const AnalyticFunction& f) {
    if (!(r > 0.0) || !std::isfinite(r)) throw Error(ErrorCode::invalid_argument, "circle radius must be positive");
    for (const auto& s : f.singularities()) {
        const auto [lo, hi] = feature_radial_range(s);
        if (r >= lo && r <= hi) {
            throw Error(ErrorCode::circle_singularity, "circle intersects a singular feature");
        }
    }
}

// log f at the S equispaced points r e^{2 pi i k/S}.
inline std::vector<LogValue> circle_log_values(double r, const AnalyticFunction& f, std::size_t samples) {
    std::vector<LogValue> out(samples);
    for (std::size_t k = 0; k < samples; ++k) {
        const double theta = kTwoPi * static_cast<double>(k) / static_cast<double>(samples);
        const LogValue v = f.eval_log(std::polar(r, theta));
        if (std::isnan(v.re) || std::isnan(v.im) || v.re == kInf) {
            throw Error(ErrorCode::circle_singularity, "f is not evaluable on the circle");
        }
        out[k] = v;
    }
    return out;
}

inline double circle_weight_from(double r, int n, const std::vector<LogValue>& lf) {
    double acc = -kInf;
    for (const auto& v : lf) acc = logaddexp(acc, v.re);
    const double S = static_cast<double>(lf.size());
    return std::log(kTwoPi * r / S) - (n + 1.0) * std::log(r) + acc;
}

}  // namespace detail

/// log of the trapezoidal approximation of the integral of r d(r e^{i theta}) over [0, 2 pi).
inline double circle_log_weight(double r, int n, const AnalyticFunction& f, std::size_t samples = kCircleSamples) {
    detail::check_circle(r, f);
    if (samples < 1) throw Error(ErrorCode::invalid_argument, "circle_log_weight: samples must be positive");
    return detail::circle_weight_from(r, n, detail::circle_log_values(r, f, samples));
}

struct CircleWeight {
    double log_weight = kNaN;
    std::size_t samples = 0;
};

/// 512 samples, doubled once if the doubled estimate differs by more than 1e-3 relative.
inline CircleWeight circle_weight(double r, int n, const AnalyticFunction& f) {
    const double w1 = circle_log_weight(r, n, f, kCircleSamples);
    const double w2 = circle_log_weight(r, n, f, 2 * kCircleSamples);
    if (std::abs(w2 - w1) > 1e-3 * std::max(1.0, std::abs(w1))) return {w2, 2 * kCircleSamples};
    return {w1, kCircleSamples};
}

/// log10 of the circle's condition number, from the same trapezoid samples.
inline double circle_condition(double r, int n, const AnalyticFunction& f, std::size_t samples = kCircleSamples) {
    detail::check_circle(r, f);
    const std::vector<LogValue> lf = detail::circle_log_values(r, f, samples);
    const double numerator = detail::circle_weight_from(r, n, lf);
    // Integrand g(z) dz = z^{-n-1} f(z) i z dtheta.
    std::vector<cplx> L(samples);
    double shift = -kInf;
    for (std::size_t k = 0; k < samples; ++k) {
        const double theta = kTwoPi * static_cast<double>(k) / static_cast<double>(samples);
        const cplx logz(std::log(r), theta);
        L[k] = lf[k].is_zero() ? cplx(-kInf, 0.0) : -static_cast<double>(n) * logz + lf[k].as_complex();
        shift = std::max(shift, L[k].real());
    }
    cplx sum{};
    double abs_sum = 0.0;
    for (const cplx& x : L) {
        if (x.real() == -kInf) continue;
        const cplx v = std::exp(x - shift);
        sum += v;
        abs_sum += std::abs(v);
    }
    if (!(std::abs(sum) > kZeroIntegralRatio * abs_sum)) {
        throw Error(ErrorCode::zero_derivative, "derivative numerically zero, kappa unbounded");
    }
    const double log_den = std::log(std::abs(sum) * kTwoPi / static_cast<double>(samples)) + shift;
    return (numerator - log_den) / std::numbers::ln10;
}

enum class RadiusFlag { interior, lower_end, upper_end, flat };

inline const char* radius_flag_name(RadiusFlag f) {
    switch (f) {
        case RadiusFlag::interior: return "interior";
        case RadiusFlag::lower_end: return "lower_end";
        case RadiusFlag::upper_end: return "upper_end";
        case RadiusFlag::flat: return "flat";
    }
    return "?";
}

struct CircleResult {
    double r_star = kNaN;
    double log_weight = kNaN;
    double log10_kappa = kNaN;
    std::size_t samples = 0;
    RadiusFlag flag = RadiusFlag::interior;
};

/// (1e-3, max(10, 4n)), with the upper end kept just inside the nearest feature.
inline std::pair<double, double> default_radius_bracket(int n, const AnalyticFunction& f) {
    double hi = std::max(10.0, 4.0 * n);
    const double d = nearest_feature_distance(f);
    if (d < hi) hi = d * (1.0 - 1e-6);
    double lo = std::min(1e-3, 0.5 * hi);
    return {lo, hi};
}

/// Golden-section search for the circle of least weight, on log r, to
/// relative radius tolerance 1e-4. Assumes the weight is unimodal on the bracket.
inline CircleResult optimal_radius(int n, const AnalyticFunction& f, std::pair<double, double> bracket) {
    auto [lo_r, hi_r] = bracket;
    if (!(lo_r > 0.0) || !(hi_r > lo_r)) throw Error(ErrorCode::invalid_argument, "optimal_radius: bad bracket");
    auto weight = [&](double t) { return circle_weight(std::exp(t), n, f).log_weight; };
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = std::log(lo_r), b = std::log(hi_r);
    const double wa = weight(a), wb = weight(b);
    double c = b - invphi * (b - a), d = a + invphi * (b - a);
    double wc = weight(c), wd = weight(d);
    double wmin = std::min({wa, wb, wc, wd}), wmax = std::max({wa, wb, wc, wd});
    while (b - a > 1e-4) {
        if (wc <= wd) {
            b = d;
            d = c;
            wd = wc;
            c = b - invphi * (b - a);
            wc = weight(c);
        } else {
            a = c;
            c = d;
            wc = wd;
            d = a + invphi * (b - a);
            wd = weight(d);
        }
        wmin = std::min({wmin, wc, wd});
        wmax = std::max({wmax, wc, wd});
    }
    double t = 0.5 * (a + b);
    double w = weight(t);
    CircleResult res;
    res.flag = RadiusFlag::interior;
    // The search collapsed onto an end of the bracket: monotone weight there.
    const double t_lo = std::log(lo_r), t_hi = std::log(hi_r);
    if (wb <= w && t_hi - t < 2e-4) {
        t = t_hi;
        w = wb;
        res.flag = RadiusFlag::upper_end;
    } else if (wa <= w && t - t_lo < 2e-4) {
        t = t_lo;
        w = wa;
        res.flag = RadiusFlag::lower_end;
    }
    if (wmax - wmin <= 1e-12 * std::max(1.0, std::abs(wmin))) res.flag = RadiusFlag::flat;
    res.r_star = std::exp(t);
    const CircleWeight cw = circle_weight(res.r_star, n, f);
    res.log_weight = cw.log_weight;
    res.samples = cw.samples;
    res.log10_kappa = circle_condition(res.r_star, n, f, cw.samples);
    return res;
}

inline CircleResult optimal_radius(int n, const AnalyticFunction& f) {
    return optimal_radius(n, f, default_radius_bracket(n, f));
}

/// Condition number of a given circle as a CircleResult.
inline CircleResult evaluate_circle(double r, int n, const AnalyticFunction& f) {
    CircleResult res;
    res.r_star = r;
    const CircleWeight cw = circle_weight(r, n, f);
    res.log_weight = cw.log_weight;
    res.samples = cw.samples;
    res.log10_kappa = circle_condition(r, n, f, cw.samples);
    return res;
}

}  // namespace optcontour

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <vector>

#include "optcontour/analytic_function.hpp"
#include "optcontour/error.hpp"
#include "optcontour/log_value.hpp"
#include "optcontour/sew.hpp"

namespace optcontour {

/// mantissa * 10^exp10 with 1 <= |mantissa| < 10, or mantissa = 0 and exp10 = 0.
class ScaledComplex {
public:
    ScaledComplex() = default;

    static ScaledComplex from_complex(cplx v) { return from_parts(v, 0); }

    /// Value exp(lv).
    static ScaledComplex from_log(LogValue lv) {
        if (lv.is_zero()) return {};
        if (!lv.finite()) return {cplx(kNaN, kNaN), 0};
        const double l10 = lv.re / std::numbers::ln10;
        const double e = std::floor(l10);
        return from_parts(std::polar(std::pow(10.0, l10 - e), lv.im), static_cast<long>(e));
    }

    /// v * 10^e, normalised.
    static ScaledComplex from_parts(cplx v, long e) {
        ScaledComplex s;
        if (v == cplx(0.0, 0.0)) return s;
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
            s.mantissa_ = {kNaN, kNaN};
            return s;
        }
        const long shift = static_cast<long>(std::floor(std::log10(std::abs(v))));
        v *= std::pow(10.0, -static_cast<double>(shift));
        e += shift;
        // Guard the boundaries against rounding in log10.
        while (std::abs(v) >= 10.0) {
            v /= 10.0;
            ++e;
        }
        while (std::abs(v) < 1.0) {
            v *= 10.0;
            --e;
        }
        s.mantissa_ = v;
        s.exp10_ = e;
        return s;
    }

    cplx mantissa() const { return mantissa_; }
    long exp10() const { return exp10_; }
    bool is_zero() const { return mantissa_ == cplx(0.0, 0.0); }

    double log10_abs() const {
        return is_zero() ? -kInf : std::log10(std::abs(mantissa_)) + static_cast<double>(exp10_);
    }

    /// Hardware value; over/underflows outside the double range.
    cplx to_complex() const {
        if (is_zero()) return {};
        return mantissa_ * std::pow(10.0, static_cast<double>(exp10_));
    }

    /// Multiply by 10^x for real x.
    ScaledComplex scaled_by_pow10(double x) const {
        const double e = std::floor(x);
        return from_parts(mantissa_ * std::pow(10.0, x - e), exp10_ + static_cast<long>(e));
    }

    friend ScaledComplex operator*(const ScaledComplex& a, const ScaledComplex& b) {
        return from_parts(a.mantissa_ * b.mantissa_, a.exp10_ + b.exp10_);
    }
    friend ScaledComplex operator/(const ScaledComplex& a, const ScaledComplex& b) {
        return from_parts(a.mantissa_ / b.mantissa_, a.exp10_ - b.exp10_);
    }

private:
    ScaledComplex(cplx m, long e) : mantissa_(m), exp10_(e) {}

    cplx mantissa_{};
    long exp10_ = 0;
};

/// |a - b| / |b|.
inline double relative_difference(const ScaledComplex& a, const ScaledComplex& b) {
    if (b.is_zero()) return a.is_zero() ? 0.0 : kInf;
    const long de = a.exp10() - b.exp10();
    if (de > 300) return kInf;
    const cplx av = de < -300 ? cplx{} : a.mantissa() * std::pow(10.0, static_cast<double>(de));
    return std::abs(av - b.mantissa()) / std::abs(b.mantissa());
}

/// A maximal straight run of walk edges [first_edge, first_edge + edge_count).
struct Segment {
    cplx a{};
    cplx b{};
    std::size_t first_edge = 0;
    std::size_t edge_count = 0;
    double max_edge_log_weight = -kInf;
};

namespace detail {

inline bool same_direction(cplx d1, cplx d2) {
    const cplx u1 = d1 / std::abs(d1), u2 = d2 / std::abs(d2);
    return std::abs(u1 - u2) <= 1e-12;
}

}  // namespace detail

/// Greedy decomposition of a closed walk into maximal collinear runs.
///
/// Runs never wrap past the starting corner, so the segments concatenate to
/// the walk starting at its first corner.
inline std::vector<Segment> segment_decompose(const Walk& w) {
    const std::size_t m = w.points.size();
    std::vector<Segment> out;
    if (m < 2) return out;
    auto dir = [&](std::size_t k) { return w.points[(k + 1) % m] - w.points[k % m]; };
    std::size_t start = 0;
    for (std::size_t k = 0; k < m; ++k) {
        if (!detail::same_direction(dir(k + m - 1), dir(k))) {
            start = k;
            break;
        }
    }
    std::size_t k = 0;
    while (k < m) {
        const std::size_t e0 = (start + k) % m;
        Segment s;
        s.a = w.points[e0];
        s.first_edge = e0;
        s.edge_count = 1;
        s.max_edge_log_weight = w.edge_log_weights.empty() ? -kInf : w.edge_log_weights[e0];
        ++k;
        while (k < m && detail::same_direction(dir(e0), dir(start + k))) {
            const std::size_t e = (start + k) % m;
            if (!w.edge_log_weights.empty()) s.max_edge_log_weight = std::max(s.max_edge_log_weight, w.edge_log_weights[e]);
            ++s.edge_count;
            ++k;
        }
        s.b = w.points[(start + k) % m];
        out.push_back(s);
    }
    return out;
}

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Clenshaw-Curtis rule on the N Chebyshev-Lobatto points cos(k pi/(N-1)).
inline QuadratureRule make_clenshaw_curtis(std::size_t N) {
    if (N < 2) throw Error(ErrorCode::invalid_argument, "clenshaw_curtis_nodes: N must be at least 2");
    const std::size_t n = N - 1;
    QuadratureRule r;
    r.nodes.resize(N);
    r.weights.resize(N);
    const double pi = std::numbers::pi;
    for (std::size_t k = 0; k <= n; ++k) {
        r.nodes[k] = std::cos(static_cast<double>(k) * pi / static_cast<double>(n));
        double s = 0.0;
        for (std::size_t j = 1; j <= n / 2; ++j) {
            const double b = (2 * j == n) ? 1.0 : 2.0;
            s += b / (4.0 * static_cast<double>(j * j) - 1.0) *
                 std::cos(2.0 * static_cast<double>(j * k) * pi / static_cast<double>(n));
        }
        const double c = (k == 0 || k == n) ? 1.0 : 2.0;
        r.weights[k] = c / static_cast<double>(n) * (1.0 - s);
    }
    // Symmetrise: x_{n-k} = -x_k and w_{n-k} = w_k exactly.
    for (std::size_t k = 0; k < N / 2; ++k) {
        r.nodes[n - k] = -r.nodes[k];
        r.weights[n - k] = r.weights[k];
    }
    if (n % 2 == 0) r.nodes[n / 2] = 0.0;
    return r;
}

/// Cached rule; the reference stays valid for the life of the program.
inline const QuadratureRule& clenshaw_curtis_nodes(std::size_t N) {
    static std::mutex mu;
    static std::map<std::size_t, std::unique_ptr<QuadratureRule>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[N];
    if (!slot) slot = std::make_unique<QuadratureRule>(make_clenshaw_curtis(N));
    return *slot;
}

inline constexpr std::size_t kFirstNodeCount = 9;
inline constexpr std::size_t kMaxNodeCount = 4097;
inline constexpr double kNeglectRatio = 1e-24;
inline constexpr double kDefaultQuadTol = 1e-12;

/// |integral| at or below this multiple of eps times the absolute integral
/// is indistinguishable from rounding noise.
inline constexpr double kZeroIntegralRatio = 64.0 * std::numeric_limits<double>::epsilon();

/// log of the integrand z^{-n-1} f(z); any branch of the phase.
inline cplx integrand_log(cplx z, int n, const AnalyticFunction& f) {
    const LogValue lf = f.eval_log(z);
    if (std::isnan(lf.re) || std::isnan(lf.im) || lf.re == kInf) {
        throw Error(ErrorCode::out_of_range, "integrand is not evaluable on the contour");
    }
    if (lf.is_zero()) return {-kInf, 0.0};
    return -(n + 1.0) * std::log(z) + lf.as_complex();
}

/// Surviving segments of a walk and the common shift for exponentiation.
struct QuadratureSetup {
    std::vector<Segment> segments;  // survivors
    std::size_t neglected = 0;
    double shift = 0.0;
    int order = 0;
};

inline QuadratureSetup prepare_quadrature(const Walk& w, int n, const AnalyticFunction& f) {
    QuadratureSetup q;
    q.order = n;
    std::vector<Segment> all = segment_decompose(w);
    double global_max = -kInf;
    for (const auto& s : all) global_max = std::max(global_max, s.max_edge_log_weight);
    const double cutoff = global_max + std::log(kNeglectRatio);
    for (const auto& s : all) {
        if (s.max_edge_log_weight >= cutoff) {
            q.segments.push_back(s);
        } else {
            ++q.neglected;
        }
    }
    if (q.segments.empty()) throw Error(ErrorCode::no_segments, "integrate_contour: no segments survive");
    const QuadratureRule& rule = clenshaw_curtis_nodes(kFirstNodeCount);
    double s = -kInf;
    for (const auto& seg : q.segments) {
        const cplx mid = 0.5 * (seg.a + seg.b), half = 0.5 * (seg.b - seg.a);
        for (double x : rule.nodes) s = std::max(s, integrand_log(mid + half * x, n, f).real());
    }
    q.shift = std::isfinite(s) ? s : 0.0;
    return q;
}

/// Shifted N-point sums of one segment: the integral of g e^{-shift} and of |g| e^{-shift} |dz|.
struct SegmentSum {
    cplx value{};
    double abs_value = 0.0;
};

/// Integrand values e^{L - shift} at the N rule nodes of a segment.
inline std::vector<cplx> segment_values(const Segment& seg, std::size_t N, int n, double shift,
                                        const AnalyticFunction& f) {
    const QuadratureRule& rule = clenshaw_curtis_nodes(N);
    const cplx mid = 0.5 * (seg.a + seg.b), half = 0.5 * (seg.b - seg.a);
    std::vector<cplx> v(N);
    for (std::size_t k = 0; k < N; ++k) {
        const cplx L = integrand_log(mid + half * rule.nodes[k], n, f);
        v[k] = L.real() == -kInf ? cplx{} : std::exp(L - shift);
    }
    return v;
}

inline SegmentSum apply_rule(const Segment& seg, const std::vector<cplx>& values) {
    const QuadratureRule& rule = clenshaw_curtis_nodes(values.size());
    const cplx half = 0.5 * (seg.b - seg.a);
    SegmentSum s;
    // Mirror pairs are added first, so traversing the segment backwards
    // gives exactly the negated sum.
    const std::size_t n = values.size() - 1;
    for (std::size_t k = 0; 2 * k < n; ++k) {
        s.value += rule.weights[k] * (values[k] + values[n - k]);
        s.abs_value += rule.weights[k] * (std::abs(values[k]) + std::abs(values[n - k]));
    }
    if (n % 2 == 0) {
        s.value += rule.weights[n / 2] * values[n / 2];
        s.abs_value += rule.weights[n / 2] * std::abs(values[n / 2]);
    }
    s.value *= half;
    s.abs_value *= std::abs(half);
    return s;
}

/// Next node count in the nested schedule 9, 17, 33, ...; values at the old
/// nodes are reused.
inline std::vector<cplx> refine_values(const Segment& seg, const std::vector<cplx>& old, int n, double shift,
                                       const AnalyticFunction& f) {
    const std::size_t N = 2 * old.size() - 1;
    const QuadratureRule& rule = clenshaw_curtis_nodes(N);
    const cplx mid = 0.5 * (seg.a + seg.b), half = 0.5 * (seg.b - seg.a);
    std::vector<cplx> v(N);
    for (std::size_t k = 0; k < N; ++k) {
        if (k % 2 == 0) {
            v[k] = old[k / 2];
        } else {
            const cplx L = integrand_log(mid + half * rule.nodes[k], n, f);
            v[k] = L.real() == -kInf ? cplx{} : std::exp(L - shift);
        }
    }
    return v;
}

struct TraceRow {
    std::size_t round = 0;
    std::size_t total_nodes = 0;
    ScaledComplex taylor_coeff;
    double relative_change = kNaN;
};

struct DerivativeResult {
    ScaledComplex taylor_coeff;  // f^(n)(0) / n!
    ScaledComplex derivative;    // f^(n)(0)
    double log10_kappa = kNaN;
    double log_abs_contour = kNaN;   // log of the integral of |g| |dz|
    double log_abs_integral = kNaN;  // log |integral of g dz|
    std::size_t nodes_used = 0;
    std::size_t segments_used = 0;
    std::size_t segments_neglected = 0;
    bool converged = false;
    std::vector<TraceRow> trace;
};

namespace detail {

inline ScaledComplex taylor_from_raw(cplx raw, double shift) {
    // raw e^shift / (2 pi i)
    return ScaledComplex::from_complex(raw / cplx(0.0, kTwoPi)).scaled_by_pow10(shift / std::numbers::ln10);
}

inline ScaledComplex times_factorial(const ScaledComplex& a, int n) {
    return a.scaled_by_pow10(std::lgamma(n + 1.0) / std::numbers::ln10);
}

}  // namespace detail

/// Cauchy integral for f^(n)(0)/n! on an enclosing walk by piecewise
/// Clenshaw-Curtis quadrature.
///
/// Each surviving segment doubles its node count (9, 17, ..., 4097) until its
/// change drops below its share of max(tol |total|, 10 eps |abs total|).
inline DerivativeResult integrate_contour(const Walk& w, int n, const AnalyticFunction& f,
                                          double tol = kDefaultQuadTol) {
    if (n < 0) throw Error(ErrorCode::invalid_argument, "integrate_contour: order must be non-negative");
    if (winding_number(w) != 1) throw Error(ErrorCode::invalid_argument, "integrate_contour: walk does not wind once");
    const QuadratureSetup q = prepare_quadrature(w, n, f);
    const std::size_t ns = q.segments.size();

    std::vector<std::vector<cplx>> values(ns);
    std::vector<SegmentSum> sums(ns);
    std::vector<double> change(ns, kInf);
    std::vector<char> frozen(ns, 0);
    for (std::size_t k = 0; k < ns; ++k) {
        values[k] = segment_values(q.segments[k], kFirstNodeCount, n, q.shift, f);
        sums[k] = apply_rule(q.segments[k], values[k]);
    }

    DerivativeResult r;
    r.segments_used = ns;
    r.segments_neglected = q.neglected;
    auto totals = [&](cplx& t, double& a, std::size_t& nodes) {
        t = {};
        a = 0.0;
        nodes = 0;
        for (std::size_t k = 0; k < ns; ++k) {
            t += sums[k].value;
            a += sums[k].abs_value;
            nodes += values[k].size();
        }
    };
    cplx total;
    double abs_total;
    std::size_t nodes;
    totals(total, abs_total, nodes);
    r.trace.push_back({0, nodes, detail::taylor_from_raw(total, q.shift), kNaN});

    bool capped = false;
    for (std::size_t round = 1;; ++round) {
        bool any = false;
        for (std::size_t k = 0; k < ns; ++k) {
            if (frozen[k]) continue;
            if (values[k].size() >= kMaxNodeCount) {
                capped = true;
                frozen[k] = 1;
                continue;
            }
            values[k] = refine_values(q.segments[k], values[k], n, q.shift, f);
            const SegmentSum next = apply_rule(q.segments[k], values[k]);
            change[k] = std::abs(next.value - sums[k].value);
            sums[k] = next;
            any = true;
        }
        if (!any) break;
        const cplx prev = total;
        totals(total, abs_total, nodes);
        const double tol_abs =
            std::max(tol * std::abs(total), 10.0 * std::numeric_limits<double>::epsilon() * abs_total);
        for (std::size_t k = 0; k < ns; ++k) {
            if (!frozen[k] && change[k] <= tol_abs / (2.0 * static_cast<double>(ns))) frozen[k] = 1;
        }
        r.trace.push_back({round, nodes, detail::taylor_from_raw(total, q.shift),
                           std::abs(total - prev) / std::abs(total)});
    }

    r.nodes_used = nodes;
    r.converged = !capped;
    r.log_abs_contour = std::log(abs_total) + q.shift;
    if (!(std::abs(total) > kZeroIntegralRatio * abs_total)) {
        throw Error(ErrorCode::zero_derivative, "derivative numerically zero, kappa unbounded");
    }
    r.log_abs_integral = std::log(std::abs(total)) + q.shift;
    r.log10_kappa = (r.log_abs_contour - r.log_abs_integral) / std::numbers::ln10;
    r.taylor_coeff = detail::taylor_from_raw(total, q.shift);
    r.derivative = detail::times_factorial(r.taylor_coeff, n);
    return r;
}

/// Condition number with the walk's trapezoid weight as numerator.
inline double condition_number(const Walk& w, const DerivativeResult& integral) {
    if (!std::isfinite(integral.log_abs_integral)) {
        throw Error(ErrorCode::zero_derivative, "condition_number: zero denominator");
    }
    return (w.total_log_weight - integral.log_abs_integral) / std::numbers::ln10;
}

/// One point of a fixed-node-count sweep.
struct FixedRuleResult {
    std::size_t node_count = 0;   // per segment
    std::size_t total_nodes = 0;
    ScaledComplex taylor_coeff;
};

/// The whole node-count schedule applied uniformly to every surviving segment.
inline std::vector<FixedRuleResult> integrate_schedule(const Walk& w, int n, const AnalyticFunction& f,
                                                       std::size_t max_nodes = kMaxNodeCount) {
    const QuadratureSetup q = prepare_quadrature(w, n, f);
    std::vector<std::vector<cplx>> values;
    for (const auto& seg : q.segments) values.push_back(segment_values(seg, kFirstNodeCount, n, q.shift, f));
    std::vector<FixedRuleResult> out;
    for (std::size_t N = kFirstNodeCount; N <= max_nodes; N = 2 * N - 1) {
        if (N != kFirstNodeCount) {
            for (std::size_t k = 0; k < q.segments.size(); ++k) {
                values[k] = refine_values(q.segments[k], values[k], n, q.shift, f);
            }
        }
        cplx total{};
        for (std::size_t k = 0; k < q.segments.size(); ++k) total += apply_rule(q.segments[k], values[k]).value;
        out.push_back({N, N * q.segments.size(), detail::taylor_from_raw(total, q.shift)});
    }
    return out;
}

}  // namespace optcontour

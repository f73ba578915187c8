#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "optcontour/expr.hpp"

namespace optcontour {

enum class FeatureKind { point, ray_cut, segment_cut };

/// A region f is not holomorphic on, inflated by exclusion_radius.
///
/// point: {anchor}. ray_cut: anchor + t * direction, t >= 0.
/// segment_cut: anchor + t * direction, 0 <= t <= length.
struct SingularFeature {
    FeatureKind kind = FeatureKind::point;
    cplx anchor{};
    cplx direction{1.0, 0.0};
    double exclusion_radius = 0.0;
    double length = 0.0;

    friend bool operator==(const SingularFeature&, const SingularFeature&) = default;
};

/// Conservative singularity summary of an expression. When detect_by_evaluation
/// is set the features are incomplete and edges must also be probed numerically.
struct SingularStructure {
    std::vector<SingularFeature> features;
    bool detect_by_evaluation = false;
};

namespace detail {

using Poly = std::vector<cplx>;  // coefficients, lowest degree first

inline void trim(Poly& p) {
    while (p.size() > 1 && p.back() == cplx(0.0, 0.0)) p.pop_back();
}

inline std::optional<Poly> as_polynomial(const Node& n, std::size_t max_degree) {
    if (!n.depends_on_z) {
        const cplx c = eval_direct(n, 0.0);
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return std::nullopt;
        return Poly{c};
    }
    auto sub = [&](std::size_t k) { return as_polynomial(*n.args[k], max_degree); };
    switch (n.op) {
        case Op::variable: return Poly{0.0, 1.0};
        case Op::negate: {
            auto p = sub(0);
            if (!p) return std::nullopt;
            for (auto& c : *p) c = -c;
            return p;
        }
        case Op::add:
        case Op::sub: {
            auto a = sub(0);
            auto b = sub(1);
            if (!a || !b) return std::nullopt;
            Poly r(std::max(a->size(), b->size()), 0.0);
            for (std::size_t k = 0; k < a->size(); ++k) r[k] += (*a)[k];
            for (std::size_t k = 0; k < b->size(); ++k) r[k] += n.op == Op::add ? (*b)[k] : -(*b)[k];
            trim(r);
            return r;
        }
        case Op::mul: {
            auto a = sub(0);
            auto b = sub(1);
            if (!a || !b) return std::nullopt;
            if (a->size() + b->size() - 2 > max_degree) return std::nullopt;
            Poly r(a->size() + b->size() - 1, 0.0);
            for (std::size_t i = 0; i < a->size(); ++i) {
                for (std::size_t j = 0; j < b->size(); ++j) r[i + j] += (*a)[i] * (*b)[j];
            }
            trim(r);
            return r;
        }
        case Op::div: {
            if (n.args[1]->depends_on_z) return std::nullopt;
            auto a = sub(0);
            const cplx c = eval_direct(*n.args[1], 0.0);
            if (!a || c == cplx(0.0, 0.0)) return std::nullopt;
            for (auto& v : *a) v /= c;
            return a;
        }
        case Op::pow: {
            if (!n.integer_exponent || *n.integer_exponent < 0) return std::nullopt;
            const long k = *n.integer_exponent;
            auto a = sub(0);
            if (!a) return std::nullopt;
            if ((a->size() - 1) * static_cast<std::size_t>(k) > max_degree) return std::nullopt;
            Poly r{1.0};
            for (long e = 0; e < k; ++e) {
                Poly t(r.size() + a->size() - 1, 0.0);
                for (std::size_t i = 0; i < r.size(); ++i) {
                    for (std::size_t j = 0; j < a->size(); ++j) t[i + j] += r[i] * (*a)[j];
                }
                r = std::move(t);
            }
            trim(r);
            return r;
        }
        default: return std::nullopt;
    }
}

// Roots of a polynomial of degree <= 2; nullopt for the zero polynomial.
inline std::optional<std::vector<cplx>> poly_roots(const Poly& p) {
    if (p.size() == 1) {
        if (p[0] == cplx(0.0, 0.0)) return std::nullopt;
        return std::vector<cplx>{};
    }
    if (p.size() == 2) return std::vector<cplx>{-p[0] / p[1]};
    const cplx a = p[2], b = p[1], c = p[0];
    const cplx disc = std::sqrt(b * b - 4.0 * a * c);
    // Stable pairing: q = -(b + sign * disc) / 2 avoids cancellation.
    const cplx q = (std::real(std::conj(b) * disc) >= 0.0) ? -0.5 * (b + disc) : -0.5 * (b - disc);
    if (q == cplx(0.0, 0.0)) return std::vector<cplx>{0.0, 0.0};
    return std::vector<cplx>{q / a, c / q};
}

inline void add_feature(SingularStructure& s, const SingularFeature& f) {
    if (std::find(s.features.begin(), s.features.end(), f) == s.features.end()) s.features.push_back(f);
}

inline void merge(SingularStructure& into, const SingularStructure& from) {
    for (const auto& f : from.features) add_feature(into, f);
    into.detect_by_evaluation = into.detect_by_evaluation || from.detect_by_evaluation;
}

// Cut where the node takes values in (-inf, 0], for an affine node.
inline void add_negative_axis_cut(SingularStructure& s, const Node& base) {
    if (!base.depends_on_z) return;
    const auto p = as_polynomial(base, 1);
    if (!p || p->size() != 2) {
        s.detect_by_evaluation = true;
        return;
    }
    const cplx alpha = (*p)[0], beta = (*p)[1];
    const cplx dir = -1.0 / beta;
    add_feature(s, {FeatureKind::ray_cut, -alpha / beta, dir / std::abs(dir), 0.0, 0.0});
}

// Zeros of a node as a finite point list, or nullopt when they cannot be enumerated.
inline std::optional<std::vector<cplx>> zeros_of(const Node& n) {
    if (!n.depends_on_z) {
        const cplx c = eval_direct(n, 0.0);
        if (c == cplx(0.0, 0.0)) return std::nullopt;
        return std::vector<cplx>{};
    }
    if (auto p = as_polynomial(n, 2)) return poly_roots(*p);
    auto join = [](std::optional<std::vector<cplx>> a,
                   const std::optional<std::vector<cplx>>& b) -> std::optional<std::vector<cplx>> {
        if (!a || !b) return std::nullopt;
        a->insert(a->end(), b->begin(), b->end());
        return a;
    };
    switch (n.op) {
        case Op::negate: return zeros_of(*n.args[0]);
        case Op::mul: return join(zeros_of(*n.args[0]), zeros_of(*n.args[1]));
        case Op::div: return zeros_of(*n.args[0]);
        case Op::pow: {
            if (n.args[1]->depends_on_z) return std::nullopt;
            const cplx p = eval_direct(*n.args[1], 0.0);
            if (p.real() > 0.0) return zeros_of(*n.args[0]);
            return std::vector<cplx>{};
        }
        case Op::call:
            switch (n.fn) {
                case Builtin::exp:
                case Builtin::gamma: return std::vector<cplx>{};
                case Builtin::sqrt: return zeros_of(*n.args[0]);
                case Builtin::log: {
                    auto p = as_polynomial(*n.args[0], 2);
                    if (!p) return std::nullopt;
                    (*p)[0] -= 1.0;
                    trim(*p);
                    return poly_roots(*p);
                }
                default: return std::nullopt;
            }
        default: return std::nullopt;
    }
}

inline void add_zero_points(SingularStructure& s, const Node& n) {
    const auto zs = zeros_of(n);
    if (!zs) {
        s.detect_by_evaluation = true;
        return;
    }
    for (const cplx& z : *zs) add_feature(s, {FeatureKind::point, z, {1.0, 0.0}, 0.0, 0.0});
}

inline SingularStructure structure_of(const Node& n) {
    SingularStructure s;
    if (!n.depends_on_z) return s;
    switch (n.op) {
        case Op::literal:
        case Op::variable: return s;
        case Op::negate: return structure_of(*n.args[0]);
        case Op::add:
        case Op::sub:
        case Op::mul:
            merge(s, structure_of(*n.args[0]));
            merge(s, structure_of(*n.args[1]));
            return s;
        case Op::div: {
            merge(s, structure_of(*n.args[0]));
            const Node& den = *n.args[1];
            if (den.op == Op::call && den.fn == Builtin::gamma) {
                // The poles of Gamma are zeros of the quotient and Gamma has no zeros.
                merge(s, structure_of(*den.args[0]));
                return s;
            }
            merge(s, structure_of(den));
            add_zero_points(s, den);
            return s;
        }
        case Op::pow: {
            const Node& base = *n.args[0];
            merge(s, structure_of(base));
            merge(s, structure_of(*n.args[1]));
            if (n.integer_exponent) {
                if (*n.integer_exponent < 0) add_zero_points(s, base);
            } else {
                add_negative_axis_cut(s, base);
            }
            return s;
        }
        case Op::call: {
            const Node& arg = *n.args[0];
            merge(s, structure_of(arg));
            switch (n.fn) {
                case Builtin::log:
                case Builtin::sqrt: add_negative_axis_cut(s, arg); break;
                case Builtin::gamma: s.detect_by_evaluation = true; break;
                default: break;
            }
            return s;
        }
    }
    return s;
}

}  // namespace detail

/// Singular features derived from the tree: branch cuts of non-integer powers,
/// log and sqrt of affine arguments, and zeros of low-degree polynomial
/// denominators. Anything unrecognised sets detect_by_evaluation.
inline SingularStructure singular_structure(const Expression& e) { return detail::structure_of(e.root()); }

/// A function known through log f(z) plus its singularity metadata.
///
/// Evaluation is pure and reentrant.
class AnalyticFunction {
public:
    using LogEvaluator = std::function<LogValue(cplx)>;
    using DirectEvaluator = std::function<cplx(cplx)>;

    AnalyticFunction(LogEvaluator eval, SingularStructure structure, std::string label,
                     DirectEvaluator direct = {})
        : eval_(std::move(eval)),
          direct_(std::move(direct)),
          structure_(std::move(structure)),
          label_(std::move(label)) {}

    static AnalyticFunction from_expression(const Expression& e) {
        auto root = e.root_ptr();
        return AnalyticFunction(
            [root](cplx z) {
                const detail::Dual d = detail::eval_dual(*root, z);
                return d.invalid() ? LogValue::invalid() : d.lg;
            },
            singular_structure(e), e.unparse(), [root](cplx z) { return optcontour::eval_direct(*root, z); });
    }

    static AnalyticFunction parse(std::string_view text) {
        auto f = from_expression(optcontour::parse(text));
        f.label_ = std::string(text);
        return f;
    }

    LogValue eval_log(cplx z) const { return eval_(z); }

    /// Straight hardware evaluation, if available; may overflow where eval_log does not.
    std::optional<cplx> eval_direct(cplx z) const {
        if (!direct_) return std::nullopt;
        return direct_(z);
    }

    const std::vector<SingularFeature>& singularities() const { return structure_.features; }
    const SingularStructure& structure() const { return structure_; }
    bool detect_by_evaluation() const { return structure_.detect_by_evaluation; }
    bool has_declared_singularities() const {
        return !structure_.features.empty() || structure_.detect_by_evaluation;
    }
    const std::string& label() const { return label_; }

    /// g(z) = f(z0 + z), with every feature translated by -z0.
    AnalyticFunction shifted(cplx z0) const {
        if (z0 == cplx(0.0, 0.0)) return *this;
        SingularStructure s = structure_;
        for (auto& f : s.features) f.anchor -= z0;
        auto inner = eval_;
        DirectEvaluator direct;
        if (direct_) {
            direct = [d = direct_, z0](cplx z) { return d(z0 + z); };
        }
        return AnalyticFunction([inner, z0](cplx z) { return inner(z0 + z); }, std::move(s),
                                label_ + " at z0=(" + detail::format_double(z0.real()) + "," +
                                    detail::format_double(z0.imag()) + ")",
                                std::move(direct));
    }

private:
    LogEvaluator eval_;
    DirectEvaluator direct_;
    SingularStructure structure_;
    std::string label_;
};

inline LogValue eval_log(const AnalyticFunction& f, cplx z) { return f.eval_log(z); }

inline AnalyticFunction shift(const AnalyticFunction& f, cplx z0) { return f.shifted(z0); }

}  // namespace optcontour

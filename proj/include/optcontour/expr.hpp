#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "optcontour/error.hpp"
#include "optcontour/log_value.hpp"
#include "optcontour/special.hpp"

namespace optcontour {

enum class Op { literal, variable, negate, add, sub, mul, div, pow, call };

enum class Builtin { exp, log, sqrt, sin, cos, gamma, rgamma, besselj0 };

struct BuiltinInfo {
    std::string_view name;
    Builtin id;
    int arity;
};

inline constexpr std::array<BuiltinInfo, 8> kBuiltins = {{
    {"exp", Builtin::exp, 1},
    {"log", Builtin::log, 1},
    {"sqrt", Builtin::sqrt, 1},
    {"sin", Builtin::sin, 1},
    {"cos", Builtin::cos, 1},
    {"gamma", Builtin::gamma, 1},
    {"rgamma", Builtin::rgamma, 1},
    {"besselj0", Builtin::besselj0, 1},
}};

inline const BuiltinInfo* find_builtin(std::string_view name) {
    for (const auto& b : kBuiltins) {
        if (b.name == name) return &b;
    }
    return nullptr;
}

struct Node;
using NodePtr = std::shared_ptr<const Node>;

/// Immutable expression tree node. Subtrees are shared, never mutated.
struct Node {
    Op op = Op::literal;
    cplx value{};                  // literal
    Builtin fn = Builtin::exp;     // call
    std::vector<NodePtr> args;
    bool depends_on_z = false;
    std::optional<long> integer_exponent;  // pow whose exponent is a z-free integer

    std::string_view function_name() const {
        for (const auto& b : kBuiltins) {
            if (b.id == fn) return b.name;
        }
        return "?";
    }
};

cplx eval_direct(const Node& node, cplx z);

inline NodePtr make_literal(cplx v) {
    auto n = std::make_shared<Node>();
    n->op = Op::literal;
    n->value = v;
    return n;
}

inline NodePtr make_variable() {
    auto n = std::make_shared<Node>();
    n->op = Op::variable;
    n->depends_on_z = true;
    return n;
}

inline NodePtr make_node(Op op, std::vector<NodePtr> args) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->args = std::move(args);
    n->depends_on_z = std::any_of(n->args.begin(), n->args.end(),
                                  [](const NodePtr& a) { return a->depends_on_z; });
    if (op == Op::pow && !n->args[1]->depends_on_z) {
        const cplx p = eval_direct(*n->args[1], 0.0);
        if (p.imag() == 0.0 && std::isfinite(p.real()) && p.real() == std::round(p.real()) &&
            std::abs(p.real()) < 1e9) {
            n->integer_exponent = static_cast<long>(p.real());
        }
    }
    return n;
}

inline NodePtr make_call(Builtin fn, std::vector<NodePtr> args) {
    auto n = std::make_shared<Node>();
    n->op = Op::call;
    n->fn = fn;
    n->args = std::move(args);
    n->depends_on_z = std::any_of(n->args.begin(), n->args.end(),
                                  [](const NodePtr& a) { return a->depends_on_z; });
    return n;
}

/// Plain hardware complex evaluation, principal branches throughout.
inline cplx eval_direct(const Node& node, cplx z) {
    switch (node.op) {
        case Op::literal: return node.value;
        case Op::variable: return z;
        case Op::negate: return -eval_direct(*node.args[0], z);
        case Op::add: return eval_direct(*node.args[0], z) + eval_direct(*node.args[1], z);
        case Op::sub: return eval_direct(*node.args[0], z) - eval_direct(*node.args[1], z);
        case Op::mul: return eval_direct(*node.args[0], z) * eval_direct(*node.args[1], z);
        case Op::div: return eval_direct(*node.args[0], z) / eval_direct(*node.args[1], z);
        case Op::pow: {
            const cplx a = eval_direct(*node.args[0], z);
            if (node.integer_exponent) {
                return std::pow(a, static_cast<double>(*node.integer_exponent));
            }
            return std::pow(a, eval_direct(*node.args[1], z));
        }
        case Op::call: {
            const cplx x = eval_direct(*node.args[0], z);
            switch (node.fn) {
                case Builtin::exp: return std::exp(x);
                case Builtin::log: return std::log(x);
                case Builtin::sqrt: return std::sqrt(x);
                case Builtin::sin: return std::sin(x);
                case Builtin::cos: return std::cos(x);
                case Builtin::gamma: return std::exp(special::log_gamma(x));
                case Builtin::rgamma: return std::exp(-special::log_gamma(x));
                case Builtin::besselj0: return special::bessel_j0(x);
            }
        }
    }
    return {kNaN, kNaN};
}

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    NodePtr parse() {
        skip_ws();
        if (pos_ >= text_.size()) throw ParseError(ErrorCode::syntax, pos_, "empty input");
        NodePtr root = parse_sum();
        skip_ws();
        if (pos_ < text_.size()) {
            if (text_[pos_] == ')') throw ParseError(ErrorCode::syntax, pos_, "unbalanced ')'");
            throw ParseError(ErrorCode::syntax, pos_, std::string("unexpected '") + text_[pos_] + "'");
        }
        return root;
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    bool peek(char c) {
        skip_ws();
        return pos_ < text_.size() && text_[pos_] == c;
    }
    bool accept(char c) {
        if (peek(c)) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr parse_sum() {
        NodePtr lhs = parse_product();
        for (;;) {
            if (accept('+')) {
                lhs = make_node(Op::add, {lhs, parse_product()});
            } else if (accept('-')) {
                lhs = make_node(Op::sub, {lhs, parse_product()});
            } else {
                return lhs;
            }
        }
    }

    NodePtr parse_product() {
        NodePtr lhs = parse_unary();
        for (;;) {
            if (accept('*')) {
                lhs = make_node(Op::mul, {lhs, parse_unary()});
            } else if (accept('/')) {
                lhs = make_node(Op::div, {lhs, parse_unary()});
            } else {
                return lhs;
            }
        }
    }

    // '^' binds tighter than unary minus: -z^2 == -(z^2).
    NodePtr parse_unary() {
        if (accept('-')) return make_node(Op::negate, {parse_unary()});
        if (accept('+')) return parse_unary();
        return parse_power();
    }

    NodePtr parse_power() {
        NodePtr base = parse_primary();
        if (accept('^')) return make_node(Op::pow, {base, parse_unary()});
        return base;
    }

    NodePtr parse_primary() {
        skip_ws();
        if (pos_ >= text_.size()) throw ParseError(ErrorCode::syntax, pos_, "unexpected end of input");
        const char c = text_[pos_];
        if (c == '(') {
            const std::size_t open = pos_;
            ++pos_;
            NodePtr inner = parse_sum();
            if (!accept(')')) throw ParseError(ErrorCode::syntax, open, "unbalanced '('");
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            NodePtr num = parse_number();
            // "8z", "2(…)", "3exp(z)": implicit product after a numeric literal.
            if (pos_ < text_.size() &&
                (text_[pos_] == '(' || std::isalpha(static_cast<unsigned char>(text_[pos_])))) {
                return make_node(Op::mul, {num, parse_power()});
            }
            return num;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            const std::size_t start = pos_;
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
                ++pos_;
            }
            const std::string_view name = text_.substr(start, pos_ - start);
            if (name == "z") return make_variable();
            const BuiltinInfo* info = find_builtin(name);
            if (!info) {
                throw ParseError(ErrorCode::unknown_function, start,
                                 "unknown function '" + std::string(name) + "'");
            }
            const std::size_t open = pos_;
            if (!accept('(')) throw ParseError(ErrorCode::syntax, pos_, "expected '(' after function name");
            std::vector<NodePtr> args;
            if (!peek(')')) {
                args.push_back(parse_sum());
                while (accept(',')) args.push_back(parse_sum());
            }
            if (!accept(')')) throw ParseError(ErrorCode::syntax, open, "unbalanced '('");
            if (static_cast<int>(args.size()) != info->arity) {
                throw ParseError(ErrorCode::syntax, start,
                                 "function '" + std::string(name) + "' expects " +
                                     std::to_string(info->arity) + " argument(s)");
            }
            return make_call(info->id, std::move(args));
        }
        if (c == ')') throw ParseError(ErrorCode::syntax, pos_, "unbalanced ')'");
        throw ParseError(ErrorCode::syntax, pos_, std::string("unexpected '") + c + "'");
    }

    NodePtr parse_number() {
        const std::size_t start = pos_;
        auto digits = [&] {
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        };
        digits();
        if (pos_ < text_.size() && text_[pos_] == '.') {
            ++pos_;
            digits();
        }
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t save = pos_;
            ++pos_;
            if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
            if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                digits();
            } else {
                pos_ = save;
            }
        }
        double v = 0.0;
        const auto res = std::from_chars(text_.data() + start, text_.data() + pos_, v);
        if (res.ec != std::errc() || res.ptr != text_.data() + pos_) {
            throw ParseError(ErrorCode::syntax, start, "malformed number");
        }
        // An 'i' suffix makes the literal imaginary, unless it starts an identifier.
        if (pos_ < text_.size() && text_[pos_] == 'i' &&
            (pos_ + 1 >= text_.size() || !std::isalnum(static_cast<unsigned char>(text_[pos_ + 1])))) {
            ++pos_;
            return make_literal({0.0, v});
        }
        return make_literal({v, 0.0});
    }
};

inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline void unparse_into(const Node& n, std::string& out) {
    auto binary = [&](char op) {
        out += '(';
        unparse_into(*n.args[0], out);
        out += op;
        unparse_into(*n.args[1], out);
        out += ')';
    };
    switch (n.op) {
        case Op::literal:
            if (n.value.imag() != 0.0 && n.value.real() == 0.0) {
                out += format_double(n.value.imag());
                out += 'i';
            } else if (n.value.imag() == 0.0) {
                out += format_double(n.value.real());
            } else {
                out += '(' + format_double(n.value.real()) + '+' + format_double(n.value.imag()) + "i)";
            }
            return;
        case Op::variable: out += 'z'; return;
        case Op::negate:
            out += "(-";
            unparse_into(*n.args[0], out);
            out += ')';
            return;
        case Op::add: binary('+'); return;
        case Op::sub: binary('-'); return;
        case Op::mul: binary('*'); return;
        case Op::div: binary('/'); return;
        case Op::pow: binary('^'); return;
        case Op::call:
            out += n.function_name();
            out += '(';
            for (std::size_t k = 0; k < n.args.size(); ++k) {
                if (k) out += ',';
                unparse_into(*n.args[k], out);
            }
            out += ')';
            return;
    }
}

}  // namespace detail

/// A parsed function of the single variable z.
class Expression {
public:
    explicit Expression(NodePtr root) : root_(std::move(root)) {}

    const Node& root() const { return *root_; }
    const NodePtr& root_ptr() const { return root_; }

    /// Fully parenthesised text that parses back to the same tree.
    std::string unparse() const {
        std::string out;
        detail::unparse_into(*root_, out);
        return out;
    }

    cplx eval_direct(cplx z) const { return optcontour::eval_direct(*root_, z); }

private:
    NodePtr root_;
};

inline Expression parse(std::string_view text) { return Expression(detail::Parser(text).parse()); }

inline bool structurally_equal(const Node& a, const Node& b) {
    if (a.op != b.op || a.args.size() != b.args.size()) return false;
    if (a.op == Op::literal && a.value != b.value) return false;
    if (a.op == Op::call && a.fn != b.fn) return false;
    for (std::size_t k = 0; k < a.args.size(); ++k) {
        if (!structurally_equal(*a.args[k], *b.args[k])) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Log-space evaluation

namespace detail {

// A node's value carried both ways: exactly as a hardware number while it is
// representable, and always as a logarithm. Branch tests use the exact value.
struct Dual {
    LogValue lg;
    cplx val;
    bool has_val = false;

    bool invalid() const { return std::isnan(lg.re) || lg.re == kInf; }
    bool zero() const { return lg.re == -kInf; }
};

inline bool in_safe_range(cplx v) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    if (v == cplx(0.0, 0.0)) return true;
    const double a = std::abs(v);
    return a > 1e-290 && a < 1e290;
}

inline Dual invalid_dual() { return {LogValue::invalid(), {kNaN, kNaN}, false}; }

inline Dual from_value(cplx v) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return invalid_dual();
    return {LogValue::of(v), v, in_safe_range(v)};
}

inline Dual from_log(LogValue lg) {
    if (std::isnan(lg.re) || std::isnan(lg.im) || lg.re == kInf) return invalid_dual();
    if (lg.re == -kInf) return {LogValue::zero(), 0.0, true};
    if (!std::isfinite(lg.im)) return invalid_dual();
    Dual d{lg, {}, false};
    if (std::abs(lg.re) < 650.0) {
        d.val = lg.exp();
        d.has_val = true;
    }
    return d;
}

inline std::optional<cplx> value_of(const Dual& d) {
    if (d.invalid()) return std::nullopt;
    if (d.has_val) return d.val;
    if (d.zero()) return cplx(0.0, 0.0);
    return std::nullopt;
}

inline bool on_negative_axis(cplx v) { return v.imag() == 0.0 && v.real() < 0.0; }

// Principal Log of a nonzero dual.
inline LogValue principal_log(const Dual& d) {
    if (d.has_val) return LogValue(std::log(d.val));
    return {d.lg.re, wrap_phase(d.lg.im)};
}

inline Dual pow_dual(const Dual& a, const Dual& p, const std::optional<long>& integer_exponent) {
    if (a.invalid() || p.invalid()) return invalid_dual();
    if (integer_exponent) {
        const long k = *integer_exponent;
        if (k == 0) return from_value(1.0);
        if (a.zero()) return k > 0 ? from_value(0.0) : invalid_dual();
        const LogValue lg{static_cast<double>(k) * a.lg.re, static_cast<double>(k) * a.lg.im};
        if (a.has_val && std::abs(k) <= 64) {
            cplx base = k > 0 ? a.val : 1.0 / a.val;
            unsigned long e = static_cast<unsigned long>(std::abs(k));
            cplx acc = 1.0;
            while (e) {
                if (e & 1UL) acc *= base;
                e >>= 1;
                if (e) base *= base;
            }
            if (in_safe_range(acc)) return from_value(acc);
        }
        return from_log(lg);
    }
    const auto pv = value_of(p);
    if (!pv) return invalid_dual();
    if (a.zero()) return pv->real() > 0.0 ? from_value(0.0) : invalid_dual();
    if (a.has_val && on_negative_axis(a.val)) return invalid_dual();
    const LogValue la = principal_log(a);
    return from_log(LogValue(*pv * la.as_complex()));
}

inline Dual eval_dual(const Node& n, cplx z) {
    switch (n.op) {
        case Op::literal: return from_value(n.value);
        case Op::variable: return from_value(z);
        case Op::negate: {
            const Dual a = eval_dual(*n.args[0], z);
            if (a.invalid()) return a;
            if (a.has_val) return from_value(-a.val);
            return from_log({a.lg.re, a.lg.im + std::numbers::pi});
        }
        case Op::add:
        case Op::sub: {
            const Dual a = eval_dual(*n.args[0], z);
            const Dual b = eval_dual(*n.args[1], z);
            if (a.invalid() || b.invalid()) return invalid_dual();
            if (a.has_val && b.has_val) {
                const cplx v = n.op == Op::add ? a.val + b.val : a.val - b.val;
                if (std::isfinite(v.real()) && std::isfinite(v.imag())) return from_value(v);
            }
            LogValue lb = b.lg;
            if (n.op == Op::sub) lb.im += std::numbers::pi;
            return from_log(log_add(a.lg, lb));
        }
        case Op::mul:
        case Op::div: {
            const Dual a = eval_dual(*n.args[0], z);
            const Dual b = eval_dual(*n.args[1], z);
            if (a.invalid() || b.invalid()) return invalid_dual();
            if (n.op == Op::div && b.zero()) return invalid_dual();
            if (a.zero() || b.zero()) return from_value(0.0);
            if (a.has_val && b.has_val) {
                const cplx v = n.op == Op::mul ? a.val * b.val : a.val / b.val;
                if (in_safe_range(v)) return from_value(v);
            }
            return from_log(n.op == Op::mul ? a.lg + b.lg : a.lg - b.lg);
        }
        case Op::pow:
            return pow_dual(eval_dual(*n.args[0], z), eval_dual(*n.args[1], z), n.integer_exponent);
        case Op::call: {
            const Dual a = eval_dual(*n.args[0], z);
            if (a.invalid()) return a;
            switch (n.fn) {
                case Builtin::exp: {
                    const auto x = value_of(a);
                    if (!x) return invalid_dual();
                    return from_log(LogValue(*x));
                }
                case Builtin::log: {
                    if (a.zero()) return invalid_dual();
                    if (a.has_val && on_negative_axis(a.val)) return invalid_dual();
                    return from_value(principal_log(a).as_complex());
                }
                case Builtin::sqrt: {
                    static const std::optional<long> none;
                    return pow_dual(a, from_value(0.5), none);
                }
                case Builtin::sin:
                case Builtin::cos: {
                    const auto x = value_of(a);
                    if (!x) return invalid_dual();
                    return from_value(n.fn == Builtin::sin ? std::sin(*x) : std::cos(*x));
                }
                case Builtin::gamma:
                case Builtin::rgamma: {
                    const auto x = value_of(a);
                    if (!x) return invalid_dual();
                    const cplx lg = special::log_gamma(*x);
                    if (lg.real() == kInf) {
                        return n.fn == Builtin::gamma ? invalid_dual() : from_value(0.0);
                    }
                    return from_log(LogValue(n.fn == Builtin::gamma ? lg : -lg));
                }
                case Builtin::besselj0: {
                    const auto x = value_of(a);
                    if (!x || std::abs(*x) > special::kBesselValidRadius) return invalid_dual();
                    return from_value(special::bessel_j0(*x));
                }
            }
        }
    }
    return invalid_dual();
}

}  // namespace detail

/// log f(z) for an expression; non-finite at poles, on branch cuts and outside validated ranges.
inline LogValue eval_log(const Expression& e, cplx z) {
    const detail::Dual d = detail::eval_dual(e.root(), z);
    if (d.invalid()) return LogValue::invalid();
    return d.lg;
}

}  // namespace optcontour

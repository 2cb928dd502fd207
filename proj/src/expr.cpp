#include "wgeom/expr.hpp"

#include "wgeom/errors.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <optional>

namespace wgeom {

std::string format_point(const std::vector<double>& x) {
    std::string out = "(";
    char buf[32];
    for (std::size_t i = 0; i < x.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", x[i]);
        out += (i ? ", " : "");
        out += buf;
    }
    return out + ")";
}

} // namespace wgeom

namespace wgeom::expr {

namespace {

constexpr std::array<std::pair<const char*, Fn>, 10> kFunctions{{
    {"sin", Fn::sin},
    {"cos", Fn::cos},
    {"tan", Fn::tan},
    {"exp", Fn::exp},
    {"log", Fn::log},
    {"sinh", Fn::sinh},
    {"cosh", Fn::cosh},
    {"tanh", Fn::tanh},
    {"sqrt", Fn::sqrt},
    {"abs", Fn::abs},
}};

NodePtr make(Op op, NodePtr a = nullptr, NodePtr b = nullptr) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

NodePtr make_const(double v) {
    auto n = std::make_shared<Node>();
    n->op = Op::constant;
    n->value = v;
    return n;
}

bool is_value(const NodePtr& n, double v) { return n->op == Op::constant && n->value == v; }

double apply(Fn fn, double u, const double* x, std::size_t n) {
    auto fail = [&](const char* what) -> double {
        throw EvalDomainError(what, std::vector<double>(x, x + n));
    };
    switch (fn) {
    case Fn::sin: return std::sin(u);
    case Fn::cos: return std::cos(u);
    case Fn::tan: return std::tan(u);
    case Fn::exp: return std::exp(u);
    case Fn::log: return u > 0 ? std::log(u) : fail("log of non-positive value");
    case Fn::sinh: return std::sinh(u);
    case Fn::cosh: return std::cosh(u);
    case Fn::tanh: return std::tanh(u);
    case Fn::sqrt: return u >= 0 ? std::sqrt(u) : fail("sqrt of negative value");
    case Fn::abs: return std::abs(u);
    }
    return 0.0;
}

double eval_node(const Node& nd, const double* x, std::size_t n) {
    auto fail = [&](const char* what) -> double {
        throw EvalDomainError(what, std::vector<double>(x, x + n));
    };
    double r = 0.0;
    switch (nd.op) {
    case Op::constant: return nd.value;
    case Op::variable:
        if (static_cast<std::size_t>(nd.var) >= n) fail("variable index outside point");
        return x[nd.var];
    case Op::neg: return -eval_node(*nd.a, x, n);
    case Op::add: r = eval_node(*nd.a, x, n) + eval_node(*nd.b, x, n); break;
    case Op::sub: r = eval_node(*nd.a, x, n) - eval_node(*nd.b, x, n); break;
    case Op::mul: r = eval_node(*nd.a, x, n) * eval_node(*nd.b, x, n); break;
    case Op::div: {
        const double den = eval_node(*nd.b, x, n);
        if (den == 0.0) fail("division by zero");
        r = eval_node(*nd.a, x, n) / den;
        break;
    }
    case Op::pow: {
        const double base = eval_node(*nd.a, x, n);
        const double ex = eval_node(*nd.b, x, n);
        if (base < 0.0 && ex != std::floor(ex)) fail("negative base with non-integer exponent");
        if (base == 0.0 && ex < 0.0) fail("zero base with negative exponent");
        r = std::pow(base, ex);
        break;
    }
    case Op::call: r = apply(nd.fn, eval_node(*nd.a, x, n), x, n); break;
    }
    if (!std::isfinite(r)) fail("non-finite value");
    return r;
}

bool closed(const Node& nd) {
    if (nd.op == Op::variable) return false;
    if (nd.a && !closed(*nd.a)) return false;
    if (nd.b && !closed(*nd.b)) return false;
    return true;
}

int max_var(const Node& nd) {
    int m = nd.op == Op::variable ? nd.var : -1;
    if (nd.a) m = std::max(m, max_var(*nd.a));
    if (nd.b) m = std::max(m, max_var(*nd.b));
    return m;
}

// Binding strength for printing: higher binds tighter.
int precedence(const Node& nd) {
    switch (nd.op) {
    case Op::add:
    case Op::sub: return 1;
    case Op::mul:
    case Op::div: return 2;
    case Op::neg: return 3;
    case Op::pow: return 4;
    case Op::constant: return nd.value < 0 ? 3 : 5;
    default: return 5;
    }
}

std::string print(const Node& nd, const std::vector<std::string>& names) {
    auto wrap = [&](const Node& child, int need) {
        std::string s = print(child, names);
        return precedence(child) < need ? "(" + s + ")" : s;
    };
    switch (nd.op) {
    case Op::constant: {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", nd.value);
        return buf;
    }
    case Op::variable:
        return static_cast<std::size_t>(nd.var) < names.size() ? names[nd.var]
                                                              : "x" + std::to_string(nd.var);
    case Op::neg: return "-" + wrap(*nd.a, 4);
    case Op::add: return wrap(*nd.a, 1) + " + " + wrap(*nd.b, 2);
    case Op::sub: return wrap(*nd.a, 1) + " - " + wrap(*nd.b, 2);
    case Op::mul: return wrap(*nd.a, 2) + "*" + wrap(*nd.b, 3);
    case Op::div: return wrap(*nd.a, 2) + "/" + wrap(*nd.b, 3);
    case Op::pow: return wrap(*nd.a, 5) + "^" + wrap(*nd.b, 4);
    case Op::call: return std::string(fn_name(nd.fn)) + "(" + print(*nd.a, names) + ")";
    }
    return {};
}

class Parser {
public:
    Parser(std::string_view src, const std::vector<std::string>& vars) : src_(src), vars_(vars) {}

    Expr run() {
        Expr e = expression();
        skip_ws();
        if (pos_ < src_.size()) throw ParseError("unexpected character '" + std::string(1, src_[pos_]) + "'", pos_);
        return e;
    }

private:
    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    Expr expression() {
        Expr lhs = term();
        for (;;) {
            if (accept('+')) lhs = Expr(make(Op::add, lhs.root(), term().root()));
            else if (accept('-')) lhs = Expr(make(Op::sub, lhs.root(), term().root()));
            else return lhs;
        }
    }

    Expr term() {
        Expr lhs = unary();
        for (;;) {
            if (accept('*')) lhs = Expr(make(Op::mul, lhs.root(), unary().root()));
            else if (accept('/')) lhs = Expr(make(Op::div, lhs.root(), unary().root()));
            else return lhs;
        }
    }

    Expr unary() {
        if (accept('-')) return Expr(make(Op::neg, unary().root()));
        if (accept('+')) return unary();
        return power();
    }

    Expr power() {
        Expr base = primary();
        if (accept('^')) return Expr(make(Op::pow, base.root(), unary().root()));
        return base;
    }

    Expr primary() {
        skip_ws();
        if (pos_ >= src_.size()) throw ParseError("unexpected end of input", pos_);
        const char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            Expr e = expression();
            if (!accept(')')) throw ParseError("expected ')'", pos_);
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
        throw ParseError("unexpected character '" + std::string(1, c) + "'", pos_);
    }

    Expr number() {
        const std::size_t start = pos_;
        auto digits = [&] {
            std::size_t k = 0;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_, ++k;
            return k;
        };
        std::size_t nd = digits();
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            nd += digits();
        }
        if (nd == 0) throw ParseError("malformed number", start);
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t save = pos_++;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
            if (digits() == 0) pos_ = save;  // the 'e' starts an identifier instead
        }
        const std::string text(src_.substr(start, pos_ - start));
        return Expr::constant(std::stod(text));
    }

    Expr identifier() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            ++pos_;
        const std::string name(src_.substr(start, pos_ - start));
        for (const auto& [fname, fn] : kFunctions) {
            if (name == fname) {
                if (!accept('(')) throw ParseError("expected '(' after function " + name, pos_);
                Expr arg = expression();
                if (!accept(')')) throw ParseError("expected ')'", pos_);
                return Expr(call(fn, arg).root());
            }
        }
        for (std::size_t i = 0; i < vars_.size(); ++i)
            if (vars_[i] == name) return Expr::variable(static_cast<int>(i));
        if (name == "pi") return Expr::constant(std::numbers::pi);
        if (name == "e") return Expr::constant(std::numbers::e);
        throw ParseError("unknown identifier '" + name + "'", start);
    }

    std::string_view src_;
    const std::vector<std::string>& vars_;
    std::size_t pos_ = 0;
};

} // namespace

const char* fn_name(Fn fn) {
    for (const auto& [name, f] : kFunctions)
        if (f == fn) return name;
    return "?";
}

Expr::Expr() : root_(make_const(0.0)) {}

Expr Expr::constant(double v) { return Expr(make_const(v)); }

Expr Expr::variable(int index) {
    auto n = std::make_shared<Node>();
    n->op = Op::variable;
    n->var = index;
    return Expr(std::move(n));
}

double Expr::eval(const double* x, std::size_t n) const { return eval_node(*root_, x, n); }

bool Expr::is_closed() const { return closed(*root_); }

int Expr::max_variable() const { return max_var(*root_); }

std::string Expr::str(const std::vector<std::string>& names) const { return print(*root_, names); }

Expr operator+(const Expr& a, const Expr& b) {
    if (is_value(a.root(), 0.0)) return b;
    if (is_value(b.root(), 0.0)) return a;
    if (a.is_constant() && b.is_constant()) return Expr::constant(a.constant_value() + b.constant_value());
    return Expr(make(Op::add, a.root(), b.root()));
}

Expr operator-(const Expr& a, const Expr& b) {
    if (is_value(b.root(), 0.0)) return a;
    if (is_value(a.root(), 0.0)) return -b;
    if (a.is_constant() && b.is_constant()) return Expr::constant(a.constant_value() - b.constant_value());
    return Expr(make(Op::sub, a.root(), b.root()));
}

Expr operator*(const Expr& a, const Expr& b) {
    if (is_value(a.root(), 0.0) || is_value(b.root(), 0.0)) return Expr::constant(0.0);
    if (is_value(a.root(), 1.0)) return b;
    if (is_value(b.root(), 1.0)) return a;
    if (a.is_constant() && b.is_constant()) return Expr::constant(a.constant_value() * b.constant_value());
    return Expr(make(Op::mul, a.root(), b.root()));
}

Expr operator/(const Expr& a, const Expr& b) {
    if (is_value(a.root(), 0.0)) return Expr::constant(0.0);
    if (is_value(b.root(), 1.0)) return a;
    return Expr(make(Op::div, a.root(), b.root()));
}

Expr operator-(const Expr& a) {
    if (a.is_constant()) return Expr::constant(-a.constant_value());
    if (a.root()->op == Op::neg) return Expr(a.root()->a);
    return Expr(make(Op::neg, a.root()));
}

Expr pow(const Expr& a, const Expr& b) {
    if (is_value(b.root(), 1.0)) return a;
    if (is_value(b.root(), 0.0)) return Expr::constant(1.0);
    return Expr(make(Op::pow, a.root(), b.root()));
}

Expr call(Fn fn, const Expr& a) {
    auto n = std::make_shared<Node>();
    n->op = Op::call;
    n->fn = fn;
    n->a = a.root();
    return Expr(std::move(n));
}

Expr Expr::derivative(int var) const {
    const Node& nd = *root_;
    switch (nd.op) {
    case Op::constant: return constant(0.0);
    case Op::variable: return constant(nd.var == var ? 1.0 : 0.0);
    case Op::neg: return -Expr(nd.a).derivative(var);
    case Op::add: return Expr(nd.a).derivative(var) + Expr(nd.b).derivative(var);
    case Op::sub: return Expr(nd.a).derivative(var) - Expr(nd.b).derivative(var);
    case Op::mul: {
        Expr u(nd.a), v(nd.b);
        return u.derivative(var) * v + u * v.derivative(var);
    }
    case Op::div: {
        Expr u(nd.a), v(nd.b);
        Expr du = u.derivative(var), dv = v.derivative(var);
        if (dv.is_constant() && dv.constant_value() == 0.0) return du / v;
        return (du * v - u * dv) / pow(v, constant(2.0));
    }
    case Op::pow: {
        Expr u(nd.a), v(nd.b);
        Expr du = u.derivative(var), dv = v.derivative(var);
        if (v.is_closed()) return v * pow(u, v - constant(1.0)) * du;
        if (u.is_closed()) return Expr(root_) * call(Fn::log, u) * dv;
        return Expr(root_) * (dv * call(Fn::log, u) + v * du / u);
    }
    case Op::call: {
        Expr u(nd.a);
        Expr du = u.derivative(var);
        if (du.is_constant() && du.constant_value() == 0.0) return constant(0.0);
        switch (nd.fn) {
        case Fn::sin: return call(Fn::cos, u) * du;
        case Fn::cos: return -(call(Fn::sin, u) * du);
        case Fn::tan: return du / pow(call(Fn::cos, u), constant(2.0));
        case Fn::exp: return Expr(root_) * du;
        case Fn::log: return du / u;
        case Fn::sinh: return call(Fn::cosh, u) * du;
        case Fn::cosh: return call(Fn::sinh, u) * du;
        case Fn::tanh: return du / pow(call(Fn::cosh, u), constant(2.0));
        case Fn::sqrt: return du / (constant(2.0) * Expr(root_));
        case Fn::abs: return u / Expr(root_) * du;
        }
    }
    }
    return constant(0.0);
}

Expr parse(std::string_view source, const std::vector<std::string>& variables) {
    return Parser(source, variables).run();
}

} // namespace wgeom::expr

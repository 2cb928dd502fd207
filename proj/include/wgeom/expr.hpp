#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace wgeom::expr {

enum class Op { constant, variable, neg, add, sub, mul, div, pow, call };
enum class Fn { sin, cos, tan, exp, log, sinh, cosh, tanh, sqrt, abs };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
    Op op = Op::constant;
    double value = 0.0;
    int var = -1;
    Fn fn = Fn::sin;
    NodePtr a;
    NodePtr b;
};

/// Immutable expression tree over indexed variables.
class Expr {
public:
    Expr();
    explicit Expr(NodePtr root) : root_(std::move(root)) {}

    static Expr constant(double v);
    static Expr variable(int index);

    /// Throws EvalDomainError (with the point) outside the natural domain.
    double eval(const double* x, std::size_t n) const;
    double eval(const std::vector<double>& x) const { return eval(x.data(), x.size()); }

    Expr derivative(int var) const;

    bool is_constant() const { return root_->op == Op::constant; }
    double constant_value() const { return root_->value; }
    /// True when the tree reads no variable.
    bool is_closed() const;
    int max_variable() const;

    /// Parenthesised text with 17 significant digits; re-parses to an equal tree.
    std::string str(const std::vector<std::string>& names) const;

    const NodePtr& root() const { return root_; }

private:
    NodePtr root_;
};

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr pow(const Expr& a, const Expr& b);
Expr call(Fn fn, const Expr& a);

/// Grammar in docs/grammar.md. Identifiers resolve to variables, then to pi and e.
Expr parse(std::string_view source, const std::vector<std::string>& variables);

const char* fn_name(Fn fn);

} // namespace wgeom::expr

#pragma once

#include "wgeom/expr.hpp"
#include "wgeom/linalg.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace wgeom {

/// Scalar function of chart coordinates. Parsed fields carry symbolic first and
/// second derivatives; callable fields fall back to central differences.
class ScalarField {
public:
    using Function = std::function<double(const Vec&)>;

    /// The zero field.
    ScalarField();

    static ScalarField parse(const std::string& source, const std::vector<std::string>& coords);
    static ScalarField from_expr(const expr::Expr& e, const std::vector<std::string>& coords);
    static ScalarField constant(double c, const std::vector<std::string>& coords = {});
    static ScalarField from_function(Function f, std::string label, Function gradient_hint = nullptr);

    double value(const Vec& x) const;
    Vec gradient(const Vec& x) const;
    Mat hessian(const Vec& x) const;

    bool symbolic() const;
    bool is_constant() const;
    const std::string& source() const;
    std::optional<expr::Expr> expression() const;
    std::optional<expr::Expr> gradient_expr(int i) const;

    /// c * field, keeping symbolic structure when present.
    ScalarField scaled(double c) const;

    struct Impl;

private:
    std::shared_ptr<const Impl> impl_;
};

} // namespace wgeom

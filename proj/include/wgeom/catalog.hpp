#pragma once

#include "wgeom/chart.hpp"
#include "wgeom/numerics.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace wgeom {

using ParamValue = std::variant<double, std::string>;
using ParamMap = std::map<std::string, ParamValue>;

struct CatalogParam {
    std::string name;
    std::string type;  // "integer", "real" or "expression"
    std::optional<double> min, max;
    bool exclusive_min = false;
    std::optional<ParamValue> fallback;  // absent and not optional = required
    std::string doc;
    bool optional = false;
};

struct CatalogEntry {
    std::string name;
    std::string description;
    std::vector<CatalogParam> params;
    std::string coordinates;
};

const std::vector<CatalogEntry>& catalog_entries();
/// Machine-readable manifest; data/catalog_manifest.json is a copy of this.
nlohmann::json catalog_manifest();

Chart catalog_build(const std::string& name, const ParamMap& params);
/// Parses calls such as "sphere_polar(2)" or "rigidity_metric(n=2, K=1, f=r/4)".
Chart catalog_build(const std::string& call);
/// Splits "name(a, b=c)" into a name and raw arguments, respecting nested parentheses.
std::pair<std::string, std::vector<std::string>> split_call(const std::string& call);

Chart euclidean(int n);
Chart sphere_polar(int n, double delta = 1e-3);
Chart hyperbolic_warped(int n, double k);
Chart warped_product(int base_dim, int fiber_dim, const std::string& psi);
Chart twisted_product(int base_dim, int fiber_dim, const std::string& psi);
Chart expansion_example(int n, double A);

/// s(r) = ∫₀^r e^{-2f(t)/(n-1)} dt stored as a Hermite interpolant with exact slopes.
struct RigidityRadial {
    int n = 2;
    double K = 1.0;
    ScalarField f;  // over the single variable r
    num::HermiteSpline s;
    double antipode = std::numeric_limits<double>::infinity();  // D with s(D) = π/√K
    double r_max = 0.0;

    double s_of_r(double r) const;
    double sn(double s) const;
    double w(double r) const;
    double w_prime(double r) const;
};

std::shared_ptr<const RigidityRadial> rigidity_radial(int n, double K, const std::string& f_source,
                                                      std::optional<double> r_max = std::nullopt);
Chart rigidity_metric(int n, double K, const std::string& f_source, std::optional<double> r_max = std::nullopt,
                      double delta = 1e-3);

std::vector<std::string> euclidean_names(int n);
std::vector<std::string> polar_names(int n);

} // namespace wgeom

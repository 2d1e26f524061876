#pragma once

#include <functional>
#include <optional>
#include <string>

#include "homfrac/gauge.hpp"
#include "homfrac/group.hpp"
#include "homfrac/types.hpp"

namespace homfrac {

enum class Smoothness { schwartz, compact_smooth, grid };

/// Real-valued function on the group in exponential coordinates.
/// eval must be deterministic and safe for concurrent calls.
struct ScalarField {
  std::string name;
  std::function<double(const double*)> eval;
  std::function<void(const double*, double*)> grad;  // coordinate gradient oracle, may be empty
  Smoothness smoothness = Smoothness::schwartz;
  std::optional<double> support_radius;  // gauge radius with u == 0 outside B_R
  double effective_radius = 1e300;       // |u| <= 1e-12 * sup_norm outside B_(this)
  double sup_norm = 1.0;
  bool is_constant = false;

  double operator()(const double* x) const { return eval(x); }
  double operator()(const Vec& g) const { return eval(g.data()); }
  bool has_grad() const { return static_cast<bool>(grad); }
};

/// First-order coefficients A(g) with X_j = sum_k A_{kj}(g) d/dx_k.
struct FieldCoefficients {
  Mat first_order;
};

enum class Side { left, right };

FieldCoefficients left_field_coeffs(const GroupSpec& spec, const Vec& g);
FieldCoefficients right_field_coeffs(const GroupSpec& spec, const Vec& g);

/// Raw column-major variants for hot loops (A must hold n*n doubles).
void left_coeffs_into(const GroupSpec& spec, const double* g, double* A);
void right_coeffs_into(const GroupSpec& spec, const double* g, double* A);

/// Coordinate gradient of u: oracle when present, five-point differences
/// otherwise (out must hold n doubles).
void field_gradient(const GroupSpec& spec, const ScalarField& u, const double* x, double* out);

/// (X_j u)(g) or (Y_j u)(g): coefficient column against the gradient of u,
/// from the oracle when present, otherwise five-point central differences.
double apply_field(const GroupSpec& spec, int j, Side side, const ScalarField& u, const Vec& g);

/// sum_{i: d_i=1} (X_i^2 u)(g) by symmetric second differences along the
/// group flows t -> g exp(t X_i).
double horizontal_laplacian(const GroupSpec& spec, const ScalarField& u, const Vec& g);

/// Same quantity through nested first-order applications; used to cross-check
/// the flow-difference route.
double horizontal_laplacian_nested(const GroupSpec& spec, const ScalarField& u, const Vec& g);

/// Mixed derivative (X_i X_j u)(g) along the two flows.
double flow_second_derivative(const GroupSpec& spec, int i, int j, const ScalarField& u, const Vec& g);

/// Left Taylor polynomial of homogeneous degree 2 evaluated at increment h.
double taylor_p2(const GroupSpec& spec, const ScalarField& u, const Vec& g, const Vec& h);

/// u(g h) + u(g h^{-1}) - 2 u(g).
double second_difference(const GroupSpec& spec, const ScalarField& u, const Vec& g, const Vec& h);

// Built-in test fields. Tokens: "gaussian", "compact_bump[:R=..]",
// "poly_bump[:i=..]", "power_tail", "product", "constant[:c=..]".
ScalarField make_field(const std::string& token, const GroupSpec& spec, const Gauge& gauge);

ScalarField make_constant_field(const GroupSpec& spec, double c);

/// u o L_{g0}, i.e. g -> u(g0 g).
ScalarField translate_field(const GroupSpec& spec, const Gauge& gauge, const Vec& g0,
                            const ScalarField& u);

/// u o delta_lambda.
ScalarField dilate_field(const GroupSpec& spec, double lambda, const ScalarField& u);

ScalarField scale_field(double c, const ScalarField& u);
ScalarField multiply_fields(const ScalarField& u, const ScalarField& v);

/// max |x| over the Euclidean coordinate sphere of radius E (sampled, with margin).
double max_gauge_on_euclid_sphere(const GroupSpec& spec, const Gauge& gauge, double E);

/// Grows R until max_{|g|=R} |u| <= eps * u.sup_norm (sampled).
double effective_gauge_radius(const GroupSpec& spec, const Gauge& gauge,
                              const std::function<double(const double*)>& eval, double sup_norm,
                              double eps = 1e-12);

}  // namespace homfrac

#pragma once

#include <vector>

#include "homfrac/fields.hpp"
#include "homfrac/quadrature.hpp"

namespace homfrac {

/// Order parameter of the fractional operator; accepted range [0.01, 0.99].
struct FracParams {
  double s;
  explicit FracParams(double s_) : s(s_) {
    if (!(s >= 0.01 && s <= 0.99))
      throw DomainError("fractional order must lie in [0.01, 0.99]");
  }
  double kernel_exponent(double Q) const { return Q + 2.0 * s; }
};

/// Hypersingular operator by the symmetric-difference kernel form:
/// integral of (2u(g) - u(gh) - u(gh^{-1})) / |h|^{Q+2s} dh,
/// dyadic-annulus stratified, inner tail closed by exact-ratio extrapolation
/// and outer tail in closed form once translates leave the support.
Estimate eval_Ls(const GroupSpec& spec, const Gauge& gauge, const FracParams& params,
                 const ScalarField& u, const Vec& g, const QuadratureConfig& cfg,
                 const GroupConstants* consts = nullptr);

/// Principal-value route 2 * integral over {|z| >= eps} of
/// (u(g) - u(gz)) / |z|^{Q+2s} dz, one estimate per epsilon.
std::vector<Estimate> eval_Ls_pv(const GroupSpec& spec, const Gauge& gauge,
                                 const FracParams& params, const ScalarField& u, const Vec& g,
                                 const std::vector<double>& eps_list, const QuadratureConfig& cfg,
                                 const GroupConstants* consts = nullptr);

/// Pointwise energy density Gamma_s(u,v)(g).
Estimate carre_du_champ(const GroupSpec& spec, const Gauge& gauge, const FracParams& params,
                        const ScalarField& u, const ScalarField& v, const Vec& g,
                        const QuadratureConfig& cfg, const GroupConstants* consts = nullptr);

Estimate l2_norm_sq(const GroupSpec& spec, const Gauge& gauge, const ScalarField& u,
                    const QuadratureConfig& cfg);
Estimate inner_product_l2(const GroupSpec& spec, const Gauge& gauge, const ScalarField& u,
                          const ScalarField& v, const QuadratureConfig& cfg);

/// sum over weight-one i of || X_i u ||_2^2.
Estimate horizontal_energy(const GroupSpec& spec, const Gauge& gauge, const ScalarField& u,
                           const QuadratureConfig& cfg);

/// Squared Gagliardo seminorm [u]_{s,2}^2 in the translated form
/// integral over g,h of |u(g) - u(gh)|^2 / |h|^{Q+2s}.
Estimate seminorm_sq(const GroupSpec& spec, const Gauge& gauge, const FracParams& params,
                     const ScalarField& u, const QuadratureConfig& cfg,
                     const GroupConstants* consts = nullptr);

/// [u]_{s,2} itself.
Estimate seminorm(const GroupSpec& spec, const Gauge& gauge, const FracParams& params,
                  const ScalarField& u, const QuadratureConfig& cfg,
                  const GroupConstants* consts = nullptr);

Estimate dirichlet_form(const GroupSpec& spec, const Gauge& gauge, const FracParams& params,
                        const ScalarField& u, const ScalarField& v, const QuadratureConfig& cfg,
                        const GroupConstants* consts = nullptr);

/// D_s(u,v) - integral of v * L_s u, with one shared sample stream so the
/// statistical noise of the two terms cancels.
Estimate form_symmetry_residual(const GroupSpec& spec, const Gauge& gauge,
                                const FracParams& params, const ScalarField& u,
                                const ScalarField& v, const QuadratureConfig& cfg,
                                const GroupConstants* consts = nullptr);

/// L_s(uv) - u L_s v - v L_s u + 2 Gamma_s(u,v) at a point; target zero.
Estimate product_rule_check(const GroupSpec& spec, const Gauge& gauge, const FracParams& params,
                            const ScalarField& u, const ScalarField& v, const Vec& g,
                            const QuadratureConfig& cfg, const GroupConstants* consts = nullptr);

struct LimitProbeRow {
  double s = 0;
  Vec point;            // empty for seminorm rows
  bool seminorm_row = false;
  int family = 0;       // 0: s -> 0 normalization, 1: s -> 1 normalization
  double normalized_value = 0;
  double normalized_err = 0;  // 2 sigma + tails, after normalization
  double target = 0;
  double rel_err = 0;
};

/// Normalized operator and seminorm values against their small-s / large-s
/// targets. Gauges that are even but not radial in the weight-one coordinates
/// get per-coordinate moment weights.
std::vector<LimitProbeRow> limit_probe(const GroupSpec& spec, const Gauge& gauge,
                                       const ScalarField& u, const std::vector<Vec>& points,
                                       const std::vector<double>& s_grid,
                                       const QuadratureConfig& cfg,
                                       const GroupConstants* consts = nullptr);

struct DecayRow {
  double radius = 0;
  Vec point;
  Estimate scaled;   // |g|^{Q+2s} |L_s u(g)|
  double bound = 0;  // 2^{Q+2s+1} sigma_Q R^Q ||u||_inf
  double bound_rel_err = 0;
  Estimate direct_scaled;  // far-field integral route, same scaling
};

std::vector<DecayRow> decay_profile(const GroupSpec& spec, const Gauge& gauge,
                                    const FracParams& params, const ScalarField& u,
                                    const std::vector<double>& radii, const QuadratureConfig& cfg,
                                    const GroupConstants* consts = nullptr);

/// || R_h u - u ||_2 / (|h|^s [u]_{s,2}); pass the seminorm when already known.
Estimate translation_difference(const GroupSpec& spec, const Gauge& gauge,
                                const FracParams& params, const ScalarField& u, const Vec& h,
                                const QuadratureConfig& cfg,
                                const Estimate* seminorm_est = nullptr,
                                const GroupConstants* consts = nullptr);

}  // namespace homfrac

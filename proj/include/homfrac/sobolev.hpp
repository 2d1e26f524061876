#pragma once

#include <string>
#include <vector>

#include "homfrac/fracop.hpp"

namespace homfrac {

/// 2Q/(Q-2s).
double critical_exponent(double Q, double s);

struct PowerSumMin {
  double r_star;
  double f_min;
};

/// Minimum of f(r) = A r^a + B r^{-b} over r > 0.
PowerSumMin min_power_sum(double a, double b, double A, double B);

/// [(Q-2s)/(2s)]^{2s/Q} + [(Q-2s)/(2s)]^{-(Q-2s)/4}.
double hedberg_bracket(double Q, double s);

/// sigma^{-(Q+2s)/(4(Q-2s))} * bracket; the embedding bound in use is
/// ||u||_{2*(s)} <= C^{Q/(Q-2s)} [u]_{s,2}.
double hedberg_constant(double Q, double s, double sigma);
double hedberg_embedding_factor(double Q, double s, double sigma);

/// Uniform coordinate grid on the dilated box delta_L([-1,1]^n): axis j has
/// half-width L^{d_j}. Values outside the box are zero; the outermost node
/// shell is kept at zero so the field is compactly supported.
struct GridField {
  double box_L = 1.0;
  Eigen::VectorXi res;
  Vec values;

  long long total_nodes() const {
    long long t = 1;
    for (int j = 0; j < res.size(); ++j) t *= res[j];
    return t;
  }
};

GridField make_grid_field(const GroupSpec& spec, double box_L, int res_per_axis,
                          const ScalarField& u);

/// Node coordinates of a flat index (row-major, first axis slowest).
void grid_node(const GroupSpec& spec, const GridField& gf, long long flat, double* out);
double grid_cell_volume(const GroupSpec& spec, const GridField& gf);

void save_grid(const std::string& path, const GridField& gf);
GridField load_grid(const std::string& path);

/// Discrete squared Gagliardo seminorm: pair sum over distinct nodes plus a
/// deterministic exterior correction (coarse lattice + closed far tail).
double grid_seminorm(const GroupSpec& spec, const Gauge& gauge, const FracParams& params,
                     const GridField& gf, double sigma);

double grid_lp_norm(const GroupSpec& spec, const GridField& gf, double p);

/// grid_seminorm / ||u||_{2*(s)}^2.
double sobolev_quotient(const GroupSpec& spec, const Gauge& gauge, const FracParams& params,
                        const GridField& gf, double sigma);

struct QuotientTrace {
  int iteration = 0;
  double quotient = 0;
  double seminorm_sq = 0;
  double lp_norm = 0;
  double step_size = 0;
};

struct OptimizeOptions {
  int iters = 120;
  double step = 0.5;
  std::uint64_t seed = 1;
};

struct OptimizeResult {
  GridField field;
  std::vector<QuotientTrace> trace;
  bool stagnated = false;
  double el_residual = 0;  // || L u - mu u^{2*-1} || / || L u ||
  double multiplier = 0;
};

/// Projected descent on the discrete quotient: backtracked steps along the
/// negative gradient, then nonnegativity clamp and unit 2*(s)-norm rescaling.
OptimizeResult optimize_quotient(const GroupSpec& spec, const Gauge& gauge,
                                 const FracParams& params, const GridField& init,
                                 const OptimizeOptions& opt, double sigma);

/// Unit-mass smooth bump on the coordinate ball of radius R.
ScalarField make_mollifier(const GroupSpec& spec, const Gauge& gauge, double R);

/// u_eps(x) = integral of rho(z) u((delta_eps z^{-1}) x) dz by a midpoint rule
/// over the mollifier support (rho_coord_halfwidth per axis); the discrete
/// weights are renormalized to unit mass, so the result is a convex
/// combination of left translates of u.
ScalarField mollify(const GroupSpec& spec, const Gauge& gauge, const ScalarField& rho,
                    double rho_coord_halfwidth, double eps, const ScalarField& u,
                    int nodes_per_axis = 5);

ScalarField subtract_fields(const ScalarField& u, const ScalarField& v);

/// Smooth radial ramp: 0 on B_R, 1 off B_{2R}, |phi(g)-phi(h)| <= (2/R)|h^{-1}g|.
ScalarField truncation_field(const GroupSpec& spec, const Gauge& gauge, double R);

struct BallSpec {
  Vec center;
  double radius;
};

/// Greedy packing: lattice candidates inside the box, accepted when at gauge
/// distance >= delta from all previous picks; radii delta/2 so the triangle
/// inequality guarantees disjointness.
std::vector<BallSpec> pack_balls(const GroupSpec& spec, const Gauge& gauge, const Box& omega,
                                 double delta, int max_balls = 20000);

/// Sum over balls of the L2 distance of u to its ball average (the covered
/// part of ||u - Pu||^2).
Estimate rellich_defect(const GroupSpec& spec, const Gauge& gauge, const FracParams& params,
                        const ScalarField& u, const std::vector<BallSpec>& balls,
                        const QuadratureConfig& cfg, const GroupConstants* consts = nullptr);

struct MultiplicationReport {
  Estimate lhs;       // (1/2) [phi u]^2
  Estimate term_sup;  // ||phi||_inf^2 [u]^2
  Estimate term_A;
  Estimate term_B;
  bool holds = false;
  double slack = 0;  // rhs - lhs in combined-error units
};

MultiplicationReport multiplication_bound_check(const GroupSpec& spec, const Gauge& gauge,
                                                const FracParams& params, const ScalarField& phi,
                                                double phi_support_R, const ScalarField& u,
                                                const QuadratureConfig& cfg,
                                                const GroupConstants* consts = nullptr);

struct CounterexampleRow {
  double k = 0;
  double eta = 0;
  double ratio = 0;  // ||psi(.+k eta) - psi||_2 / (eta^{1/2} ||psi||_2)
};

std::vector<CounterexampleRow> counterexample_sweep(const std::vector<double>& k_list,
                                                    const std::vector<double>& eta_list);

}  // namespace homfrac

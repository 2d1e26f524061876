#include "homfrac/sobolev.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>

namespace homfrac {

double critical_exponent(double Q, double s) {
  if (!(s > 0.0 && s < 1.0) || !(2.0 * s < Q))
    throw DomainError("critical exponent needs 0 < s < 1 and 2s < Q");
  return 2.0 * Q / (Q - 2.0 * s);
}

PowerSumMin min_power_sum(double a, double b, double A, double B) {
  if (!(a > 0 && b > 0 && A > 0 && B > 0)) throw DomainError("min_power_sum needs positive inputs");
  PowerSumMin out;
  out.r_star = std::pow(b * B / (a * A), 1.0 / (a + b));
  double ba = b / a;
  out.f_min = (std::pow(ba, a / (a + b)) + std::pow(ba, -b / (a + b))) *
              std::pow(A, b / (a + b)) * std::pow(B, a / (a + b));
  return out;
}

double hedberg_bracket(double Q, double s) {
  if (!(s > 0.0 && s < 1.0) || !(2.0 * s < Q)) throw DomainError("hedberg bracket needs 2s < Q");
  double ba = (Q - 2.0 * s) / (2.0 * s);
  return std::pow(ba, 2.0 * s / Q) + std::pow(ba, -(Q - 2.0 * s) / 4.0);
}

double hedberg_constant(double Q, double s, double sigma) {
  if (!(sigma > 0.0)) throw DomainError("hedberg constant needs sigma > 0");
  return std::pow(sigma, -0.25 * (Q + 2.0 * s) / (Q - 2.0 * s)) * hedberg_bracket(Q, s);
}

double hedberg_embedding_factor(double Q, double s, double sigma) {
  return std::pow(hedberg_constant(Q, s, sigma), Q / (Q - 2.0 * s));
}

// ---------------------------------------------------------------------------
// grids

GridField make_grid_field(const GroupSpec& spec, double box_L, int res_per_axis,
                          const ScalarField& u) {
  const int n = spec.n;
  GridField gf;
  gf.box_L = box_L;
  gf.res = Eigen::VectorXi::Constant(n, res_per_axis);
  long long total = gf.total_nodes();
  if (total > 40000) throw ResourceLimit("grid too large");
  gf.values = Vec::Zero(total);
  double x[kMaxDim];
  for (long long f = 0; f < total; ++f) {
    grid_node(spec, gf, f, x);
    // zero boundary shell
    bool boundary = false;
    long long rem = f;
    for (int j = n - 1; j >= 0; --j) {
      long long i = rem % gf.res[j];
      rem /= gf.res[j];
      if (i == 0 || i == gf.res[j] - 1) boundary = true;
    }
    gf.values[f] = boundary ? 0.0 : u(x);
  }
  return gf;
}

void grid_node(const GroupSpec& spec, const GridField& gf, long long flat, double* out) {
  const int n = spec.n;
  long long rem = flat;
  for (int j = n - 1; j >= 0; --j) {
    long long i = rem % gf.res[j];
    rem /= gf.res[j];
    double hw = std::pow(gf.box_L, spec.weights[j]);
    out[j] = (-1.0 + 2.0 * static_cast<double>(i) / (gf.res[j] - 1)) * hw;
  }
}

double grid_cell_volume(const GroupSpec& spec, const GridField& gf) {
  double w = 1.0;
  for (int j = 0; j < spec.n; ++j)
    w *= 2.0 * std::pow(gf.box_L, spec.weights[j]) / (gf.res[j] - 1);
  return w;
}

void save_grid(const std::string& path, const GridField& gf) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  out.write("HFG1", 4);
  std::uint32_t n = static_cast<std::uint32_t>(gf.res.size());
  out.write(reinterpret_cast<const char*>(&n), 4);
  for (int j = 0; j < gf.res.size(); ++j) {
    std::uint32_t r = static_cast<std::uint32_t>(gf.res[j]);
    out.write(reinterpret_cast<const char*>(&r), 4);
  }
  out.write(reinterpret_cast<const char*>(&gf.box_L), 8);
  out.write(reinterpret_cast<const char*>(gf.values.data()),
            static_cast<std::streamsize>(sizeof(double) * gf.values.size()));
}

GridField load_grid(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  char magic[4];
  in.read(magic, 4);
  if (std::string(magic, 4) != "HFG1") throw ConfigError("bad grid file magic");
  std::uint32_t n = 0;
  in.read(reinterpret_cast<char*>(&n), 4);
  GridField gf;
  gf.res = Eigen::VectorXi(n);
  for (std::uint32_t j = 0; j < n; ++j) {
    std::uint32_t r = 0;
    in.read(reinterpret_cast<char*>(&r), 4);
    gf.res[static_cast<int>(j)] = static_cast<int>(r);
  }
  in.read(reinterpret_cast<char*>(&gf.box_L), 8);
  gf.values = Vec::Zero(gf.total_nodes());
  in.read(reinterpret_cast<char*>(gf.values.data()),
          static_cast<std::streamsize>(sizeof(double) * gf.values.size()));
  if (!in) throw ConfigError("truncated grid file");
  return gf;
}

namespace {

/// Deterministic exterior correction: integral over the complement of the box
/// of |h^{-1} g|^{-Q-2s} dh, one value per node. A coarse lattice covers the
/// tripled box; beyond it the closed-form gauge tail applies.
struct ExteriorCorrection {
  std::vector<Vec> far_cells;  // cell centers outside the box
  double far_cellvol = 0;
  double r_outer = 0;  // gauge inradius of the tripled box

  ExteriorCorrection(const GroupSpec& spec, const Gauge& gauge, const GridField& gf) {
    const int n = spec.n;
    Eigen::VectorXi res = gf.res;
    double hw[kMaxDim], HW[kMaxDim];
    for (int j = 0; j < n; ++j) {
      hw[j] = std::pow(gf.box_L, spec.weights[j]);
      HW[j] = std::pow(3.0, spec.weights[j]) * hw[j];
    }
    far_cellvol = 1.0;
    for (int j = 0; j < n; ++j) far_cellvol *= 2.0 * HW[j] / res[j];
    long long total = 1;
    for (int j = 0; j < n; ++j) total *= res[j];
    double x[kMaxDim];
    for (long long f = 0; f < total; ++f) {
      long long rem = f;
      bool inside = true;
      for (int j = n - 1; j >= 0; --j) {
        long long i = rem % res[j];
        rem /= res[j];
        x[j] = (-1.0 + (2.0 * static_cast<double>(i) + 1.0) / res[j]) * HW[j];
        if (std::abs(x[j]) > hw[j]) inside = false;
      }
      if (!inside) far_cells.push_back(Eigen::Map<const Vec>(x, n));
    }
    // Gauge inradius of the tripled box: the shipped gauges increase in each
    // |x_j|, so face centers give the minimum over the boundary.
    r_outer = 1e300;
    Vec e = Vec::Zero(n);
    for (int j = 0; j < n; ++j) {
      e.setZero();
      e[j] = HW[j];
      r_outer = std::min(r_outer, gauge(e));
    }
  }

  double value_at(const GroupSpec& spec, const Gauge& gauge, double expo, double two_s,
                  double sigma, const double* g) const {
    double acc = 0.0;
    double ginv[kMaxDim], d[kMaxDim];
    const int n = spec.n;
    for (int k = 0; k < n; ++k) ginv[k] = -g[k];
    for (const Vec& c : far_cells) {
      // |c^{-1} g| = |g^{-1} c| by symmetry of the gauge
      spec.multiply_into(ginv, c.data(), d);
      acc += std::pow(gauge(d), -expo);
    }
    acc *= far_cellvol;
    double rho = std::max(r_outer - gauge(g), 0.3 * r_outer);
    acc += sigma * std::pow(rho, -two_s) / two_s;
    return acc;
  }
};

}  // namespace

double grid_seminorm(const GroupSpec& spec, const Gauge& gauge, const FracParams& params,
                     const GridField& gf, double sigma) {
  const int n = spec.n;
  const long long total = gf.total_nodes();
  if (total > 40000) throw ResourceLimit("grid pair sum exceeds the configured cap");
  const double w = grid_cell_volume(spec, gf);
  const double expo = params.kernel_exponent(spec.Q());

  std::vector<Vec> nodes(static_cast<std::size_t>(total));
  double x[kMaxDim];
  for (long long f = 0; f < total; ++f) {
    grid_node(spec, gf, f, x);
    nodes[static_cast<std::size_t>(f)] = Eigen::Map<const Vec>(x, n);
  }

  double pair_sum = 0.0;
  double qinv[kMaxDim], d[kMaxDim];
  for (long long p = 0; p < total; ++p) {
    double up = gf.values[p];
    const Vec& xp = nodes[static_cast<std::size_t>(p)];
    for (long long q = p + 1; q < total; ++q) {
      double diff = up - gf.values[q];
      if (diff == 0.0) continue;
      const Vec& xq = nodes[static_cast<std::size_t>(q)];
      for (int k = 0; k < n; ++k) qinv[k] = -xq[k];
      spec.multiply_into(qinv, xp.data(), d);
      pair_sum += diff * diff * std::pow(gauge(d), -expo);
    }
  }
  pair_sum *= 2.0 * w * w;  // ordered pairs

  ExteriorCorrection ext(spec, gauge, gf);
  double umax2 = gf.values.cwiseAbs().maxCoeff();
  umax2 *= umax2;
  double outside = 0.0;
  for (long long p = 0; p < total; ++p) {
    double u2 = gf.values[p] * gf.values[p];
    if (u2 <= 1e-12 * umax2) continue;
    outside += 2.0 * u2 *
               ext.value_at(spec, gauge, expo, 2.0 * params.s, sigma,
                            nodes[static_cast<std::size_t>(p)].data()) *
               w;
  }
  return pair_sum + outside;
}

double grid_lp_norm(const GroupSpec& spec, const GridField& gf, double p) {
  double w = grid_cell_volume(spec, gf);
  double acc = 0.0;
  for (long long f = 0; f < gf.total_nodes(); ++f) acc += std::pow(std::abs(gf.values[f]), p);
  return std::pow(acc * w, 1.0 / p);
}

double sobolev_quotient(const GroupSpec& spec, const Gauge& gauge, const FracParams& params,
                        const GridField& gf, double sigma) {
  if (gf.values.cwiseAbs().maxCoeff() == 0.0) throw ZeroField("quotient of the zero field");
  double p = critical_exponent(spec.Q(), params.s);
  double lp = grid_lp_norm(spec, gf, p);
  return grid_seminorm(spec, gauge, params, gf, sigma) / (lp * lp);
}

namespace {

/// Dense kernel operator for the optimizer:
///   SN(u)   = 2 w^2 (u'Du - u'Ku) + w sum_p T_p u_p^2,
///   (Lu)_p  = 2 w (Du - Ku)_p + T_p u_p,   SN = w <u, Lu>.
class GridOperator {
 public:
  GridOperator(const GroupSpec& spec, const Gauge& gauge, const FracParams& params,
               const GridField& gf, double sigma)
      : n_(spec.n), total_(gf.total_nodes()), w_(grid_cell_volume(spec, gf)) {
    if (total_ > 8192) throw ResourceLimit("optimizer grid exceeds the dense-kernel cap");
    const double expo = params.kernel_exponent(spec.Q());
    nodes_.resize(static_cast<std::size_t>(total_));
    double x[kMaxDim];
    for (long long f = 0; f < total_; ++f) {
      grid_node(spec, gf, f, x);
      nodes_[static_cast<std::size_t>(f)] = Eigen::Map<const Vec>(x, n_);
    }
    K_.resize(total_, total_);
    K_.setZero();
    double qinv[kMaxDim], d[kMaxDim];
    for (long long p = 0; p < total_; ++p) {
      for (long long q = p + 1; q < total_; ++q) {
        for (int k = 0; k < n_; ++k) qinv[k] = -nodes_[static_cast<std::size_t>(q)][k];
        spec.multiply_into(qinv, nodes_[static_cast<std::size_t>(p)].data(), d);
        float v = static_cast<float>(std::pow(gauge(d), -expo));
        K_(p, q) = v;
        K_(q, p) = v;
      }
    }
    rowsum_ = K_.cast<double>().rowwise().sum();
    ExteriorCorrection ext(spec, gauge, gf);
    T_ = Vec(total_);
    for (long long p = 0; p < total_; ++p)
      T_[p] = 2.0 * ext.value_at(spec, gauge, expo, 2.0 * params.s, sigma,
                                 nodes_[static_cast<std::size_t>(p)].data());
  }

  Vec apply(const Vec& u) const {
    Vec Ku = (K_ * u.cast<float>()).cast<double>();
    return 2.0 * w_ * (rowsum_.cwiseProduct(u) - Ku) + T_.cwiseProduct(u);
  }

  double seminorm_sq(const Vec& u, const Vec& Lu) const { return w_ * u.dot(Lu); }
  double cellvol() const { return w_; }

 private:
  int n_;
  long long total_;
  double w_;
  std::vector<Vec> nodes_;
  Eigen::MatrixXf K_;
  Vec rowsum_;
  Vec T_;
};

}  // namespace

OptimizeResult optimize_quotient(const GroupSpec& spec, const Gauge& gauge,
                                 const FracParams& params, const GridField& init,
                                 const OptimizeOptions& opt, double sigma) {
  if (init.values.cwiseAbs().maxCoeff() == 0.0) throw ZeroField("optimizer needs a nonzero start");
  const double p = critical_exponent(spec.Q(), params.s);
  GridOperator op(spec, gauge, params, init, sigma);
  const double w = op.cellvol();

  auto lp_norm = [&](const Vec& u) {
    double acc = 0.0;
    for (long long f = 0; f < u.size(); ++f) acc += std::pow(std::abs(u[f]), p);
    return std::pow(acc * w, 1.0 / p);
  };

  Vec u = init.values;
  if (u.sum() < 0.0) u = -u;  // minimizers have constant sign
  u /= lp_norm(u);

  OptimizeResult result;
  result.field = init;
  double eta = opt.step;
  Vec Lu = op.apply(u);
  double sn = op.seminorm_sq(u, Lu);
  double q = sn;  // lp norm is one
  result.trace.push_back({0, q, sn, 1.0, 0.0});

  for (int it = 1; it <= opt.iters; ++it) {
    // gradient of the quotient on the unit 2*(s) sphere
    Vec upow(u.size());
    for (long long f = 0; f < u.size(); ++f)
      upow[f] = std::copysign(std::pow(std::abs(u[f]), p - 1.0), u[f]);
    Vec grad = 2.0 * w * (Lu - sn * upow);
    double gn = grad.norm();
    if (gn < 1e-14) break;

    bool accepted = false;
    for (int bt = 0; bt < 25; ++bt) {
      Vec trial = u - (eta * u.norm() / gn) * grad;
      trial = trial.cwiseMax(0.0);  // nonnegativity clamp
      double tn = lp_norm(trial);
      if (tn < 1e-14) {
        eta *= 0.5;
        continue;
      }
      trial /= tn;
      Vec Ltrial = op.apply(trial);
      double sn_t = op.seminorm_sq(trial, Ltrial);
      if (sn_t <= q) {
        u = trial;
        Lu = Ltrial;
        sn = sn_t;
        q = sn_t;
        result.trace.push_back({it, q, sn, 1.0, eta});
        eta = std::min(eta * 1.3, 4.0);
        accepted = true;
        break;
      }
      eta *= 0.5;
    }
    if (!accepted) {
      result.stagnated = true;
      break;
    }
  }

  // Euler-Lagrange residual: L u = mu u^{2*(s)-1} at the optimum.
  Vec upow(u.size());
  for (long long f = 0; f < u.size(); ++f)
    upow[f] = std::copysign(std::pow(std::abs(u[f]), p - 1.0), u[f]);
  double mu = Lu.dot(upow) / upow.squaredNorm();
  result.multiplier = mu;
  result.el_residual = (Lu - mu * upow).norm() / std::max(Lu.norm(), 1e-300);
  result.field.values = u;
  result.field.box_L = init.box_L;
  result.field.res = init.res;
  return result;
}

// ---------------------------------------------------------------------------
// mollification and truncation

ScalarField make_mollifier(const GroupSpec& spec, const Gauge& gauge, double R) {
  const int n = spec.n;
  // Normalize the coordinate bump to unit Haar mass on a fine midpoint grid.
  int nodes = n <= 3 ? 41 : (n == 4 ? 15 : 11);
  double cell = std::pow(2.0 * R / nodes, n);
  double mass = 0.0;
  double x[kMaxDim];
  long long total = 1;
  for (int j = 0; j < n; ++j) total *= nodes;
  for (long long f = 0; f < total; ++f) {
    long long rem = f;
    double r2 = 0.0;
    for (int j = 0; j < n; ++j) {
      long long i = rem % nodes;
      rem /= nodes;
      x[j] = (-1.0 + (2.0 * i + 1.0) / nodes) * R;
      r2 += x[j] * x[j];
    }
    r2 /= R * R;
    if (r2 < 1.0) mass += std::exp(-1.0 / (1.0 - r2)) * cell;
  }
  double Z = mass;

  ScalarField f;
  f.name = "mollifier";
  f.smoothness = Smoothness::compact_smooth;
  f.eval = [n, R, Z](const double* y) {
    double r2 = 0.0;
    for (int k = 0; k < n; ++k) r2 += y[k] * y[k];
    r2 /= R * R;
    return r2 < 1.0 ? std::exp(-1.0 / (1.0 - r2)) / Z : 0.0;
  };
  f.sup_norm = std::exp(-1.0) / Z;
  double gr = max_gauge_on_euclid_sphere(spec, gauge, R);
  f.support_radius = gr;
  f.effective_radius = gr;
  return f;
}

namespace {

double midpoint_mass(const GroupSpec& spec, const ScalarField& rho, double R, int nodes) {
  const int n = spec.n;
  double cell = std::pow(2.0 * R / nodes, n);
  long long total = 1;
  for (int j = 0; j < n; ++j) total *= nodes;
  double x[kMaxDim];
  double mass = 0.0;
  for (long long f = 0; f < total; ++f) {
    long long rem = f;
    for (int j = 0; j < n; ++j) {
      long long i = rem % nodes;
      rem /= nodes;
      x[j] = (-1.0 + (2.0 * i + 1.0) / nodes) * R;
    }
    mass += rho(x) * cell;
  }
  return mass;
}

}  // namespace

ScalarField mollify(const GroupSpec& spec, const Gauge& gauge, const ScalarField& rho,
                    double rho_coord_halfwidth, double eps, const ScalarField& u,
                    int nodes_per_axis) {
  if (!(eps > 0.0)) throw DomainError("mollification scale must be positive");
  const int n = spec.n;
  const double R = rho_coord_halfwidth;

  // unit mass is a contract on rho itself, validated on a fine grid
  double fine_mass = midpoint_mass(spec, rho, R, n <= 3 ? 31 : 11);
  if (std::abs(fine_mass - 1.0) > 0.01)
    throw NormalizationError("mollifier mass " + std::to_string(fine_mass) + " deviates from 1");

  double cell = std::pow(2.0 * R / nodes_per_axis, n);
  long long total = 1;
  for (int j = 0; j < n; ++j) total *= nodes_per_axis;

  auto shifts = std::make_shared<std::vector<Vec>>();
  auto weights = std::make_shared<std::vector<double>>();
  double x[kMaxDim];
  double mass = 0.0;
  for (long long f = 0; f < total; ++f) {
    long long rem = f;
    for (int j = 0; j < n; ++j) {
      long long i = rem % nodes_per_axis;
      rem /= nodes_per_axis;
      x[j] = (-1.0 + (2.0 * i + 1.0) / nodes_per_axis) * R;
    }
    double wv = rho(x) * cell;
    if (wv == 0.0) continue;
    mass += wv;
    // (delta_eps z)^{-1} = delta_eps (z^{-1}) = -delta_eps z
    Vec shift(n);
    for (int j = 0; j < n; ++j) shift[j] = -std::pow(eps, spec.weights[j]) * x[j];
    shifts->push_back(shift);
    weights->push_back(wv);
  }
  for (double& wv : *weights) wv /= mass;  // exact convex combination of translates

  ScalarField out;
  out.name = u.name + "@mollified";
  out.smoothness = u.smoothness;
  out.eval = [spec, shifts, weights, ev = u.eval](const double* y) {
    double p[kMaxDim];
    double acc = 0.0;
    for (std::size_t i = 0; i < shifts->size(); ++i) {
      spec.multiply_into((*shifts)[i].data(), y, p);
      acc += (*weights)[i] * ev(p);
    }
    return acc;
  };
  double rho_gr = rho.support_radius ? *rho.support_radius
                                     : max_gauge_on_euclid_sphere(spec, gauge, R);
  if (u.support_radius) out.support_radius = *u.support_radius + eps * rho_gr;
  out.effective_radius = u.effective_radius + eps * rho_gr;
  out.sup_norm = u.sup_norm;
  return out;
}

ScalarField subtract_fields(const ScalarField& u, const ScalarField& v) {
  ScalarField f;
  f.name = u.name + "-" + v.name;
  f.smoothness = u.smoothness;
  f.eval = [a = u.eval, b = v.eval](const double* x) { return a(x) - b(x); };
  if (u.support_radius && v.support_radius)
    f.support_radius = std::max(*u.support_radius, *v.support_radius);
  f.effective_radius = std::max(u.effective_radius, v.effective_radius);
  f.sup_norm = u.sup_norm + v.sup_norm;
  return f;
}

namespace {

// C-infinity step: 0 for t <= 0, 1 for t >= 1, max slope exactly 2.
double smooth_step(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  double a = std::exp(-1.0 / t);
  double b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

}  // namespace

ScalarField truncation_field(const GroupSpec& spec, const Gauge& gauge, double R) {
  if (!(R > 0.0)) throw DomainError("truncation radius must be positive");
  ScalarField f;
  f.name = "truncation";
  f.smoothness = Smoothness::schwartz;  // smooth, bounded, not decaying
  f.eval = [gauge, R](const double* x) { return smooth_step(gauge(x) / R - 1.0); };
  f.sup_norm = 1.0;
  f.effective_radius = 1e300;
  return f;
}

// ---------------------------------------------------------------------------
// Rellich projection defect

std::vector<BallSpec> pack_balls(const GroupSpec& spec, const Gauge& gauge, const Box& omega,
                                 double delta, int max_balls) {
  const int n = spec.n;
  std::vector<BallSpec> out;
  // Candidate lattice, spacing ~ delta^{d_j}/2 per axis.
  long long counts[kMaxDim];
  long long total = 1;
  for (int j = 0; j < n; ++j) {
    double span = omega.hi[j] - omega.lo[j];
    counts[j] = std::max<long long>(1, static_cast<long long>(
                                           std::floor(span / (0.5 * std::pow(delta, spec.weights[j])))));
    total *= counts[j];
    if (total > 4000000) throw ResourceLimit("ball packing lattice too large");
  }
  double x[kMaxDim];
  for (long long f = 0; f < total; ++f) {
    long long rem = f;
    for (int j = n - 1; j >= 0; --j) {
      long long i = rem % counts[j];
      rem /= counts[j];
      x[j] = omega.lo[j] + (omega.hi[j] - omega.lo[j]) * (2.0 * i + 1.0) / (2.0 * counts[j]);
    }
    Vec c = Eigen::Map<const Vec>(x, n);
    bool ok = true;
    for (const auto& b : out) {
      if (gauge_distance(gauge, c, b.center) < delta) {
        ok = false;
        break;
      }
    }
    if (ok) {
      out.push_back({c, delta / 2.0});
      if (static_cast<int>(out.size()) >= max_balls) break;
    }
  }
  return out;
}

Estimate rellich_defect(const GroupSpec& spec, const Gauge& gauge, const FracParams& params,
                        const ScalarField& u, const std::vector<BallSpec>& balls,
                        const QuadratureConfig& cfg, const GroupConstants* consts) {
  // Disjointness: centers farther apart than the radius sum.
  for (std::size_t i = 0; i < balls.size(); ++i)
    for (std::size_t j = i + 1; j < balls.size(); ++j)
      if (gauge_distance(gauge, balls[i].center, balls[j].center) <
          balls[i].radius + balls[j].radius - 1e-12)
        throw OverlapError("balls " + std::to_string(i) + " and " + std::to_string(j) + " overlap");

  Estimate volB1;
  if (consts)
    volB1 = consts->vol_B1;
  else
    volB1 = vol_unit_ball(spec, gauge, cfg.scaled(0.5));

  long long per_ball = std::clamp<long long>(
      balls.empty() ? 0 : 8 * cfg.n_samples / static_cast<long long>(balls.size()), 256, 20000);
  Box unit = ball_box(gauge, 1.0);

  Estimate total;
  total.seed = cfg.seed;
  const int n = spec.n;
  for (std::size_t bi = 0; bi < balls.size(); ++bi) {
    const BallSpec& b = balls[bi];
    double volB = volB1.value * std::pow(b.radius, spec.Q());
    std::uint64_t region = region_id("rellich/ball" + std::to_string(bi));
    double s1 = 0, s2 = 0, s4 = 0;
    long long kept = 0;
    for (long long i = 0; i < per_ball; ++i) {
      SampleRng rng(cfg.seed, region, static_cast<std::uint64_t>(i));
      double z[kMaxDim], pt[kMaxDim];
      for (int k = 0; k < n; ++k)
        z[k] = rng.next_sym() * unit.hi[k] * std::pow(b.radius, spec.weights[k]);
      if (gauge(z) >= b.radius) continue;
      spec.multiply_into(b.center.data(), z, pt);  // uniform on the ball (left translation)
      double v = u(pt);
      s1 += v;
      s2 += v * v;
      s4 += v * v * v * v;
      ++kept;
    }
    if (kept < 8) continue;
    double mean = s1 / kept, mean2 = s2 / kept;
    double var_u = std::max(0.0, mean2 - mean * mean);
    double defect = volB * var_u;
    double var_u2 = std::max(0.0, s4 / kept - mean2 * mean2);
    double se = volB * std::sqrt((var_u2 + 4.0 * mean * mean * var_u) / kept);
    Estimate e;
    e.value = defect;
    e.std_err = se;
    e.n_evals = kept;
    // vol(B) uncertainty
    e.std_err = std::hypot(e.std_err, var_u * std::pow(b.radius, spec.Q()) * volB1.std_err);
    total += e;
  }
  return total;
}

MultiplicationReport multiplication_bound_check(const GroupSpec& spec, const Gauge& gauge,
                                                const FracParams& params, const ScalarField& phi,
                                                double phi_support_R, const ScalarField& u,
                                                const QuadratureConfig& cfg,
                                                const GroupConstants* consts) {
  GroupConstants cons = consts ? *consts : compute_constants(spec, gauge, cfg.scaled(0.25));
  const int n = spec.n;
  const double s = params.s;
  const double expo = params.kernel_exponent(spec.Q());
  const double R2 = 2.0 * phi_support_R;

  MultiplicationReport rep;
  ScalarField pu = multiply_fields(phi, u);
  pu.name = "phi*" + u.name;
  rep.lhs = seminorm_sq(spec, gauge, params, pu, cfg, &cons).scaled(0.5);
  Estimate usem = seminorm_sq(spec, gauge, params, u, cfg, &cons);
  rep.term_sup = usem.scaled(phi.sup_norm * phi.sup_norm);

  // A: outer region, |y| >= 2R: |u(y)|^2 times the kernel mass of phi^2.
  // Both remaining terms nest an inner estimator per sample; cap the outer
  // sample counts accordingly.
  QuadratureConfig nested = cfg.with_samples(std::min<long long>(cfg.n_samples, 4000));
  double Ru = std::min(u.effective_radius, 1e280);
  Box phibox = ball_box(gauge, phi_support_R);
  rep.term_A = detail::mc_annulus(
      gauge, R2, std::max(2.0 * R2, Ru), nested, region_id("mult/A"),
      [&](const double* y, double, SampleRng& rng) {
        double uy = u(y);
        if (uy == 0.0) return 0.0;
        double yinv[kMaxDim], d[kMaxDim], x[kMaxDim];
        for (int k = 0; k < n; ++k) yinv[k] = -y[k];
        double inner = 0.0;
        const int M = 512;
        for (int t = 0; t < M; ++t) {
          for (int k = 0; k < n; ++k)
            x[k] = phibox.lo[k] + (phibox.hi[k] - phibox.lo[k]) * rng.next_u01();
          double px = phi(x);
          if (px == 0.0) continue;
          spec.multiply_into(yinv, x, d);
          inner += px * px * std::pow(gauge(d), -expo);
        }
        inner *= phibox.volume() / M;
        return uy * uy * inner;
      });

  // B: inner region, |y| < 2R: |u(y)|^2 Gamma_s(phi)(y), the carre du champ
  // estimated with a small dyadic stack per sample.
  Box ybox = ball_box(gauge, R2);
  double H = std::max(4.0 * phi_support_R, 2.0);
  int KB = 0;
  while (std::pow(2.0, KB) < H) ++KB;
  rep.term_B = detail::mc_box(ybox, nested, region_id("mult/B"), [&](const double* y, SampleRng& rng) {
    if (gauge(y) >= R2) return 0.0;
    double uy = u(y);
    if (uy == 0.0) return 0.0;
    double py = phi(y);
    double z[kMaxDim], p[kMaxDim];
    double gamma = 0.0;
    const int levels_in = 12, M = 64;
    for (int k = -KB + 1; k <= levels_in; ++k) {
      double hi = std::pow(2.0, 1 - k), lo = 0.5 * hi;
      Box zbox = ball_box(gauge, hi);
      double acc = 0.0;
      for (int t = 0; t < M; ++t) {
        for (int kk = 0; kk < n; ++kk)
          z[kk] = zbox.lo[kk] + (zbox.hi[kk] - zbox.lo[kk]) * rng.next_u01();
        double nz = gauge(z);
        if (nz < lo || nz >= hi) continue;
        spec.multiply_into(y, z, p);
        double d = py - phi(p);
        acc += d * d * std::pow(nz, -expo);
      }
      gamma += acc * zbox.volume() / M;
    }
    gamma += py * py * cons.sigma.value * std::pow(std::pow(2.0, KB), -2.0 * s) / (2.0 * s);
    return uy * uy * gamma;
  });

  double rhs = rep.term_sup.value + rep.term_A.value + rep.term_B.value;
  double combined = rep.lhs.half_width() + rep.term_sup.half_width() + rep.term_A.half_width() +
                    rep.term_B.half_width();
  rep.holds = rep.lhs.value <= rhs + combined;
  rep.slack = rhs - rep.lhs.value;
  return rep;
}

std::vector<CounterexampleRow> counterexample_sweep(const std::vector<double>& k_list,
                                                    const std::vector<double>& eta_list) {
  auto psi = [](double t) {
    double s = t * t;
    return s < 1.0 ? std::exp(-1.0 / (1.0 - s)) : 0.0;
  };
  // || psi ||_2^2 by Simpson on [-1, 1]
  const int N = 4000;  // even
  auto simpson = [&](auto&& f, double a, double b) {
    double h = (b - a) / N;
    double acc = f(a) + f(b);
    for (int i = 1; i < N; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
  };
  double psi2 = simpson([&](double t) { return psi(t) * psi(t); }, -1.0, 1.0);

  std::vector<CounterexampleRow> rows;
  for (double k : k_list) {
    for (double eta : eta_list) {
      double shift = k * eta;
      double num2 = simpson(
          [&](double t) {
            double d = psi(t + shift) - psi(t);
            return d * d;
          },
          -1.0 - shift - 0.5, 1.0 + 0.5);
      CounterexampleRow row;
      row.k = k;
      row.eta = eta;
      row.ratio = std::sqrt(num2) / (std::sqrt(eta) * std::sqrt(psi2));
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace homfrac

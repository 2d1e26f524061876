#include "homfrac/fracop.hpp"

#include <algorithm>
#include <cmath>

namespace homfrac {

namespace {

GroupConstants ensure_consts(const GroupSpec& spec, const Gauge& gauge,
                             const QuadratureConfig& cfg, const GroupConstants* c) {
  if (c) return *c;
  return compute_constants(spec, gauge, cfg.scaled(0.25));
}

int outer_levels_for(double need, const QuadratureConfig& cfg) {
  int K = 0;
  while (std::pow(2.0, K) < need && K < cfg.outer_levels) ++K;
  return K;
}

/// Dyadic-annulus integral of f over {2^{-k_in} <= |z| < 2^K}. When
/// inner_tail is set, the part below 2^{-k_in} is closed by extrapolation at
/// the exact level ratio 2^{-(2-2s)} of the quadratic-order integrand.
template <class F>
Estimate dyadic_kernel_integral(const Gauge& gauge, const QuadratureConfig& cfg,
                                const std::string& tag, double s, int k_in, int K,
                                bool inner_tail, F&& f) {
  Estimate total;
  total.seed = cfg.seed;
  Estimate last_inner;
  for (int k = 1; k <= k_in; ++k) {
    double hi = std::pow(2.0, 1 - k), lo = 0.5 * hi;
    Estimate e =
        detail::mc_annulus(gauge, lo, hi, cfg, region_id(tag + "/in" + std::to_string(k)), f);
    if (k == k_in) last_inner = e;
    total += e;
  }
  for (int k = 0; k < K; ++k) {
    double lo = std::pow(2.0, k);
    total +=
        detail::mc_annulus(gauge, lo, 2.0 * lo, cfg, region_id(tag + "/out" + std::to_string(k)), f);
  }
  if (inner_tail && k_in >= 1) {
    double rho = std::pow(2.0, -(2.0 - 2.0 * s));
    Estimate t = last_inner.scaled(rho / (1.0 - rho));
    total += t;
    total.tail_bound += std::abs(t.value) * std::pow(2.0, -k_in + 2);
  }
  return total;
}

/// Adds c * sigma to an estimate, propagating the sigma error bar.
void add_sigma_multiple(Estimate& e, double c, const Estimate& sigma) {
  e.value += c * sigma.value;
  e.std_err = std::hypot(e.std_err, std::abs(c) * sigma.std_err);
  e.tail_bound += std::abs(c) * sigma.tail_bound;
}

double residual_amplitude(const ScalarField& u, double H, double gn) {
  if (u.support_radius && H >= gn + *u.support_radius) return 0.0;
  return 1e-12 * u.sup_norm;
}

}  // namespace

Estimate eval_Ls(const GroupSpec& spec, const Gauge& gauge, const FracParams& params,
                 const ScalarField& u, const Vec& g, const QuadratureConfig& cfg,
                 const GroupConstants* consts) {
  Estimate zero;
  zero.seed = cfg.seed;
  if (u.is_constant) return zero;
  GroupConstants cons = ensure_consts(spec, gauge, cfg, consts);
  const double s = params.s;
  const double expo = params.kernel_exponent(spec.Q());
  const double u0 = u(g);
  const double gn = gauge(g);
  const double need = std::max(1.0, gn + u.effective_radius);
  const int K = outer_levels_for(need, cfg);
  const double H = std::pow(2.0, K);
  const double* gp = g.data();
  const int n = spec.n;

  if (u.support_radius && gn > 2.0 * *u.support_radius) {
    // Outside twice the support the integrand vanishes off the slivers
    // g^{-1} B_R and its inverse; sample their translated bounding boxes as
    // two strata (the second minus the first, so an overlap is not counted
    // twice).
    double R = *u.support_radius;
    Box box1 = translate_box(spec, inverse(spec, g), ball_box(gauge, R));
    Box box2;
    box2.lo = -box1.hi;
    box2.hi = -box1.lo;
    auto in_box1 = [&](const double* z) {
      for (int k = 0; k < n; ++k)
        if (z[k] < box1.lo[k] || z[k] > box1.hi[k]) return false;
      return true;
    };
    auto integrand = [&](const double* z) {
      double p[kMaxDim], zi[kMaxDim];
      spec.multiply_into(gp, z, p);
      double a = u(p);
      for (int k = 0; k < n; ++k) zi[k] = -z[k];
      spec.multiply_into(gp, zi, p);
      double b = u(p);
      if (a == 0.0 && b == 0.0) return 0.0;
      return -(a + b) * std::pow(gauge(z), -expo);
    };
    Estimate e1 = detail::mc_box(box1, cfg, region_id("Ls-far1/" + u.name),
                                 [&](const double* z, SampleRng&) { return integrand(z); });
    Estimate e2 = detail::mc_box(box2, cfg, region_id("Ls-far2/" + u.name),
                                 [&](const double* z, SampleRng&) {
                                   if (in_box1(z)) return 0.0;
                                   return integrand(z);
                                 });
    e1 += e2;
    return e1;
  }

  auto f = [&](const double* z, double nz, SampleRng&) {
    double p[kMaxDim], zi[kMaxDim];
    spec.multiply_into(gp, z, p);
    double a = u(p);
    for (int k = 0; k < n; ++k) zi[k] = -z[k];
    spec.multiply_into(gp, zi, p);
    double b = u(p);
    return (2.0 * u0 - a - b) * std::pow(nz, -expo);
  };
  Estimate total =
      dyadic_kernel_integral(gauge, cfg, "Ls/" + u.name, s, cfg.inner_levels, K, true, f);

  double cf = 2.0 * u0 * std::pow(H, -2.0 * s) / (2.0 * s);
  add_sigma_multiple(total, cf, cons.sigma);
  double amp = std::pow(2.0, K) < need ? u.sup_norm : residual_amplitude(u, H, gn);
  total.tail_bound += 4.0 * amp * cons.sigma.value * std::pow(H, -2.0 * s) / (2.0 * s);
  return total;
}

std::vector<Estimate> eval_Ls_pv(const GroupSpec& spec, const Gauge& gauge,
                                 const FracParams& params, const ScalarField& u, const Vec& g,
                                 const std::vector<double>& eps_list, const QuadratureConfig& cfg,
                                 const GroupConstants* consts) {
  if (eps_list.empty()) return {};
  for (double e : eps_list)
    if (!(e > 0.0)) throw DomainError("principal-value radii must be positive");
  GroupConstants cons = ensure_consts(spec, gauge, cfg, consts);
  const double s = params.s;
  const double expo = params.kernel_exponent(spec.Q());
  const double u0 = u(g);
  const double gn = gauge(g);
  const double need = std::max(1.0, gn + u.effective_radius);
  const int K = outer_levels_for(need, cfg);
  const double H = std::pow(2.0, K);
  const double* gp = g.data();

  // Level edges: the requested radii, then dyadic up to H.
  std::vector<double> edges(eps_list);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  if (edges.back() >= H) throw DomainError("principal-value radius exceeds the exterior cutoff");
  for (double t = edges.back(); t < H; t *= 2.0) edges.push_back(std::min(2.0 * t, H));
  edges.back() = H;

  auto f = [&](const double* z, double nz, SampleRng&) {
    double p[kMaxDim];
    spec.multiply_into(gp, z, p);
    return 2.0 * (u0 - u(p)) * std::pow(nz, -expo);
  };
  std::vector<Estimate> levels;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    levels.push_back(detail::mc_annulus(gauge, edges[i], edges[i + 1], cfg,
                                        region_id("Lspv/" + u.name + "/l" + std::to_string(i)), f));
  }

  double cf = 2.0 * u0 * std::pow(H, -2.0 * s) / (2.0 * s);
  double amp = std::pow(2.0, K) < need ? u.sup_norm : residual_amplitude(u, H, gn);
  std::vector<Estimate> out;
  for (double eps : eps_list) {
    Estimate e;
    e.seed = cfg.seed;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i)
      if (edges[i] >= eps - 1e-15) e += levels[i];
    add_sigma_multiple(e, cf, cons.sigma);
    e.tail_bound += 2.0 * amp * cons.sigma.value * std::pow(H, -2.0 * s) / (2.0 * s);
    out.push_back(e);
  }
  return out;
}

Estimate carre_du_champ(const GroupSpec& spec, const Gauge& gauge, const FracParams& params,
                        const ScalarField& u, const ScalarField& v, const Vec& g,
                        const QuadratureConfig& cfg, const GroupConstants* consts) {
  GroupConstants cons = ensure_consts(spec, gauge, cfg, consts);
  const double s = params.s;
  const double expo = params.kernel_exponent(spec.Q());
  const double u0 = u(g), v0 = v(g);
  const double gn = gauge(g);
  const double reff = std::max(u.effective_radius, v.effective_radius);
  const double need = std::max(1.0, gn + reff);
  const int K = outer_levels_for(need, cfg);
  const double H = std::pow(2.0, K);
  const double* gp = g.data();

  auto f = [&](const double* z, double nz, SampleRng&) {
    double p[kMaxDim];
    spec.multiply_into(gp, z, p);
    return (u0 - u(p)) * (v0 - v(p)) * std::pow(nz, -expo);
  };
  Estimate total = dyadic_kernel_integral(gauge, cfg, "carre/" + u.name + "/" + v.name, s,
                                          cfg.inner_levels, K, true, f);
  double cf = u0 * v0 * std::pow(H, -2.0 * s) / (2.0 * s);
  add_sigma_multiple(total, cf, cons.sigma);
  total.tail_bound += (std::abs(u0) * 1e-12 * v.sup_norm + std::abs(v0) * 1e-12 * u.sup_norm + 1e-24) *
                      cons.sigma.value * std::pow(H, -2.0 * s) / (2.0 * s);
  return total;
}

Estimate l2_norm_sq(const GroupSpec& spec, const Gauge& gauge, const ScalarField& u,
                    const QuadratureConfig& cfg) {
  Box box = ball_box(gauge, std::min(u.effective_radius, 1e280));
  return detail::mc_box(box, cfg, region_id("l2/" + u.name), [&](const double* x, SampleRng&) {
    double val = u(x);
    return val * val;
  });
}

Estimate inner_product_l2(const GroupSpec& spec, const Gauge& gauge, const ScalarField& u,
                          const ScalarField& v, const QuadratureConfig& cfg) {
  double R = std::min(std::max(u.effective_radius, v.effective_radius), 1e280);
  Box box = ball_box(gauge, R);
  // order-normalized stream tag keeps the estimator symmetric in (u, v)
  std::string tag = u.name <= v.name ? "ip/" + u.name + "/" + v.name : "ip/" + v.name + "/" + u.name;
  return detail::mc_box(box, cfg, region_id(tag),
                        [&](const double* x, SampleRng&) { return u(x) * v(x); });
}

Estimate horizontal_energy(const GroupSpec& spec, const Gauge& gauge, const ScalarField& u,
                           const QuadratureConfig& cfg) {
  Box box = ball_box(gauge, std::min(u.effective_radius, 1e280));
  const int n = spec.n;
  return detail::mc_box(box, cfg, region_id("hor-energy/" + u.name),
                        [&](const double* x, SampleRng&) {
                          double A[kMaxDim * kMaxDim], grad[kMaxDim];
                          left_coeffs_into(spec, x, A);
                          field_gradient(spec, u, x, grad);
                          double total = 0.0;
                          for (int i = 0; i < n; ++i) {
                            if (spec.weights[i] != 1.0) continue;
                            double d = 0.0;
                            for (int k = 0; k < n; ++k) d += A[i * n + k] * grad[k];
                            total += d * d;
                          }
                          return total;
                        });
}

namespace {

/// Double-integral estimator: per kernel sample h, an inner coordinate-box
/// sample g, with pair values pair_fn(g, gh, h-related). Covers both the
/// seminorm and the Dirichlet form.
template <class PairFn>
Estimate translated_double_integral(const GroupSpec& spec, const Gauge& gauge,
                                    const QuadratureConfig& cfg, const std::string& tag, double s,
                                    double expo, double reff, int K, PairFn&& pair_fn) {
  Estimate total;
  total.seed = cfg.seed;
  Estimate last_inner;
  const int n = spec.n;
  for (int k = cfg.inner_levels; k >= -K + 1; --k) {
    // k >= 1: inner annuli [2^{-k}, 2^{-k+1}); k <= 0: outer [2^{-k}, 2^{-k+1}).
    double hi = std::pow(2.0, 1 - k), lo = 0.5 * hi;
    Box gbox = ball_box(gauge, reff + hi, cfg.box_margin);
    double gvol = gbox.volume();
    Estimate e = detail::mc_annulus(
        gauge, lo, hi, cfg, region_id(tag + "/l" + std::to_string(k)),
        [&](const double* h, double nh, SampleRng& rng) {
          double gx[kMaxDim], gh[kMaxDim];
          for (int j = 0; j < n; ++j)
            gx[j] = gbox.lo[j] + (gbox.hi[j] - gbox.lo[j]) * rng.next_u01();
          spec.multiply_into(gx, h, gh);
          return gvol * pair_fn(gx, gh) * std::pow(nh, -expo);
        });
    if (k == cfg.inner_levels) last_inner = e;
    total += e;
  }
  double rho = std::pow(2.0, -(2.0 - 2.0 * s));
  Estimate t = last_inner.scaled(rho / (1.0 - rho));
  total += t;
  total.tail_bound += std::abs(t.value) * std::pow(2.0, -cfg.inner_levels + 2);
  return total;
}

}  // namespace

Estimate seminorm_sq(const GroupSpec& spec, const Gauge& gauge, const FracParams& params,
                     const ScalarField& u, const QuadratureConfig& cfg,
                     const GroupConstants* consts) {
  Estimate zero;
  zero.seed = cfg.seed;
  if (u.is_constant && u.sup_norm == 0.0) return zero;
  if (u.effective_radius > 1e290)
    throw DomainError("seminorm needs a supported or decaying field");
  GroupConstants cons = ensure_consts(spec, gauge, cfg, consts);
  const double s = params.s;
  const double expo = params.kernel_exponent(spec.Q());
  const double R = u.effective_radius;
  const int K = outer_levels_for(std::max(1.0, 2.0 * R), cfg);
  const double H = std::pow(2.0, K);

  Estimate l2 = l2_norm_sq(spec, gauge, u, cfg);
  Estimate total = translated_double_integral(
      spec, gauge, cfg, "sem/" + u.name, s, expo, R, K, [&](const double* gx, const double* gh) {
        double d = u(gx) - u(gh);
        return d * d;
      });
  // Beyond H >= 2R the translates have disjoint supports and the inner
  // integral is exactly 2 ||u||_2^2.
  double cf = 2.0 * std::pow(H, -2.0 * s) / (2.0 * s);
  total.value += cf * cons.sigma.value * l2.value;
  total.std_err = std::hypot(total.std_err,
                             cf * std::hypot(cons.sigma.value * l2.std_err,
                                             l2.value * cons.sigma.std_err));
  total.tail_bound += cf * (cons.sigma.tail_bound * l2.value + cons.sigma.value * l2.tail_bound) +
                      1e-10 * std::abs(total.value);
  total.value = std::max(total.value, 0.0);
  return total;
}

Estimate seminorm(const GroupSpec& spec, const Gauge& gauge, const FracParams& params,
                  const ScalarField& u, const QuadratureConfig& cfg, const GroupConstants* consts) {
  Estimate sq = seminorm_sq(spec, gauge, params, u, cfg, consts);
  Estimate e;
  e.seed = sq.seed;
  e.n_evals = sq.n_evals;
  e.budget_exceeded = sq.budget_exceeded;
  e.value = std::sqrt(std::max(sq.value, 0.0));
  double denom = std::max(2.0 * e.value, 1e-300);
  e.std_err = sq.std_err / denom;
  e.tail_bound = sq.tail_bound / denom;
  return e;
}

Estimate dirichlet_form(const GroupSpec& spec, const Gauge& gauge, const FracParams& params,
                        const ScalarField& u, const ScalarField& v, const QuadratureConfig& cfg,
                        const GroupConstants* consts) {
  GroupConstants cons = ensure_consts(spec, gauge, cfg, consts);
  const double s = params.s;
  const double expo = params.kernel_exponent(spec.Q());
  const double R = std::max(u.effective_radius, v.effective_radius);
  if (R > 1e290) throw DomainError("dirichlet form needs supported or decaying fields");
  const int K = outer_levels_for(std::max(1.0, 2.0 * R), cfg);
  const double H = std::pow(2.0, K);

  Estimate ip = inner_product_l2(spec, gauge, u, v, cfg);
  std::string tag =
      u.name <= v.name ? "form/" + u.name + "/" + v.name : "form/" + v.name + "/" + u.name;
  Estimate total = translated_double_integral(
      spec, gauge, cfg, tag, s, expo, R, K,
      [&](const double* gx, const double* gh) { return (u(gx) - u(gh)) * (v(gx) - v(gh)); });
  double cf = 2.0 * std::pow(H, -2.0 * s) / (2.0 * s);
  total.value += cf * cons.sigma.value * ip.value;
  total.std_err = std::hypot(
      total.std_err, cf * std::hypot(cons.sigma.value * ip.std_err, ip.value * cons.sigma.std_err));
  total.tail_bound += cf * (cons.sigma.tail_bound * std::abs(ip.value) +
                            cons.sigma.value * ip.tail_bound) +
                      1e-10 * std::abs(total.value);
  return total;
}

Estimate form_symmetry_residual(const GroupSpec& spec, const Gauge& gauge,
                                const FracParams& params, const ScalarField& u,
                                const ScalarField& v, const QuadratureConfig& cfg,
                                const GroupConstants* consts) {
  const double s = params.s;
  const double expo = params.kernel_exponent(spec.Q());
  const double R = std::max(u.effective_radius, v.effective_radius);
  if (R > 1e290) throw DomainError("residual needs supported or decaying fields");
  const int K = outer_levels_for(std::max(1.0, 2.0 * R), cfg);
  const int n = spec.n;

  // Per (g,h) pair: Dirichlet integrand minus the v * L_s u integrand. The
  // h-integrals of the two agree identically, so only shared-sample noise
  // remains, and the closed-form outer contributions cancel exactly.
  Estimate res;
  res.seed = cfg.seed;
  Estimate last_inner;
  for (int k = cfg.inner_levels; k >= -K + 1; --k) {
    double hi = std::pow(2.0, 1 - k), lo = 0.5 * hi;
    Box gbox = ball_box(gauge, R + hi, cfg.box_margin);
    double gvol = gbox.volume();
    Estimate e = detail::mc_annulus(
        gauge, lo, hi, cfg, region_id("formres/" + u.name + "/l" + std::to_string(k)),
        [&](const double* h, double nh, SampleRng& rng) {
          double gx[kMaxDim], gh[kMaxDim], hinv[kMaxDim], ghm[kMaxDim];
          for (int j = 0; j < n; ++j)
            gx[j] = gbox.lo[j] + (gbox.hi[j] - gbox.lo[j]) * rng.next_u01();
          spec.multiply_into(gx, h, gh);
          for (int j = 0; j < n; ++j) hinv[j] = -h[j];
          spec.multiply_into(gx, hinv, ghm);
          double a = (u(gx) - u(gh)) * (v(gx) - v(gh));
          double b = v(gx) * (2.0 * u(gx) - u(gh) - u(ghm));
          return gvol * (a - b) * std::pow(nh, -expo);
        });
    if (k == cfg.inner_levels) last_inner = e;
    res += e;
  }
  double rho = std::pow(2.0, -(2.0 - 2.0 * s));
  Estimate t = last_inner.scaled(rho / (1.0 - rho));
  res += t;
  res.tail_bound += std::abs(t.value);
  return res;
}

Estimate product_rule_check(const GroupSpec& spec, const Gauge& gauge, const FracParams& params,
                            const ScalarField& u, const ScalarField& v, const Vec& g,
                            const QuadratureConfig& cfg, const GroupConstants* consts) {
  const double s = params.s;
  const double expo = params.kernel_exponent(spec.Q());
  const double u0 = u(g), v0 = v(g);
  const double gn = gauge(g);
  const double reff = std::max(u.effective_radius, v.effective_radius);
  const int K = outer_levels_for(std::max(1.0, gn + reff), cfg);
  const double* gp = g.data();
  const int n = spec.n;

  // All four terms share one sample stream; the exterior closed forms cancel.
  auto f = [&](const double* z, double nz, SampleRng&) {
    double p[kMaxDim], zi[kMaxDim], q[kMaxDim];
    spec.multiply_into(gp, z, p);
    for (int k = 0; k < n; ++k) zi[k] = -z[k];
    spec.multiply_into(gp, zi, q);
    double up = u(p), um = u(q), vp = v(p), vm = v(q);
    double lhs = 2.0 * u0 * v0 - up * vp - um * vm;
    double t1 = u0 * (2.0 * v0 - vp - vm);
    double t2 = v0 * (2.0 * u0 - up - um);
    double t3 = 2.0 * (u0 - up) * (v0 - vp);
    return (lhs - t1 - t2 + t3) * std::pow(nz, -expo);
  };
  Estimate res = dyadic_kernel_integral(gauge, cfg, "prodrule/" + u.name + "/" + v.name, s,
                                        cfg.inner_levels, K, false, f);
  // Inner remainder of the residual integrand, closed like the others but
  // charged to the bound since the mean is already near zero.
  double rho = std::pow(2.0, -(2.0 - 2.0 * s));
  res.tail_bound += (std::abs(res.value) + 2.0 * res.std_err) * rho / (1.0 - rho) *
                    std::pow(2.0, -(2.0 - 2.0 * s) * cfg.inner_levels);
  return res;
}

std::vector<LimitProbeRow> limit_probe(const GroupSpec& spec, const Gauge& gauge,
                                       const ScalarField& u, const std::vector<Vec>& points,
                                       const std::vector<double>& s_grid,
                                       const QuadratureConfig& cfg, const GroupConstants* consts) {
  if (!gauge.horizontal_radial() && !gauge.horizontal_even())
    throw SymmetryViolation("limit probe needs a horizontally radial or even gauge");
  GroupConstants cons = ensure_consts(spec, gauge, cfg, consts);
  const int m = spec.m();
  const double sig = cons.sigma.value;
  const double tau = cons.tau.value;

  // targets are compared at fixed relative tolerances, so buy them extra
  // precision; they are single integrals and stay cheap
  Estimate l2 = l2_norm_sq(spec, gauge, u, cfg.scaled(4.0));
  Estimate hor = horizontal_energy(spec, gauge, u, cfg.scaled(4.0));

  std::vector<LimitProbeRow> rows;
  for (double sv : s_grid) {
    FracParams params(sv);
    int family = sv < 0.5 ? 0 : 1;
    double factor = family == 0 ? sv / sig : 2.0 * m * (1.0 - sv) / tau;
    double factor_rel = family == 0 ? cons.sigma.std_err / sig : cons.tau.std_err / tau;

    for (const Vec& g : points) {
      Estimate op = eval_Ls(spec, gauge, params, u, g, cfg, &cons);
      LimitProbeRow row;
      row.s = sv;
      row.point = g;
      row.family = family;
      row.normalized_value = factor * op.value;
      row.normalized_err =
          std::abs(factor) * op.half_width() + std::abs(row.normalized_value) * 2.0 * factor_rel;
      if (family == 0) {
        row.target = u(g);
      } else if (gauge.horizontal_radial()) {
        row.target = -horizontal_laplacian(spec, u, g);
      } else {
        double t = 0.0;
        for (int i = 0; i < spec.n; ++i) {
          if (spec.weights[i] != 1.0) continue;
          double w = cons.tau_hat[static_cast<std::size_t>(i)].value / (tau / m);
          t -= w * flow_second_derivative(spec, i, i, u, g);
        }
        row.target = t;
      }
      row.rel_err = std::abs(row.normalized_value - row.target) /
                    std::max(std::abs(row.target), 1e-12);
      rows.push_back(row);
    }

    // near s = 1 the extrapolated inner tail amplifies the level noise;
    // spend more samples there
    Estimate sq = seminorm_sq(spec, gauge, params, u, cfg.scaled(sv >= 0.9 ? 4.0 : 1.0), &cons);
    LimitProbeRow srow;
    srow.s = sv;
    srow.seminorm_row = true;
    srow.family = family;
    srow.normalized_value = factor * sq.value;
    srow.normalized_err =
        std::abs(factor) * sq.half_width() + std::abs(srow.normalized_value) * 2.0 * factor_rel;
    srow.target = family == 0 ? l2.value : hor.value;
    srow.rel_err =
        std::abs(srow.normalized_value - srow.target) / std::max(std::abs(srow.target), 1e-12);
    rows.push_back(srow);
  }
  return rows;
}

std::vector<DecayRow> decay_profile(const GroupSpec& spec, const Gauge& gauge,
                                    const FracParams& params, const ScalarField& u,
                                    const std::vector<double>& radii, const QuadratureConfig& cfg,
                                    const GroupConstants* consts) {
  if (!u.support_radius) throw DomainError("decay profile needs a declared support radius");
  GroupConstants cons = ensure_consts(spec, gauge, cfg, consts);
  const double R = *u.support_radius;
  const double expo = params.kernel_exponent(spec.Q());

  // Probe direction: first weight-one axis, pushed to the requested radius.
  Vec e1 = Vec::Zero(spec.n);
  e1[0] = 1.0;
  double ne1 = gauge(e1);

  std::vector<DecayRow> rows;
  for (double radius : radii) {
    if (radius < 2.0 * R) throw DomainError("decay radii must be at least 2R");
    Vec p = dilate(spec, radius / ne1, e1);
    DecayRow row;
    row.radius = radius;
    row.point = p;
    // far probes only hit the support on a sliver of the relevant annuli;
    // scale the budget with the vanishing hit fraction
    double boost = std::clamp(std::pow(radius / (2.0 * R), spec.Q()) / 4.0, 1.0, 32.0);
    Estimate op = eval_Ls(spec, gauge, params, u, p,
                          cfg.with_samples(static_cast<long long>(cfg.n_samples * boost)), &cons);
    double scale = std::pow(radius, expo);
    row.scaled = op.scaled(scale);
    row.scaled.value = std::abs(row.scaled.value);
    row.bound = std::pow(2.0, expo + 1.0) * cons.sigma.value * std::pow(R, spec.Q()) * u.sup_norm;
    row.bound_rel_err = (2.0 * cons.sigma.std_err + cons.sigma.tail_bound) / cons.sigma.value;
    // Far-field route: the operator reduces to -2 * integral over the support
    // of u(h) |h^{-1} g|^{-Q-2s}.
    Estimate direct = integrate_haar_annulus(
        spec, gauge,
        [&](const double* h) {
          double hinv[kMaxDim], d[kMaxDim];
          for (int k = 0; k < spec.n; ++k) hinv[k] = -h[k];
          spec.multiply_into(hinv, p.data(), d);
          return u(h) * std::pow(gauge(d), -expo);
        },
        0.0, R, cfg, "decay-direct/" + std::to_string(radius));
    row.direct_scaled = direct.scaled(-2.0 * scale);
    row.direct_scaled.value = std::abs(row.direct_scaled.value);
    rows.push_back(row);
  }
  return rows;
}

Estimate translation_difference(const GroupSpec& spec, const Gauge& gauge,
                                const FracParams& params, const ScalarField& u, const Vec& h,
                                const QuadratureConfig& cfg, const Estimate* seminorm_est,
                                const GroupConstants* consts) {
  Estimate sem;
  if (seminorm_est)
    sem = *seminorm_est;
  else
    sem = seminorm(spec, gauge, params, u, cfg, consts);
  if (!(sem.value > 0.0)) throw ZeroField("translation difference needs a nonzero seminorm");

  const double nh = gauge(h);
  const int n = spec.n;
  Box box = ball_box(gauge, std::min(u.effective_radius, 1e280) + nh);
  Estimate n2 = detail::mc_box(box, cfg, region_id("transdiff/" + u.name), [&](const double* x, SampleRng&) {
    double p[kMaxDim];
    spec.multiply_into(x, h.data(), p);
    double d = u(p) - u(x);
    return d * d;
  });
  (void)n;

  Estimate out;
  out.seed = cfg.seed;
  out.n_evals = n2.n_evals + sem.n_evals;
  if (nh <= 0.0) {  // h = e
    out.value = 0.0;
    return out;
  }
  double num = std::sqrt(std::max(n2.value, 0.0));
  out.value = num / (std::pow(nh, params.s) * sem.value);
  double rel_num = n2.value > 0 ? 0.5 * n2.std_err / n2.value : 0.0;
  double rel_den = sem.std_err / sem.value;
  out.std_err = out.value * std::hypot(rel_num, rel_den);
  double tail_rel = (n2.value > 0 ? 0.5 * n2.tail_bound / n2.value : 0.0) +
                    sem.tail_bound / sem.value;
  out.tail_bound = out.value * tail_rel;
  return out;
}

}  // namespace homfrac

#include "homfrac/quadrature.hpp"

#include <cmath>

namespace homfrac {

Box ball_box(const Gauge& gauge, double R, double margin) {
  const GroupSpec& spec = gauge.spec();
  Vec hw = gauge.unit_ball_halfwidths();
  Box b;
  b.lo = Vec(spec.n);
  b.hi = Vec(spec.n);
  for (int k = 0; k < spec.n; ++k) {
    double w = hw[k] * std::pow(R, spec.weights[k]) * margin;
    b.lo[k] = -w;
    b.hi[k] = w;
  }
  return b;
}

Box translate_box(const GroupSpec& spec, const Vec& a, const Box& b) {
  const int n = spec.n;
  // center |a_j| and half-widths of b
  Vec A = a.cwiseAbs();
  Vec c = 0.5 * (b.lo + b.hi);
  Vec B = 0.5 * (b.hi - b.lo) + c.cwiseAbs();  // |p_j| <= B_j on the box

  // |[x,y]|_k <= sum |c_ij^k| (X_i Y_j + X_j Y_i) for |x| <= X, |y| <= Y
  auto bracket_bound = [&](const Vec& X, const Vec& Y) {
    Vec out = Vec::Zero(n);
    for (const auto& t : spec.brackets)
      out[t.k] += std::abs(t.c) * (X[t.i] * Y[t.j] + X[t.j] * Y[t.i]);
    return out;
  };
  Vec b1 = bracket_bound(A, B);    // [a, p]
  Vec b2 = bracket_bound(A, b1);   // [a, [a, p]]
  Vec b3 = bracket_bound(B, b1);   // [p, [a, p]]
  Vec b4 = bracket_bound(B, b2);   // [p, [a, [a, p]]]

  Box out;
  out.lo = Vec(n);
  out.hi = Vec(n);
  for (int k = 0; k < n; ++k) {
    double center = a[k] + c[k];
    double hw = 0.5 * (b.hi[k] - b.lo[k]) + 0.5 * b1[k] + (b2[k] + b3[k]) / 12.0 + b4[k] / 24.0 +
                1e-12;
    out.lo[k] = center - hw;
    out.hi[k] = center + hw;
  }
  return out;
}

Estimate integrate_haar_box(const GroupSpec& spec, const Integrand& f, const Box& box,
                            const QuadratureConfig& cfg, std::string_view label) {
  return detail::mc_box(box, cfg, region_id(label), [&](const double* x, SampleRng&) { return f(x); });
}

Estimate integrate_haar_annulus(const GroupSpec& spec, const Gauge& gauge, const Integrand& f,
                                double r, double R, const QuadratureConfig& cfg,
                                std::string_view label) {
  if (!(0.0 <= r && r < R)) throw DomainError("annulus needs 0 <= r < R");
  return detail::mc_annulus(gauge, r, R, cfg, region_id(label),
                            [&](const double* x, double, SampleRng&) { return f(x); });
}

Estimate vol_unit_ball(const GroupSpec& spec, const Gauge& gauge, const QuadratureConfig& cfg) {
  return detail::mc_annulus(gauge, 0.0, 1.0, cfg, region_id("vol-B1"),
                            [](const double*, double, SampleRng&) { return 1.0; });
}

Estimate sigma_Q(const GroupSpec& spec, const Gauge& gauge, const QuadratureConfig& cfg) {
  return vol_unit_ball(spec, gauge, cfg).scaled(spec.Q());
}

Estimate sigma_Q_exterior(const GroupSpec& spec, const Gauge& gauge, double s,
                          const QuadratureConfig& cfg) {
  const double Q = spec.Q();
  const double expo = Q + 2.0 * s;
  Estimate total;
  total.seed = cfg.seed;
  Estimate last;
  for (int k = 0; k < cfg.outer_levels; ++k) {
    double lo = std::pow(2.0, k), hi = 2.0 * lo;
    last = detail::mc_annulus(gauge, lo, hi, cfg, region_id("sigma-ext/k=" + std::to_string(k)),
                              [&](const double*, double nx, SampleRng&) {
                                return std::pow(nx, -expo);
                              });
    total += last;
  }
  // Levels scale by exactly 2^{-2s}; close the series from the last one.
  double rho = std::pow(2.0, -2.0 * s);
  total += last.scaled(rho / (1.0 - rho));
  return total.scaled(2.0 * s);
}

Estimate tau_m(const GroupSpec& spec, const Gauge& gauge, const QuadratureConfig& cfg) {
  if (spec.m() < 1) throw DomainError("tau_m needs at least one weight-one coordinate");
  if (!gauge.horizontal_radial() && !gauge.horizontal_even())
    throw SymmetryViolation("tau_m needs a horizontally radial or even gauge");
  const int n = spec.n;
  Estimate e = detail::mc_annulus(gauge, 0.0, 1.0, cfg, region_id("tau-m"),
                                  [&](const double* x, double, SampleRng&) {
                                    double v = 0.0;
                                    for (int k = 0; k < n; ++k)
                                      if (spec.weights[k] == 1.0) v += x[k] * x[k];
                                    return v;
                                  });
  return e.scaled(spec.Q() + 2.0);
}

std::vector<Estimate> tau_hat_sq(const GroupSpec& spec, const Gauge& gauge,
                                 const QuadratureConfig& cfg) {
  std::vector<Estimate> out(static_cast<std::size_t>(spec.n));
  for (int i = 0; i < spec.n; ++i) {
    if (spec.weights[i] != 1.0) continue;
    Estimate e = detail::mc_annulus(gauge, 0.0, 1.0, cfg, region_id("tau-hat/i=" + std::to_string(i)),
                                    [&](const double* x, double, SampleRng&) { return x[i] * x[i]; });
    out[static_cast<std::size_t>(i)] = e.scaled(spec.Q() + 2.0);
  }
  return out;
}

Estimate moment_integral(const GroupSpec& spec, const Gauge& gauge, int i, int j, double s,
                         const QuadratureConfig& cfg) {
  if (i < 0 || i >= spec.n || j < 0 || j >= spec.n || spec.weights[i] != 1.0 ||
      spec.weights[j] != 1.0)
    throw DomainError("moment integral needs weight-one coordinate indices");
  if (!(s > 0.0 && s < 1.0)) throw DomainError("moment integral needs 0 < s < 1");
  const double expo = spec.Q() + 2.0 * s;
  Estimate total;
  total.seed = cfg.seed;
  Estimate last;
  for (int k = 1; k <= cfg.inner_levels; ++k) {
    double hi = std::pow(2.0, 1 - k), lo = 0.5 * hi;
    last = detail::mc_annulus(
        gauge, lo, hi, cfg, region_id("moment/k=" + std::to_string(k)),
        [&](const double* x, double nx, SampleRng&) { return x[i] * x[j] * std::pow(nx, -expo); });
    total += last;
  }
  // x_i x_j is exactly 2-homogeneous here, so levels scale by 2^{-(2-2s)}.
  double rho = std::pow(2.0, -(2.0 - 2.0 * s));
  total += last.scaled(rho / (1.0 - rho));
  return total;
}

Estimate annulus_power_integral(const GroupSpec& spec, const Gauge& gauge, double gamma, double r,
                                double R, const QuadratureConfig& cfg) {
  if (!(0.0 < r && r < R)) throw DomainError("annulus power integral needs 0 < r < R");
  Estimate total;
  total.seed = cfg.seed;
  int levels = 0;
  for (double lo = r; lo < R; lo *= 2.0) ++levels;
  for (int k = 0; k < levels; ++k) {
    double lo = r * std::pow(2.0, k);
    double hi = std::min(2.0 * lo, R);
    total += detail::mc_annulus(
        gauge, lo, hi, cfg, region_id("power/k=" + std::to_string(k)),
        [&](const double*, double nx, SampleRng&) { return std::pow(nx, -gamma); });
  }
  return total;
}

double annulus_power_closed_form(double Q, double sigma, double gamma, double r, double R) {
  if (std::abs(gamma - Q) < 1e-14) return sigma * std::log(R / r);
  double p = Q - gamma;
  return sigma / p * (std::pow(R, p) - std::pow(r, p));
}

GroupConstants compute_constants(const GroupSpec& spec, const Gauge& gauge,
                                 const QuadratureConfig& cfg) {
  GroupConstants c;
  c.vol_B1 = vol_unit_ball(spec, gauge, cfg);
  c.sigma = c.vol_B1.scaled(spec.Q());
  c.sigma_ext = sigma_Q_exterior(spec, gauge, 0.5, cfg);
  if (spec.m() >= 1 && (gauge.horizontal_radial() || gauge.horizontal_even()))
    c.tau = tau_m(spec, gauge, cfg);
  c.tau_hat = tau_hat_sq(spec, gauge, cfg);
  return c;
}

}  // namespace homfrac

#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "homfrac/gauge.hpp"
#include "homfrac/group.hpp"
#include "homfrac/parallel.hpp"
#include "homfrac/rng.hpp"
#include "homfrac/types.hpp"

namespace homfrac {

struct QuadratureConfig {
  long long n_samples = 200000;  // per region / per annulus
  std::uint64_t seed = 20240901ULL;
  int inner_levels = 20;  // dyadic annuli below |h| = 1
  int outer_levels = 20;  // and above
  double box_margin = 1.0;
  double target_rel_err = 0.01;
  int threads = 0;  // 0 = hardware

  QuadratureConfig with_samples(long long n) const {
    QuadratureConfig c = *this;
    c.n_samples = n;
    return c;
  }
  QuadratureConfig with_seed(std::uint64_t s) const {
    QuadratureConfig c = *this;
    c.seed = s;
    return c;
  }
  QuadratureConfig scaled(double f) const {
    QuadratureConfig c = *this;
    c.n_samples = std::max<long long>(100, static_cast<long long>(c.n_samples * f));
    return c;
  }
};

struct Box {
  Vec lo, hi;
  double volume() const {
    double v = 1.0;
    for (int k = 0; k < lo.size(); ++k) v *= hi[k] - lo[k];
    return v;
  }
};

/// Coordinate bounding box of the gauge ball B_R (exact for the shipped
/// variants: half-width_j = w_j R^{d_j}).
Box ball_box(const Gauge& gauge, double R, double margin = 1.0);

/// Sound coordinate bounding box of the left translate {a p : p in b},
/// by interval bounds on the truncated BCH series.
Box translate_box(const GroupSpec& spec, const Vec& a, const Box& b);

/// Box centered on a point with gauge-ball half-widths (covers g * B_R only
/// when used with the translated sampler below; see sample in ball).
namespace detail {

struct MeanAcc {
  double s = 0.0, s2 = 0.0;
};

/// Plain Monte Carlo over a coordinate box. The callback receives the sample
/// point and the per-sample stream (for estimators that draw more variates).
template <class F>
Estimate mc_box(const Box& box, const QuadratureConfig& cfg, std::uint64_t region, F&& f) {
  const int n = static_cast<int>(box.lo.size());
  const double V = box.volume();
  const long long N = std::max<long long>(cfg.n_samples, 100);
  auto blocks = run_blocks<MeanAcc>(N, 8192, cfg.threads, [&](long long, long long lo, long long hi) {
    MeanAcc a;
    double x[kMaxDim];
    for (long long i = lo; i < hi; ++i) {
      SampleRng rng(cfg.seed, region, static_cast<std::uint64_t>(i));
      for (int k = 0; k < n; ++k) x[k] = box.lo[k] + (box.hi[k] - box.lo[k]) * rng.next_u01();
      double v = f(x, rng);
      a.s += v;
      a.s2 += v * v;
    }
    return a;
  });
  double s = 0.0, s2 = 0.0;
  for (const auto& a : blocks) {
    s += a.s;
    s2 += a.s2;
  }
  double mean = s / static_cast<double>(N);
  double var = std::max(0.0, s2 / static_cast<double>(N) - mean * mean);
  Estimate e;
  e.value = V * mean;
  e.std_err = V * std::sqrt(var / static_cast<double>(N));
  e.n_evals = N;
  e.seed = cfg.seed;
  e.budget_exceeded = std::abs(e.value) > 0 && e.std_err > cfg.target_rel_err * std::abs(e.value);
  return e;
}

/// Monte Carlo of f over the gauge annulus {r <= |h| < R} with indicator
/// rejection from the exact bounding box; f is evaluated inside only.
template <class F>
Estimate mc_annulus(const Gauge& gauge, double r, double R, const QuadratureConfig& cfg,
                    std::uint64_t region, F&& f) {
  Box box = ball_box(gauge, R, cfg.box_margin);
  return mc_box(box, cfg, region, [&](const double* x, SampleRng& rng) {
    double nx = gauge(x);
    if (nx < r || nx >= R) return 0.0;
    return f(x, nx, rng);
  });
}

}  // namespace detail

using Integrand = std::function<double(const double*)>;

/// Haar integral (Lebesgue in first-kind coordinates) over a coordinate box.
Estimate integrate_haar_box(const GroupSpec& spec, const Integrand& f, const Box& box,
                            const QuadratureConfig& cfg, std::string_view label = "box");

/// Haar integral over the gauge annulus {r <= |h| < R}; r = 0 gives the ball.
Estimate integrate_haar_annulus(const GroupSpec& spec, const Gauge& gauge, const Integrand& f,
                                double r, double R, const QuadratureConfig& cfg,
                                std::string_view label = "annulus");

/// |B_1| for the bound gauge.
Estimate vol_unit_ball(const GroupSpec& spec, const Gauge& gauge, const QuadratureConfig& cfg);

/// Surface measure of the unit gauge sphere, as Q * |B_1|.
Estimate sigma_Q(const GroupSpec& spec, const Gauge& gauge, const QuadratureConfig& cfg);

/// Independent route: 2s * integral over {|h| >= 1} of |h|^{-Q-2s}, with the
/// dyadic tail closed by exact-ratio extrapolation.
Estimate sigma_Q_exterior(const GroupSpec& spec, const Gauge& gauge, double s,
                          const QuadratureConfig& cfg);

/// (Q+2) * integral over B_1 of sum_{d_i=1} x_i^2, which equals the
/// horizontal second moment of the unit sphere.
Estimate tau_m(const GroupSpec& spec, const Gauge& gauge, const QuadratureConfig& cfg);

/// Per-coordinate sphere moments (Q+2) * integral over B_1 of x_i^2 for the
/// weight-one coordinates (indexed as in the group basis; others zero).
std::vector<Estimate> tau_hat_sq(const GroupSpec& spec, const Gauge& gauge,
                                 const QuadratureConfig& cfg);

/// integral over B_1 of x_i x_j / |h|^{Q+2s}.
Estimate moment_integral(const GroupSpec& spec, const Gauge& gauge, int i, int j, double s,
                         const QuadratureConfig& cfg);

/// integral over {r < |g| < R} of |g|^{-gamma}.
Estimate annulus_power_integral(const GroupSpec& spec, const Gauge& gauge, double gamma, double r,
                                double R, const QuadratureConfig& cfg);

/// Closed form the previous integral must match.
double annulus_power_closed_form(double Q, double sigma, double gamma, double r, double R);

struct GroupConstants {
  Estimate vol_B1;
  Estimate sigma;      // Q |B_1|
  Estimate sigma_ext;  // exterior-kernel route, for cross-checks
  Estimate tau;
  std::vector<Estimate> tau_hat;  // per-coordinate, weight-one entries only
};

GroupConstants compute_constants(const GroupSpec& spec, const Gauge& gauge,
                                 const QuadratureConfig& cfg);

}  // namespace homfrac

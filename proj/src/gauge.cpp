#include "homfrac/gauge.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "homfrac/rng.hpp"

namespace homfrac {

namespace {

bool weights_are_heisenberg_type(const GroupSpec& s) {
  // All weights in {1,2}, at least one of each.
  bool has2 = false;
  for (int j = 0; j < s.n; ++j) {
    double d = s.weights[j];
    if (std::abs(d - 1.0) > 1e-12 && std::abs(d - 2.0) > 1e-12) return false;
    if (std::abs(d - 2.0) <= 1e-12) has2 = true;
  }
  return has2 && s.m() >= 1;
}

double ipow(double x, int e) {
  double r = 1.0;
  while (e > 0) {
    if (e & 1) r *= x;
    x *= x;
    e >>= 1;
  }
  return r;
}

}  // namespace

Gauge Gauge::koranyi(const GroupSpec& spec) {
  if (!weights_are_heisenberg_type(spec))
    throw GaugeGroupMismatch("koranyi gauge needs weights in {1,2} with a nontrivial center");
  Gauge g;
  g.spec_ = spec;
  g.kind_ = GaugeKind::koranyi;
  g.horizontal_radial_ = true;
  g.horizontal_even_ = true;
  return g;
}

Gauge Gauge::ball(const GroupSpec& spec, double r) {
  if (!(r > 0.0)) throw DomainError("ball gauge radius must be positive");
  Gauge g;
  g.spec_ = spec;
  g.kind_ = GaugeKind::ball_gauge;
  g.r_ = r;
  g.horizontal_radial_ = true;  // poly-radial in each weight layer
  g.horizontal_even_ = true;
  return g;
}

Gauge Gauge::parabolic(const GroupSpec& spec) {
  if (spec.n != 2 || !spec.abelian() || std::abs(spec.weights[0] - 1.0) > 1e-12 ||
      std::abs(spec.weights[1] - 2.0) > 1e-12)
    throw GaugeGroupMismatch("parabolic gauge is defined on the abelian plane with weights (1,2)");
  Gauge g;
  g.spec_ = spec;
  g.kind_ = GaugeKind::parabolic;
  g.horizontal_radial_ = true;  // m = 1, evenness in x is all that is needed
  g.horizontal_even_ = true;
  return g;
}

Gauge Gauge::euclidean_power(const GroupSpec& spec) {
  long long L = 1;
  for (int j = 0; j < spec.n; ++j) {
    double d = spec.weights[j];
    long long di = std::llround(d);
    if (std::abs(d - static_cast<double>(di)) > 1e-12 || di < 1)
      throw GaugeGroupMismatch("euclidean_power gauge needs positive integer weights");
    L = std::lcm(L, di);
  }
  Gauge g;
  g.spec_ = spec;
  g.kind_ = GaugeKind::euclidean_power;
  g.lcm_weight_ = static_cast<int>(L);
  g.horizontal_even_ = true;
  g.horizontal_radial_ = (L == 1) || spec.m() <= 1;
  return g;
}

Gauge Gauge::parse(const GroupSpec& spec, const std::string& token) {
  std::string head = token;
  std::string rest;
  if (auto pos = token.find(':'); pos != std::string::npos) {
    head = token.substr(0, pos);
    rest = token.substr(pos + 1);
  }
  if (head == "koranyi") return koranyi(spec);
  if (head == "ball_gauge" || head == "ball") return ball(spec, rest.empty() ? 0.5 : std::stod(rest));
  if (head == "parabolic") return parabolic(spec);
  if (head == "euclidean_power" || head == "euclidean") return euclidean_power(spec);
  throw GaugeGroupMismatch("unknown gauge '" + token + "'");
}

std::string Gauge::label() const {
  switch (kind_) {
    case GaugeKind::koranyi: return "koranyi";
    case GaugeKind::ball_gauge: return "ball_gauge:" + std::to_string(r_);
    case GaugeKind::parabolic: return "parabolic";
    case GaugeKind::euclidean_power: return "euclidean_power";
  }
  return "?";
}

double Gauge::ball_eval(const double* x) const {
  const int n = spec_.n;
  // Bracketing start: lambda0 = max_j |x_j|^{1/d_j}.
  double lam0 = 0.0;
  for (int j = 0; j < n; ++j) {
    double a = std::abs(x[j]);
    if (a > 0.0) lam0 = std::max(lam0, std::pow(a, 1.0 / spec_.weights[j]));
  }
  if (lam0 == 0.0) return 0.0;
  auto phi = [&](double lam) {
    double s = -r_ * r_;
    for (int j = 0; j < n; ++j) {
      double p = x[j] / std::pow(lam, spec_.weights[j]);
      s += p * p;
    }
    return s;
  };
  double lo = lam0, hi = lam0;
  int guard = 0;
  if (phi(lam0) > 0.0) {
    do {
      hi *= 2.0;
      if (++guard > 200) throw RootBracketFailure("ball gauge bracketing failed (upward)");
    } while (phi(hi) > 0.0);
    lo = hi / 2.0;
  } else {
    do {
      lo *= 0.5;
      if (++guard > 200) throw RootBracketFailure("ball gauge bracketing failed (downward)");
    } while (phi(lo) <= 0.0);
    hi = lo * 2.0;
  }
  while (hi - lo > 1e-12 * hi) {
    double mid = 0.5 * (lo + hi);
    (phi(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double Gauge::operator()(const double* x) const {
  const int n = spec_.n;
  switch (kind_) {
    case GaugeKind::koranyi: {
      double z2 = 0.0, sig2 = 0.0;
      for (int j = 0; j < n; ++j) {
        if (spec_.weights[j] == 1.0)
          z2 += x[j] * x[j];
        else
          sig2 += x[j] * x[j];
      }
      return std::pow(z2 * z2 + 16.0 * sig2, 0.25);
    }
    case GaugeKind::ball_gauge:
      return ball_eval(x);
    case GaugeKind::parabolic:
      return std::abs(x[0]) + std::sqrt(std::abs(x[1]));
    case GaugeKind::euclidean_power: {
      double s = 0.0;
      for (int j = 0; j < n; ++j) {
        int e = 2 * lcm_weight_ / static_cast<int>(std::llround(spec_.weights[j]));
        s += ipow(x[j], e);
      }
      return std::pow(s, 0.5 / lcm_weight_);
    }
  }
  return 0.0;
}

Vec Gauge::unit_ball_halfwidths() const {
  const int n = spec_.n;
  Vec w = Vec::Ones(n);
  switch (kind_) {
    case GaugeKind::koranyi:
      for (int j = 0; j < n; ++j)
        if (spec_.weights[j] == 2.0) w[j] = 0.25;
      break;
    case GaugeKind::ball_gauge:
      w.setConstant(r_);
      break;
    case GaugeKind::parabolic:
    case GaugeKind::euclidean_power:
      break;  // |x_j|^{1/d_j} <= |g| gives half-width 1
  }
  return w;
}

double gauge_distance(const Gauge& gauge, const Vec& g, const Vec& h) {
  double buf[kMaxDim], inv[kMaxDim];
  gauge.spec().inverse_into(h.data(), inv);
  gauge.spec().multiply_into(inv, g.data(), buf);
  return gauge(buf);
}

GaugeReport check_gauge_properties(const Gauge& gauge, long long n_samples, std::uint64_t seed) {
  const GroupSpec& spec = gauge.spec();
  const int n = spec.n;
  GaugeReport rep;
  rep.n_samples = n_samples;
  rep.seed = seed;
  rep.radial_probe = gauge.horizontal_radial() && spec.m() >= 2;

  const std::uint64_t region = region_id("gauge-check/" + gauge.label());
  const double lambdas[4] = {1e-3, 0.5, 2.0, 1e3};
  double g[kMaxDim], h[kMaxDim], gh[kMaxDim], tmp[kMaxDim];

  for (long long i = 0; i < n_samples; ++i) {
    SampleRng rng(seed, region, static_cast<std::uint64_t>(i));
    for (int j = 0; j < n; ++j) g[j] = 2.0 * rng.next_sym();
    for (int j = 0; j < n; ++j) h[j] = 2.0 * rng.next_sym();
    double ng = gauge(g), nh = gauge(h);

    spec.multiply_into(g, h, gh);
    rep.triangle_max_violation = std::max(rep.triangle_max_violation, gauge(gh) - ng - nh);

    spec.inverse_into(g, tmp);
    rep.symmetry_max_err = std::max(rep.symmetry_max_err, std::abs(gauge(tmp) - ng));

    if (ng > 1e-12) {
      for (double lam : lambdas) {
        spec.dilate_into(lam, g, tmp);
        rep.homogeneity_max_rel_err =
            std::max(rep.homogeneity_max_rel_err, std::abs(gauge(tmp) - lam * ng) / (lam * ng));
      }
    }

    // Horizontal symmetry probe on the weight-1 coordinates.
    for (int j = 0; j < n; ++j) tmp[j] = g[j];
    if (rep.radial_probe) {
      // Random Givens rotations within the weight-1 block.
      for (int a = 0; a < n; ++a) {
        if (spec.weights[a] != 1.0) continue;
        for (int b = a + 1; b < n; ++b) {
          if (spec.weights[b] != 1.0) continue;
          double t = 6.283185307179586 * rng.next_u01();
          double c = std::cos(t), s = std::sin(t);
          double xa = tmp[a], xb = tmp[b];
          tmp[a] = c * xa - s * xb;
          tmp[b] = s * xa + c * xb;
        }
      }
    } else {
      for (int j = 0; j < n; ++j)
        if (spec.weights[j] == 1.0 && rng.next_u01() < 0.5) tmp[j] = -tmp[j];
    }
    rep.horizontal_probe_max_err = std::max(rep.horizontal_probe_max_err, std::abs(gauge(tmp) - ng));
  }
  rep.triangle_max_violation = std::max(rep.triangle_max_violation, 0.0);
  return rep;
}

}  // namespace homfrac

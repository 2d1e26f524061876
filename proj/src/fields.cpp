#include "homfrac/fields.hpp"

#include <cmath>

#include "homfrac/rng.hpp"

namespace homfrac {

namespace {

// Linear-in-t part of the truncated BCH product. For step <= 4 the t-linear
// terms are exactly e_j + s/2 [x, e_j] + 1/12 [x, [x, e_j]] with s = +1 for
// right increments g exp(t X_j) and s = -1 for left increments exp(t X_j) g.
void flow_coeffs_into(const GroupSpec& spec, const double* g, double sgn, double* A) {
  const int n = spec.n;
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) A[j * n + k] = (j == k) ? 1.0 : 0.0;
  if (spec.abelian()) return;
  double ej[kMaxDim], c1[kMaxDim], c2[kMaxDim];
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) ej[k] = 0.0;
    ej[j] = 1.0;
    spec.bracket_into(g, ej, c1);
    for (int k = 0; k < n; ++k) A[j * n + k] += sgn * 0.5 * c1[k];
    if (spec.step() >= 3) {
      spec.bracket_into(g, c1, c2);
      for (int k = 0; k < n; ++k) A[j * n + k] += c2[k] / 12.0;
    }
  }
}

Mat flow_coeffs(const GroupSpec& spec, const Vec& g, double sgn) {
  const int n = spec.n;
  double buf[kMaxDim * kMaxDim];
  flow_coeffs_into(spec, g.data(), sgn, buf);
  Mat A(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) A(k, j) = buf[j * n + k];
  return A;
}

void gradient_of(const GroupSpec& spec, const ScalarField& u, const double* g, double* out) {
  const int n = spec.n;
  if (u.has_grad()) {
    u.grad(g, out);
    return;
  }
  double gn = 0.0;
  for (int k = 0; k < n; ++k) gn += g[k] * g[k];
  double h = std::max(1e-5, 1e-5 * (1.0 + std::sqrt(gn)));
  if (h < 1e-8) throw StepUnderflow("finite-difference step collapsed");
  double x[kMaxDim];
  for (int k = 0; k < n; ++k) x[k] = g[k];
  auto five_point = [&](int k, double step) {
    double x0 = x[k];
    x[k] = x0 + 2 * step;
    double f1 = u(x);
    x[k] = x0 + step;
    double f2 = u(x);
    x[k] = x0 - step;
    double f3 = u(x);
    x[k] = x0 - 2 * step;
    double f4 = u(x);
    x[k] = x0;
    return (-f1 + 8 * f2 - 8 * f3 + f4) / (12 * step);
  };
  for (int k = 0; k < n; ++k) {
    double d = five_point(k, h);
    if (u.smoothness == Smoothness::schwartz) {
      double d2 = five_point(k, h / 2);
      d = (16 * d2 - d) / 15;  // one Richardson halving
    }
    out[k] = d;
  }
}

double flow_step(const Vec& g) { return 1e-4 * (1.0 + g.lpNorm<Eigen::Infinity>()); }

}  // namespace

FieldCoefficients left_field_coeffs(const GroupSpec& spec, const Vec& g) {
  return {flow_coeffs(spec, g, +1.0)};
}

FieldCoefficients right_field_coeffs(const GroupSpec& spec, const Vec& g) {
  return {flow_coeffs(spec, g, -1.0)};
}

void left_coeffs_into(const GroupSpec& spec, const double* g, double* A) {
  flow_coeffs_into(spec, g, +1.0, A);
}

void right_coeffs_into(const GroupSpec& spec, const double* g, double* A) {
  flow_coeffs_into(spec, g, -1.0, A);
}

void field_gradient(const GroupSpec& spec, const ScalarField& u, const double* x, double* out) {
  gradient_of(spec, u, x, out);
}

double apply_field(const GroupSpec& spec, int j, Side side, const ScalarField& u, const Vec& g) {
  if (u.is_constant) return 0.0;
  double A[kMaxDim * kMaxDim], grad[kMaxDim];
  flow_coeffs_into(spec, g.data(), side == Side::left ? +1.0 : -1.0, A);
  gradient_of(spec, u, g.data(), grad);
  double s = 0.0;
  for (int k = 0; k < spec.n; ++k) s += A[j * spec.n + k] * grad[k];
  return s;
}

double horizontal_laplacian(const GroupSpec& spec, const ScalarField& u, const Vec& g) {
  if (u.is_constant) return 0.0;
  const int n = spec.n;
  double h = flow_step(g);
  double ej[kMaxDim], p[kMaxDim];
  double u0 = u(g.data());
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    if (spec.weights[i] != 1.0) continue;
    for (int k = 0; k < n; ++k) ej[k] = 0.0;
    ej[i] = h;
    spec.multiply_into(g.data(), ej, p);
    double up = u(p);
    ej[i] = -h;
    spec.multiply_into(g.data(), ej, p);
    double um = u(p);
    total += (up + um - 2.0 * u0) / (h * h);
  }
  return total;
}

double horizontal_laplacian_nested(const GroupSpec& spec, const ScalarField& u, const Vec& g) {
  if (u.is_constant) return 0.0;
  const int n = spec.n;
  double h = 10.0 * flow_step(g);
  double total = 0.0;
  Vec step = Vec::Zero(n);
  for (int i = 0; i < n; ++i) {
    if (spec.weights[i] != 1.0) continue;
    step.setZero();
    step[i] = h;
    Vec gp = multiply(spec, g, step);
    step[i] = -h;
    Vec gm = multiply(spec, g, step);
    total += (apply_field(spec, i, Side::left, u, gp) - apply_field(spec, i, Side::left, u, gm)) /
             (2.0 * h);
  }
  return total;
}

double flow_second_derivative(const GroupSpec& spec, int i, int j, const ScalarField& u,
                              const Vec& g) {
  const int n = spec.n;
  double h = flow_step(g);
  if (i == j) {
    double ej[kMaxDim], p[kMaxDim];
    for (int k = 0; k < n; ++k) ej[k] = 0.0;
    double u0 = u(g.data());
    ej[i] = h;
    spec.multiply_into(g.data(), ej, p);
    double up = u(p);
    ej[i] = -h;
    spec.multiply_into(g.data(), ej, p);
    double um = u(p);
    return (up + um - 2.0 * u0) / (h * h);
  }
  double ei[kMaxDim], ej[kMaxDim], q[kMaxDim], p[kMaxDim];
  for (int k = 0; k < n; ++k) ei[k] = ej[k] = 0.0;
  double acc = 0.0;
  for (int si = -1; si <= 1; si += 2)
    for (int sj = -1; sj <= 1; sj += 2) {
      ei[i] = si * h;
      ej[j] = sj * h;
      spec.multiply_into(g.data(), ei, q);
      spec.multiply_into(q, ej, p);
      acc += si * sj * u(p);
    }
  return acc / (4.0 * h * h);
}

double taylor_p2(const GroupSpec& spec, const ScalarField& u, const Vec& g, const Vec& h) {
  const int n = spec.n;
  double val = u(g.data());
  for (int i = 0; i < n; ++i) {
    if (spec.weights[i] <= 2.0 + 1e-12)
      val += apply_field(spec, i, Side::left, u, g) * h[i];
  }
  for (int i = 0; i < n; ++i) {
    if (spec.weights[i] != 1.0) continue;
    for (int j = 0; j < n; ++j) {
      if (spec.weights[j] != 1.0) continue;
      val += 0.5 * flow_second_derivative(spec, i, j, u, g) * h[i] * h[j];
    }
  }
  return val;
}

double second_difference(const GroupSpec& spec, const ScalarField& u, const Vec& g, const Vec& h) {
  double p[kMaxDim], hm[kMaxDim];
  spec.multiply_into(g.data(), h.data(), p);
  double a = u(p);
  spec.inverse_into(h.data(), hm);
  spec.multiply_into(g.data(), hm, p);
  double b = u(p);
  return a + b - 2.0 * u(g.data());
}

double max_gauge_on_euclid_sphere(const GroupSpec& spec, const Gauge& gauge, double E) {
  const int n = spec.n;
  double best = 0.0;
  double x[kMaxDim];
  const std::uint64_t region = region_id("euclid-sphere-bound");
  long long samples = 4096;
  for (long long i = 0; i < samples + 2 * n; ++i) {
    double norm2 = 0.0;
    if (i < 2 * n) {  // axis directions first
      for (int k = 0; k < n; ++k) x[k] = 0.0;
      x[static_cast<int>(i) / 2] = (i % 2 == 0) ? 1.0 : -1.0;
      norm2 = 1.0;
    } else {
      SampleRng rng(12345, region, static_cast<std::uint64_t>(i));
      for (int k = 0; k < n; ++k) {
        x[k] = rng.next_normal();
        norm2 += x[k] * x[k];
      }
    }
    double scale = E / std::sqrt(norm2);
    for (int k = 0; k < n; ++k) x[k] *= scale;
    best = std::max(best, gauge(x));
  }
  return best * 1.02;  // sampled maximum, small safety margin
}

namespace {

// Sampled sup of |u| over the gauge sphere of radius R. Directions come from
// a box sample; points are moved onto the sphere by ray bisection (all shipped
// gauges increase along rays from the identity).
double sampled_sup_on_sphere(const GroupSpec& spec, const Gauge& gauge,
                             const std::function<double(const double*)>& eval, double R,
                             long long samples, std::uint64_t salt) {
  const int n = spec.n;
  Vec hw = gauge.unit_ball_halfwidths();
  const std::uint64_t region = region_id("gauge-sphere-sup") + salt;
  double x[kMaxDim], y[kMaxDim];
  double mx = 0.0;
  for (long long i = 0; i < samples; ++i) {
    SampleRng rng(777, region, static_cast<std::uint64_t>(i));
    double g = 0.0;
    for (int k = 0; k < n; ++k) x[k] = rng.next_sym() * hw[k];
    g = gauge(x);
    if (g < 1e-12) continue;
    double lo = 0.0, hi = 1.0;
    while (g < R) {
      for (int k = 0; k < n; ++k) x[k] *= 2.0;
      g = gauge(x);
      if (!(g < 1e300)) break;
    }
    hi = 1.0;  // gauge(hi * x) >= R now
    for (int it = 0; it < 60; ++it) {
      double mid = 0.5 * (lo + hi);
      for (int k = 0; k < n; ++k) y[k] = mid * x[k];
      (gauge(y) < R ? lo : hi) = mid;
    }
    for (int k = 0; k < n; ++k) y[k] = hi * x[k];
    mx = std::max(mx, std::abs(eval(y)));
  }
  return mx;
}

}  // namespace

double effective_gauge_radius(const GroupSpec& spec, const Gauge& gauge,
                              const std::function<double(const double*)>& eval, double sup_norm,
                              double eps) {
  double R = 1.0;
  for (int iter = 0; iter < 80; ++iter) {
    double mx = sampled_sup_on_sphere(spec, gauge, eval, R, 1024, static_cast<std::uint64_t>(iter));
    if (mx <= eps * sup_norm) return R;
    R *= 1.5;
  }
  return R;
}

namespace {

ScalarField base_field(const GroupSpec& spec) {
  ScalarField f;
  f.sup_norm = 1.0;
  return f;
}

double parse_param(const std::string& rest, const std::string& key, double fallback) {
  if (rest.empty()) return fallback;
  auto pos = rest.find(key + "=");
  std::string v = rest;
  if (pos != std::string::npos) v = rest.substr(pos + key.size() + 1);
  if (auto comma = v.find(','); comma != std::string::npos) v = v.substr(0, comma);
  try {
    return std::stod(v);
  } catch (...) {
    return fallback;
  }
}

double bump1(double t) {  // smooth bump on (-1,1)
  double s = t * t;
  return s < 1.0 ? std::exp(-1.0 / (1.0 - s)) : 0.0;
}

}  // namespace

ScalarField make_constant_field(const GroupSpec& spec, double c) {
  ScalarField f = base_field(spec);
  f.name = "constant";
  f.is_constant = true;
  f.sup_norm = std::abs(c);
  f.eval = [c](const double*) { return c; };
  f.grad = [n = spec.n](const double*, double* out) {
    for (int k = 0; k < n; ++k) out[k] = 0.0;
  };
  return f;
}

ScalarField make_field(const std::string& token, const GroupSpec& spec, const Gauge& gauge) {
  std::string head = token;
  std::string rest;
  if (auto pos = token.find(':'); pos != std::string::npos) {
    head = token.substr(0, pos);
    rest = token.substr(pos + 1);
  }
  const int n = spec.n;

  if (head == "constant") return make_constant_field(spec, parse_param(rest, "c", 1.0));

  if (head == "gaussian") {
    ScalarField f = base_field(spec);
    f.name = "gaussian";
    f.smoothness = Smoothness::schwartz;
    f.eval = [n](const double* x) {
      double r2 = 0.0;
      for (int k = 0; k < n; ++k) r2 += x[k] * x[k];
      return std::exp(-r2);
    };
    f.grad = [n, ev = f.eval](const double* x, double* out) {
      double u = ev(x);
      for (int k = 0; k < n; ++k) out[k] = -2.0 * x[k] * u;
    };
    f.sup_norm = 1.0;
    // exp(-E^2) <= 1e-12 sup for E ~ 5.3; map the coordinate ball to a gauge ball
    f.effective_radius = max_gauge_on_euclid_sphere(spec, gauge, 5.5);
    return f;
  }

  if (head == "compact_bump" || head == "poly_bump") {
    double R = parse_param(rest, "R", 1.0);
    int axis = static_cast<int>(parse_param(rest, "i", 1.0)) - 1;
    if (axis < 0 || axis >= n) axis = 0;
    bool poly = head == "poly_bump";
    ScalarField f = base_field(spec);
    f.name = head;
    f.smoothness = Smoothness::compact_smooth;
    f.eval = [n, R, poly, axis](const double* x) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += x[k] * x[k];
      s /= R * R;
      if (s >= 1.0) return 0.0;
      double v = std::exp(-1.0 / (1.0 - s));
      return poly ? x[axis] * v : v;
    };
    f.grad = [n, R, poly, axis, ev = f.eval](const double* x, double* out) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += x[k] * x[k];
      s /= R * R;
      if (s >= 1.0) {
        for (int k = 0; k < n; ++k) out[k] = 0.0;
        return;
      }
      double b = std::exp(-1.0 / (1.0 - s));
      double q = 1.0 - s;
      double dbds = -b / (q * q);
      for (int k = 0; k < n; ++k) {
        double db = dbds * 2.0 * x[k] / (R * R);
        out[k] = poly ? (x[axis] * db + (k == axis ? b : 0.0)) : db;
      }
    };
    f.sup_norm = poly ? R * std::exp(-1.0) : std::exp(-1.0);
    double gr = max_gauge_on_euclid_sphere(spec, gauge, R);
    f.support_radius = gr;
    f.effective_radius = gr;
    return f;
  }

  if (head == "power_tail") {
    // (1 + p(x))^{-2} with p the smooth 4-homogeneous polynomial
    // sum x_j^{4/d_j}; decays like |g|^{-8}.
    for (int k = 0; k < n; ++k) {
      double d = spec.weights[k];
      if (d != 1.0 && d != 2.0) throw DomainError("power_tail needs weights in {1,2}");
    }
    ScalarField f = base_field(spec);
    f.name = "power_tail";
    f.smoothness = Smoothness::schwartz;  // smooth with polynomial decay
    Eigen::VectorXi e(n);
    for (int k = 0; k < n; ++k) e[k] = static_cast<int>(4.0 / spec.weights[k]);
    auto poly = [n, e](const double* x) {
      double p = 0.0;
      for (int k = 0; k < n; ++k) {
        double v = x[k] * x[k];
        p += e[k] == 4 ? v * v : v;
      }
      return p;
    };
    f.eval = [poly](const double* x) {
      double q = 1.0 + poly(x);
      return 1.0 / (q * q);
    };
    f.grad = [n, e, poly](const double* x, double* out) {
      double q = 1.0 + poly(x);
      double c = -2.0 / (q * q * q);
      for (int k = 0; k < n; ++k) {
        double dp = e[k] == 4 ? 4.0 * x[k] * x[k] * x[k] : 2.0 * x[k];
        out[k] = c * dp;
      }
    };
    f.sup_norm = 1.0;
    f.effective_radius = effective_gauge_radius(spec, gauge, f.eval, 1.0, 1e-9);
    return f;
  }

  if (head == "product") {
    if (n != 2) throw DomainError("product field is defined on two-dimensional groups");
    ScalarField f = base_field(spec);
    f.name = "product";
    f.smoothness = Smoothness::compact_smooth;
    f.eval = [](const double* x) { return bump1(x[0]) * bump1(x[1]); };
    f.sup_norm = std::exp(-2.0);
    double gr = max_gauge_on_euclid_sphere(spec, gauge, std::sqrt(2.0));
    f.support_radius = gr;
    f.effective_radius = gr;
    return f;
  }

  throw DomainError("unknown field '" + token + "'");
}

ScalarField translate_field(const GroupSpec& spec, const Gauge& gauge, const Vec& g0,
                            const ScalarField& u) {
  ScalarField f = u;
  f.name = u.name + "@translated";
  f.grad = nullptr;
  Vec g0c = g0;
  f.eval = [spec, g0c, ev = u.eval](const double* x) {
    double p[kMaxDim];
    spec.multiply_into(g0c.data(), x, p);
    return ev(p);
  };
  double shift = gauge(g0c);
  if (u.support_radius) f.support_radius = *u.support_radius + shift;
  f.effective_radius = u.effective_radius + shift;
  return f;
}

ScalarField dilate_field(const GroupSpec& spec, double lambda, const ScalarField& u) {
  if (!(lambda > 0.0)) throw DomainError("dilation parameter must be positive");
  ScalarField f = u;
  f.name = u.name + "@dilated";
  f.eval = [spec, lambda, ev = u.eval](const double* x) {
    double p[kMaxDim];
    spec.dilate_into(lambda, x, p);
    return ev(p);
  };
  if (u.has_grad()) {
    f.grad = [spec, lambda, gr = u.grad](const double* x, double* out) {
      double p[kMaxDim];
      spec.dilate_into(lambda, x, p);
      gr(p, out);
      for (int k = 0; k < spec.n; ++k) out[k] *= std::pow(lambda, spec.weights[k]);
    };
  }
  if (u.support_radius) f.support_radius = *u.support_radius / lambda;
  f.effective_radius = u.effective_radius / lambda;
  return f;
}

ScalarField scale_field(double c, const ScalarField& u) {
  ScalarField f = u;
  f.eval = [c, ev = u.eval](const double* x) { return c * ev(x); };
  f.grad = nullptr;  // finite differences for transformed fields
  f.sup_norm = std::abs(c) * u.sup_norm;
  return f;
}

ScalarField multiply_fields(const ScalarField& u, const ScalarField& v) {
  ScalarField f;
  f.name = u.name + "*" + v.name;
  f.smoothness =
      (u.smoothness == Smoothness::compact_smooth || v.smoothness == Smoothness::compact_smooth)
          ? Smoothness::compact_smooth
          : Smoothness::schwartz;
  f.eval = [a = u.eval, b = v.eval](const double* x) { return a(x) * b(x); };
  if (u.support_radius && v.support_radius)
    f.support_radius = std::min(*u.support_radius, *v.support_radius);
  else if (u.support_radius)
    f.support_radius = *u.support_radius;
  else if (v.support_radius)
    f.support_radius = *v.support_radius;
  f.effective_radius = std::min(u.effective_radius, v.effective_radius);
  f.sup_norm = u.sup_norm * v.sup_norm;  // upper bound
  return f;
}

}  // namespace homfrac

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "homfrac/sobolev.hpp"

using namespace homfrac;

namespace {

Vec pt(std::initializer_list<double> v) {
  Vec p(static_cast<int>(v.size()));
  int i = 0;
  for (double x : v) p[i++] = x;
  return p;
}

QuadratureConfig cfg_n(long long n, std::uint64_t seed = 601) {
  QuadratureConfig c;
  c.n_samples = n;
  c.seed = seed;
  c.threads = 1;
  return c;
}

}  // namespace

TEST_CASE("critical exponent") {
  CHECK(critical_exponent(4.0, 0.5) == doctest::Approx(8.0 / 3.0));
  CHECK(critical_exponent(3.0, 0.5) == doctest::Approx(3.0));
  CHECK(critical_exponent(4.0, 1e-4) == doctest::Approx(2.0).epsilon(1e-3));
  CHECK_THROWS_AS(critical_exponent(1.0, 0.5), DomainError);
  CHECK_THROWS_AS(critical_exponent(4.0, 0.0), DomainError);
}

TEST_CASE("two-power minimization") {
  PowerSumMin m = min_power_sum(1, 1, 1, 1);
  CHECK(m.r_star == doctest::Approx(1.0));
  CHECK(m.f_min == doctest::Approx(2.0));

  auto f = [](double a, double b, double A, double B, double r) {
    return A * std::pow(r, a) + B * std::pow(r, -b);
  };
  PowerSumMin m2 = min_power_sum(0.5, 1.5, 2.0, 3.0);
  CHECK(f(0.5, 1.5, 2.0, 3.0, m2.r_star) == doctest::Approx(m2.f_min));
  CHECK(f(0.5, 1.5, 2.0, 3.0, m2.r_star * 1.1) > m2.f_min);
  CHECK(f(0.5, 1.5, 2.0, 3.0, m2.r_star * 0.9) > m2.f_min);

  // doubling A scales the minimum by 2^{b/(a+b)}
  PowerSumMin m3 = min_power_sum(0.5, 1.5, 4.0, 3.0);
  CHECK(m3.f_min == doctest::Approx(m2.f_min * std::pow(2.0, 1.5 / 2.0)));

  CHECK_THROWS_AS(min_power_sum(-1, 1, 1, 1), DomainError);
}

TEST_CASE("interpolation constant of the embedding") {
  CHECK(hedberg_bracket(4.0, 0.5) == doctest::Approx(1.754765).epsilon(1e-4));
  // at Q = 4 the bracket equals the two-power minimum with a = s, b = (Q-2s)/2
  PowerSumMin m = min_power_sum(0.5, 1.5, 1.0, 1.0);
  CHECK(hedberg_bracket(4.0, 0.5) == doctest::Approx(m.f_min).epsilon(1e-12));

  double sigma = M_PI * M_PI / 2.0;
  CHECK(hedberg_constant(4.0, 0.5, sigma) ==
        doctest::Approx(std::pow(sigma, -5.0 / 12.0) * hedberg_bracket(4.0, 0.5)));

  // the constant normalized as in the uniform-in-s inequality blows up as s -> 0+
  double prev = 0.0;
  for (double s : {0.4, 0.2, 0.1, 0.05, 0.02}) {
    double S = hedberg_embedding_factor(4.0, s, sigma);
    double uniform_form = S * S * (4.0 - 2.0 * s) / (s * (1.0 - s));
    CHECK(uniform_form > prev);
    prev = uniform_form;
  }
}

TEST_CASE("grid fields carry a zero shell and round-trip through the dump format") {
  GroupSpec h1 = builtin_group("heisenberg", 1);
  Gauge k = Gauge::koranyi(h1);
  ScalarField u = make_field("gaussian", h1, k);
  GridField gf = make_grid_field(h1, 4.0, 8, u);
  CHECK(gf.total_nodes() == 512);
  CHECK(gf.values[0] == 0.0);  // corner node

  const char* path = "test_grid.hfg";
  save_grid(path, gf);
  GridField back = load_grid(path);
  CHECK(back.box_L == gf.box_L);
  CHECK((back.values - gf.values).lpNorm<Eigen::Infinity>() == 0.0);
  std::remove(path);

  CHECK_THROWS_AS(make_grid_field(h1, 4.0, 40, u), ResourceLimit);  // 64000 nodes
}

TEST_CASE("grid seminorm: zero field, refinement consistency, MC agreement") {
  GroupSpec h1 = builtin_group("heisenberg", 1);
  Gauge k = Gauge::koranyi(h1);
  FracParams params(0.5);
  QuadratureConfig cfg = cfg_n(60000);
  GroupConstants cons = compute_constants(h1, k, cfg);

  GridField zero = make_grid_field(h1, 4.0, 8, make_constant_field(h1, 0.0));
  CHECK(grid_seminorm(h1, k, params, zero, cons.sigma.value) == 0.0);

  // a bump the 16-node grid actually resolves
  ScalarField bump = make_field("compact_bump:R=1", h1, k);
  GridField g16 = make_grid_field(h1, 1.6, 16, bump);
  GridField g24 = make_grid_field(h1, 1.6, 24, bump);
  double v16 = grid_seminorm(h1, k, params, g16, cons.sigma.value);
  double v24 = grid_seminorm(h1, k, params, g24, cons.sigma.value);
  CHECK(std::abs(v16 - v24) <= 0.05 * std::abs(v24));

  Estimate mc = seminorm_sq(h1, k, params, bump, cfg, &cons);
  CHECK(std::abs(v24 - mc.value) <= 0.05 * mc.value + mc.half_width());
}

TEST_CASE("quotient invariances") {
  GroupSpec h1 = builtin_group("heisenberg", 1);
  Gauge k = Gauge::koranyi(h1);
  FracParams params(0.5);
  QuadratureConfig cfg = cfg_n(50000);
  Estimate sig = sigma_Q(h1, k, cfg);
  ScalarField u = make_field("gaussian", h1, k);
  GridField gf = make_grid_field(h1, 6.0, 12, u);

  double q = sobolev_quotient(h1, k, params, gf, sig.value);
  GridField scaled = gf;
  scaled.values *= 3.7;
  CHECK(sobolev_quotient(h1, k, params, scaled, sig.value) == doctest::Approx(q).epsilon(1e-10));

  // critical rescaling on the dilated grid
  double p = critical_exponent(h1.Q(), params.s);
  GridField dil = gf;
  dil.box_L = gf.box_L * 2.0;
  dil.values = gf.values * std::pow(2.0, -h1.Q() / p);
  CHECK(sobolev_quotient(h1, k, params, dil, sig.value) == doctest::Approx(q).epsilon(0.03));

  GridField zero = gf;
  zero.values.setZero();
  CHECK_THROWS_AS(sobolev_quotient(h1, k, params, zero, sig.value), ZeroField);

  // Sobolev bound rearranged: quotient * S^2 >= 1 up to discretization
  double S = hedberg_embedding_factor(h1.Q(), params.s, sig.value);
  CHECK(q * S * S >= 0.9);
}

TEST_CASE("quotient descent decreases and clamps negative starts") {
  GroupSpec h1 = builtin_group("heisenberg", 1);
  Gauge k = Gauge::koranyi(h1);
  FracParams params(0.5);
  Estimate sig = sigma_Q(h1, k, cfg_n(50000));
  ScalarField u = make_field("gaussian", h1, k);
  GridField init = make_grid_field(h1, 6.0, 10, u);

  OptimizeOptions opt;
  opt.iters = 25;
  OptimizeResult res = optimize_quotient(h1, k, params, init, opt, sig.value);
  REQUIRE(res.trace.size() >= 11);
  for (std::size_t i = 1; i < res.trace.size(); ++i)
    CHECK(res.trace[i].quotient <= res.trace[i - 1].quotient + 1e-12);
  CHECK(res.trace[10].quotient < res.trace[0].quotient);

  GridField neg = init;
  neg.values = -init.values;
  OptimizeResult res2 = optimize_quotient(h1, k, params, neg, opt, sig.value);
  CHECK(res2.field.values.minCoeff() >= 0.0);
  CHECK(res2.trace.back().quotient ==
        doctest::Approx(res.trace.back().quotient).epsilon(1e-6));

  GridField zero = init;
  zero.values.setZero();
  CHECK_THROWS_AS(optimize_quotient(h1, k, params, zero, opt, sig.value), ZeroField);
}

TEST_CASE("mollification reproduces constants and contracts the seminorm") {
  GroupSpec h1 = builtin_group("heisenberg", 1);
  Gauge k = Gauge::koranyi(h1);
  ScalarField rho = make_mollifier(h1, k, 1.0);
  ScalarField c = make_constant_field(h1, 4.0);
  ScalarField ce = mollify(h1, k, rho, 1.0, 0.5, c, 5);
  for (auto g : {pt({0, 0, 0}), pt({1.5, -0.2, 0.3})})
    CHECK(ce(g) == doctest::Approx(4.0).epsilon(1e-12));

  // a mollifier with broken mass is rejected
  ScalarField bad = rho;
  bad.eval = [ev = rho.eval](const double* x) { return 1.1 * ev(x); };
  CHECK_THROWS_AS(mollify(h1, k, bad, 1.0, 0.5, c, 5), NormalizationError);

  FracParams params(0.5);
  QuadratureConfig cfg = cfg_n(15000);
  GroupConstants cons = compute_constants(h1, k, cfg.with_samples(60000));
  ScalarField u = make_field("compact_bump:R=1.5", h1, k);
  Estimate sem_u = seminorm(h1, k, params, u, cfg, &cons);
  ScalarField ue = mollify(h1, k, rho, 1.0, 0.25, u, 5);
  Estimate sem_e = seminorm(h1, k, params, ue, cfg.with_seed(607), &cons);
  CHECK(sem_e.value <= 1.03 * sem_u.value + sem_e.half_width() + 1.03 * sem_u.half_width());
}

TEST_CASE("truncation ramp satisfies the support and Lipschitz conditions") {
  GroupSpec h1 = builtin_group("heisenberg", 1);
  Gauge k = Gauge::koranyi(h1);
  double R = 2.0;
  ScalarField phi = truncation_field(h1, k, R);

  Vec inner = dilate(h1, R / 2.0, pt({1, 0, 0}));   // |g| = R/2
  Vec outer = dilate(h1, 3.0 * R, pt({1, 0, 0}));   // |g| = 3R
  CHECK(phi(inner) == 0.0);
  CHECK(phi(outer) == 1.0);

  std::uint64_t region = region_id("test-trunc");
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    SampleRng rng(71, region, static_cast<std::uint64_t>(i));
    Vec g = pt({5 * rng.next_sym(), 5 * rng.next_sym(), 10 * rng.next_sym()});
    Vec h = pt({5 * rng.next_sym(), 5 * rng.next_sym(), 10 * rng.next_sym()});
    double d = gauge_distance(k, g, h);
    if (d < 1e-9) continue;
    worst = std::max(worst, std::abs(phi(g) - phi(h)) * R / (2.0 * d));
  }
  CHECK(worst <= 1.0 + 1e-6);

  // doubling R matches the half-dilated ramp exactly
  ScalarField phi2 = truncation_field(h1, k, 2.0 * R);
  for (int i = 0; i < 100; ++i) {
    SampleRng rng(73, region, static_cast<std::uint64_t>(i));
    Vec g = pt({6 * rng.next_sym(), 6 * rng.next_sym(), 20 * rng.next_sym()});
    CHECK(phi2(g) == doctest::Approx(phi(dilate(h1, 0.5, g))).epsilon(1e-12));
  }
}

TEST_CASE("ball packings are disjoint and the defect sees constants exactly") {
  GroupSpec e2 = builtin_group("euclidean", 2);
  Gauge g = Gauge::euclidean_power(e2);
  Box omega;
  omega.lo = pt({-1, -1});
  omega.hi = pt({1, 1});
  auto balls = pack_balls(e2, g, omega, 0.4);
  CHECK(balls.size() >= 4);
  for (std::size_t i = 0; i < balls.size(); ++i)
    for (std::size_t j = i + 1; j < balls.size(); ++j)
      CHECK(gauge_distance(g, balls[i].center, balls[j].center) >=
            balls[i].radius + balls[j].radius - 1e-12);

  QuadratureConfig cfg = cfg_n(40000);
  GroupConstants cons = compute_constants(e2, g, cfg);
  FracParams params(0.5);
  ScalarField c = make_constant_field(e2, 2.0);
  Estimate d0 = rellich_defect(e2, g, params, c, balls, cfg, &cons);
  CHECK(std::abs(d0.value) <= 2.0 * d0.std_err + 1e-10);

  // single ball, linear field: the defect is the centered second moment
  // integral over a disk of radius r of (x - c_x)^2, which equals pi r^4 / 4
  ScalarField lin;
  lin.name = "linear";
  lin.smoothness = Smoothness::schwartz;
  lin.eval = [](const double* x) { return x[0]; };
  lin.grad = [](const double*, double* out) {
    out[0] = 1;
    out[1] = 0;
  };
  lin.effective_radius = 1e6;
  std::vector<BallSpec> one = {{pt({0.3, -0.2}), 0.5}};
  Estimate d1 = rellich_defect(e2, g, params, lin, one, cfg, &cons);
  double target = M_PI * std::pow(0.5, 4) / 4.0;
  CHECK(std::abs(d1.value - target) <= 2.5 * d1.std_err + d1.tail_bound + 0.02 * target);

  std::vector<BallSpec> overlapping = {{pt({0, 0}), 0.5}, {pt({0.1, 0}), 0.5}};
  CHECK_THROWS_AS(rellich_defect(e2, g, params, lin, overlapping, cfg, &cons), OverlapError);
}

TEST_CASE("multiplication bound holds with reported slack") {
  GroupSpec h1 = builtin_group("heisenberg", 1);
  Gauge k = Gauge::koranyi(h1);
  FracParams params(0.5);
  QuadratureConfig cfg = cfg_n(20000);
  GroupConstants cons = compute_constants(h1, k, cfg.with_samples(60000));
  ScalarField phi = make_field("compact_bump:R=1", h1, k);
  ScalarField u = make_field("gaussian", h1, k);
  MultiplicationReport rep =
      multiplication_bound_check(h1, k, params, phi, *phi.support_radius, u, cfg, &cons);
  CHECK(rep.holds);
  CHECK(rep.lhs.value >= 0.0);

  ScalarField zero = make_constant_field(h1, 0.0);
  zero.support_radius = 1.0;
  zero.effective_radius = 1.0;
  MultiplicationReport rz = multiplication_bound_check(h1, k, params, zero, 1.0, u, cfg, &cons);
  CHECK(std::abs(rz.lhs.value) <= 1e-12);
}

TEST_CASE("translation sweep exhibits the unbounded ratio") {
  auto rows = counterexample_sweep({1, 256, 4096}, {0.1, 0.01, 0.001});
  double small_shift = 0, sat_01 = 0, sat_001 = 0, sat_0001 = 0;
  for (const auto& r : rows) {
    if (r.k == 1 && r.eta == 0.001) small_shift = r.ratio;
    if (r.k == 256 && r.eta == 0.1) sat_01 = r.ratio;
    if (r.k == 256 && r.eta == 0.01) sat_001 = r.ratio;
    if (r.k == 4096 && r.eta == 0.001) sat_0001 = r.ratio;
  }
  // disjoint-support closed form sqrt(2/eta) once k eta clears the support
  CHECK(sat_001 == doctest::Approx(std::sqrt(2.0 / 0.01)).epsilon(0.01));
  CHECK(sat_001 > 12.0);
  CHECK(small_shift < 0.2);     // continuity of translation
  CHECK(sat_01 < sat_001);      // ratio grows along eta -> 0 while saturated
  CHECK(sat_001 < sat_0001);
}

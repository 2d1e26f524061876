#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "homfrac/fields.hpp"
#include "homfrac/quadrature.hpp"
#include "homfrac/rng.hpp"

using namespace homfrac;

namespace {

Vec pt(std::initializer_list<double> v) {
  Vec p(static_cast<int>(v.size()));
  int i = 0;
  for (double x : v) p[i++] = x;
  return p;
}

ScalarField horizontal_square(const GroupSpec& spec) {
  // u = x^2 + y^2 on the first Heisenberg group
  ScalarField f;
  f.name = "x2y2";
  f.smoothness = Smoothness::schwartz;
  f.eval = [](const double* x) { return x[0] * x[0] + x[1] * x[1]; };
  f.grad = [](const double* x, double* out) {
    out[0] = 2 * x[0];
    out[1] = 2 * x[1];
    out[2] = 0.0;
  };
  return f;
}

}  // namespace

TEST_CASE("field coefficients reduce to the identity at the identity") {
  for (const char* token : {"euclidean:3", "parabolic_r2", "heisenberg:1", "heisenberg:2"}) {
    GroupSpec spec = group_from_token(token);
    Mat L = left_field_coeffs(spec, identity(spec)).first_order;
    Mat R = right_field_coeffs(spec, identity(spec)).first_order;
    CHECK((L - Mat::Identity(spec.n, spec.n)).norm() <= 1e-14);
    CHECK((R - Mat::Identity(spec.n, spec.n)).norm() <= 1e-14);
  }
}

TEST_CASE("Heisenberg field coefficients at (0,1,0)") {
  GroupSpec h1 = builtin_group("heisenberg", 1);
  Vec g = pt({0, 1, 0});
  Mat L = left_field_coeffs(h1, g).first_order;
  // first column: (1, 0, -y/2)
  CHECK(L(0, 0) == doctest::Approx(1.0));
  CHECK(L(1, 0) == doctest::Approx(0.0));
  CHECK(L(2, 0) == doctest::Approx(-0.5));
  Mat R = right_field_coeffs(h1, g).first_order;
  CHECK(R(2, 0) == doctest::Approx(+0.5));

  GroupSpec e3 = builtin_group("euclidean", 3);
  Vec any = pt({2.0, -1.0, 0.5});
  CHECK((left_field_coeffs(e3, any).first_order - Mat::Identity(3, 3)).norm() <= 1e-14);
}

TEST_CASE("applying fields to constants gives zero") {
  GroupSpec h1 = builtin_group("heisenberg", 1);
  ScalarField c = make_constant_field(h1, 3.5);
  CHECK(apply_field(h1, 0, Side::left, c, pt({0.3, 0.1, -0.2})) == 0.0);
  CHECK(horizontal_laplacian(h1, c, pt({0.3, 0.1, -0.2})) == 0.0);
}

TEST_CASE("horizontal laplacian pinned values") {
  GroupSpec h1 = builtin_group("heisenberg", 1);
  ScalarField u = horizontal_square(h1);
  // X1^2 + X2^2 of x^2+y^2 equals 4 everywhere; the center derivative in the
  // field coefficients never sees u
  for (auto g : {pt({0, 0, 0}), pt({1, 2, 3}), pt({-0.4, 0.9, -2.0})})
    CHECK(horizontal_laplacian(h1, u, g) == doctest::Approx(4.0).epsilon(1e-6));

  GroupSpec par = builtin_group("parabolic_r2");
  Gauge gp = Gauge::parabolic(par);
  ScalarField gauss = make_field("gaussian", par, gp);
  // only X = d/dx is horizontal; at the origin d^2/dx^2 exp(-x^2-y^2) = -2
  CHECK(horizontal_laplacian(par, gauss, pt({0, 0})) == doctest::Approx(-2.0).epsilon(1e-6));
}

TEST_CASE("flow and nested evaluations of the horizontal laplacian agree") {
  GroupSpec h1 = builtin_group("heisenberg", 1);
  Gauge k = Gauge::koranyi(h1);
  ScalarField u = make_field("gaussian", h1, k);
  for (auto g : {pt({0.2, -0.3, 0.1}), pt({0.8, 0.5, -0.4})}) {
    double a = horizontal_laplacian(h1, u, g);
    double b = horizontal_laplacian_nested(h1, u, g);
    CHECK(a == doctest::Approx(b).epsilon(1e-4));
  }
}

TEST_CASE("degree-2 Taylor polynomial at the identity increment") {
  GroupSpec h1 = builtin_group("heisenberg", 1);
  Gauge k = Gauge::koranyi(h1);
  ScalarField u = make_field("gaussian", h1, k);
  Vec g = pt({0.3, 0.2, -0.1});
  CHECK(taylor_p2(h1, u, g, identity(h1)) == doctest::Approx(u(g)).epsilon(1e-12));
}

TEST_CASE("Taylor polynomial is exact for quadratics on isotropic groups") {
  GroupSpec e2 = builtin_group("euclidean", 2);
  ScalarField q;
  q.name = "quad";
  q.eval = [](const double* x) { return 1.0 + 2 * x[0] - x[1] + 0.5 * x[0] * x[0] + x[0] * x[1]; };
  q.grad = [](const double* x, double* out) {
    out[0] = 2 + x[0] + x[1];
    out[1] = -1 + x[0];
  };
  Vec g = pt({0.4, -0.7});
  for (auto h : {pt({0.3, 0.2}), pt({-1.0, 0.5})}) {
    Vec gh = multiply(e2, g, h);
    CHECK(taylor_p2(e2, q, g, h) == doctest::Approx(q(gh)).epsilon(1e-6));
  }
}

TEST_CASE("Taylor remainder decays with order above two") {
  GroupSpec h1 = builtin_group("heisenberg", 1);
  Gauge k = Gauge::koranyi(h1);
  ScalarField u = make_field("gaussian", h1, k);
  Vec g = pt({0.3, -0.2, 0.15});
  Vec h0 = pt({0.4, 0.3, 0.2});

  // remainder |u(g h_t) - P2(h_t; g)| with h_t = delta_t h0 behaves like t^d
  std::vector<double> logt, logr;
  for (int kk = 3; kk <= 8; ++kk) {
    double t = std::pow(2.0, -kk);
    Vec ht = dilate(h1, t, h0);
    double rem = std::abs(u(multiply(h1, g, ht)) - taylor_p2(h1, u, g, ht));
    if (rem > 1e-13) {
      logt.push_back(std::log(t));
      logr.push_back(std::log(rem));
    }
  }
  REQUIRE(logt.size() >= 4);
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < logt.size(); ++i) {
    mx += logt[i];
    my += logr[i];
  }
  mx /= logt.size();
  my /= logr.size();
  double num = 0, den = 0;
  for (std::size_t i = 0; i < logt.size(); ++i) {
    num += (logt[i] - mx) * (logr[i] - my);
    den += (logt[i] - mx) * (logt[i] - mx);
  }
  CHECK(num / den > 2.0);
}

TEST_CASE("second difference basics and quadratic-order expansion") {
  GroupSpec e2 = builtin_group("euclidean", 2);
  ScalarField affine;
  affine.name = "affine";
  affine.eval = [](const double* x) { return 3.0 + 2 * x[0] - x[1]; };
  affine.grad = [](const double*, double* out) {
    out[0] = 2;
    out[1] = -1;
  };
  Vec g = pt({0.2, 0.4});
  CHECK(second_difference(e2, affine, g, pt({0.3, -0.9})) == doctest::Approx(0.0));
  CHECK(second_difference(e2, affine, g, identity(e2)) == doctest::Approx(0.0));

  // second_difference minus its weight-one quadratic part decays above order 2
  GroupSpec h1 = builtin_group("heisenberg", 1);
  Gauge k = Gauge::koranyi(h1);
  ScalarField u = make_field("gaussian", h1, k);
  Vec gg = pt({0.25, -0.1, 0.05});
  Vec h0 = pt({0.5, 0.2, 0.3});
  std::vector<double> logt, logr;
  for (int kk = 3; kk <= 8; ++kk) {
    double t = std::pow(2.0, -kk);
    Vec ht = dilate(h1, t, h0);
    double quad = 0.0;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        quad += flow_second_derivative(h1, i, j, u, gg) * ht[i] * ht[j];
    double rem = std::abs(second_difference(h1, u, gg, ht) - quad);
    if (rem > 1e-13) {
      logt.push_back(std::log(t));
      logr.push_back(std::log(rem));
    }
  }
  REQUIRE(logt.size() >= 4);
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < logt.size(); ++i) {
    mx += logt[i];
    my += logr[i];
  }
  mx /= logt.size();
  my /= logr.size();
  double num = 0, den = 0;
  for (std::size_t i = 0; i < logt.size(); ++i) {
    num += (logt[i] - mx) * (logr[i] - my);
    den += (logt[i] - mx) * (logt[i] - mx);
  }
  CHECK(num / den > 2.0);
}

TEST_CASE("invariant fields are formally skew-symmetric under the Haar integral") {
  GroupSpec h1 = builtin_group("heisenberg", 1);
  Gauge k = Gauge::koranyi(h1);
  ScalarField u = make_field("compact_bump:R=1", h1, k);
  ScalarField v = make_field("poly_bump:i=2", h1, k);
  QuadratureConfig cfg;
  cfg.n_samples = 40000;
  cfg.seed = 31;
  Box box = ball_box(k, *u.support_radius + 0.1);
  for (int j : {0, 2}) {
    Estimate e = integrate_haar_box(
        h1,
        [&](const double* x) {
          Vec g = Eigen::Map<const Vec>(x, 3);
          return u(x) * apply_field(h1, j, Side::left, v, g) +
                 v(x) * apply_field(h1, j, Side::left, u, g);
        },
        box, cfg, "skew-test");
    CHECK(std::abs(e.value) <= 3.0 * (2.0 * e.std_err + 1e-9));
  }
}

TEST_CASE("mean value bound holds with a finite measured constant") {
  GroupSpec h1 = builtin_group("heisenberg", 1);
  Gauge k = Gauge::koranyi(h1);
  ScalarField u = make_field("gaussian", h1, k);
  std::uint64_t region = region_id("test-mvt");
  double worst = 0.0;
  for (int i = 0; i < 300; ++i) {
    SampleRng rng(41, region, static_cast<std::uint64_t>(i));
    Vec g = pt({rng.next_sym(), rng.next_sym(), rng.next_sym()});
    Vec h = pt({0.5 * rng.next_sym(), 0.5 * rng.next_sym(), 0.5 * rng.next_sym()});
    double nh = k(h);
    if (nh < 1e-6 || nh > 1.0) continue;
    double diff = std::abs(u(multiply(h1, g, h)) - u(g));
    double scale = 0.0;
    for (int j = 0; j < 3; ++j) scale += std::pow(nh, h1.weights[j]);
    // sup of first derivatives of exp(-|x|^2) along any field is bounded by ~2
    worst = std::max(worst, diff / (scale * 2.5));
  }
  CHECK(worst < 10.0);
  CHECK(worst > 0.0);
}

TEST_CASE("built-in field metadata") {
  GroupSpec h1 = builtin_group("heisenberg", 1);
  Gauge k = Gauge::koranyi(h1);
  ScalarField bump = make_field("compact_bump:R=1", h1, k);
  REQUIRE(bump.support_radius.has_value());
  // support claim: u vanishes outside the declared gauge ball
  std::uint64_t region = region_id("test-support");
  for (int i = 0; i < 500; ++i) {
    SampleRng rng(43, region, static_cast<std::uint64_t>(i));
    Vec g = pt({3 * rng.next_sym(), 3 * rng.next_sym(), 3 * rng.next_sym()});
    if (k(g) > *bump.support_radius) CHECK(bump(g) == 0.0);
  }
  ScalarField gauss = make_field("gaussian", h1, k);
  CHECK(gauss.effective_radius < 1e3);
  CHECK_THROWS_AS(make_field("unknown_field", h1, k), DomainError);
}

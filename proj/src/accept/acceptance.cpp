#include "accept/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>

#include "accept/fourier_oracle.hpp"
#include "homfrac/fracop.hpp"
#include "homfrac/sobolev.hpp"

namespace homfrac::accept {

using nlohmann::json;

namespace {

struct Ctx {
  Options opt;
  double tolx() const { return opt.quick ? 2.0 : 1.0; }
  long long budget(long long n) const {
    return opt.quick ? std::max<long long>(200, n / 10) : n;
  }
  QuadratureConfig cfg(long long n, int criterion, int side = 0) const {
    QuadratureConfig c;
    c.n_samples = budget(n);
    c.seed = opt.seed + static_cast<std::uint64_t>(criterion) * 1009 +
             static_cast<std::uint64_t>(side) * 131071;
    c.threads = opt.threads;
    return c;
  }
};

// reported-interval overlap, with the statistical parts scaled in quick mode
bool agree_tol(const Estimate& a, const Estimate& b, double mult) {
  return std::abs(a.value - b.value) <=
         mult * 2.0 * (a.std_err + b.std_err) + a.tail_bound + b.tail_bound;
}

json est_json(const Estimate& e) {
  return json{{"value", e.value},
              {"std_err", e.std_err},
              {"tail_bound", e.tail_bound},
              {"n_evals", e.n_evals},
              {"seed", e.seed}};
}

Vec point(std::initializer_list<double> v) {
  Vec p(static_cast<int>(v.size()));
  int i = 0;
  for (double x : v) p[i++] = x;
  return p;
}

Estimate lp_norm_est(const GroupSpec& spec, const Gauge& gauge, const ScalarField& u, double p,
                     const QuadratureConfig& cfg) {
  Box box = ball_box(gauge, std::min(u.effective_radius, 1e280));
  Estimate ip = detail::mc_box(box, cfg, region_id("lp/" + u.name),
                               [&](const double* x, SampleRng&) {
                                 return std::pow(std::abs(u(x)), p);
                               });
  Estimate out;
  out.seed = ip.seed;
  out.n_evals = ip.n_evals;
  out.value = std::pow(std::max(ip.value, 0.0), 1.0 / p);
  double deriv = ip.value > 0 ? out.value / (p * ip.value) : 0.0;
  out.std_err = ip.std_err * deriv;
  out.tail_bound = ip.tail_bound * deriv;
  return out;
}

// --- criterion 1 ------------------------------------------------------------

CriterionResult criterion_group_algebra(const Ctx& ctx) {
  CriterionResult res{1, "group algebra: associativity, inverse, dilation automorphism", false, 0, {}};
  const std::vector<GroupSpec> groups = {
      group_from_token("euclidean:2:1,1"), group_from_token("parabolic_r2"),
      group_from_token("heisenberg:1"), group_from_token("heisenberg:2")};
  double worst_assoc = 0, worst_inv = 0, worst_auto = 0;
  const double lambdas[3] = {0.5, 2.0, 10.0};
  for (const auto& spec : groups) {
    const int n = spec.n;
    std::uint64_t region = region_id("accept1/" + spec.name);
    for (int i = 0; i < 1000; ++i) {
      SampleRng rng(ctx.opt.seed, region, static_cast<std::uint64_t>(i));
      Vec g(n), h(n), k(n);
      for (int j = 0; j < n; ++j) g[j] = 2.0 * rng.next_sym();
      for (int j = 0; j < n; ++j) h[j] = 2.0 * rng.next_sym();
      for (int j = 0; j < n; ++j) k[j] = 2.0 * rng.next_sym();
      Vec lhs = multiply(spec, multiply(spec, g, h), k);
      Vec rhs = multiply(spec, g, multiply(spec, h, k));
      worst_assoc = std::max(worst_assoc, (lhs - rhs).lpNorm<Eigen::Infinity>());
      worst_inv = std::max(worst_inv,
                           multiply(spec, g, inverse(spec, g)).lpNorm<Eigen::Infinity>());
      for (double lam : lambdas) {
        Vec a = dilate(spec, lam, multiply(spec, g, h));
        Vec b = multiply(spec, dilate(spec, lam, g), dilate(spec, lam, h));
        worst_auto = std::max(worst_auto, (a - b).lpNorm<Eigen::Infinity>());
      }
    }
  }
  res.details = {{"max_associativity_err", worst_assoc},
                 {"max_inverse_err", worst_inv},
                 {"max_automorphism_err", worst_auto}};
  res.pass = worst_assoc <= 1e-10 && worst_inv <= 1e-10 && worst_auto <= 1e-10;
  return res;
}

// --- criterion 2 ------------------------------------------------------------

CriterionResult criterion_gauge_axioms(const Ctx& ctx) {
  CriterionResult res{2, "gauge axioms: triangle, homogeneity, symmetry", false, 0, {}};
  struct Combo {
    std::string group, gauge;
  };
  const std::vector<Combo> combos = {{"euclidean:2:1,1", "euclidean_power"},
                                     {"parabolic_r2", "parabolic"},
                                     {"parabolic_r2", "euclidean_power"},
                                     {"heisenberg:1", "koranyi"},
                                     {"heisenberg:1", "ball_gauge:0.5"},
                                     {"heisenberg:2", "koranyi"}};
  bool pass = true;
  json rows = json::array();
  long long n = ctx.budget(100000);
  for (const auto& c : combos) {
    GroupSpec spec = group_from_token(c.group);
    Gauge gauge = Gauge::parse(spec, c.gauge);
    GaugeReport rep = check_gauge_properties(gauge, n, ctx.opt.seed + 2);
    bool ok = rep.triangle_max_violation <= 1e-10 && rep.homogeneity_max_rel_err <= 1e-10 &&
              rep.symmetry_max_err <= 1e-10 && rep.horizontal_probe_max_err <= 1e-10;
    pass = pass && ok;
    rows.push_back({{"group", c.group},
                    {"gauge", c.gauge},
                    {"triangle_max_violation", rep.triangle_max_violation},
                    {"homogeneity_max_rel_err", rep.homogeneity_max_rel_err},
                    {"symmetry_max_err", rep.symmetry_max_err},
                    {"horizontal_probe_max_err", rep.horizontal_probe_max_err},
                    {"pass", ok}});
  }
  res.details = {{"samples_per_combo", n}, {"combos", rows}};
  res.pass = pass;
  return res;
}

// --- criterion 3 ------------------------------------------------------------

CriterionResult criterion_polar_identity(const Ctx& ctx) {
  CriterionResult res{3, "polar-coordinate identity for power kernels", false, 0, {}};
  struct Combo {
    std::string group, gauge;
  };
  const std::vector<Combo> combos = {{"euclidean:2:1,1", "euclidean_power"},
                                     {"parabolic_r2", "parabolic"},
                                     {"heisenberg:1", "koranyi"}};
  bool pass = true;
  json rows = json::array();
  for (std::size_t ci = 0; ci < combos.size(); ++ci) {
    GroupSpec spec = group_from_token(combos[ci].group);
    Gauge gauge = Gauge::parse(spec, combos[ci].gauge);
    double Q = spec.Q();
    QuadratureConfig cfg = ctx.cfg(100000, 3, static_cast<int>(ci));
    Estimate sig = sigma_Q(spec, gauge, cfg);
    for (double gamma : {0.0, Q / 2.0, Q, Q + 1.0}) {
      Estimate est = annulus_power_integral(spec, gauge, gamma, 0.5, 2.0, cfg);
      double closed = annulus_power_closed_form(Q, sig.value, gamma, 0.5, 2.0);
      double closed_err = std::abs(closed / sig.value) * sig.std_err;
      double closed_tail = std::abs(closed / sig.value) * sig.tail_bound;
      bool ok = std::abs(est.value - closed) <=
                ctx.tolx() * 2.0 * (est.std_err + closed_err) + est.tail_bound + closed_tail;
      pass = pass && ok;
      rows.push_back({{"group", combos[ci].group},
                      {"gauge", combos[ci].gauge},
                      {"gamma", gamma},
                      {"estimate", est_json(est)},
                      {"closed_form", closed},
                      {"pass", ok}});
    }
  }
  // pinned exact value: gamma = 3 on the isotropic plane over 0.5 < |g| < 1
  GroupSpec e2 = group_from_token("euclidean:2:1,1");
  Gauge eg = Gauge::euclidean_power(e2);
  Estimate pinned = annulus_power_integral(e2, eg, 3.0, 0.5, 1.0, ctx.cfg(200000, 3, 9));
  bool pinned_ok =
      std::abs(pinned.value - 2.0 * M_PI) <= ctx.tolx() * pinned.half_width();
  pass = pass && pinned_ok;
  rows.push_back({{"group", "euclidean:2:1,1"},
                  {"gamma", 3.0},
                  {"range", "0.5..1"},
                  {"estimate", est_json(pinned)},
                  {"target", 2.0 * M_PI},
                  {"pass", pinned_ok}});
  res.details = {{"cases", rows}};
  res.pass = pass;
  return res;
}

// --- criterion 4 ------------------------------------------------------------

CriterionResult criterion_constants(const Ctx& ctx) {
  CriterionResult res{4, "sigma_Q and tau_m dual estimators; sphere moment identity", false, 0, {}};
  struct Combo {
    std::string group, gauge;
  };
  const std::vector<Combo> combos = {{"euclidean:2:1,1", "euclidean_power"},
                                     {"parabolic_r2", "parabolic"},
                                     {"heisenberg:1", "koranyi"},
                                     {"heisenberg:2", "koranyi"}};
  bool pass = true;
  json rows = json::array();
  for (std::size_t ci = 0; ci < combos.size(); ++ci) {
    GroupSpec spec = group_from_token(combos[ci].group);
    Gauge gauge = Gauge::parse(spec, combos[ci].gauge);
    QuadratureConfig cfg = ctx.cfg(200000, 4, static_cast<int>(ci));
    Estimate sig = sigma_Q(spec, gauge, cfg);
    Estimate sig2 = sigma_Q_exterior(spec, gauge, 0.5, cfg.with_seed(cfg.seed + 7));
    Estimate tau = tau_m(spec, gauge, cfg);
    // tau through the kernel moment at s = 1/2
    Estimate diag = moment_integral(spec, gauge, 0, 0, 0.5, cfg.with_seed(cfg.seed + 8));
    Estimate tau2 = diag.scaled(2.0 * spec.m() * 0.5);
    bool ok = agree_tol(sig, sig2, ctx.tolx()) && agree_tol(tau, tau2, ctx.tolx());
    json row = {{"group", combos[ci].group},    {"gauge", combos[ci].gauge},
                {"sigma", est_json(sig)},       {"sigma_exterior", est_json(sig2)},
                {"tau", est_json(tau)},         {"tau_from_moment", est_json(tau2)},
                {"dual_ok", ok}};
    if (combos[ci].group == "euclidean:2:1,1") {
      bool exact = std::abs(sig.value - 2 * M_PI) <= 0.01 * 2 * M_PI * ctx.tolx() &&
                   std::abs(tau.value - 2 * M_PI) <= 0.01 * 2 * M_PI * ctx.tolx();
      row["exact_2pi_ok"] = exact;
      ok = ok && exact;
    }
    pass = pass && ok;
    rows.push_back(row);
  }
  // moment identity rows
  json moments = json::array();
  for (const std::string& gname : {std::string("euclidean:2:1,1"), std::string("heisenberg:1")}) {
    GroupSpec spec = group_from_token(gname);
    Gauge gauge = gname[0] == 'e' ? Gauge::euclidean_power(spec) : Gauge::koranyi(spec);
    QuadratureConfig cfg = ctx.cfg(200000, 4, 17);
    Estimate tau = tau_m(spec, gauge, cfg);
    Estimate off = moment_integral(spec, gauge, 0, 1, 0.5, cfg);
    bool off_ok = std::abs(off.value) <= ctx.tolx() * 2.0 * off.std_err + off.tail_bound;
    bool diag_ok = true;
    json drows = json::array();
    for (double s : {0.25, 0.5, 0.75}) {
      Estimate diag = moment_integral(spec, gauge, 0, 0, s, cfg.with_seed(cfg.seed + 31));
      double target = tau.value / (2.0 * spec.m() * (1.0 - s));
      bool ok = std::abs(diag.value - target) <= 0.02 * target * ctx.tolx();
      diag_ok = diag_ok && ok;
      drows.push_back({{"s", s}, {"diag", est_json(diag)}, {"target", target}, {"pass", ok}});
    }
    pass = pass && off_ok && diag_ok;
    moments.push_back({{"group", gname},
                       {"offdiag", est_json(off)},
                       {"offdiag_ok", off_ok},
                       {"diag_rows", drows}});
  }
  res.details = {{"combos", rows}, {"moments", moments}};
  res.pass = pass;
  return res;
}

// --- criterion 5 ------------------------------------------------------------

CriterionResult criterion_operator_equivalence(const Ctx& ctx) {
  CriterionResult res{5, "principal-value and symmetric-difference estimators agree", false, 0, {}};
  GroupSpec spec = group_from_token("heisenberg:1");
  Gauge gauge = Gauge::koranyi(spec);
  FracParams params(0.25);
  QuadratureConfig base = ctx.cfg(50000, 5);
  GroupConstants cons = compute_constants(spec, gauge, base);
  ScalarField u = make_field("compact_bump:R=1", spec, gauge);
  const std::vector<Vec> points = {point({0.0, 0.0, 0.0}), point({0.5, 0.0, 0.0}),
                                   point({0.0, 0.4, 0.1}), point({0.3, -0.3, 0.05}),
                                   point({0.8, 0.2, -0.1})};
  bool pass = true;
  json rows = json::array();
  for (std::size_t i = 0; i < points.size(); ++i) {
    Estimate a = eval_Ls(spec, gauge, params, u, points[i], base.with_seed(base.seed + 2 * i), &cons);
    Estimate pv = eval_Ls_pv(spec, gauge, params, u, points[i], {std::pow(2.0, -8)},
                             base.with_seed(base.seed + 2 * i + 1), &cons)[0];
    bool ok = agree_tol(a, pv, ctx.tolx());
    pass = pass && ok;
    rows.push_back({{"point", std::vector<double>(points[i].data(), points[i].data() + 3)},
                    {"second_difference", est_json(a)},
                    {"principal_value", est_json(pv)},
                    {"pass", ok}});
  }
  res.details = {{"s", params.s}, {"epsilon", std::pow(2.0, -8)}, {"points", rows}};
  res.pass = pass;
  return res;
}

// --- criterion 6 ------------------------------------------------------------

CriterionResult criterion_euclidean_oracle(const Ctx& ctx) {
  CriterionResult res{6, "1-D Gaussian against the Fourier-multiplier oracle", false, 0, {}};
  GroupSpec spec = group_from_token("euclidean:1");
  Gauge gauge = Gauge::euclidean_power(spec);
  QuadratureConfig cfg = ctx.cfg(200000, 6);
  GroupConstants cons = compute_constants(spec, gauge, cfg);
  ScalarField u = make_field("gaussian", spec, gauge);
  bool pass = true;
  json rows = json::array();
  for (double s : {0.25, 0.5, 0.75}) {
    FracParams params(s);
    for (double x : {0.0, 0.3, 1.5}) {
      Vec g = point({x});
      Estimate est = eval_Ls(spec, gauge, params, u, g, cfg, &cons);
      double oracle = fractional_gaussian_oracle_1d(s, x);
      bool ok = std::abs(est.value - oracle) <= 0.02 * std::abs(oracle) * ctx.tolx();
      pass = pass && ok;
      rows.push_back({{"s", s},
                      {"x", x},
                      {"estimate", est_json(est)},
                      {"oracle", oracle},
                      {"rel_err", std::abs(est.value - oracle) / std::abs(oracle)},
                      {"pass", ok}});
    }
  }
  res.details = {{"cases", rows}};
  res.pass = pass;
  return res;
}

// --- criterion 7 ------------------------------------------------------------

CriterionResult criterion_limits(const Ctx& ctx) {
  CriterionResult res{7, "small-s and large-s limit identities", false, 0, {}};
  bool pass = true;
  json rows = json::array();
  const std::vector<double> s_grid = {0.02, 0.98};
  struct Case {
    std::string group, gauge;
    Vec pt;
  };
  std::vector<Case> cases;
  cases.push_back({"euclidean:2:1,1", "euclidean_power", point({0.0, 0.0})});
  cases.push_back({"heisenberg:1", "koranyi", point({0.3, 0.2, 0.05})});
  for (std::size_t ci = 0; ci < cases.size(); ++ci) {
    GroupSpec spec = group_from_token(cases[ci].group);
    Gauge gauge = Gauge::parse(spec, cases[ci].gauge);
    QuadratureConfig cfg = ctx.cfg(200000, 7, static_cast<int>(ci));
    GroupConstants cons = compute_constants(spec, gauge, cfg);
    ScalarField u = make_field("gaussian", spec, gauge);
    auto probe = limit_probe(spec, gauge, u, {cases[ci].pt}, s_grid, cfg, &cons);
    for (const auto& row : probe) {
      bool ok = row.rel_err <= 0.1 * ctx.tolx();
      pass = pass && ok;
      rows.push_back({{"group", cases[ci].group},
                      {"s", row.s},
                      {"kind", row.seminorm_row ? "seminorm" : "operator"},
                      {"family", row.family},
                      {"normalized_value", row.normalized_value},
                      {"normalized_err", row.normalized_err},
                      {"target", row.target},
                      {"rel_err", row.rel_err},
                      {"pass", ok}});
    }
  }
  res.details = {{"rows", rows}};
  res.pass = pass;
  return res;
}

// --- criterion 8 ------------------------------------------------------------

CriterionResult criterion_invariances(const Ctx& ctx) {
  CriterionResult res{8, "left-translation equivariance and dilation covariance", false, 0, {}};
  GroupSpec spec = group_from_token("heisenberg:1");
  Gauge gauge = Gauge::koranyi(spec);
  FracParams params(0.5);
  QuadratureConfig cfg = ctx.cfg(100000, 8);
  GroupConstants cons = compute_constants(spec, gauge, cfg);
  ScalarField u = make_field("compact_bump:R=1", spec, gauge);
  Vec g0 = point({0.4, -0.3, 0.1});
  Vec g = point({0.2, 0.1, -0.05});

  bool pass = true;
  json details;

  {  // translation
    ScalarField ut = translate_field(spec, gauge, g0, u);
    Estimate a = eval_Ls(spec, gauge, params, ut, g, cfg.with_seed(cfg.seed + 1), &cons);
    Estimate b = eval_Ls(spec, gauge, params, u, multiply(spec, g0, g),
                         cfg.with_seed(cfg.seed + 2), &cons);
    bool ok = agree_tol(a, b, ctx.tolx());
    pass = pass && ok;
    details["translation"] = {{"lhs", est_json(a)}, {"rhs", est_json(b)}, {"pass", ok}};
  }
  {  // dilation covariance
    json drows = json::array();
    for (double lam : {0.5, 2.0}) {
      ScalarField ud = dilate_field(spec, lam, u);
      Estimate a = eval_Ls(spec, gauge, params, ud, g, cfg.with_seed(cfg.seed + 3), &cons);
      Estimate b = eval_Ls(spec, gauge, params, u, dilate(spec, lam, g),
                           cfg.with_seed(cfg.seed + 4), &cons)
                       .scaled(std::pow(lam, 2.0 * params.s));
      bool ok = agree_tol(a, b, ctx.tolx());
      pass = pass && ok;
      drows.push_back({{"lambda", lam}, {"lhs", est_json(a)}, {"rhs", est_json(b)}, {"pass", ok}});
    }
    details["dilation"] = drows;
  }
  {  // seminorm invariance under the critical rescaling
    double lam = 2.0;
    double p = critical_exponent(spec.Q(), params.s);
    ScalarField ul = scale_field(std::pow(lam, -spec.Q() / p), dilate_field(spec, 1.0 / lam, u));
    ul.name = "bump-rescaled";
    Estimate a = seminorm(spec, gauge, params, ul, cfg.with_seed(cfg.seed + 5), &cons);
    Estimate b = seminorm(spec, gauge, params, u, cfg.with_seed(cfg.seed + 6), &cons);
    bool ok = agree_tol(a, b, ctx.tolx());
    pass = pass && ok;
    details["seminorm_rescaling"] = {{"lhs", est_json(a)}, {"rhs", est_json(b)}, {"pass", ok}};
  }
  res.details = details;
  res.pass = pass;
  return res;
}

// --- criterion 9 ------------------------------------------------------------

CriterionResult criterion_form_symmetry(const Ctx& ctx) {
  CriterionResult res{9, "form symmetry and product rule with shared streams", false, 0, {}};
  GroupSpec spec = group_from_token("heisenberg:1");
  Gauge gauge = Gauge::koranyi(spec);
  FracParams params(0.5);
  QuadratureConfig cfg = ctx.cfg(100000, 9);
  GroupConstants cons = compute_constants(spec, gauge, cfg);
  ScalarField u = make_field("compact_bump:R=1", spec, gauge);
  ScalarField v = make_field("poly_bump:i=1", spec, gauge);
  Vec g = point({0.2, -0.1, 0.05});

  Estimate sym = form_symmetry_residual(spec, gauge, params, u, v, cfg, &cons);
  bool sym_ok = std::abs(sym.value) <= ctx.tolx() * 2.0 * sym.std_err + sym.tail_bound;

  Estimate pr = product_rule_check(spec, gauge, params, u, v, g, cfg.with_seed(cfg.seed + 1), &cons);
  bool pr_ok = std::abs(pr.value) <= ctx.tolx() * 2.0 * pr.std_err + pr.tail_bound;

  Estimate pr2 =
      product_rule_check(spec, gauge, params, u, u, g, cfg.with_seed(cfg.seed + 2), &cons);
  bool pr2_ok = std::abs(pr2.value) <= ctx.tolx() * 2.0 * pr2.std_err + pr2.tail_bound;

  res.details = {{"form_symmetry_residual", est_json(sym)},
                 {"product_rule_residual_uv", est_json(pr)},
                 {"product_rule_residual_uu", est_json(pr2)},
                 {"sym_ok", sym_ok},
                 {"pr_ok", pr_ok},
                 {"pr2_ok", pr2_ok}};
  res.pass = sym_ok && pr_ok && pr2_ok;
  return res;
}

// --- criterion 10 -----------------------------------------------------------

CriterionResult criterion_decay(const Ctx& ctx) {
  CriterionResult res{10, "far-field decay bound and direct far-field integral", false, 0, {}};
  GroupSpec spec = group_from_token("heisenberg:1");
  Gauge gauge = Gauge::koranyi(spec);
  FracParams params(0.5);
  QuadratureConfig cfg = ctx.cfg(100000, 10);
  GroupConstants cons = compute_constants(spec, gauge, cfg);
  ScalarField u = make_field("compact_bump:R=1", spec, gauge);
  double R = *u.support_radius;
  auto rows = decay_profile(spec, gauge, params, u, {2.0 * R, 4.0 * R, 8.0 * R}, cfg, &cons);
  bool pass = true;
  json jrows = json::array();
  for (const auto& row : rows) {
    bool bound_ok = row.scaled.value <=
                    row.bound * (1.0 + 2.0 * row.bound_rel_err) +
                        ctx.tolx() * row.scaled.half_width();
    bool direct_ok = agree_tol(row.scaled, row.direct_scaled, ctx.tolx());
    pass = pass && bound_ok && direct_ok;
    jrows.push_back({{"radius", row.radius},
                     {"scaled", est_json(row.scaled)},
                     {"bound", row.bound},
                     {"direct", est_json(row.direct_scaled)},
                     {"bound_ok", bound_ok},
                     {"direct_ok", direct_ok}});
  }
  res.details = {{"rows", jrows}};
  res.pass = pass;
  return res;
}

// --- criterion 11 -----------------------------------------------------------

CriterionResult criterion_sobolev_inequality(const Ctx& ctx) {
  CriterionResult res{11, "fractional Sobolev inequality with the interpolation constant", false, 0, {}};
  double bracket = hedberg_bracket(4.0, 0.5);
  bool bracket_ok = std::abs(bracket - 1.754765) <= 1e-3;

  struct Combo {
    std::string group, gauge;
  };
  const std::vector<Combo> combos = {{"euclidean:2:1,1", "euclidean_power"},
                                     {"parabolic_r2", "parabolic"},
                                     {"parabolic_r2", "euclidean_power"},
                                     {"heisenberg:1", "koranyi"},
                                     {"heisenberg:1", "ball_gauge:0.5"},
                                     {"heisenberg:2", "koranyi"}};
  FracParams params(0.5);
  bool pass = bracket_ok;
  json rows = json::array();
  for (std::size_t ci = 0; ci < combos.size(); ++ci) {
    GroupSpec spec = group_from_token(combos[ci].group);
    Gauge gauge = Gauge::parse(spec, combos[ci].gauge);
    QuadratureConfig cfg = ctx.cfg(100000, 11, static_cast<int>(ci));
    GroupConstants cons = compute_constants(spec, gauge, cfg);
    double p = critical_exponent(spec.Q(), params.s);
    double S = hedberg_embedding_factor(spec.Q(), params.s, cons.sigma.value);
    for (const std::string& fname : {std::string("gaussian"), std::string("compact_bump:R=1")}) {
      ScalarField u = make_field(fname, spec, gauge);
      Estimate lhs = lp_norm_est(spec, gauge, u, p, cfg);
      Estimate sem = seminorm(spec, gauge, params, u, cfg.with_seed(cfg.seed + 3), &cons);
      double rhs = 1.05 * S * sem.value;
      bool ok = lhs.value <= rhs + ctx.tolx() * (lhs.half_width() + 1.05 * S * sem.half_width());
      pass = pass && ok;
      rows.push_back({{"group", combos[ci].group},
                      {"gauge", combos[ci].gauge},
                      {"field", fname},
                      {"lp_norm", est_json(lhs)},
                      {"seminorm", est_json(sem)},
                      {"embedding_factor", S},
                      {"ratio", lhs.value / (S * sem.value)},
                      {"pass", ok}});
    }
  }
  res.details = {{"bracket", bracket}, {"bracket_ok", bracket_ok}, {"cases", rows}};
  res.pass = pass;
  return res;
}

// --- criterion 12 -----------------------------------------------------------

CriterionResult criterion_extremal_search(const Ctx& ctx) {
  CriterionResult res{12, "discrete quotient descent and Euler-Lagrange residual", false, 0, {}};
  GroupSpec spec = group_from_token("heisenberg:1");
  Gauge gauge = Gauge::koranyi(spec);
  FracParams params(0.5);
  QuadratureConfig cfg = ctx.cfg(100000, 12);
  GroupConstants cons = compute_constants(spec, gauge, cfg);
  ScalarField seed_field = make_field("gaussian", spec, gauge);
  GridField init = make_grid_field(spec, 6.0, 16, seed_field);
  OptimizeOptions opt;
  opt.iters = ctx.opt.quick ? 50 : 150;
  OptimizeResult out = optimize_quotient(spec, gauge, params, init, opt, cons.sigma.value);

  bool monotone = true;
  for (std::size_t i = 1; i < out.trace.size(); ++i)
    if (out.trace[i].quotient > out.trace[i - 1].quotient + 1e-12) monotone = false;
  bool residual_ok = out.el_residual <= 0.05 * ctx.tolx();

  // rescaling invariance of the final quotient
  double p = critical_exponent(spec.Q(), params.s);
  GridField rescaled = out.field;
  rescaled.box_L = out.field.box_L * 2.0;
  rescaled.values = out.field.values * std::pow(2.0, -spec.Q() / p);
  double q1 = sobolev_quotient(spec, gauge, params, out.field, cons.sigma.value);
  double q2 = sobolev_quotient(spec, gauge, params, rescaled, cons.sigma.value);
  bool rescale_ok = std::abs(q2 - q1) <= 0.03 * std::abs(q1) * ctx.tolx();

  res.details = {{"iterations", out.trace.size() - 1},
                 {"final_quotient", out.trace.back().quotient},
                 {"monotone", monotone},
                 {"stagnated", out.stagnated},
                 {"el_residual", out.el_residual},
                 {"multiplier", out.multiplier},
                 {"rescaled_quotient", q2},
                 {"rescale_ok", rescale_ok}};
  res.pass = monotone && residual_ok && rescale_ok;
  return res;
}

// --- criterion 13 -----------------------------------------------------------

CriterionResult criterion_mollify_truncate(const Ctx& ctx) {
  CriterionResult res{13, "mollifier contraction and truncation vanishing", false, 0, {}};
  GroupSpec spec = group_from_token("heisenberg:1");
  Gauge gauge = Gauge::koranyi(spec);
  FracParams params(0.5);
  QuadratureConfig cfg = ctx.cfg(20000, 13);
  GroupConstants cons = compute_constants(spec, gauge, cfg.with_samples(ctx.budget(100000)));

  ScalarField u = make_field("compact_bump:R=1.5", spec, gauge);
  ScalarField rho = make_mollifier(spec, gauge, 1.0);
  Estimate sem_u = seminorm(spec, gauge, params, u, cfg, &cons);

  bool contraction_ok = true;
  bool cauchy_ok = true;
  json mrows = json::array();
  double prev_diff = 1e300;
  for (double eps : {0.5, 0.25, 0.125}) {
    ScalarField ue = mollify(spec, gauge, rho, 1.0, eps, u, 5);
    Estimate sem_e = seminorm(spec, gauge, params, ue, cfg.with_seed(cfg.seed + 11), &cons);
    bool ok = sem_e.value <=
              1.03 * sem_u.value + ctx.tolx() * (sem_e.half_width() + 1.03 * sem_u.half_width());
    contraction_ok = contraction_ok && ok;
    ScalarField diff = subtract_fields(ue, u);
    diff.name = "mollify-diff";
    Estimate sem_d = seminorm(spec, gauge, params, diff, cfg.with_seed(cfg.seed + 12), &cons);
    bool dec = sem_d.value < prev_diff;
    cauchy_ok = cauchy_ok && dec;
    prev_diff = sem_d.value;
    mrows.push_back({{"eps", eps},
                     {"seminorm_mollified", est_json(sem_e)},
                     {"seminorm_diff", est_json(sem_d)},
                     {"contraction_ok", ok},
                     {"decreasing", dec}});
  }

  // truncation: [phi_R w] decreases as R grows, for a slowly decaying field
  ScalarField w = make_field("power_tail", spec, gauge);
  bool trunc_ok = true;
  json trows = json::array();
  double prev = 1e300;
  for (double R : {4.0, 8.0, 16.0}) {
    ScalarField phi = truncation_field(spec, gauge, R);
    ScalarField pw = multiply_fields(phi, w);
    pw.name = "tail-R" + std::to_string(static_cast<int>(R));
    Estimate sem_t = seminorm(spec, gauge, params, pw, cfg.with_seed(cfg.seed + 13), &cons);
    bool dec = sem_t.value < prev;
    trunc_ok = trunc_ok && dec;
    prev = sem_t.value;
    trows.push_back({{"R", R}, {"seminorm", est_json(sem_t)}, {"decreasing", dec}});
  }

  res.details = {{"seminorm_u", est_json(sem_u)},
                 {"mollify_rows", mrows},
                 {"truncation_rows", trows}};
  res.pass = contraction_ok && cauchy_ok && trunc_ok;
  return res;
}

// --- criterion 14 -----------------------------------------------------------

CriterionResult criterion_translation_difference(const Ctx& ctx) {
  CriterionResult res{14, "translation-difference ratio bounded in |h|", false, 0, {}};
  GroupSpec spec = group_from_token("heisenberg:1");
  Gauge gauge = Gauge::koranyi(spec);
  FracParams params(0.5);
  QuadratureConfig cfg = ctx.cfg(100000, 14);
  GroupConstants cons = compute_constants(spec, gauge, cfg);
  ScalarField u = make_field("compact_bump:R=1", spec, gauge);
  Estimate sem = seminorm(spec, gauge, params, u, cfg, &cons);

  bool pass = true;
  json rows = json::array();
  double max_ratio = 0;
  int argmax = -1;
  for (int k = 0; k <= 5; ++k) {
    Vec h = point({std::pow(2.0, -k), 0.0, 0.0});
    Estimate r = translation_difference(spec, gauge, params, u, h, cfg.with_seed(cfg.seed + k),
                                        &sem, &cons);
    if (!std::isfinite(r.value)) pass = false;
    if (r.value > max_ratio) {
      max_ratio = r.value;
      argmax = k;
    }
    rows.push_back({{"h_gauge", std::pow(2.0, -k)}, {"ratio", est_json(r)}});
  }
  // bounded means no blow-up toward small h: the maximum must not sit at the
  // smallest radius for a smooth field
  bool no_blowup = argmax < 5;
  res.details = {{"rows", rows}, {"reported_constant", max_ratio}, {"argmax_level", argmax}};
  res.pass = pass && no_blowup;
  return res;
}

// --- criterion 15 -----------------------------------------------------------

CriterionResult criterion_rellich(const Ctx& ctx) {
  CriterionResult res{15, "projection-defect scaling in the ball radius", false, 0, {}};
  GroupSpec spec = group_from_token("euclidean:2:1,1");
  Gauge gauge = Gauge::euclidean_power(spec);
  FracParams params(0.5);
  QuadratureConfig cfg = ctx.cfg(50000, 15);
  GroupConstants cons = compute_constants(spec, gauge, cfg);
  ScalarField u = make_field("gaussian", spec, gauge);
  Box omega;
  omega.lo = point({-1.0, -1.0});
  omega.hi = point({1.0, 1.0});

  json rows = json::array();
  std::vector<double> logd, logv;
  for (double delta : {0.4, 0.2, 0.1}) {
    auto balls = pack_balls(spec, gauge, omega, delta);
    Estimate defect = rellich_defect(spec, gauge, params, u, balls, cfg, &cons);
    rows.push_back({{"delta", delta},
                    {"n_balls", balls.size()},
                    {"defect", est_json(defect)}});
    logd.push_back(std::log(delta));
    logv.push_back(std::log(std::max(defect.value, 1e-300)));
  }
  // least-squares slope
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < logd.size(); ++i) {
    mx += logd[i];
    my += logv[i];
  }
  mx /= logd.size();
  my /= logv.size();
  double num = 0, den = 0;
  for (std::size_t i = 0; i < logd.size(); ++i) {
    num += (logd[i] - mx) * (logv[i] - my);
    den += (logd[i] - mx) * (logd[i] - mx);
  }
  double slope = num / den;
  double required = (2.0 * params.s - 0.2) / ctx.tolx();
  res.details = {{"rows", rows}, {"slope", slope}, {"required", required}};
  res.pass = slope >= required;
  return res;
}

// --- criterion 16 -----------------------------------------------------------

CriterionResult criterion_counterexample(const Ctx& ctx) {
  CriterionResult res{16, "translation inequality has no uniform constant", false, 0, {}};
  auto rows = counterexample_sweep({1, 4, 16, 64, 256}, {0.1, 0.01, 0.001});
  bool disjoint_ok = true;
  double at_eta_001 = 0;
  double baseline = 0;
  double sweep_max = 0;
  json jrows = json::array();
  for (const auto& r : rows) {
    jrows.push_back({{"k", r.k}, {"eta", r.eta}, {"ratio", r.ratio}});
    sweep_max = std::max(sweep_max, r.ratio);
    if (r.k == 1 && r.eta == 0.1) baseline = r.ratio;
    if (r.k * r.eta >= 2.5) {
      double target = 0.9 * std::sqrt(2.0 / r.eta);
      if (r.ratio < target) disjoint_ok = false;
      if (r.eta == 0.01) at_eta_001 = std::max(at_eta_001, r.ratio);
    }
  }
  bool big_ok = at_eta_001 > 12.0;
  bool unbounded_ok = sweep_max >= 10.0 * baseline;
  res.details = {{"rows", jrows},
                 {"max_ratio_eta_0.01", at_eta_001},
                 {"baseline_k1_eta0.1", baseline},
                 {"sweep_max", sweep_max}};
  res.pass = disjoint_ok && big_ok && unbounded_ok;
  return res;
}

}  // namespace

std::vector<CriterionResult> run_all(const Options& opt) {
  Ctx ctx{opt};
  using Fn = std::function<CriterionResult(const Ctx&)>;
  const std::vector<Fn> criteria = {
      criterion_group_algebra,     criterion_gauge_axioms,     criterion_polar_identity,
      criterion_constants,         criterion_operator_equivalence, criterion_euclidean_oracle,
      criterion_limits,            criterion_invariances,      criterion_form_symmetry,
      criterion_decay,             criterion_sobolev_inequality, criterion_extremal_search,
      criterion_mollify_truncate,  criterion_translation_difference, criterion_rellich,
      criterion_counterexample};
  std::vector<CriterionResult> out;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    int id = static_cast<int>(i) + 1;
    if (!opt.only.empty() &&
        std::find(opt.only.begin(), opt.only.end(), id) == opt.only.end())
      continue;
    auto t0 = std::chrono::steady_clock::now();
    CriterionResult r = criteria[i](ctx);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.push_back(std::move(r));
  }
  return out;
}

json to_json(const std::vector<CriterionResult>& results, const Options& opt,
             double wall_seconds) {
  json arr = json::array();
  int passed = 0;
  for (const auto& r : results) {
    if (r.pass) ++passed;
    arr.push_back({{"id", r.id},
                   {"name", r.name},
                   {"pass", r.pass},
                   {"seconds", r.seconds},
                   {"details", r.details}});
  }
  return json{{"criteria", arr},
              {"passed", passed},
              {"total", results.size()},
              {"all_pass", passed == static_cast<int>(results.size())},
              {"seed", opt.seed},
              {"quick", opt.quick},
              {"wall_clock_seconds", wall_seconds}};
}

}  // namespace homfrac::accept

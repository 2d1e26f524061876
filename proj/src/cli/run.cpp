#include "cli/run.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "accept/acceptance.hpp"
#include "homfrac/fracop.hpp"
#include "homfrac/sobolev.hpp"

namespace homfrac::cli {

using nlohmann::json;

namespace {

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

Vec parse_point(const std::string& s, int n) {
  std::vector<double> v = parse_list(s);
  if (static_cast<int>(v.size()) != n)
    throw ConfigError("point '" + s + "' has " + std::to_string(v.size()) +
                      " coordinates, group has " + std::to_string(n));
  return Eigen::Map<const Vec>(v.data(), n);
}

std::vector<Vec> load_points(const std::string& path, int n) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open points file '" + path + "'");
  std::vector<Vec> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    out.push_back(parse_point(line, n));
  }
  return out;
}

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty()) {
    std::cout << content;
    if (!content.empty() && content.back() != '\n') std::cout << "\n";
  } else {
    std::ofstream out(out_path);
    if (!out) throw ConfigError("cannot open output file '" + out_path + "'");
    out << content;
  }
}

json est_json(const Estimate& e) {
  return json{{"value", e.value},
              {"std_err", e.std_err},
              {"tail_bound", e.tail_bound},
              {"n_evals", e.n_evals},
              {"seed", e.seed},
              {"budget_exceeded", e.budget_exceeded}};
}

std::string point_str(const Vec& p) {
  std::ostringstream os;
  for (int i = 0; i < p.size(); ++i) {
    if (i) os << " ";
    os << p[i];
  }
  return os.str();
}

struct CommonArgs {
  std::string group = "heisenberg:1";
  std::string gauge = "koranyi";
  std::string field = "gaussian";
  double s = 0.5;
  long long samples = 200000;
  std::uint64_t seed = 20240901ULL;
  int threads = 0;
  std::string out;

  void attach(CLI::App* cmd, bool with_field = true, bool with_s = true) {
    cmd->add_option("--group", group, "builtin token or JSON spec file");
    cmd->add_option("--gauge", gauge, "koranyi | ball_gauge:r | parabolic | euclidean_power");
    if (with_field) cmd->add_option("--field", field, "test field, e.g. gaussian, compact_bump:R=1");
    if (with_s) cmd->add_option("--s", s, "fractional order in [0.01, 0.99]");
    cmd->add_option("--samples", samples, "Monte Carlo samples per region");
    cmd->add_option("--seed", seed, "RNG seed");
    cmd->add_option("--threads", threads, "worker threads (0 = hardware)");
    cmd->add_option("--out", out, "output file (default stdout)");
  }

  QuadratureConfig cfg() const {
    QuadratureConfig c;
    c.n_samples = samples;
    c.seed = seed;
    c.threads = threads;
    return c;
  }
};

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"fractional operators and Sobolev embeddings on homogeneous groups"};
  app.require_subcommand(1);

  // validate ----------------------------------------------------------------
  auto* c_validate = app.add_subcommand("validate", "check a group specification");
  CommonArgs a_validate;
  a_validate.attach(c_validate, false, false);

  // gauge-check ---------------------------------------------------------------
  auto* c_gauge = app.add_subcommand("gauge-check", "sample the gauge axioms");
  CommonArgs a_gauge;
  a_gauge.samples = 100000;
  a_gauge.attach(c_gauge, false, false);

  // constants -----------------------------------------------------------------
  auto* c_constants = app.add_subcommand("constants", "sigma_Q, tau_m and cross-checks");
  CommonArgs a_constants;
  a_constants.attach(c_constants, false, false);

  // fracop ---------------------------------------------------------------------
  auto* c_fracop = app.add_subcommand("fracop", "evaluate the fractional operator at points");
  CommonArgs a_fracop;
  a_fracop.attach(c_fracop);
  std::string fracop_point = "0,0,0";
  std::string fracop_points_file;
  c_fracop->add_option("--point", fracop_point, "comma-separated coordinates");
  c_fracop->add_option("--points", fracop_points_file, "CSV file, one point per line");

  // limits ----------------------------------------------------------------------
  auto* c_limits = app.add_subcommand("limits", "normalized small-s / large-s probes");
  CommonArgs a_limits;
  a_limits.attach(c_limits, true, false);
  std::string limits_sgrid = "0.02,0.05,0.5,0.95,0.98";
  std::string limits_point = "";
  c_limits->add_option("--s-grid", limits_sgrid, "comma-separated s values");
  c_limits->add_option("--point", limits_point, "probe point (default origin)");

  // seminorm ----------------------------------------------------------------------
  auto* c_seminorm = app.add_subcommand("seminorm", "Gagliardo seminorm of a field");
  CommonArgs a_seminorm;
  a_seminorm.attach(c_seminorm);

  // dirichlet ------------------------------------------------------------------
  auto* c_dirichlet = app.add_subcommand("dirichlet", "Dirichlet form and symmetry residual");
  CommonArgs a_dirichlet;
  a_dirichlet.attach(c_dirichlet);
  std::string dirichlet_field2 = "poly_bump:i=1";
  c_dirichlet->add_option("--field2", dirichlet_field2, "second field");

  // decay -----------------------------------------------------------------------
  auto* c_decay = app.add_subcommand("decay", "far-field decay profile");
  CommonArgs a_decay;
  a_decay.field = "compact_bump:R=1";
  a_decay.attach(c_decay);
  std::string decay_radii = "2,4,8";
  c_decay->add_option("--radii", decay_radii, "gauge radii (multiples of the support)");

  // transdiff ---------------------------------------------------------------------
  auto* c_transdiff = app.add_subcommand("transdiff", "translation-difference ratios");
  CommonArgs a_transdiff;
  a_transdiff.field = "compact_bump:R=1";
  a_transdiff.attach(c_transdiff);
  int transdiff_levels = 6;
  c_transdiff->add_option("--levels", transdiff_levels, "number of dyadic |h| levels");

  // sobolev-opt ----------------------------------------------------------------
  auto* c_opt = app.add_subcommand("sobolev-opt", "descend the discrete Sobolev quotient");
  CommonArgs a_opt;
  a_opt.attach(c_opt);
  int opt_grid = 16;
  double opt_box = 6.0;
  int opt_iters = 150;
  double opt_step = 0.5;
  c_opt->add_option("--grid", opt_grid, "nodes per axis");
  c_opt->add_option("--box", opt_box, "box half-width in gauge units");
  c_opt->add_option("--iters", opt_iters, "max iterations");
  c_opt->add_option("--step", opt_step, "initial step size");

  // hedberg ---------------------------------------------------------------------
  auto* c_hedberg = app.add_subcommand("hedberg", "interpolation constant of the embedding");
  double hed_Q = 4.0, hed_s = 0.5, hed_sigma = 0.0;
  std::string hed_out;
  c_hedberg->add_option("--Q", hed_Q, "homogeneous dimension");
  c_hedberg->add_option("--s", hed_s, "fractional order");
  c_hedberg->add_option("--sigma", hed_sigma, "unit-sphere measure (0 = bracket only)");
  c_hedberg->add_option("--out", hed_out, "output file");

  // mollify-check -----------------------------------------------------------------
  auto* c_mollify = app.add_subcommand("mollify-check", "mollifier contraction checks");
  CommonArgs a_mollify;
  a_mollify.field = "compact_bump:R=1.5";
  a_mollify.samples = 20000;
  a_mollify.attach(c_mollify);
  std::string mollify_eps = "0.5,0.25,0.125";
  c_mollify->add_option("--eps-list", mollify_eps, "mollification scales");

  // rellich -------------------------------------------------------------------------
  auto* c_rellich = app.add_subcommand("rellich", "ball-average projection defect");
  CommonArgs a_rellich;
  a_rellich.group = "euclidean:2:1,1";
  a_rellich.gauge = "euclidean_power";
  a_rellich.samples = 50000;
  a_rellich.attach(c_rellich);
  std::string rellich_deltas = "0.4,0.2,0.1";
  double rellich_omega = 1.0;
  c_rellich->add_option("--deltas", rellich_deltas, "ball scales");
  c_rellich->add_option("--omega", rellich_omega, "half-width of the packing box");

  // counterexample ---------------------------------------------------------------
  auto* c_counter = app.add_subcommand("counterexample", "translation-inequality sweep");
  std::string counter_k = "1,4,16,64,256";
  std::string counter_eta = "0.1,0.01,0.001";
  std::string counter_out;
  c_counter->add_option("--k", counter_k, "frequency factors");
  c_counter->add_option("--eta", counter_eta, "shift scales");
  c_counter->add_option("--out", counter_out, "output file");

  // report -------------------------------------------------------------------------
  auto* c_report = app.add_subcommand("report", "run the full acceptance suite");
  bool report_quick = false;
  std::uint64_t report_seed = 20240905ULL;
  int report_threads = 0;
  std::string report_out;
  std::string report_only;
  c_report->add_flag("--quick", report_quick, "1/10 budgets, relaxed statistical tolerances");
  c_report->add_option("--seed", report_seed, "RNG seed");
  c_report->add_option("--threads", report_threads, "worker threads");
  c_report->add_option("--out", report_out, "JSON output file");
  c_report->add_option("--only", report_only, "comma-separated criterion ids");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*c_validate) {
      GroupSpec spec = group_from_token(a_validate.group);
      ValidationReport rep = validate_spec(spec);
      json issues = json::array();
      for (const auto& it : rep.issues) issues.push_back({{"check", it.check}, {"detail", it.detail}});
      json doc = {{"group", spec.name},
                  {"pass", rep.pass()},
                  {"weights_ok", rep.weights_ok},
                  {"antisymmetry_ok", rep.antisymmetry_ok},
                  {"grading_ok", rep.grading_ok},
                  {"jacobi_ok", rep.jacobi_ok},
                  {"step_supported", rep.step_supported},
                  {"issues", issues}};
      emit(a_validate.out, doc.dump(2));
      return rep.pass() ? 0 : 2;
    }

    if (*c_gauge) {
      GroupSpec spec = group_from_token(a_gauge.group);
      Gauge gauge = Gauge::parse(spec, a_gauge.gauge);
      GaugeReport rep = check_gauge_properties(gauge, a_gauge.samples, a_gauge.seed);
      json doc = {{"group", spec.name},
                  {"gauge", gauge.label()},
                  {"triangle_max_violation", rep.triangle_max_violation},
                  {"homogeneity_max_err", rep.homogeneity_max_rel_err},
                  {"symmetry_max_err", rep.symmetry_max_err},
                  {"horizontal_probe", rep.horizontal_probe_max_err},
                  {"radial_probe", rep.radial_probe},
                  {"samples", rep.n_samples},
                  {"seed", rep.seed}};
      emit(a_gauge.out, doc.dump(2));
      return 0;
    }

    if (*c_constants) {
      GroupSpec spec = group_from_token(a_constants.group);
      Gauge gauge = Gauge::parse(spec, a_constants.gauge);
      GroupConstants cons = compute_constants(spec, gauge, a_constants.cfg());
      Estimate diag = moment_integral(spec, gauge, 0, 0, 0.5, a_constants.cfg());
      json doc = {{"group", spec.name},
                  {"gauge", gauge.label()},
                  {"Q", spec.Q()},
                  {"m", spec.m()},
                  {"vol_B1", est_json(cons.vol_B1)},
                  {"sigma_Q", est_json(cons.sigma)},
                  {"tau_m", est_json(cons.tau)},
                  {"cross_checks",
                   {{"sigma_exterior_kernel", est_json(cons.sigma_ext)},
                    {"tau_from_moment", est_json(diag.scaled(2.0 * spec.m() * 0.5))}}}};
      emit(a_constants.out, doc.dump(2));
      return 0;
    }

    if (*c_fracop) {
      GroupSpec spec = group_from_token(a_fracop.group);
      Gauge gauge = Gauge::parse(spec, a_fracop.gauge);
      FracParams params(a_fracop.s);
      ScalarField u = make_field(a_fracop.field, spec, gauge);
      std::vector<Vec> pts;
      if (!fracop_points_file.empty())
        pts = load_points(fracop_points_file, spec.n);
      else
        pts.push_back(parse_point(fracop_point, spec.n));
      QuadratureConfig cfg = a_fracop.cfg();
      GroupConstants cons = compute_constants(spec, gauge, cfg);
      std::ostringstream csv;
      csv << "point,value,std_err,tail_bound\n";
      for (const Vec& p : pts) {
        Estimate e = eval_Ls(spec, gauge, params, u, p, cfg, &cons);
        csv << point_str(p) << "," << e.value << "," << e.std_err << "," << e.tail_bound << "\n";
      }
      emit(a_fracop.out, csv.str());
      return 0;
    }

    if (*c_limits) {
      GroupSpec spec = group_from_token(a_limits.group);
      Gauge gauge = Gauge::parse(spec, a_limits.gauge);
      ScalarField u = make_field(a_limits.field, spec, gauge);
      Vec p = limits_point.empty() ? identity(spec) : parse_point(limits_point, spec.n);
      QuadratureConfig cfg = a_limits.cfg();
      GroupConstants cons = compute_constants(spec, gauge, cfg);
      auto rows = limit_probe(spec, gauge, u, {p}, parse_list(limits_sgrid), cfg, &cons);
      std::ostringstream csv;
      csv << "s,kind,family,point,normalized_value,normalized_err,target,rel_err\n";
      for (const auto& r : rows) {
        csv << r.s << "," << (r.seminorm_row ? "seminorm" : "operator") << "," << r.family << ","
            << (r.seminorm_row ? "" : point_str(r.point)) << "," << r.normalized_value << ","
            << r.normalized_err << "," << r.target << "," << r.rel_err << "\n";
      }
      emit(a_limits.out, csv.str());
      return 0;
    }

    if (*c_seminorm) {
      GroupSpec spec = group_from_token(a_seminorm.group);
      Gauge gauge = Gauge::parse(spec, a_seminorm.gauge);
      FracParams params(a_seminorm.s);
      ScalarField u = make_field(a_seminorm.field, spec, gauge);
      QuadratureConfig cfg = a_seminorm.cfg();
      GroupConstants cons = compute_constants(spec, gauge, cfg);
      Estimate sq = seminorm_sq(spec, gauge, params, u, cfg, &cons);
      Estimate sem = seminorm(spec, gauge, params, u, cfg, &cons);
      json doc = {{"group", spec.name},
                  {"gauge", gauge.label()},
                  {"s", params.s},
                  {"field", a_seminorm.field},
                  {"seminorm", est_json(sem)},
                  {"seminorm_sq", est_json(sq)}};
      emit(a_seminorm.out, doc.dump(2));
      return 0;
    }

    if (*c_dirichlet) {
      GroupSpec spec = group_from_token(a_dirichlet.group);
      Gauge gauge = Gauge::parse(spec, a_dirichlet.gauge);
      FracParams params(a_dirichlet.s);
      ScalarField u = make_field(a_dirichlet.field, spec, gauge);
      ScalarField v = make_field(dirichlet_field2, spec, gauge);
      QuadratureConfig cfg = a_dirichlet.cfg();
      GroupConstants cons = compute_constants(spec, gauge, cfg);
      Estimate form = dirichlet_form(spec, gauge, params, u, v, cfg, &cons);
      Estimate resid = form_symmetry_residual(spec, gauge, params, u, v, cfg, &cons);
      json doc = {{"group", spec.name},
                  {"gauge", gauge.label()},
                  {"s", params.s},
                  {"dirichlet_form", est_json(form)},
                  {"symmetry_residual", est_json(resid)}};
      emit(a_dirichlet.out, doc.dump(2));
      return 0;
    }

    if (*c_decay) {
      GroupSpec spec = group_from_token(a_decay.group);
      Gauge gauge = Gauge::parse(spec, a_decay.gauge);
      FracParams params(a_decay.s);
      ScalarField u = make_field(a_decay.field, spec, gauge);
      QuadratureConfig cfg = a_decay.cfg();
      GroupConstants cons = compute_constants(spec, gauge, cfg);
      auto rows = decay_profile(spec, gauge, params, u, parse_list(decay_radii), cfg, &cons);
      std::ostringstream csv;
      csv << "radius,scaled_value,scaled_err,bound,direct_value,direct_err\n";
      for (const auto& r : rows)
        csv << r.radius << "," << r.scaled.value << "," << r.scaled.std_err << "," << r.bound << ","
            << r.direct_scaled.value << "," << r.direct_scaled.std_err << "\n";
      emit(a_decay.out, csv.str());
      return 0;
    }

    if (*c_transdiff) {
      GroupSpec spec = group_from_token(a_transdiff.group);
      Gauge gauge = Gauge::parse(spec, a_transdiff.gauge);
      FracParams params(a_transdiff.s);
      ScalarField u = make_field(a_transdiff.field, spec, gauge);
      QuadratureConfig cfg = a_transdiff.cfg();
      GroupConstants cons = compute_constants(spec, gauge, cfg);
      Estimate sem = seminorm(spec, gauge, params, u, cfg, &cons);
      Vec e1 = identity(spec);
      e1[0] = 1.0;
      double ne1 = gauge(e1);
      std::ostringstream csv;
      csv << "h_gauge,ratio,std_err,tail_bound\n";
      for (int k = 0; k < transdiff_levels; ++k) {
        Vec h = dilate(spec, std::pow(2.0, -k) / ne1, e1);
        Estimate r = translation_difference(spec, gauge, params, u, h,
                                            cfg.with_seed(cfg.seed + k), &sem, &cons);
        csv << std::pow(2.0, -k) << "," << r.value << "," << r.std_err << "," << r.tail_bound
            << "\n";
      }
      emit(a_transdiff.out, csv.str());
      return 0;
    }

    if (*c_opt) {
      GroupSpec spec = group_from_token(a_opt.group);
      Gauge gauge = Gauge::parse(spec, a_opt.gauge);
      FracParams params(a_opt.s);
      ScalarField u = make_field(a_opt.field, spec, gauge);
      QuadratureConfig cfg = a_opt.cfg();
      Estimate sig = sigma_Q(spec, gauge, cfg);
      GridField init = make_grid_field(spec, opt_box, opt_grid, u);
      OptimizeOptions oo;
      oo.iters = opt_iters;
      oo.step = opt_step;
      oo.seed = a_opt.seed;
      OptimizeResult outres = optimize_quotient(spec, gauge, params, init, oo, sig.value);
      std::ostringstream csv;
      csv << "iteration,quotient,seminorm_sq,lp_norm,step_size\n";
      for (const auto& t : outres.trace)
        csv << t.iteration << "," << t.quotient << "," << t.seminorm_sq << "," << t.lp_norm << ","
            << t.step_size << "\n";
      std::string base = a_opt.out.empty() ? "sobolev_opt" : a_opt.out;
      emit(base + ".csv", csv.str());
      save_grid(base + ".hfg", outres.field);
      json doc = {{"final_quotient", outres.trace.back().quotient},
                  {"iterations", outres.trace.size() - 1},
                  {"el_residual", outres.el_residual},
                  {"multiplier", outres.multiplier},
                  {"stagnated", outres.stagnated},
                  {"trace_csv", base + ".csv"},
                  {"field_dump", base + ".hfg"}};
      std::cout << doc.dump(2) << "\n";
      return 0;
    }

    if (*c_hedberg) {
      json doc = {{"Q", hed_Q}, {"s", hed_s}, {"bracket", hedberg_bracket(hed_Q, hed_s)}};
      if (hed_sigma > 0.0) {
        doc["sigma"] = hed_sigma;
        doc["constant"] = hedberg_constant(hed_Q, hed_s, hed_sigma);
        doc["embedding_factor"] = hedberg_embedding_factor(hed_Q, hed_s, hed_sigma);
      }
      emit(hed_out, doc.dump(2));
      return 0;
    }

    if (*c_mollify) {
      GroupSpec spec = group_from_token(a_mollify.group);
      Gauge gauge = Gauge::parse(spec, a_mollify.gauge);
      FracParams params(a_mollify.s);
      ScalarField u = make_field(a_mollify.field, spec, gauge);
      ScalarField rho = make_mollifier(spec, gauge, 1.0);
      QuadratureConfig cfg = a_mollify.cfg();
      GroupConstants cons = compute_constants(spec, gauge, cfg.with_samples(100000));
      Estimate sem_u = seminorm(spec, gauge, params, u, cfg, &cons);
      json rows = json::array();
      for (double eps : parse_list(mollify_eps)) {
        ScalarField ue = mollify(spec, gauge, rho, 1.0, eps, u, 5);
        Estimate sem_e = seminorm(spec, gauge, params, ue, cfg.with_seed(cfg.seed + 11), &cons);
        ScalarField diff = subtract_fields(ue, u);
        diff.name = "mollify-diff";
        Estimate sem_d = seminorm(spec, gauge, params, diff, cfg.with_seed(cfg.seed + 12), &cons);
        rows.push_back({{"eps", eps},
                        {"seminorm_mollified", est_json(sem_e)},
                        {"seminorm_difference", est_json(sem_d)}});
      }
      json doc = {{"group", spec.name},
                  {"gauge", gauge.label()},
                  {"s", params.s},
                  {"seminorm_u", est_json(sem_u)},
                  {"rows", rows}};
      emit(a_mollify.out, doc.dump(2));
      return 0;
    }

    if (*c_rellich) {
      GroupSpec spec = group_from_token(a_rellich.group);
      Gauge gauge = Gauge::parse(spec, a_rellich.gauge);
      FracParams params(a_rellich.s);
      ScalarField u = make_field(a_rellich.field, spec, gauge);
      QuadratureConfig cfg = a_rellich.cfg();
      GroupConstants cons = compute_constants(spec, gauge, cfg);
      Box omega;
      omega.lo = Vec::Constant(spec.n, -rellich_omega);
      omega.hi = Vec::Constant(spec.n, rellich_omega);
      json rows = json::array();
      for (double delta : parse_list(rellich_deltas)) {
        auto balls = pack_balls(spec, gauge, omega, delta);
        Estimate defect = rellich_defect(spec, gauge, params, u, balls, cfg, &cons);
        rows.push_back({{"delta", delta}, {"n_balls", balls.size()}, {"defect", est_json(defect)}});
      }
      json doc = {{"group", spec.name}, {"gauge", gauge.label()}, {"s", params.s}, {"rows", rows}};
      emit(a_rellich.out, doc.dump(2));
      return 0;
    }

    if (*c_counter) {
      auto rows = counterexample_sweep(parse_list(counter_k), parse_list(counter_eta));
      std::ostringstream csv;
      csv << "k,eta,ratio\n";
      for (const auto& r : rows) csv << r.k << "," << r.eta << "," << r.ratio << "\n";
      emit(counter_out, csv.str());
      return 0;
    }

    if (*c_report) {
      accept::Options opt;
      opt.quick = report_quick;
      opt.seed = report_seed;
      opt.threads = report_threads;
      for (double id : parse_list(report_only)) opt.only.push_back(static_cast<int>(id));
      auto t0 = std::chrono::steady_clock::now();
      auto results = accept::run_all(opt);
      double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      for (const auto& r : results) {
        std::cout << (r.pass ? "PASS" : "FAIL") << "  criterion " << r.id << ": " << r.name << " ("
                  << r.seconds << " s)\n";
      }
      json doc = accept::to_json(results, opt, wall);
      if (!report_out.empty()) {
        std::ofstream out(report_out);
        out << doc.dump(2);
      } else {
        std::cout << doc.dump(2) << "\n";
      }
      bool all = true;
      for (const auto& r : results) all = all && r.pass;
      return all ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

}  // namespace homfrac::cli

// saa4pde: solve, run experiments, plan sample sizes, self-verify, plot.
//
// Exit codes: 0 success, 1 domain or runtime error, 2 usage error.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "saa4pde/bounds.hpp"
#include "saa4pde/concentration.hpp"
#include "saa4pde/experiments.hpp"
#include "saa4pde/plot.hpp"
#include "saa4pde/saa.hpp"
#include "saa4pde/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace saa4pde;

namespace {

constexpr const char* kVersion = "0.1.0";

struct SolveConfig {
  std::size_t n = 32;
  std::size_t N = 10;
  double alpha = 1e-3;
  double gamma = 7.48e-3;
  double lo = -10.0;
  double hi = 10.0;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  double tol = 1e-9;
  std::size_t max_outer = 50;
};

SolveConfig read_solve_config(std::istream& in) {
  SolveConfig c;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    try {
      if (eq == std::string::npos) throw std::invalid_argument("expected key = value");
      const std::string key = detail::trim(line.substr(0, eq)),
                        value = detail::trim(line.substr(eq + 1));
      if (key == "n") c.n = detail::parse_u64(value, key);
      else if (key == "N") c.N = detail::parse_u64(value, key);
      else if (key == "alpha") c.alpha = detail::parse_double(value, key);
      else if (key == "gamma") c.gamma = detail::parse_double(value, key);
      else if (key == "lo") c.lo = detail::parse_double(value, key);
      else if (key == "hi") c.hi = detail::parse_double(value, key);
      else if (key == "seed") c.seed = detail::parse_u64(value, key);
      else if (key == "threads") c.threads = static_cast<unsigned>(detail::parse_u64(value, key));
      else if (key == "tol") c.tol = detail::parse_double(value, key);
      else if (key == "max_outer") c.max_outer = detail::parse_u64(value, key);
      else throw std::invalid_argument("unknown key '" + key + "'");
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return c;
}

json solve_config_json(const SolveConfig& c) {
  return {{"n", c.n},         {"N", c.N},       {"alpha", c.alpha},
          {"gamma", c.gamma}, {"lo", c.lo},     {"hi", c.hi},
          {"seed", c.seed},   {"threads", c.threads}, {"tol", c.tol},
          {"max_outer", c.max_outer}};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

fs::path ensure_dir(const std::string& dir) {
  fs::path p(dir);
  fs::create_directories(p);
  return p;
}

json tolerances(const PdeOptions& pde, const NewtonOptions& newton) {
  return {{"state_tol", pde.state_tol},
          {"state_max_newton", pde.max_newton},
          {"newton_tol", newton.tol},
          {"newton_max_outer", newton.max_outer},
          {"cg_max", newton.max_cg},
          {"armijo", newton.armijo}};
}

json metadata(const std::string& command, json config, json seeds, double wall,
              const json& tol) {
  return {{"artifact_version", kVersion}, {"command", command}, {"config", std::move(config)},
          {"seeds", std::move(seeds)},    {"wall_seconds", wall}, {"tolerances", tol}};
}

/// Flat text, one value per line in triangle order, after a 3-line header.
std::string field_dump(std::size_t n, const RegularizerParams& p, std::span<const double> u) {
  std::ostringstream o;
  char buf[64];
  o << "n = " << n << '\n';
  std::snprintf(buf, sizeof buf, "%.17g", p.gamma);
  o << "gamma = " << buf << '\n';
  std::snprintf(buf, sizeof buf, "%.17g", p.alpha);
  o << "alpha = " << buf << '\n';
  for (double v : u) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    o << buf << '\n';
  }
  return o.str();
}

json report_json(const SolverReport& r) {
  return {{"status", to_string(r.status)},
          {"outer_iterations", r.outer_iterations},
          {"residual_history", r.residual_history},
          {"cg_iterations", r.cg_iterations},
          {"active_sizes", r.active_sizes},
          {"inactive_sizes", r.inactive_sizes},
          {"fallback_steps", r.fallback_steps},
          {"verified_residual", r.verified_residual},
          {"message", r.message}};
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Flags {
  std::string config, out = "out", constants;
  bool out_given = false;
  std::optional<std::uint64_t> seed;
  bool paper_scale = false;
  std::optional<double> eps, delta, alpha;
  std::optional<std::size_t> n, N;
};

// ---------------------------------------------------------------- commands

int cmd_solve(const std::string& mode, const Flags& f, const std::string& command) {
  const auto t0 = std::chrono::steady_clock::now();
  SolveConfig c;
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) throw std::runtime_error("cannot open '" + f.config + "'");
    c = read_solve_config(in);
  }
  if (f.n) c.n = *f.n;
  if (f.N) c.N = *f.N;
  if (f.alpha) c.alpha = *f.alpha;
  if (f.seed) c.seed = *f.seed;
  if (mode == "nominal") c.N = 1;

  const RegularizerParams params{c.gamma, c.lo, c.hi, c.alpha};
  params.validate();
  NewtonOptions newton;
  newton.tol = c.tol;
  newton.max_outer = c.max_outer;
  PdeProblem problem(c.n);
  std::vector<ParamVector> samples;
  if (mode == "nominal") {
    samples.push_back(ParamVector{});  // the mean parameter
  } else {
    UniformSampler sampler(c.seed);
    samples = draw_uniform(sampler, c.N);
  }
  SaaInstance inst(problem, std::move(samples), params, c.threads);
  const SaaSolution sol = solve_semismooth_newton(inst, {}, newton);

  const fs::path dir = ensure_dir(f.out);
  write_file(dir / "control.txt", field_dump(c.n, params, sol.u));
  write_file(dir / "report.json", report_json(sol.report).dump(2) + "\n");
  const json seeds = mode == "nominal" ? json::object() : json{{"samples", c.seed}};
  write_file(dir / "metadata.json",
             metadata(command, solve_config_json(c), seeds, seconds_since(t0),
                      tolerances(problem.options(), newton))
                     .dump(2) +
                 "\n");
  std::size_t zeros = 0;
  for (double v : sol.u) zeros += v == 0.0;
  std::printf("status %s after %zu iterations, residual %.3e, %zu of %zu cells zero\n",
              to_string(sol.report.status), sol.report.outer_iterations,
              sol.report.residual_history.empty() ? NAN : sol.report.residual_history.back(),
              zeros, sol.u.size());
  std::printf("wrote %s\n", (dir / "control.txt").c_str());
  if (!sol.report.converged()) {
    std::fprintf(stderr, "error: solver did not converge: %s\n", sol.report.message.c_str());
    return 1;
  }
  return 0;
}

std::string summary_text(const ExperimentResult& r) {
  std::ostringstream o;
  char buf[160];
  const char* xname = r.config.kind == ExperimentKind::rate    ? "N"
                      : r.config.kind == ExperimentKind::alpha ? "alpha"
                                                               : "n";
  o << "# " << to_string(r.config.kind) << " experiment\n";
  o << xname << ",replicates,failures,mean_chi,std_error\n";
  for (const auto& g : r.groups) {
    std::snprintf(buf, sizeof buf, "%g,%zu,%zu,%.6g,%.3g\n", g.x, g.total, g.failures, g.mean,
                  g.std_error);
    o << buf;
  }
  if (r.fit) {
    std::snprintf(buf, sizeof buf, "slope %.4f  intercept %.4f  residual %.3g  (%zu used, %zu excluded)\n",
                  r.fit->slope, r.fit->intercept, r.fit->residual, r.fit->used, r.fit->excluded);
    o << buf;
  } else {
    o << r.fit_note << '\n';
  }
  std::snprintf(buf, sizeof buf, "compact-set checks %zu, violations %zu, max norm/radius %.3g\n",
                r.compact_checks, r.compact_violations, r.compact_max_ratio);
  o << buf;
  return o.str();
}

void write_plot(const std::vector<ResultRow>& rows, ExperimentKind kind,
                std::size_t exclude_count, const fs::path& path) {
  AxesConfig axes;
  axes.title = std::string(to_string(kind)) + " experiment";
  axes.xlabel = kind == ExperimentKind::rate ? "N" : kind == ExperimentKind::alpha ? "alpha" : "n";
  axes.ylabel = "criticality";
  axes.log_base = kind == ExperimentKind::alpha ? 10 : 2;
  std::vector<PlotFit> fits;
  std::string note;
  const auto groups = summarize(rows, kind);
  if (const auto fit = fit_groups(groups, kind == ExperimentKind::rate ? exclude_count : 0, note))
    fits.push_back(plot_fit(*fit, axes.log_base, "least squares"));
  emit_svg_plot({series_from_rows(rows, kind, "mean")}, fits, axes, path.string());
}

ExperimentConfig load_experiment_config(const std::string& kind, const Flags& f) {
  std::string text = "kind = " + kind + "\n";
  if (!f.config.empty()) text += read_file(f.config);
  std::istringstream in(text);
  ExperimentConfig c;
  try {
    c = parse_experiment_config(in, f.paper_scale);
  } catch (const std::invalid_argument& e) {
    // line numbers refer to the file, which follows the injected kind line
    std::string msg = e.what();
    if (msg.rfind("line ", 0) == 0) {
      const auto colon = msg.find(':');
      const auto ln = std::stoul(msg.substr(5, colon - 5));
      msg = f.config + ": line " + std::to_string(ln - 1) + msg.substr(colon);
    }
    throw std::invalid_argument(msg);
  }
  if (to_string(c.kind) != kind)
    throw std::invalid_argument("config kind '" + std::string(to_string(c.kind)) +
                                "' does not match subcommand '" + kind + "'");
  if (f.seed) c.base_seed = *f.seed;
  if (f.alpha) c.alpha_grid = {*f.alpha};
  if (f.n) c.n_grid = {*f.n};
  if (f.N) c.N_grid = {*f.N};
  c.validate();
  return c;
}

int cmd_experiment(const std::string& kind, const Flags& f, const std::string& command) {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig cfg = load_experiment_config(kind, f);
  const fs::path dir = ensure_dir(!cfg.output.empty() && !f.out_given ? cfg.output : f.out);
  cfg.output = dir.string();

  ExperimentHooks hooks;
  hooks.on_row = [](const ResultRow& r) {
    std::fprintf(stderr, "replicate %zu N=%zu alpha=%g n=%zu: %s chi=%.4g\n", r.replicate, r.N,
                 r.alpha, r.n, to_string(r.status), r.chi);
  };
  const ExperimentResult res = run_experiment(cfg, hooks);

  std::ostringstream cfg_text;
  write_experiment_config(cfg, cfg_text);
  write_csv(res.rows, (dir / "results.csv").string());
  write_file(dir / "config.cfg", cfg_text.str());
  const std::string summary = summary_text(res);
  write_file(dir / "summary.txt", summary);
  write_plot(res.rows, cfg.kind, cfg.exclude_count, dir / "plot.svg");
  write_file(dir / "metadata.json",
             metadata(command, cfg_text.str(), {{"base_seed", cfg.base_seed}}, seconds_since(t0),
                      tolerances(hooks.pde, hooks.newton))
                     .dump(2) +
                 "\n");
  std::fputs(summary.c_str(), stdout);
  std::printf("wrote %s\n", (dir / "results.csv").c_str());
  return 0;
}

std::string size_text(const SampleSize& s) { return s.str(); }

int cmd_plan(const Flags& f, const std::string& command) {
  if (!f.eps || !f.delta) throw CLI::RequiredError("--eps and --delta");
  const double alpha = f.alpha.value_or(1e-3);
  ProblemConstants c;
  if (f.constants.empty()) {
    c = case_study_constants(alpha);
  } else {
    std::ifstream in(f.constants);
    if (!in) throw std::runtime_error("cannot open '" + f.constants + "'");
    c.read(in);
    if (f.alpha) c.alpha = {alpha, Provenance::user};
  }
  const PlanResult r = plan(c, *f.eps, *f.delta);
  std::printf("eps            %g\n", r.eps);
  std::printf("delta          %g\n", r.delta);
  std::printf("lipschitz L    %.6g\n", r.lipschitz);
  std::printf("diameter D     %.6g\n", r.diameter);
  std::printf("radius R       %.6g\n", r.radius);
  std::printf("tau            %.6g\n", r.tau);
  std::printf("N_expectation  %s\n", size_text(r.n_expectation).c_str());
  std::printf("N_tail         %s\n", size_text(r.n_tail).c_str());
  std::printf("provenance     %s\n", to_string(r.provenance));
  for (const auto& note : r.notes) std::printf("note: %s\n", note.c_str());
  if (f.out_given) {
    const fs::path dir = ensure_dir(f.out);
    json j = r;
    j["constants"] = c;
    write_file(dir / "plan.json", j.dump(2) + "\n");
    write_file(dir / "metadata.json",
               metadata(command, {{"constants", c}}, json::object(), 0.0, json::object()).dump(2) +
                   "\n");
  }
  return 0;
}

int cmd_verify(const std::string& what, const Flags& f) {
  const std::uint64_t seed = f.seed.value_or(1);
  bool ok = true;
  if (what == "bounds") {
    for (const auto& v : planner_hand_values()) {
      std::printf("%-26s expected %-6g got %-6g %s\n", v.name.c_str(), v.expected, v.actual,
                  v.passed() ? "ok" : "MISMATCH");
      ok = ok && v.passed();
    }
    ConcentrationOptions o;
    o.seed = seed;
    auto rows = check_cosh_condition(rademacher_scalar(), default_lambda_grid(), o);
    rows.push_back(check_subgaussian_equivalence(rademacher_scalar(), o));
    for (const auto& r : sum_mgf_check(rademacher_scalar(), {0.5, 1.0}, 4, o)) rows.push_back(r);
    for (const auto& r : maxima_bounds_experiment(bounded_sphere(), 4, 16, {0.5, 1.0}, o))
      rows.push_back(r);
    write_check_csv(rows, std::cout);
    ok = ok && all_passed(rows);
  } else if (what == "gradients") {
    const std::size_t n = f.n.value_or(16), N = f.N.value_or(4);
    for (const auto& g : gradient_checks(n, N, 10, seed)) {
      const bool pass = std::abs(g.slope - 2.0) <= 0.3 && g.best_relative <= 1e-6;
      std::printf("gradient: FD error slope %.3f, best relative error %.2e %s\n", g.slope,
                  g.best_relative, pass ? "ok" : "FAIL");
      ok = ok && pass;
    }
    for (const auto& h : hessian_checks(n, N, 3, seed + 1)) {
      const bool pass = h.fd_relative <= 1e-4 && h.symmetry_relative <= 1e-8;
      std::printf("hessian: FD relative error %.2e, symmetry %.2e %s\n", h.fd_relative,
                  h.symmetry_relative, pass ? "ok" : "FAIL");
      ok = ok && pass;
    }
  } else {
    const std::size_t n = f.n.value_or(32);
    for (const auto& s : stability_checks(n, 20, seed)) {
      const bool pass = s.bound_satisfied && s.lipschitz_satisfied;
      std::printf("|S(u1)| %.4g <= %.4g, |S(u2)-S(u1)| %.4g <= %.4g %s\n", s.bound_lhs,
                  s.bound_rhs, s.lipschitz_lhs, s.lipschitz_rhs, pass ? "ok" : "FAIL");
      ok = ok && pass;
    }
  }
  std::printf("%s\n", ok ? "all checks passed" : "some checks FAILED");
  return ok ? 0 : 1;
}

int cmd_plot(const std::string& kind, const Flags& f) {
  const ExperimentConfig cfg = load_experiment_config(kind, f);
  const fs::path dir(f.out);
  const auto rows = read_csv((dir / "results.csv").string());
  write_plot(rows, cfg.kind, cfg.exclude_count, dir / "plot.svg");
  std::printf("wrote %s\n", (dir / "plot.svg").c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sample average approximation for risk-neutral semilinear PDE control"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", kVersion);
  Flags f;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", f.config, "configuration file (key = value)")
        ->check(CLI::ExistingFile);
    sub->add_option("--out", f.out, "output directory")->capture_default_str();
    sub->add_option("--seed", f.seed, "random seed");
  };
  const auto add_sizes = [&](CLI::App* sub) {
    sub->add_option("--n", f.n, "mesh subdivisions per side")->check(CLI::Range(2, 4096));
    sub->add_option("--N", f.N, "sample size")->check(CLI::PositiveNumber);
    sub->add_option("--alpha", f.alpha, "control cost")->check(CLI::PositiveNumber);
  };

  std::string solve_mode, experiment_kind, verify_what, plot_kind;
  auto* solve = app.add_subcommand("solve", "solve the nominal or a sampled SAA problem");
  solve->add_option("mode", solve_mode, "nominal | saa")
      ->required()
      ->check(CLI::IsMember({"nominal", "saa"}));
  add_common(solve);
  add_sizes(solve);

  auto* experiment = app.add_subcommand("experiment", "run a replicated study");
  experiment->add_option("kind", experiment_kind, "rate | alpha | mesh")
      ->required()
      ->check(CLI::IsMember({"rate", "alpha", "mesh"}));
  add_common(experiment);
  add_sizes(experiment);
  experiment->add_flag("--paper-scale", f.paper_scale, "use the larger published configuration");

  auto* plan_cmd = app.add_subcommand("plan", "evaluate sample-size bounds");
  plan_cmd->add_option("--constants", f.constants, "problem constants file")
      ->check(CLI::ExistingFile);
  plan_cmd->add_option("--eps", f.eps, "target criticality")->required()->check(CLI::PositiveNumber);
  plan_cmd->add_option("--delta", f.delta, "failure probability")
      ->required()
      ->check(CLI::Range(0.0, 1.0));
  plan_cmd->add_option("--alpha", f.alpha, "control cost")->check(CLI::PositiveNumber);
  plan_cmd->add_option("--out", f.out, "output directory");

  auto* verify = app.add_subcommand("verify", "run self-checks");
  verify->add_option("what", verify_what, "bounds | gradients | stability")
      ->required()
      ->check(CLI::IsMember({"bounds", "gradients", "stability"}));
  verify->add_option("--seed", f.seed, "random seed");
  verify->add_option("--n", f.n, "mesh subdivisions per side")->check(CLI::Range(2, 4096));
  verify->add_option("--N", f.N, "sample size")->check(CLI::PositiveNumber);

  auto* plot_cmd = app.add_subcommand("plot", "render plot.svg from an experiment directory");
  plot_cmd->add_option("kind", plot_kind, "rate | alpha | mesh")
      ->required()
      ->check(CLI::IsMember({"rate", "alpha", "mesh"}));
  add_common(plot_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  for (const auto* sub : app.get_subcommands())
    if (const auto* opt = sub->get_option_no_throw("--out")) f.out_given = opt->count() > 0;

  std::string command;
  for (int i = 0; i < argc; ++i) command += (i ? " " : "") + std::string(argv[i]);
  try {
    if (*solve) return cmd_solve(solve_mode, f, command);
    if (*experiment) return cmd_experiment(experiment_kind, f, command);
    if (*plan_cmd) return cmd_plan(f, command);
    if (*verify) return cmd_verify(verify_what, f);
    if (*plot_cmd) return cmd_plot(plot_kind, f);
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

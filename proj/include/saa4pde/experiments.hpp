#pragma once

// Replicated SAA studies: criticality of the SAA solution versus sample size
// N, regularization alpha, and mesh size n, measured against a quasi-Monte
// Carlo reference gradient.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "saa4pde/bounds.hpp"
#include "saa4pde/parallel.hpp"
#include "saa4pde/pde.hpp"
#include "saa4pde/prox.hpp"
#include "saa4pde/saa.hpp"
#include "saa4pde/sampling.hpp"

namespace saa4pde {

enum class ExperimentKind { rate, alpha, mesh };

inline const char* to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::rate: return "rate";
    case ExperimentKind::alpha: return "alpha";
    case ExperimentKind::mesh: return "mesh";
  }
  return "unknown";
}

inline ExperimentKind experiment_kind_from_string(const std::string& s) {
  if (s == "rate") return ExperimentKind::rate;
  if (s == "alpha") return ExperimentKind::alpha;
  if (s == "mesh") return ExperimentKind::mesh;
  throw std::invalid_argument("unknown experiment kind '" + s + "'");
}

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::rate;
  std::vector<std::size_t> N_grid;
  std::vector<double> alpha_grid;
  std::vector<std::size_t> n_grid;
  std::size_t replicates = 16;
  std::size_t N1 = 1024;
  std::uint64_t base_seed = 20240601;
  std::size_t exclude_count = 4;
  double gamma = 7.48e-3;
  double lo = -10.0;
  double hi = 10.0;
  std::string output;
  unsigned threads = 1;
  bool timing = true;  // false writes wall_s = 0 so reruns are byte-identical

  /// Desk-scale defaults, or the larger published configuration.
  static ExperimentConfig defaults(ExperimentKind kind, bool paper_scale = false) {
    ExperimentConfig c;
    c.kind = kind;
    const std::size_t n = paper_scale ? 64 : 32;
    const std::size_t n_max = paper_scale ? 256 : 128;
    c.replicates = paper_scale ? 48 : 16;
    c.N1 = paper_scale ? 8192 : 1024;
    switch (kind) {
      case ExperimentKind::rate:
        for (std::size_t N = 2; N <= n_max; N *= 2) c.N_grid.push_back(N);
        c.alpha_grid = {1e-3};
        c.n_grid = {n};
        c.exclude_count = 4;
        break;
      case ExperimentKind::alpha:
        c.N_grid = {paper_scale ? std::size_t{256} : std::size_t{64}};
        c.alpha_grid = {1e-3, 1e-2, 1e-1, 1e0};
        c.n_grid = {n};
        c.exclude_count = 0;
        break;
      case ExperimentKind::mesh:
        c.N_grid = {paper_scale ? std::size_t{256} : std::size_t{64}};
        c.alpha_grid = {1e-1};
        c.n_grid = paper_scale ? std::vector<std::size_t>{8, 16, 32, 64}
                               : std::vector<std::size_t>{8, 16, 32};
        c.exclude_count = 0;
        break;
    }
    return c;
  }

  RegularizerParams regularizer(double alpha) const { return {gamma, lo, hi, alpha}; }

  std::size_t swept_size() const {
    switch (kind) {
      case ExperimentKind::rate: return N_grid.size();
      case ExperimentKind::alpha: return alpha_grid.size();
      case ExperimentKind::mesh: return n_grid.size();
    }
    return 0;
  }

  void validate() const {
    const auto increasing = [](const auto& g, const char* name) {
      if (g.empty()) throw std::invalid_argument(std::string(name) + " must be nonempty");
      for (std::size_t i = 1; i < g.size(); ++i)
        if (!(g[i - 1] < g[i]))
          throw std::invalid_argument(std::string(name) + " must be strictly increasing");
    };
    increasing(N_grid, "N_grid");
    increasing(alpha_grid, "alpha_grid");
    increasing(n_grid, "n_grid");
    if (N_grid.front() < 1) throw std::invalid_argument("N_grid entries must be >= 1");
    if (!(alpha_grid.front() > 0.0)) throw std::invalid_argument("alpha_grid entries must be > 0");
    if (n_grid.front() < 2) throw std::invalid_argument("n_grid entries must be >= 2");
    if (replicates < 1) throw std::invalid_argument("replicates must be >= 1");
    if (N1 < N_grid.back()) throw std::invalid_argument("N1 must be >= max(N_grid)");
    const auto single = [&](std::size_t size, const char* name) {
      if (size != 1)
        throw std::invalid_argument(std::string(name) + " must have one entry for a " +
                                    to_string(kind) + " experiment");
    };
    if (kind != ExperimentKind::rate) single(N_grid.size(), "N_grid");
    if (kind != ExperimentKind::alpha) single(alpha_grid.size(), "alpha_grid");
    if (kind != ExperimentKind::mesh) single(n_grid.size(), "n_grid");
    regularizer(alpha_grid.front()).validate();
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& s, const std::string& what) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != s.size()) throw std::invalid_argument("bad number for " + what + ": '" + s + "'");
  return v;
}

inline std::uint64_t parse_u64(const std::string& s, const std::string& what) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    if (!s.empty() && s[0] != '-') v = std::stoull(s, &pos, 0);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != s.size())
    throw std::invalid_argument("bad unsigned integer for " + what + ": '" + s + "'");
  return v;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  if (!s.empty() && s.back() == sep) out.push_back("");
  return out;
}

}  // namespace detail

/// `key = value` lines, `#` comments. Grids are comma-separated lists.
/// Defaults come from `kind` (rate if absent); other keys override them.
inline ExperimentConfig parse_experiment_config(std::istream& in, bool paper_scale = false) {
  std::vector<std::tuple<std::size_t, std::string, std::string>> entries;
  std::string line;
  std::size_t lineno = 0;
  std::optional<ExperimentKind> kind;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("line " + std::to_string(lineno) + ": expected key = value");
    std::string key = detail::trim(line.substr(0, eq)), value = detail::trim(line.substr(eq + 1));
    if (key == "kind") {
      try {
        kind = experiment_kind_from_string(value);
      } catch (const std::exception& e) {
        throw std::invalid_argument("line " + std::to_string(lineno) + ": " + e.what());
      }
    } else {
      entries.emplace_back(lineno, std::move(key), std::move(value));
    }
  }
  ExperimentConfig c = ExperimentConfig::defaults(kind.value_or(ExperimentKind::rate), paper_scale);
  for (const auto& [ln, key, value] : entries) {
    try {
      const auto sizes = [&] {
        std::vector<std::size_t> g;
        for (const auto& s : detail::split(value, ',')) g.push_back(detail::parse_u64(s, key));
        return g;
      };
      if (key == "N_grid") c.N_grid = sizes();
      else if (key == "n_grid") c.n_grid = sizes();
      else if (key == "alpha_grid") {
        c.alpha_grid.clear();
        for (const auto& s : detail::split(value, ','))
          c.alpha_grid.push_back(detail::parse_double(s, key));
      } else if (key == "replicates") c.replicates = detail::parse_u64(value, key);
      else if (key == "N1") c.N1 = detail::parse_u64(value, key);
      else if (key == "base_seed") c.base_seed = detail::parse_u64(value, key);
      else if (key == "exclude_count") c.exclude_count = detail::parse_u64(value, key);
      else if (key == "gamma") c.gamma = detail::parse_double(value, key);
      else if (key == "lo") c.lo = detail::parse_double(value, key);
      else if (key == "hi") c.hi = detail::parse_double(value, key);
      else if (key == "output") c.output = value;
      else if (key == "threads") c.threads = static_cast<unsigned>(detail::parse_u64(value, key));
      else if (key == "timing") {
        if (value != "true" && value != "false")
          throw std::invalid_argument("timing must be true or false");
        c.timing = value == "true";
      } else
        throw std::invalid_argument("unknown key '" + key + "'");
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("line " + std::to_string(ln) + ": " + e.what());
    }
  }
  c.validate();
  return c;
}

inline void write_experiment_config(const ExperimentConfig& c, std::ostream& out) {
  const auto list = [&](const auto& g) {
    std::string s;
    char buf[32];
    for (std::size_t i = 0; i < g.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", static_cast<double>(g[i]));
      s += (i ? "," : "") + std::string(buf);
    }
    return s;
  };
  char buf[64];
  out << "kind = " << to_string(c.kind) << '\n'
      << "N_grid = " << list(c.N_grid) << '\n'
      << "alpha_grid = " << list(c.alpha_grid) << '\n'
      << "n_grid = " << list(c.n_grid) << '\n'
      << "replicates = " << c.replicates << '\n'
      << "N1 = " << c.N1 << '\n'
      << "base_seed = " << c.base_seed << '\n'
      << "exclude_count = " << c.exclude_count << '\n';
  std::snprintf(buf, sizeof buf, "%.17g", c.gamma);
  out << "gamma = " << buf << '\n';
  std::snprintf(buf, sizeof buf, "%.17g", c.lo);
  out << "lo = " << buf << '\n';
  std::snprintf(buf, sizeof buf, "%.17g", c.hi);
  out << "hi = " << buf << '\n';
  if (!c.output.empty()) out << "output = " << c.output << '\n';
  out << "threads = " << c.threads << '\n' << "timing = " << (c.timing ? "true" : "false") << '\n';
}

// ---------------------------------------------------------------------------
// result rows and CSV

struct ResultRow {
  std::size_t replicate = 0;
  std::size_t N = 0;
  double alpha = 0.0;
  std::size_t n = 0;
  double chi = NAN;  // NaN when the solve failed
  SolverStatus status = SolverStatus::failed;
  std::size_t iters = 0;
  double wall_s = 0.0;
  std::uint64_t seed = 0;

  bool operator==(const ResultRow& o) const {
    const auto same = [](double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); };
    return replicate == o.replicate && N == o.N && alpha == o.alpha && n == o.n &&
           same(chi, o.chi) && status == o.status && iters == o.iters && wall_s == o.wall_s &&
           seed == o.seed;
  }
};

inline SolverStatus solver_status_from_string(const std::string& s) {
  for (auto st : {SolverStatus::converged, SolverStatus::max_outer, SolverStatus::stalled,
                  SolverStatus::failed})
    if (s == to_string(st)) return st;
  throw std::invalid_argument("unknown solver status '" + s + "'");
}

inline const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols{"replicate", "N",     "alpha",  "n",   "chi",
                                             "status",    "iters", "wall_s", "seed"};
  return cols;
}

inline void write_csv(const std::vector<ResultRow>& rows, std::ostream& out) {
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%zu,%zu,%.17g,%zu,%.17g,%s,%zu,%.17g,%llu\n", r.replicate, r.N,
                  r.alpha, r.n, r.chi, to_string(r.status), r.iters, r.wall_s,
                  static_cast<unsigned long long>(r.seed));
    out << buf;
  }
}

inline void write_csv(const std::vector<ResultRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_csv(rows, out);
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

inline std::vector<ResultRow> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("line 1: missing header");
  const auto header = detail::split(detail::trim(line), ',');
  const auto& cols = csv_columns();
  std::vector<int> where(cols.size(), -1);
  for (std::size_t j = 0; j < header.size(); ++j) {
    const auto it = std::find(cols.begin(), cols.end(), header[j]);
    if (it == cols.end()) throw std::invalid_argument("line 1: unknown column '" + header[j] + "'");
    const auto k = static_cast<std::size_t>(it - cols.begin());
    if (where[k] >= 0) throw std::invalid_argument("line 1: duplicate column '" + header[j] + "'");
    where[k] = static_cast<int>(j);
  }
  for (std::size_t k = 0; k < cols.size(); ++k)
    if (where[k] < 0) throw std::invalid_argument("line 1: missing column '" + cols[k] + "'");

  std::vector<ResultRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto f = detail::split(line, ',');
    try {
      if (f.size() != header.size())
        throw std::invalid_argument("expected " + std::to_string(header.size()) + " fields, got " +
                                    std::to_string(f.size()));
      const auto get = [&](std::size_t k) -> const std::string& { return f[where[k]]; };
      ResultRow r;
      r.replicate = detail::parse_u64(get(0), "replicate");
      r.N = detail::parse_u64(get(1), "N");
      r.alpha = detail::parse_double(get(2), "alpha");
      r.n = detail::parse_u64(get(3), "n");
      r.chi = detail::parse_double(get(4), "chi");
      r.status = solver_status_from_string(get(5));
      r.iters = detail::parse_u64(get(6), "iters");
      r.wall_s = detail::parse_double(get(7), "wall_s");
      r.seed = detail::parse_u64(get(8), "seed");
      rows.push_back(r);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return rows;
}

inline std::vector<ResultRow> read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return read_csv(in);
}

// ---------------------------------------------------------------------------
// least-squares fits in log2-log2

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // sum of squared residuals in log2
  std::size_t used = 0;
  std::size_t excluded = 0;
};

/// OLS of log2 y on log2 x after dropping the `exclude_count` smallest x.
inline RateFit fit_rate(std::vector<std::pair<double, double>> pts, std::size_t exclude_count) {
  if (pts.size() < exclude_count + 2)
    throw std::invalid_argument("fit_rate: need at least exclude_count + 2 points, got " +
                                std::to_string(pts.size()));
  for (const auto& [x, y] : pts)
    if (!(x > 0.0) || !(y > 0.0) || !std::isfinite(x) || !std::isfinite(y))
      throw std::invalid_argument("fit_rate: points must be positive and finite");
  std::stable_sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  pts.erase(pts.begin(), pts.begin() + static_cast<std::ptrdiff_t>(exclude_count));
  const double m = static_cast<double>(pts.size());
  double sx = 0, sy = 0;
  for (const auto& [x, y] : pts) {
    sx += std::log2(x);
    sy += std::log2(y);
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0, sxy = 0;
  for (const auto& [x, y] : pts) {
    sxx += (std::log2(x) - mx) * (std::log2(x) - mx);
    sxy += (std::log2(x) - mx) * (std::log2(y) - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_rate: x values must not all coincide");
  RateFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  for (const auto& [x, y] : pts) {
    const double r = std::log2(y) - (f.intercept + f.slope * std::log2(x));
    f.residual += r * r;
  }
  f.used = pts.size();
  f.excluded = exclude_count;
  return f;
}

// ---------------------------------------------------------------------------
// reference gradient

/// Gradient of the sample average over the first N1 Sobol parameters.
/// Operators are assembled once when they fit in `cache_bytes`, otherwise per
/// call. Samples are reduced in fixed-size chunks in index order, so the
/// result does not depend on the thread count.
class ReferenceGradient {
 public:
  static constexpr std::size_t kChunk = 32;

  ReferenceGradient(const PdeProblem& problem, std::size_t n1, unsigned threads = 1,
                    std::size_t cache_bytes = std::size_t{1} << 30)
      : problem_(&problem), samples_(sobol_parameters(n1)), threads_(threads) {
    const std::size_t per_sample = problem.num_cells() * 4 * sizeof(double) +
                                   problem.num_states() * sizeof(double);
    if (per_sample * n1 <= cache_bytes) {
      ops_.resize(n1);
      parallel_for(n1, threads_, [&](std::size_t i) { ops_[i] = problem.assemble(samples_[i]); });
    }
  }

  std::size_t size() const { return samples_.size(); }
  const std::vector<ParamVector>& samples() const { return samples_; }
  bool cached() const { return !ops_.empty(); }
  void set_threads(unsigned t) { threads_ = t; }

  P0Field operator()(std::span<const double> u) const {
    const std::size_t m = problem_->num_cells();
    const std::size_t chunks = (samples_.size() + kChunk - 1) / kChunk;
    std::vector<P0Field> partial(chunks, P0Field(m, 0.0));
    parallel_for(chunks, threads_, [&](std::size_t c) {
      const std::size_t end = std::min(samples_.size(), (c + 1) * kChunk);
      for (std::size_t i = c * kChunk; i < end; ++i) {
        const P0Field g = sample_gradient(i, u);
        for (std::size_t k = 0; k < m; ++k) partial[c][k] += g[k];
      }
    });
    P0Field out(m, 0.0);
    for (const auto& p : partial)
      for (std::size_t k = 0; k < m; ++k) out[k] += p[k];
    for (double& x : out) x /= static_cast<double>(samples_.size());
    return out;
  }

  /// Per-sample gradient at u with a cold state solve.
  P0Field sample_gradient(std::size_t i, std::span<const double> u) const {
    try {
      if (cached()) return solve_one(ops_[i], u);
      return solve_one(problem_->assemble(samples_[i]), u);
    } catch (const ConvergenceError& e) {
      throw SampleError(i, e.what());
    } catch (const std::domain_error& e) {
      throw SampleError(i, e.what());
    }
  }

 private:
  P0Field solve_one(const SampleOperators& ops, std::span<const double> u) const {
    SampleSolver s(*problem_, ops);
    return s.gradient(u);
  }

  const PdeProblem* problem_;
  std::vector<ParamVector> samples_;
  std::vector<SampleOperators> ops_;
  unsigned threads_;
};

// ---------------------------------------------------------------------------
// experiments

/// Summary of all replicates at one value of the swept parameter.
struct GroupSummary {
  double x = 0.0;          // N, alpha or n
  std::size_t total = 0;
  std::size_t failures = 0;  // replicates whose solver did not converge
  double mean = NAN;         // over converged replicates
  double std_error = NAN;
  bool valid() const { return total > 0 && failures * 5 <= total && failures < total; }
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<ResultRow> rows;
  std::vector<GroupSummary> groups;
  std::optional<RateFit> fit;  // absent when invalid or undefined
  std::string fit_note;
  std::size_t compact_checks = 0;
  std::size_t compact_violations = 0;
  double compact_max_ratio = 0.0;  // max norm / radius over checked replicates
};

/// Mean and standard error of the converged replicates in each group.
inline std::vector<GroupSummary> summarize(const std::vector<ResultRow>& rows,
                                           ExperimentKind kind) {
  std::map<double, std::vector<const ResultRow*>> by;
  for (const auto& r : rows) {
    const double x = kind == ExperimentKind::rate    ? static_cast<double>(r.N)
                     : kind == ExperimentKind::alpha ? r.alpha
                                                     : static_cast<double>(r.n);
    by[x].push_back(&r);
  }
  std::vector<GroupSummary> out;
  for (const auto& [x, group] : by) {
    GroupSummary g;
    g.x = x;
    g.total = group.size();
    std::vector<double> v;
    for (const auto* r : group) {
      if (r->status == SolverStatus::converged && std::isfinite(r->chi)) v.push_back(r->chi);
      else ++g.failures;
    }
    if (!v.empty()) {
      double s = 0.0;
      for (double c : v) s += c;
      g.mean = s / static_cast<double>(v.size());
      if (v.size() > 1) {
        double ss = 0.0;
        for (double c : v) ss += (c - g.mean) * (c - g.mean);
        g.std_error = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
      }
    }
    out.push_back(g);
  }
  return out;
}

/// Fit log2 mean against log2 x; absent (with a note) when a group is invalid
/// or there are too few points.
inline std::optional<RateFit> fit_groups(const std::vector<GroupSummary>& groups,
                                         std::size_t exclude_count, std::string& note) {
  for (const auto& g : groups)
    if (!g.valid()) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "fit invalid: %zu of %zu replicates failed at x=%g",
                    g.failures, g.total, g.x);
      note = buf;
      return std::nullopt;
    }
  if (groups.size() < exclude_count + 2) {
    note = "fit undefined: " + std::to_string(groups.size()) + " grid point(s)";
    return std::nullopt;
  }
  std::vector<std::pair<double, double>> pts;
  for (const auto& g : groups) pts.emplace_back(g.x, g.mean);
  note.clear();
  return fit_rate(pts, exclude_count);
}

struct ExperimentHooks {
  NewtonOptions newton{};
  PdeOptions pde{};
  HeuristicOptions heuristics{};
  double compact_slack = 1.5;
  std::function<void(const ResultRow&)> on_row;  // progress callback
};

namespace detail {

inline ExperimentResult run_experiment(const ExperimentConfig& cfg, const ExperimentHooks& hooks) {
  cfg.validate();
  ExperimentResult res;
  res.config = cfg;
  const auto now = [] { return std::chrono::steady_clock::now(); };

  // compact-set radius per alpha (mesh-independent constants)
  std::map<double, double> radius;
  std::optional<ProblemConstants> base;
  for (double a : cfg.alpha_grid) {
    if (!base) base = case_study_constants(a, hooks.heuristics);
    radius[a] = hooks.compact_slack * compact_radius(*base).radius / a;
  }

  for (std::size_t n : cfg.n_grid) {
    const PdeProblem problem(n, FieldModel::case_study_model(), hooks.pde);
    const ReferenceGradient reference(problem, cfg.N1, cfg.threads);
    const auto areas = problem.cell_areas();
    for (double a : cfg.alpha_grid) {
      const RegularizerParams params = cfg.regularizer(a);
      for (std::size_t r = 0; r < cfg.replicates; ++r) {
        for (std::size_t N : cfg.N_grid) {
          ResultRow row;
          row.replicate = r;
          row.N = N;
          row.alpha = a;
          row.n = n;
          row.seed = derive_seed(cfg.base_seed, r, N);
          const auto t0 = now();
          try {
            UniformSampler sampler(row.seed);
            SaaInstance inst(problem, draw_uniform(sampler, N), params, cfg.threads);
            const SaaSolution sol = solve_semismooth_newton(inst, {}, hooks.newton);
            row.status = sol.report.status;
            row.iters = sol.report.outer_iterations;
            if (sol.report.converged()) {
              row.chi = criticality(sol.u, reference, params, areas);
              const auto check = compact_set_check(inst, sol.v, radius[a]);
              ++res.compact_checks;
              if (!check.passed) ++res.compact_violations;
              res.compact_max_ratio = std::max(res.compact_max_ratio, check.norm / check.radius);
            }
          } catch (const SampleError&) {
            row.status = SolverStatus::failed;
          }
          if (cfg.timing) row.wall_s = std::chrono::duration<double>(now() - t0).count();
          if (hooks.on_row) hooks.on_row(row);
          res.rows.push_back(row);
        }
      }
    }
  }
  res.groups = summarize(res.rows, cfg.kind);
  res.fit = fit_groups(res.groups, cfg.kind == ExperimentKind::rate ? cfg.exclude_count : 0,
                       res.fit_note);
  return res;
}

inline void require_kind(const ExperimentConfig& c, ExperimentKind k) {
  if (c.kind != k)
    throw std::invalid_argument(std::string("expected a ") + to_string(k) +
                                " configuration, got " + to_string(c.kind));
}

}  // namespace detail

/// Mean criticality versus N with a log-log slope fit.
inline ExperimentResult run_rate_experiment(const ExperimentConfig& c,
                                            const ExperimentHooks& hooks = {}) {
  detail::require_kind(c, ExperimentKind::rate);
  return detail::run_experiment(c, hooks);
}

/// Mean criticality versus alpha at fixed N and n. Sample sets are shared
/// across alpha.
inline ExperimentResult run_alpha_experiment(const ExperimentConfig& c,
                                             const ExperimentHooks& hooks = {}) {
  detail::require_kind(c, ExperimentKind::alpha);
  return detail::run_experiment(c, hooks);
}

/// Mean criticality versus n at fixed N and alpha, with the reference
/// gradient rebuilt on each mesh.
inline ExperimentResult run_mesh_experiment(const ExperimentConfig& c,
                                            const ExperimentHooks& hooks = {}) {
  detail::require_kind(c, ExperimentKind::mesh);
  return detail::run_experiment(c, hooks);
}

inline ExperimentResult run_experiment(const ExperimentConfig& c, const ExperimentHooks& hooks = {}) {
  return detail::run_experiment(c, hooks);
}

}  // namespace saa4pde

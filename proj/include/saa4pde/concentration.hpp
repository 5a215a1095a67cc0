#pragma once

// Monte Carlo checks of the sub-Gaussian moment inequalities for random
// vectors: cosh-moment conditions, their exp-square equivalents, sums and
// maxima of averages. A passing check means "consistent with the inequality
// at this sample size", nothing more.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "saa4pde/parallel.hpp"
#include "saa4pde/sampling.hpp"

namespace saa4pde {

/// i.i.d. mean-zero random vectors in R^dim with a claimed cosh parameter.
struct VectorSampler {
  std::string name;
  std::size_t dim = 1;
  double tau = 1.0;                  // claimed: E cosh(l ||W||) <= exp(l^2 tau^2 / 2)
  std::optional<double> sigma;       // claimed: E exp(||W||^2 / sigma^2) <= e
  std::function<void(UniformSampler&, std::span<double>)> draw;
};

inline double standard_normal(UniformSampler& s) {
  // Box-Muller; 1 - U avoids log(0)
  const double u1 = 1.0 - s.next_unit();
  const double u2 = s.next_unit();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Z = +-1 with equal probability; |Z| <= 1.
inline VectorSampler rademacher_scalar() {
  VectorSampler v;
  v.name = "rademacher";
  v.dim = 1;
  v.tau = 1.0;
  v.draw = [](UniformSampler& s, std::span<double> w) {
    w[0] = (s.next_u64() >> 63) ? 1.0 : -1.0;
  };
  return v;
}

/// Uniform on the sphere of the given radius in R^m; ||W|| = radius.
inline VectorSampler bounded_sphere(std::size_t m = 8, double radius = 1.0) {
  if (m == 0) throw std::invalid_argument("bounded_sphere: dimension must be positive");
  VectorSampler v;
  v.name = "bounded_sphere";
  v.dim = m;
  v.tau = radius;
  v.draw = [radius](UniformSampler& s, std::span<double> w) {
    double nn = 0.0;
    do {
      nn = 0.0;
      for (double& x : w) {
        x = standard_normal(s);
        nn += x * x;
      }
    } while (nn == 0.0);
    const double scale = radius / std::sqrt(nn);
    for (double& x : w) x *= scale;
  };
  return v;
}

/// N(0, s^2 I_m) conditioned on ||W|| <= truncation. The exp-square
/// parameter is that of the untruncated law, sigma^2 = 2 s^2 / (1 - e^{-2/m}),
/// and the claimed cosh parameter is tau = 2^{1/4} sigma.
inline VectorSampler truncated_gaussian(std::size_t m = 8, double s = 1.0,
                                        double truncation = 6.0) {
  if (m == 0) throw std::invalid_argument("truncated_gaussian: dimension must be positive");
  VectorSampler v;
  v.name = "truncated_gaussian";
  v.dim = m;
  v.sigma = std::sqrt(2.0 * s * s / (1.0 - std::exp(-2.0 / static_cast<double>(m))));
  v.tau = std::pow(2.0, 0.25) * *v.sigma;
  v.draw = [s, truncation](UniformSampler& rng, std::span<double> w) {
    for (;;) {
      double nn = 0.0;
      for (double& x : w) {
        x = s * standard_normal(rng);
        nn += x * x;
      }
      if (nn <= truncation * truncation) return;
    }
  };
  return v;
}

/// Copy of `v` with a different claimed tau (e.g. a deliberately wrong one).
inline VectorSampler with_tau(VectorSampler v, double tau) {
  v.tau = tau;
  v.name += "(tau=" + std::to_string(tau) + ")";
  return v;
}

enum class Verdict { pass, flagged, fail, skipped };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::flagged: return "flagged";
    case Verdict::fail: return "fail";
    case Verdict::skipped: return "skipped";
  }
  return "unknown";
}

struct CheckRow {
  std::string check;
  std::string parameter;
  double empirical = 0.0;
  double bound = 0.0;
  double slack = 1.0;
  Verdict verdict = Verdict::skipped;
  std::string note;
};

inline double mc_slack(std::size_t n_mc) {
  return 1.0 + 3.0 / std::sqrt(static_cast<double>(n_mc));
}

/// pass: empirical <= bound * slack; flagged: within twice the slack margin;
/// fail beyond.
inline Verdict judge(double empirical, double bound, double slack) {
  if (!std::isfinite(empirical) || !std::isfinite(bound)) return Verdict::skipped;
  if (empirical <= bound * slack) return Verdict::pass;
  if (empirical <= bound * (1.0 + 2.0 * (slack - 1.0))) return Verdict::flagged;
  return Verdict::fail;
}

inline bool all_passed(const std::vector<CheckRow>& rows) {
  return std::all_of(rows.begin(), rows.end(), [](const CheckRow& r) {
    return r.verdict == Verdict::pass || r.verdict == Verdict::skipped;
  });
}

inline const std::vector<double>& default_lambda_grid() {
  static const std::vector<double> grid{0.25, 0.5, 1.0, 2.0, 4.0};
  return grid;
}

struct ConcentrationOptions {
  std::size_t n_mc = 100000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

namespace detail {

/// values[r] = f(rng_r) for n replications, each with its own stream.
template <class Fn>
std::vector<double> replicate(std::size_t n, std::uint64_t seed, unsigned threads, Fn&& f) {
  std::vector<double> out(n);
  parallel_for(n, threads, [&](std::size_t r) {
    UniformSampler rng(derive_seed(seed, r));
    out[r] = f(rng);
  });
  return out;
}

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double norm_of(std::span<const double> w) {
  double s = 0.0;
  for (double x : w) s += x * x;
  return std::sqrt(s);
}

inline std::string fmt(const char* key, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s=%g", key, v);
  return buf;
}

inline CheckRow cosh_row(const char* check, std::string param, const std::vector<double>& norms,
                         double lambda, double bound, std::size_t n_mc) {
  CheckRow row{check, std::move(param), 0.0, bound, mc_slack(n_mc), Verdict::skipped, ""};
  double s = 0.0;
  for (double x : norms) s += std::cosh(lambda * x);
  row.empirical = s / static_cast<double>(norms.size());
  if (!std::isfinite(row.empirical) || !std::isfinite(bound)) {
    row.note = "overflow; lambda skipped";
    return row;
  }
  row.verdict = judge(row.empirical, bound, row.slack);
  return row;
}

}  // namespace detail

/// E cosh(lambda ||W||) <= exp(lambda^2 tau^2 / 2) for each lambda.
inline std::vector<CheckRow> check_cosh_condition(const VectorSampler& w,
                                                  const std::vector<double>& lambdas,
                                                  const ConcentrationOptions& o = {}) {
  if (o.n_mc < 10000) throw std::invalid_argument("check_cosh_condition: n_mc must be >= 1e4");
  const auto norms = detail::replicate(o.n_mc, derive_seed(o.seed, 1), o.threads,
                                       [&](UniformSampler& rng) {
                                         std::vector<double> x(w.dim);
                                         w.draw(rng, x);
                                         return detail::norm_of(x);
                                       });
  std::vector<CheckRow> rows;
  for (double l : lambdas)
    rows.push_back(detail::cosh_row("cosh_condition", w.name + " " + detail::fmt("lambda", l),
                                    norms, l, std::exp(l * l * w.tau * w.tau / 2.0), o.n_mc));
  return rows;
}

/// With sigma^2 = 2 tau^2 / (1 - e^{-2}): E exp(||W||^2 / sigma^2) <= e.
inline CheckRow check_subgaussian_equivalence(const VectorSampler& w,
                                              const ConcentrationOptions& o = {}) {
  const double sigma2 = 2.0 * w.tau * w.tau / (1.0 - std::exp(-2.0));
  const auto vals = detail::replicate(o.n_mc, derive_seed(o.seed, 2), o.threads,
                                      [&](UniformSampler& rng) {
                                        std::vector<double> x(w.dim);
                                        w.draw(rng, x);
                                        const double nn = detail::norm_of(x);
                                        return std::exp(nn * nn / sigma2);
                                      });
  CheckRow row{"subgaussian_equivalence", w.name + " " + detail::fmt("sigma", std::sqrt(sigma2)),
               detail::mean(vals), std::numbers::e, mc_slack(o.n_mc), Verdict::skipped, ""};
  row.verdict = judge(row.empirical, row.bound, row.slack);
  return row;
}

/// Converse direction: a sampler with E exp(||W||^2/sigma^2) <= e satisfies
/// the cosh condition with tau = 2^{1/4} sigma.
inline std::vector<CheckRow> check_cosh_from_exp_square(const VectorSampler& w,
                                                        const std::vector<double>& lambdas,
                                                        const ConcentrationOptions& o = {}) {
  if (!w.sigma) throw std::invalid_argument("check_cosh_from_exp_square: sampler has no sigma");
  VectorSampler v = w;
  v.tau = std::pow(2.0, 0.25) * *w.sigma;
  auto rows = check_cosh_condition(v, lambdas, o);
  for (auto& r : rows) r.check = "cosh_from_exp_square";
  return rows;
}

/// E cosh(lambda ||W_1 + ... + W_N||) <= exp(3 lambda^2 tau^2 N / 4).
inline std::vector<CheckRow> sum_mgf_check(const VectorSampler& w,
                                           const std::vector<double>& lambdas, std::size_t n,
                                           const ConcentrationOptions& o = {}) {
  if (n == 0) throw std::invalid_argument("sum_mgf_check: N must be positive");
  const auto norms = detail::replicate(o.n_mc, derive_seed(o.seed, 3, n), o.threads,
                                       [&](UniformSampler& rng) {
                                         std::vector<double> x(w.dim), s(w.dim, 0.0);
                                         for (std::size_t i = 0; i < n; ++i) {
                                           w.draw(rng, x);
                                           for (std::size_t k = 0; k < w.dim; ++k) s[k] += x[k];
                                         }
                                         return detail::norm_of(s);
                                       });
  std::vector<CheckRow> rows;
  for (double l : lambdas) {
    const double bound = std::exp(3.0 * l * l * w.tau * w.tau * static_cast<double>(n) / 4.0);
    rows.push_back(detail::cosh_row(
        "sum_mgf", w.name + " " + detail::fmt("lambda", l) + " " + detail::fmt("N", double(n)),
        norms, l, bound, o.n_mc));
  }
  return rows;
}

/// E max_k ||Z_k|| <= sqrt(3/2) tau sqrt(2 ln(2K)) / sqrt(N) and
/// P(max_k ||Z_k|| >= eps) <= 2K exp(-eps^2 N / (3 tau^2)), with Z_k the
/// average of N independent copies of W (k = 1..K).
inline std::vector<CheckRow> maxima_bounds_experiment(const VectorSampler& w, std::size_t k,
                                                      std::size_t n,
                                                      const std::vector<double>& eps_grid,
                                                      const ConcentrationOptions& o = {}) {
  if (k == 0 || n == 0) throw std::invalid_argument("maxima_bounds_experiment: K, N >= 1");
  if (o.n_mc < 1000) throw std::invalid_argument("maxima_bounds_experiment: n_mc must be >= 1e3");
  const auto maxima = detail::replicate(
      o.n_mc, derive_seed(o.seed, 4, k, n), o.threads, [&](UniformSampler& rng) {
        std::vector<double> x(w.dim), s(w.dim);
        double best = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
          std::fill(s.begin(), s.end(), 0.0);
          for (std::size_t i = 0; i < n; ++i) {
            w.draw(rng, x);
            for (std::size_t c = 0; c < w.dim; ++c) s[c] += x[c];
          }
          best = std::max(best, detail::norm_of(s) / static_cast<double>(n));
        }
        return best;
      });
  const double kk = static_cast<double>(k), nn = static_cast<double>(n);
  const std::string tag =
      w.name + " " + detail::fmt("K", kk) + " " + detail::fmt("N", nn);
  std::vector<CheckRow> rows;
  CheckRow mean_row{"maxima_mean", tag, detail::mean(maxima),
                    std::sqrt(1.5) * w.tau * std::sqrt(2.0 * std::log(2.0 * kk)) / std::sqrt(nn),
                    mc_slack(o.n_mc), Verdict::skipped, ""};
  mean_row.verdict = judge(mean_row.empirical, mean_row.bound, mean_row.slack);
  rows.push_back(mean_row);
  for (double eps : eps_grid) {
    const double bound = 2.0 * kk * std::exp(-eps * eps * nn / (3.0 * w.tau * w.tau));
    const double freq =
        static_cast<double>(std::count_if(maxima.begin(), maxima.end(),
                                          [&](double m) { return m >= eps; })) /
        static_cast<double>(maxima.size());
    CheckRow row{"maxima_tail", tag + " " + detail::fmt("eps", eps), freq, bound,
                 mc_slack(o.n_mc), Verdict::skipped, ""};
    if (bound >= 1.0) {
      row.verdict = Verdict::pass;
      row.note = "vacuous bound";
    } else {
      row.verdict = judge(freq, bound, row.slack);
    }
    rows.push_back(row);
  }
  return rows;
}

inline void write_check_csv(const std::vector<CheckRow>& rows, std::ostream& out) {
  out << "check,parameter,empirical,bound,slack,verdict\n";
  char buf[128];
  for (const auto& r : rows) {
    out << r.check << ',' << r.parameter << ',';
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g", r.empirical, r.bound, r.slack);
    out << buf << ',' << to_string(r.verdict) << '\n';
  }
}

}  // namespace saa4pde

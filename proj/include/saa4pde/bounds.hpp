#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "saa4pde/pde.hpp"
#include "saa4pde/random_fields.hpp"
#include "saa4pde/sampling.hpp"

namespace saa4pde {

enum class Provenance { user, heuristic, closed_form };

inline const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::user: return "user";
    case Provenance::heuristic: return "heuristic";
    case Provenance::closed_form: return "closed-form";
  }
  return "unknown";
}

inline Provenance provenance_from_string(const std::string& s) {
  if (s == "user") return Provenance::user;
  if (s == "heuristic") return Provenance::heuristic;
  if (s == "closed-form") return Provenance::closed_form;
  throw std::invalid_argument("unknown provenance '" + s + "'");
}

struct Constant {
  double value = 0.0;
  Provenance source = Provenance::user;
};

/// Structural constants entering the error and sample-size bounds.
struct ProblemConstants {
  Constant kappa_min{1.0};
  Constant b_max{1.0};
  Constant g_max{1.0};
  Constant r_ad{1.0};
  Constant c_q{0.0};
  Constant d_q{1.0};
  Constant p{4.0};
  Constant C_D{1.0};
  Constant c_p{1.0};
  Constant domain_measure{1.0};
  Constant yd_norm{0.0};
  Constant alpha{1.0};
  Constant d{2.0};
  Constant rho{1.0};

  /// (name, member) pairs in a fixed order, for parsing and printing.
  template <class Self, class Fn>
  static void for_each(Self& self, Fn&& fn) {
    fn("kappa_min", self.kappa_min);
    fn("b_max", self.b_max);
    fn("g_max", self.g_max);
    fn("r_ad", self.r_ad);
    fn("c_q", self.c_q);
    fn("d_q", self.d_q);
    fn("p", self.p);
    fn("C_D", self.C_D);
    fn("c_p", self.c_p);
    fn("domain_measure", self.domain_measure);
    fn("yd_norm", self.yd_norm);
    fn("alpha", self.alpha);
    fn("d", self.d);
    fn("rho", self.rho);
  }

  int dimension() const { return static_cast<int>(d.value); }

  bool any_heuristic() const {
    bool h = false;
    for_each(*this, [&](const char*, const Constant& c) {
      h = h || c.source == Provenance::heuristic;
    });
    return h;
  }

  std::vector<std::string> heuristic_fields() const {
    std::vector<std::string> out;
    for_each(*this, [&](const char* name, const Constant& c) {
      if (c.source == Provenance::heuristic) out.emplace_back(name);
    });
    return out;
  }

  void validate() const {
    const auto positive = [](const char* name, const Constant& c) {
      if (!(c.value > 0.0) || !std::isfinite(c.value))
        throw std::invalid_argument(std::string("constant ") + name + " must be positive");
    };
    const auto nonneg = [](const char* name, const Constant& c) {
      if (!(c.value >= 0.0) || !std::isfinite(c.value))
        throw std::invalid_argument(std::string("constant ") + name + " must be nonnegative");
    };
    positive("kappa_min", kappa_min);
    positive("C_D", C_D);
    positive("c_p", c_p);
    positive("domain_measure", domain_measure);
    positive("alpha", alpha);
    nonneg("b_max", b_max);
    nonneg("g_max", g_max);
    nonneg("r_ad", r_ad);
    nonneg("c_q", c_q);
    nonneg("d_q", d_q);
    nonneg("yd_norm", yd_norm);
    nonneg("rho", rho);
    if (d.value != 2.0 && d.value != 3.0)
      throw std::invalid_argument("constant d must be 2 or 3");
    if (!(p.value > 3.0) || (d.value == 3.0 && p.value > 6.0))
      throw std::invalid_argument("constant p must lie in (3, inf) for d = 2 and (3, 6] for d = 3");
  }

  /// Overwrite fields from "name = value [provenance]" lines ('#' starts a
  /// comment). Values without a provenance tag are user input.
  void read(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw std::invalid_argument("constants line " + std::to_string(lineno) +
                                    ": expected 'name = value'");
      std::string key = line.substr(0, eq), val = line.substr(eq + 1);
      const auto trim = [](std::string& s) {
        s.erase(0, s.find_first_not_of(" \t\r"));
        s.erase(s.find_last_not_of(" \t\r") + 1);
      };
      trim(key);
      trim(val);
      bool found = false;
      for_each(*this, [&](const char* name, Constant& c) {
        if (key != name) return;
        found = true;
        std::string number = val, tag;
        if (const auto sp = val.find_first_of(" \t"); sp != std::string::npos) {
          number = val.substr(0, sp);
          tag = val.substr(val.find_first_not_of(" \t", sp));
        }
        std::size_t used = 0;
        double v = 0.0;
        try {
          v = std::stod(number, &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used == 0 || used != number.size())
          throw std::invalid_argument("constants line " + std::to_string(lineno) +
                                      ": bad number '" + number + "'");
        Provenance source = Provenance::user;
        if (!tag.empty()) {
          try {
            source = provenance_from_string(tag);
          } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("constants line " + std::to_string(lineno) + ": " +
                                        e.what());
          }
        }
        c = {v, source};
      });
      if (!found)
        throw std::invalid_argument("constants line " + std::to_string(lineno) +
                                    ": unknown constant '" + key + "'");
    }
  }

  /// Inverse of read(): one "name = value provenance" line per field.
  void write(std::ostream& out) const {
    for_each(*this, [&](const char* name, const Constant& c) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.17g", c.value);
      out << name << " = " << buf << ' ' << to_string(c.source) << '\n';
    });
  }
};

/// Upper bound for the H1_0 -> L4 embedding constant in two dimensions,
/// from ||v||_4^2 <= sqrt(2) ||v||_2 ||grad v||_2 and ||v||_2 <= C_D ||grad v||_2.
inline double embedding_constant_p4(double c_d, int d = 2) {
  if (d != 2) throw std::invalid_argument("embedding_constant_p4: only d = 2 is supported");
  return std::pow(2.0, 0.25) * std::sqrt(c_d);
}

inline double kappa_min_case_study() { return case_study::kappa_min(); }

/// Lipschitz constant of the sample gradient on the feasible set.
inline double lipschitz_grad(const ProblemConstants& c) {
  if (!(c.kappa_min.value > 0.0))
    throw std::invalid_argument("lipschitz_grad: kappa_min must be positive");
  const double cd = c.C_D.value, k = c.kappa_min.value, g = c.g_max.value;
  const double b = c.b_max.value, r = c.r_ad.value, cp = c.c_p.value, p = c.p.value;
  const double growth =
      c.c_q.value * std::pow(c.domain_measure.value, (p - 3.0) / p) +
      c.d_q.value * std::pow(cp, p - 3.0) * std::pow(b / k + 3.0 * (cd / k) * g * r, p - 3.0);
  const double state_bound =
      (cd * cd / (k * k)) * b + (cd * cd * cd / (k * k)) * g * r + (cd / k) * c.yd_norm.value;
  const double bracket = (cd / (k * k)) * cp * cp * cp * g * growth * state_bound;
  return cd * g * ((cd * cd * cd / (k * k)) * g + bracket);
}

struct CompactRadius {
  double diameter = 0.0;  // bound on ||S(u)|| + ||y_d|| over the feasible set
  double radius = 0.0;
};

inline CompactRadius compact_radius(const ProblemConstants& c) {
  const double cd = c.C_D.value, k = c.kappa_min.value, g = c.g_max.value;
  CompactRadius out;
  out.diameter = (cd / k) * c.b_max.value + (cd * cd / k) * g * c.r_ad.value + c.yd_norm.value;
  out.radius = (cd + 1.0) * (cd + 1.0) * (cd / k) * g * out.diameter;
  return out;
}

inline double tau_scripted(const ProblemConstants& c) {
  const double cd = c.C_D.value;
  return 2.0 * (cd * cd / c.kappa_min.value) * c.g_max.value * compact_radius(c).diameter;
}

/// A sample size: the real-valued bound and its ceiling, unless the ceiling
/// does not fit a signed 64-bit integer.
struct SampleSize {
  double bound = 0.0;
  std::optional<std::int64_t> value;

  bool astronomical() const { return !value.has_value(); }
  std::string str() const { return value ? std::to_string(*value) : "astronomical"; }
};

/// Ceiling that ignores rounding noise: values within 1e-12 (relative) of an
/// integer are taken to be that integer. At least one sample is required.
inline SampleSize ceil_sample_size(double x) {
  SampleSize s;
  s.bound = x;
  if (!std::isfinite(x) || x >= 9.2e18) return s;
  const double r = std::round(x);
  const double c = std::abs(x - r) <= 1e-12 * std::max(1.0, std::abs(x)) ? r : std::ceil(x);
  s.value = std::max<std::int64_t>(1, static_cast<std::int64_t>(c));
  return s;
}

inline double covering_term(double rho, double lip, double radius, double alpha, double eps,
                            int d) {
  return rho * std::pow(4.0 * lip * radius / (alpha * eps), d);
}

/// 12 ln2 tau^2 / eps^2 [rho (4 max(L,1) R / (alpha eps))^d + 1].
inline SampleSize sample_size_expectation(double tau, double lip, double radius, double alpha,
                                          double rho, int d, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("sample_size_expectation: eps must be positive");
  const double n = 12.0 * std::numbers::ln2 * tau * tau / (eps * eps) *
                   (covering_term(rho, std::max(lip, 1.0), radius, alpha, eps, d) + 1.0);
  return ceil_sample_size(n);
}

/// 48 tau^2 / eps^2 [ln2 rho (4 L R / (alpha eps))^d + ln(2/delta)].
inline SampleSize sample_size_tail(double tau, double lip, double radius, double alpha, double rho,
                                   int d, double eps, double delta) {
  if (!(eps > 0.0)) throw std::invalid_argument("sample_size_tail: eps must be positive");
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("sample_size_tail: delta must lie in (0, 1)");
  const double n = 48.0 * tau * tau / (eps * eps) *
                   (std::numbers::ln2 * covering_term(rho, lip, radius, alpha, eps, d) +
                    std::log(2.0 / delta));
  return ceil_sample_size(n);
}

inline SampleSize sample_size_expectation(const ProblemConstants& c, double eps) {
  c.validate();
  return sample_size_expectation(tau_scripted(c), lipschitz_grad(c), compact_radius(c).radius,
                                 c.alpha.value, c.rho.value, c.dimension(), eps);
}

inline SampleSize sample_size_tail(const ProblemConstants& c, double eps, double delta) {
  c.validate();
  return sample_size_tail(tau_scripted(c), lipschitz_grad(c), compact_radius(c).radius,
                          c.alpha.value, c.rho.value, c.dimension(), eps, delta);
}

/// Right side of the expectation bound on the criticality measure at one eps.
inline double criticality_bound(double tau, double lip, double radius, double alpha, double rho,
                                int d, double n, double eps) {
  return eps / (2.0 * alpha) +
         std::sqrt(3.0) * tau / (alpha * std::sqrt(n)) *
             std::sqrt(std::numbers::ln2 *
                       (covering_term(rho, std::max(lip, 1.0), radius, alpha, eps, d) + 1.0));
}

struct CurvePoint {
  double n = 0.0;
  double bound = 0.0;
  double eps = 0.0;  // minimizer on the grid
};

/// For each N, the smallest criticality bound over eps on a log grid of 64
/// points per decade spanning 8 decades centred at tau / sqrt(N).
inline std::vector<CurvePoint> expectation_bound_curve(double tau, double lip, double radius,
                                                       double alpha, double rho, int d,
                                                       const std::vector<double>& n_grid) {
  if (n_grid.empty()) throw std::invalid_argument("expectation_bound_curve: empty N grid");
  std::vector<CurvePoint> out;
  for (double n : n_grid) {
    const double centre = tau / std::sqrt(n);
    CurvePoint best{n, INFINITY, 0.0};
    for (int k = -256; k <= 256; ++k) {
      const double eps = centre * std::pow(10.0, k / 64.0);
      const double b = criticality_bound(tau, lip, radius, alpha, rho, d, n, eps);
      if (b < best.bound) best = {n, b, eps};
    }
    out.push_back(best);
  }
  return out;
}

inline std::vector<CurvePoint> expectation_bound_curve(const ProblemConstants& c,
                                                       const std::vector<double>& n_grid) {
  c.validate();
  return expectation_bound_curve(tau_scripted(c), lipschitz_grad(c), compact_radius(c).radius,
                                 c.alpha.value, c.rho.value, c.dimension(), n_grid);
}

struct PlanResult {
  double eps = 0.0;
  double delta = 0.0;
  SampleSize n_expectation;
  SampleSize n_tail;
  double lipschitz = 0.0;
  double diameter = 0.0;
  double radius = 0.0;
  double tau = 0.0;
  Provenance provenance = Provenance::closed_form;
  std::vector<std::string> notes;

  bool operator==(const PlanResult& o) const {
    return eps == o.eps && delta == o.delta && n_expectation.bound == o.n_expectation.bound &&
           n_expectation.value == o.n_expectation.value && n_tail.bound == o.n_tail.bound &&
           n_tail.value == o.n_tail.value && lipschitz == o.lipschitz &&
           diameter == o.diameter && radius == o.radius && tau == o.tau &&
           provenance == o.provenance && notes == o.notes;
  }
};

inline PlanResult plan(const ProblemConstants& c, double eps, double delta) {
  c.validate();
  PlanResult r;
  r.eps = eps;
  r.delta = delta;
  r.lipschitz = lipschitz_grad(c);
  const auto cr = compact_radius(c);
  r.diameter = cr.diameter;
  r.radius = cr.radius;
  r.tau = tau_scripted(c);
  r.n_expectation = sample_size_expectation(c, eps);
  r.n_tail = sample_size_tail(c, eps, delta);
  bool any_user = false;
  ProblemConstants::for_each(c, [&](const char*, const Constant& k) {
    any_user = any_user || k.source == Provenance::user;
  });
  r.provenance = c.any_heuristic() ? Provenance::heuristic
                 : any_user        ? Provenance::user
                                   : Provenance::closed_form;
  for (const auto& name : c.heuristic_fields())
    r.notes.push_back(name + " is a heuristic estimate; outputs are bound evaluations, "
                             "not certified guarantees");
  if (c.rho.source != Provenance::user)
    r.notes.push_back("rho (covering constant) has no known value; default used");
  if (r.n_expectation.astronomical()) r.notes.push_back("N_expectation exceeds 2^63 - 1");
  if (r.n_tail.astronomical()) r.notes.push_back("N_tail exceeds 2^63 - 1");
  return r;
}

inline void to_json(nlohmann::json& j, const SampleSize& s) {
  j = nlohmann::json{{"bound", s.bound}};
  j["value"] = s.value ? nlohmann::json(*s.value) : nlohmann::json(nullptr);
}

inline void from_json(const nlohmann::json& j, SampleSize& s) {
  s.bound = j.at("bound").get<double>();
  if (j.at("value").is_null())
    s.value.reset();
  else
    s.value = j.at("value").get<std::int64_t>();
}

inline void to_json(nlohmann::json& j, const PlanResult& r) {
  j = nlohmann::json{{"eps", r.eps},
                     {"delta", r.delta},
                     {"N_expectation", r.n_expectation},
                     {"N_tail", r.n_tail},
                     {"lipschitz_grad", r.lipschitz},
                     {"diameter", r.diameter},
                     {"radius", r.radius},
                     {"tau", r.tau},
                     {"provenance", to_string(r.provenance)},
                     {"notes", r.notes}};
}

inline void from_json(const nlohmann::json& j, PlanResult& r) {
  r.eps = j.at("eps").get<double>();
  r.delta = j.at("delta").get<double>();
  r.n_expectation = j.at("N_expectation").get<SampleSize>();
  r.n_tail = j.at("N_tail").get<SampleSize>();
  r.lipschitz = j.at("lipschitz_grad").get<double>();
  r.diameter = j.at("diameter").get<double>();
  r.radius = j.at("radius").get<double>();
  r.tau = j.at("tau").get<double>();
  r.provenance = provenance_from_string(j.at("provenance").get<std::string>());
  r.notes = j.at("notes").get<std::vector<std::string>>();
}

inline void to_json(nlohmann::json& j, const ProblemConstants& c) {
  j = nlohmann::json::object();
  ProblemConstants::for_each(c, [&](const char* name, const Constant& k) {
    j[name] = {{"value", k.value}, {"provenance", to_string(k.source)}};
  });
}

struct HeuristicOptions {
  std::size_t samples = 64;
  std::size_t grid = 100;
  std::uint64_t seed = 0x5eed;
  double inflation = 1.1;
};

/// Case-study constants. Closed forms where they exist; g_max and b_max are
/// inflated maxima of grid estimates over uniform parameter samples, and rho
/// is a placeholder.
inline ProblemConstants case_study_constants(double alpha, const HeuristicOptions& h = {}) {
  ProblemConstants c;
  const double cd = friedrichs_constant(2);
  c.kappa_min = {kappa_min_case_study(), Provenance::closed_form};
  c.C_D = {cd, Provenance::closed_form};
  c.c_p = {embedding_constant_p4(cd), Provenance::closed_form};
  c.r_ad = {10.0, Provenance::closed_form};
  c.c_q = {0.0, Provenance::closed_form};
  c.d_q = {6.0, Provenance::closed_form};
  c.p = {4.0, Provenance::closed_form};
  c.domain_measure = {1.0, Provenance::closed_form};
  c.yd_norm = {1.0, Provenance::closed_form};
  c.alpha = {alpha, Provenance::user};
  c.d = {2.0, Provenance::closed_form};
  c.rho = {1.0, Provenance::heuristic};

  UniformSampler sampler(h.seed);
  double g_est = 0.0, b_sup = 0.0;
  const double step = 1.0 / static_cast<double>(h.grid);
  for (std::size_t s = 0; s < h.samples; ++s) {
    const ParamVector xi = sampler.next_param();
    g_est = std::max(g_est, estimate_c01_norm(
                                [&](const Point2& x) { return case_study::g(x, xi); }, h.grid));
    for (std::size_t j = 0; j <= h.grid; ++j)
      for (std::size_t i = 0; i <= h.grid; ++i) {
        const Point2 x{static_cast<double>(i) * step, static_cast<double>(j) * step};
        b_sup = std::max(b_sup, std::abs(case_study::b(x, xi)));
      }
  }
  // ||b||_{H^-1} <= C_D ||b||_{L2} <= C_D sup|b| on the unit square
  c.g_max = {h.inflation * g_est, Provenance::heuristic};
  c.b_max = {h.inflation * cd * b_sup, Provenance::heuristic};
  return c;
}

}  // namespace saa4pde

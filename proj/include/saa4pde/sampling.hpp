#pragma once

#include <cstdint>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "saa4pde/detail/joe_kuo_table.hpp"
#include "saa4pde/random_fields.hpp"

namespace saa4pde {

/// SplitMix64 finalizer; a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derive an independent stream seed from a base seed and a tuple of keys.
template <class... Keys>
constexpr std::uint64_t derive_seed(std::uint64_t base, Keys... keys) {
  std::uint64_t s = mix64(base);
  ((s = mix64(s ^ mix64(static_cast<std::uint64_t>(keys) + 0x632be59bd9b4e019ULL))), ...);
  return s;
}

/// Counter-based uniform generator: the k-th draw is a pure function of
/// (seed, k), so streams can be split and replayed without shared state.
class UniformSampler {
 public:
  explicit UniformSampler(std::uint64_t seed = 0) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t position() const { return counter_; }

  std::uint64_t next_u64() {
    return mix64(seed_ ^ mix64(counter_++ * 0xd1342543de82ef95ULL + 1));
  }
  /// Uniform on [0, 1) with 53 random bits.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  /// Uniform on [-1, 1).
  double next_symmetric() { return 2.0 * next_unit() - 1.0; }

  ParamVector next_param() {
    ParamVector xi;
    for (double& v : xi) v = next_symmetric();
    return xi;
  }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

inline std::vector<ParamVector> draw_uniform(UniformSampler& sampler, std::size_t count) {
  if (count == 0) throw std::invalid_argument("draw_uniform: count must be positive");
  std::vector<ParamVector> out(count);
  for (auto& xi : out) xi = sampler.next_param();
  return out;
}

/// One line of a Joe-Kuo direction-number table.
struct SobolDirection {
  unsigned dimension = 0;
  unsigned degree = 0;
  std::uint32_t coefficients = 0;
  std::vector<std::uint32_t> initial;
};

/// Parse the common published layout: an optional header line, then one
/// dimension per line as "d s a m_1 ... m_s".
inline std::vector<SobolDirection> parse_direction_numbers(std::istream& in) {
  std::vector<SobolDirection> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    SobolDirection dir;
    if (!(ls >> dir.dimension)) continue;  // header or blank
    if (!(ls >> dir.degree >> dir.coefficients) || dir.degree == 0)
      throw std::runtime_error("direction numbers: malformed line " + std::to_string(lineno));
    dir.initial.resize(dir.degree);
    for (auto& m : dir.initial)
      if (!(ls >> m))
        throw std::runtime_error("direction numbers: missing m_i on line " +
                                 std::to_string(lineno));
    out.push_back(std::move(dir));
  }
  return out;
}

inline std::vector<SobolDirection> default_direction_numbers() {
  std::istringstream in(detail::joe_kuo_table);
  return parse_direction_numbers(in);
}

/// Gray-code Sobol sequence (Antonov-Saleev ordering) in [0, 1)^dim.
/// Point 0 is the origin; next() returns points 0, 1, 2, ... in order.
class SobolGenerator {
 public:
  static constexpr unsigned kBits = 32;

  explicit SobolGenerator(std::size_t dim,
                          const std::vector<SobolDirection>& table = default_direction_numbers())
      : dim_(dim), v_(dim, std::vector<std::uint32_t>(kBits)), x_(dim, 0) {
    if (dim == 0) throw std::invalid_argument("SobolGenerator: dimension must be positive");
    if (dim > table.size() + 1)
      throw std::out_of_range("SobolGenerator: requested dimension " + std::to_string(dim) +
                              " exceeds direction-number table (" +
                              std::to_string(table.size() + 1) + ")");
    for (unsigned i = 0; i < kBits; ++i) v_[0][i] = 1u << (kBits - 1 - i);
    for (std::size_t j = 1; j < dim; ++j) {
      const auto& dir = table[j - 1];
      const unsigned s = dir.degree;
      auto& v = v_[j];
      for (unsigned i = 0; i < std::min(s, kBits); ++i)
        v[i] = dir.initial[i] << (kBits - 1 - i);
      for (unsigned i = s; i < kBits; ++i) {
        v[i] = v[i - s] ^ (v[i - s] >> s);
        for (unsigned k = 1; k < s; ++k)
          if ((dir.coefficients >> (s - 1 - k)) & 1u) v[i] ^= v[i - k];
      }
    }
  }

  std::size_t dimension() const { return dim_; }
  std::uint64_t index() const { return index_; }

  std::vector<double> next() {
    std::vector<double> p(dim_);
    for (std::size_t j = 0; j < dim_; ++j)
      p[j] = static_cast<double>(x_[j]) * 0x1.0p-32;
    // advance to the following point
    unsigned c = 0;
    for (std::uint64_t i = index_; i & 1u; i >>= 1) ++c;
    if (c >= kBits) throw std::overflow_error("SobolGenerator: sequence exhausted");
    for (std::size_t j = 0; j < dim_; ++j) x_[j] ^= v_[j][c];
    ++index_;
    return p;
  }

  void skip(std::uint64_t count) {
    for (std::uint64_t i = 0; i < count; ++i) next();
  }

 private:
  std::size_t dim_;
  std::vector<std::vector<std::uint32_t>> v_;
  std::vector<std::uint32_t> x_;
  std::uint64_t index_ = 0;
};

/// The first `count` Sobol points after the origin, mapped to the parameter
/// box by xi = 2 s - 1.
inline std::vector<ParamVector> sobol_parameters(std::size_t count) {
  if (count == 0) throw std::invalid_argument("sobol_parameters: count must be positive");
  SobolGenerator gen(kParamDim);
  gen.skip(1);
  std::vector<ParamVector> out(count);
  for (auto& xi : out) {
    const auto s = gen.next();
    for (std::size_t j = 0; j < kParamDim; ++j) xi[j] = 2.0 * s[j] - 1.0;
  }
  return out;
}

}  // namespace saa4pde

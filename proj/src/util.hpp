#pragma once

// Small shared utilities: error type, dense row-major grid, and the
// deterministic random primitives used by scenario generation and tests.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace partel {

enum class ErrorCode {
  invalid_argument,
  parse,
  io,
  infeasible,
  degenerate_dual,
  undefined_latency,
  enumeration_bound,
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::parse: return "parse";
    case ErrorCode::io: return "io";
    case ErrorCode::infeasible: return "infeasible-target";
    case ErrorCode::degenerate_dual: return "degenerate-dual";
    case ErrorCode::undefined_latency: return "undefined-latency";
    case ErrorCode::enumeration_bound: return "enumeration-bound";
  }
  return "unknown";
}

// Dense row-major matrix of doubles. Rows index workers, columns subcarriers
// in every place this project uses it.
struct Grid {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> v;

  Grid() = default;
  Grid(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), v(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return v[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return v[r * cols + c]; }
  bool same_shape(const Grid& o) const { return rows == o.rows && cols == o.cols; }
};

// ---------------------------------------------------------------------------
// Deterministic randomness.
//
// Scenario draws are keyed by (seed, stream tag, worker, subcarrier) through
// splitmix64 so that a scenario with more workers or subcarriers literally
// contains the smaller one: growing K or N never reshuffles existing draws.
// That keeps seeded sweeps comparable across axis values and makes generation
// byte-stable across platforms (no libstdc++ distribution quirks).
// ---------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t mix_key(std::uint64_t seed, std::uint64_t tag,
                             std::uint64_t a = 0, std::uint64_t b = 0) {
  std::uint64_t z = splitmix64(seed ^ (tag * 0x9e3779b97f4a7c15ull));
  z = splitmix64(z ^ (a * 0xd1342543de82ef95ull));
  z = splitmix64(z ^ (b * 0xaf251af3b0f025b5ull));
  return z;
}

// Uniform in [0, 1) with 53 significant bits.
inline double uniform01(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Unbiased-enough index draw (bias < 2^-60 for the small ranges used here).
inline std::size_t bounded_index(std::uint64_t bits, std::size_t n) {
  return static_cast<std::size_t>(
      (static_cast<unsigned __int128>(bits) * n) >> 64);
}

// A tiny counter-based stream for places that need many draws in sequence.
class RandomStream {
public:
  RandomStream(std::uint64_t seed, std::uint64_t tag) : state_(mix_key(seed, tag)) {}
  std::uint64_t next_bits() {
    state_ = splitmix64(state_ + 0x9e3779b97f4a7c15ull);
    return state_;
  }
  double next_uniform01() { return uniform01(next_bits()); }
  // Uniform in [lo, hi).
  double next_uniform(double lo, double hi) {
    return lo + (hi - lo) * next_uniform01();
  }
  std::size_t next_index(std::size_t n) { return bounded_index(next_bits(), n); }
  double next_gaussian() {
    // Marsaglia polar method, deterministic given the stream.
    for (;;) {
      double a = 2.0 * next_uniform01() - 1.0;
      double b = 2.0 * next_uniform01() - 1.0;
      double s = a * a + b * b;
      if (s > 0.0 && s < 1.0) {
        double m = std::sqrt(-2.0 * std::log(s) / s);
        return a * m;
      }
    }
  }

private:
  std::uint64_t state_;
};

}  // namespace partel

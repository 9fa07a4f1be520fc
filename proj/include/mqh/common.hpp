#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace mqh {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad arguments or preconditions violated by the caller.
class DomainError : public Error {
 public:
  using Error::Error;
};

// A distribution could not produce an admissible draw (zero mass in the
// requested range, or the rejection budget ran out).
class SamplingError : public Error {
 public:
  using Error::Error;
};

// The book state itself is corrupt (crossed quotes, broken invariant).
class StateError : public Error {
 public:
  using Error::Error;
};

// A running simulation had to abort (liquidity exhausted, rate overflow,
// post-handler invariant breach).
class SimulationError : public Error {
 public:
  using Error::Error;
};

// Malformed external input (CSV rows, misaligned files).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Config file violates the documented schema. CLI maps this to exit code 2.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// Single per-run random stream. Every distribution in a run draws from the
// same stream so a seed pins the whole event log.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Uniform on (0,1), endpoints excluded.
  double uniform() {
    return (static_cast<double>(gen_() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
  }

  double exponential(double rate) { return -std::log(uniform()) / rate; }

  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

// floor(x / d) for d > 0, exact for negative x as well.
inline std::int64_t floor_div(std::int64_t x, std::int64_t d) {
  std::int64_t q = x / d;
  return (x % d != 0 && (x < 0) != (d < 0)) ? q - 1 : q;
}

// round(n / d) with halves away from zero; n >= 0, d > 0.
inline std::int64_t round_div(std::int64_t n, std::int64_t d) {
  return (2 * n + d) / (2 * d);
}

}  // namespace mqh

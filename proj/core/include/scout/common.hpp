#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace scout {

using Vec2 = Eigen::Vector2d;

// Contract violations (dimension mismatches, bad arguments).
struct ContractError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Invalid user-facing configuration (unknown names, missing fields).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Kernel matrix stayed indefinite after jitter escalation.
struct NonPsdError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Every hyperparameter restart diverged.
struct OptimizationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Admissible-destination set empty even after the escape hatch.
struct PlannerStuckError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input file (grid lattices, experiment specs).
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

//! Deterministic random stream.  All draws are derived explicitly from the
//! raw 64-bit generator so sequences do not depend on the standard library's
//! distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(splitmix64(seed ^ 0x6a09e667f3bcc909ULL)) {}

  std::uint64_t next_u64() {
    // xorshift64* on a splitmix-initialized state
    std::uint64_t x = state_;
    x ^= x >> 12;
    x ^= x << 25;
    x ^= x >> 27;
    state_ = x;
    return x * 0x2545f4914f6cdd1dULL;
  }

  //! Uniform on [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  //! Integer uniform on [0, n).
  int uniform_int(int n) { return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n)); }

  //! Standard normal via Box-Muller; one spare value cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  //! Independent child stream; `tag` separates substreams of one seed.
  Rng fork(std::uint64_t tag) const { return Rng(splitmix64(state_ ^ splitmix64(tag))); }

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

constexpr double kPi = 3.14159265358979323846;

//! Normalize an angle to (-pi, pi].
inline double wrap_angle(double a) {
  a = std::fmod(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  if (a > kPi) a -= 2.0 * kPi;
  return a;
}

inline double square(double x) { return x * x; }

}  // namespace scout

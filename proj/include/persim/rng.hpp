#ifndef PERSIM_RNG_HPP_
#define PERSIM_RNG_HPP_

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "persim/model.hpp"

namespace persim {

// Counter-based uniform generator: every draw is a pure function of
// (seed, counters), so evaluation order and threading cannot change a
// realization. The mixer is the splitmix64 finalizer.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed = 0) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  // Uniform in [0, 1).
  double uniform(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) const {
    std::uint64_t h = mix(seed_ ^ mix(a ^ mix(b ^ mix(c + 0x9e3779b97f4a7c15ull))));
    return double(h >> 11) * 0x1.0p-53;
  }

  double uniform_in(double lo, double hi, std::uint64_t a, std::uint64_t b = 0,
                    std::uint64_t c = 0) const {
    return lo + (hi - lo) * uniform(a, b, c);
  }

  static std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  }

 private:
  std::uint64_t seed_;
};

// Random environment model: piecewise-constant uncertainty inflow and/or
// per-realization target position jitter.
struct RandomModel {
  enum class Mode { None, InflowUniform, PositionJitter };
  Mode mode = Mode::None;
  double inflow_lo = 0.0;
  double inflow_hi = 0.0;
  double resample_dt = 1.0;  // Delta_A, inflow resample interval
  double jitter = 0.0;       // position jitter half-width
  std::uint64_t seed = 0;

  void validate() const {
    if (mode == Mode::InflowUniform) {
      if (!(inflow_lo >= 0) || !(inflow_hi >= inflow_lo))
        throw std::invalid_argument("stochastic: inflow bounds must satisfy 0 <= lo <= hi");
      if (!(resample_dt > 0)) throw std::invalid_argument("stochastic: resample interval must be > 0");
    }
    if (mode == Mode::PositionJitter && !(jitter >= 0))
      throw std::invalid_argument("stochastic: jitter half-width must be >= 0");
  }
};

// Inflow rate A_i(t): constant on [k*Delta, (k+1)*Delta), a deterministic
// function of (seed, target, k).
inline double sample_inflow(const RandomModel& m, int target, double t) {
  const std::uint64_t k = static_cast<std::uint64_t>(t / m.resample_dt);
  CounterRng rng(m.seed);
  return rng.uniform_in(m.inflow_lo, m.inflow_hi, 0x1f10u, std::uint64_t(target), k);
}

// Jittered target positions for one realization. Throws if the jitter is
// large enough to break the target ordering.
inline std::vector<double> sample_positions(const MissionConfig& cfg, const RandomModel& m,
                                            std::uint64_t realization) {
  std::vector<double> x(cfg.targets.size());
  CounterRng rng(m.seed);
  for (std::size_t i = 0; i < x.size(); ++i) {
    double u = rng.uniform(0x705u, i, realization);
    x[i] = cfg.targets[i].position + m.jitter * (2.0 * u - 1.0);
  }
  for (std::size_t i = 1; i < x.size(); ++i)
    if (!(x[i] > x[i - 1])) throw std::invalid_argument("stochastic: jitter breaks target ordering");
  return x;
}

}  // namespace persim

#endif  // PERSIM_RNG_HPP_

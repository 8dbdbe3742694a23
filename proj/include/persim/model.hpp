#ifndef PERSIM_MODEL_HPP_
#define PERSIM_MODEL_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace persim {

struct Target {
  double position = 0.0;             // x_i
  double growth_rate = 1.0;          // A_i, uncertainty inflow when unobserved
  double decay_rate = 5.0;           // B_i, drain rate under perfect sensing
  double initial_uncertainty = 0.0;  // R_i(0)
  double weight = 1.0;               // alpha_i
};

struct AgentSpec {
  double start = 0.0;     // s_j(0)
  double range = 1.0;     // r_j
  int direction = +1;     // initial heading, -1 or +1
};

// Immutable problem instance. Validation happens once at construction
// (validate()); downstream code assumes the invariants hold.
struct MissionConfig {
  double length = 0.0;  // mission space [0, L]
  std::vector<Target> targets;
  std::vector<AgentSpec> agents;
  double horizon = 0.0;  // T
  bool no_cross = false;

  int num_targets() const { return static_cast<int>(targets.size()); }
  int num_agents() const { return static_cast<int>(agents.size()); }

  double max_range() const {
    double r = 0.0;
    for (const auto& a : agents) r = std::max(r, a.range);
    return r;
  }
  double min_range() const {
    double r = std::numeric_limits<double>::infinity();
    for (const auto& a : agents) r = std::min(r, a.range);
    return r;
  }
  double first_target() const { return targets.front().position; }
  double last_target() const { return targets.back().position; }

  // Effective mission space [a, b]: beyond it no target is sensed.
  double reach_lo() const { return std::max(0.0, first_target() - max_range()); }
  double reach_hi() const { return std::min(length, last_target() + max_range()); }

  double min_target_gap() const {
    double g = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < targets.size(); ++i)
      g = std::min(g, targets[i].position - targets[i - 1].position);
    return g;
  }

  void validate() const {
    auto fail = [](const std::string& msg) { throw std::invalid_argument("config: " + msg); };
    if (!(length > 0) || !std::isfinite(length)) fail("mission length must be positive and finite");
    if (!(horizon >= 0) || !std::isfinite(horizon)) fail("horizon must be nonnegative and finite");
    if (targets.empty()) fail("at least one target required");
    if (agents.empty()) fail("at least one agent required");
    if (num_targets() <= num_agents()) fail("need more targets than agents (M > N)");
    double prev = 0.0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
      const Target& t = targets[i];
      if (!(t.position > prev) || !(t.position < length))
        fail("targets must be strictly ordered and interior to (0, L)");
      prev = t.position;
      if (!(t.decay_rate > t.growth_rate) || !(t.growth_rate > 0))
        fail("target rates must satisfy B > A > 0");
      if (!(t.initial_uncertainty >= 0)) fail("initial uncertainty must be >= 0");
      if (!(t.weight > 0)) fail("target weight must be positive");
    }
    for (std::size_t j = 0; j < agents.size(); ++j) {
      const AgentSpec& a = agents[j];
      if (!(a.range > 0)) fail("sensing range must be positive");
      if (!(a.start >= 0) || !(a.start <= length)) fail("agent start must lie in [0, L]");
      if (a.direction != -1 && a.direction != 1) fail("initial direction must be -1 or +1");
      if (no_cross && j > 0 && !(agents[j - 1].start < a.start))
        fail("no_cross requires strictly increasing agent start positions");
    }
  }
};

// Linear-decay sensing model: 1 at the agent position, 0 beyond range r.
inline double sensing_probability(double x, double s, double r) {
  if (!std::isfinite(x) || !std::isfinite(s) || !(r > 0))
    throw std::invalid_argument("sensing_probability: non-finite input or r <= 0");
  return std::max(1.0 - std::abs(s - x) / r, 0.0);
}

// Joint detection probability: at least one of N agents senses the target.
inline double joint_detection(std::span<const double> p) {
  double miss = 1.0;
  for (double v : p) {
    if (!(v >= 0.0) || !(v <= 1.0)) throw std::invalid_argument("joint_detection: probability outside [0,1]");
    miss *= 1.0 - v;
  }
  return 1.0 - miss;
}

// Right-hand side of the uncertainty dynamics. The boundary branch keeps
// R pinned at zero while the drain dominates the inflow.
inline double uncertainty_rate(double R, double A, double B, double P) {
  if (!(R >= 0.0)) throw std::invalid_argument("uncertainty_rate: R must be >= 0");
  if (R == 0.0 && A <= B * P) return 0.0;
  return A - B * P;
}

// Targets farther than 2 * max_j r_j from every other target (0-based indices).
inline std::vector<int> isolated_targets(const MissionConfig& cfg) {
  std::vector<int> out;
  const double two_r = 2.0 * cfg.max_range();
  for (int i = 0; i < cfg.num_targets(); ++i) {
    bool isolated = true;
    for (int j = 0; j < cfg.num_targets(); ++j) {
      if (j == i) continue;
      if (std::abs(cfg.targets[i].position - cfg.targets[j].position) <= two_r) {
        isolated = false;
        break;
      }
    }
    if (isolated) out.push_back(i);
  }
  return out;
}

}  // namespace persim

#endif  // PERSIM_MODEL_HPP_

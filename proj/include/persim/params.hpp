#ifndef PERSIM_PARAMS_HPP_
#define PERSIM_PARAMS_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "persim/model.hpp"

namespace persim {

// Decision variables: per-agent switching points theta and dwell times omega.
// Consecutive switching points carry no ordering constraint; dwell times are
// nonnegative and theta lives in the effective mission space [a, b].
struct TrajectoryParams {
  std::vector<std::vector<double>> theta;  // [agent][switch index]
  std::vector<std::vector<double>> omega;  // [agent][dwell index]

  int num_agents() const { return static_cast<int>(theta.size()); }

  void validate(const MissionConfig& cfg) const {
    if (theta.size() != cfg.agents.size() || omega.size() != cfg.agents.size())
      throw std::invalid_argument("params: one theta/omega vector per agent required");
    const double a = cfg.reach_lo(), b = cfg.reach_hi();
    for (std::size_t j = 0; j < theta.size(); ++j) {
      if (theta[j].empty()) throw std::invalid_argument("params: empty switching vector");
      if (omega[j].size() > theta[j].size())
        throw std::invalid_argument("params: more dwell times than switching points");
      for (double th : theta[j])
        if (!(th >= a) || !(th <= b))
          throw std::invalid_argument("params: switching point outside [a, b]");
      for (double w : omega[j])
        if (!(w >= 0)) throw std::invalid_argument("params: negative dwell time");
    }
  }

  std::size_t total_size() const {
    std::size_t n = 0;
    for (std::size_t j = 0; j < theta.size(); ++j) n += theta[j].size() + omega[j].size();
    return n;
  }
};

// Flat layout of the stacked parameter vector: for each agent, its theta
// block then its omega block.
struct ParamLayout {
  std::vector<std::size_t> theta_offset, omega_offset;
  std::vector<std::size_t> theta_len, omega_len;
  std::size_t total = 0;

  explicit ParamLayout(const TrajectoryParams& p) {
    std::size_t off = 0;
    for (std::size_t j = 0; j < p.theta.size(); ++j) {
      theta_offset.push_back(off);
      theta_len.push_back(p.theta[j].size());
      off += p.theta[j].size();
      omega_offset.push_back(off);
      omega_len.push_back(p.omega[j].size());
      off += p.omega[j].size();
    }
    total = off;
  }

  std::vector<double> flatten(const TrajectoryParams& p) const {
    std::vector<double> x;
    x.reserve(total);
    for (std::size_t j = 0; j < p.theta.size(); ++j) {
      x.insert(x.end(), p.theta[j].begin(), p.theta[j].end());
      x.insert(x.end(), p.omega[j].begin(), p.omega[j].end());
    }
    return x;
  }

  TrajectoryParams unflatten(const std::vector<double>& x) const {
    TrajectoryParams p;
    for (std::size_t j = 0; j < theta_offset.size(); ++j) {
      p.theta.emplace_back(x.begin() + theta_offset[j], x.begin() + theta_offset[j] + theta_len[j]);
      p.omega.emplace_back(x.begin() + omega_offset[j], x.begin() + omega_offset[j] + omega_len[j]);
    }
    return p;
  }
};

// One piecewise-constant control segment of an agent's program.
struct Phase {
  enum class Kind { Travel, Dwell, Hold };
  Kind kind = Kind::Travel;
  int index = 0;     // parameter index ell (0-based) this phase belongs to
  double t0 = 0.0, t1 = 0.0;
  double s0 = 0.0, s1 = 0.0;
  double u = 0.0;    // control on the phase: -1, 0, +1
};

struct ControlProgram {
  std::vector<std::vector<Phase>> agents;  // truncated at the horizon
};

// Default number of switching points: enough to cover the horizon at unit
// speed over the tightest target gap, capped at 200.
inline int default_switch_count(const MissionConfig& cfg) {
  double gap = cfg.min_target_gap();
  if (!std::isfinite(gap) || gap <= 0) gap = cfg.length;
  int g = static_cast<int>(std::ceil(cfg.horizon / gap));
  return std::clamp(g, 1, 200);
}

// Builds the per-agent phase timeline: travel to theta_1, dwell omega_1,
// travel to theta_2, ... truncated at the horizon. A trailing Hold phase
// pins the agent at its last switching point when the program runs out
// before T.
inline ControlProgram compile_program(const TrajectoryParams& params, const MissionConfig& cfg) {
  params.validate(cfg);
  const double T = cfg.horizon;
  ControlProgram prog;
  prog.agents.resize(params.theta.size());
  for (std::size_t j = 0; j < params.theta.size(); ++j) {
    double t = 0.0, pos = cfg.agents[j].start;
    auto& phases = prog.agents[j];
    int last_anchor = -1;
    for (std::size_t l = 0; l < params.theta[j].size() && t < T; ++l) {
      const double th = params.theta[j][l];
      const double dist = std::abs(th - pos);
      const double dir = th > pos ? 1.0 : (th < pos ? -1.0 : 0.0);
      Phase travel;
      travel.kind = Phase::Kind::Travel;
      travel.index = static_cast<int>(l);
      travel.t0 = t;
      travel.t1 = std::min(t + dist, T);
      travel.s0 = pos;
      travel.u = dir;
      travel.s1 = pos + dir * (travel.t1 - travel.t0);
      phases.push_back(travel);
      t = travel.t1;
      pos = travel.s1;
      if (t >= T) break;
      last_anchor = static_cast<int>(l);
      const double w = l < params.omega[j].size() ? params.omega[j][l] : 0.0;
      if (w > 0.0) {
        Phase dwell;
        dwell.kind = Phase::Kind::Dwell;
        dwell.index = static_cast<int>(l);
        dwell.t0 = t;
        dwell.t1 = std::min(t + w, T);
        dwell.s0 = dwell.s1 = pos;
        dwell.u = 0.0;
        phases.push_back(dwell);
        t = dwell.t1;
      }
    }
    if (t < T) {
      Phase hold;
      hold.kind = Phase::Kind::Hold;
      hold.index = last_anchor >= 0 ? last_anchor : static_cast<int>(params.theta[j].size()) - 1;
      hold.t0 = t;
      hold.t1 = T;
      hold.s0 = hold.s1 = pos;
      hold.u = 0.0;
      phases.push_back(hold);
    }
  }
  return prog;
}

// Contiguous partition of the (ordered) targets into n slices minimizing the
// maximum slice span. Balancing by span rather than by count keeps each
// agent's sweep period comparable, which matters when target spacing is
// uneven. Returns the n+1 slice boundaries.
inline std::vector<int> partition_targets(const MissionConfig& cfg, int n) {
  const int m = cfg.num_targets();
  std::vector<double> pos(m);
  for (int i = 0; i < m; ++i) pos[i] = cfg.targets[i].position;
  const double inf = std::numeric_limits<double>::infinity();
  // dp[k][i]: min over partitions of targets [0, i) into k slices of the
  // max slice span; cut[k][i] records the start of the last slice.
  std::vector<std::vector<double>> dp(n + 1, std::vector<double>(m + 1, inf));
  std::vector<std::vector<int>> cut(n + 1, std::vector<int>(m + 1, 0));
  dp[0][0] = 0.0;
  for (int k = 1; k <= n; ++k)
    for (int i = k; i <= m; ++i)
      for (int s = k - 1; s < i; ++s) {
        const double c = std::max(dp[k - 1][s], pos[i - 1] - pos[s]);
        if (c < dp[k][i]) {
          dp[k][i] = c;
          cut[k][i] = s;
        }
      }
  std::vector<int> bounds(n + 1);
  bounds[n] = m;
  for (int k = n; k > 0; --k) bounds[k - 1] = cut[k][bounds[k]];
  return bounds;
}

// Default initialization: targets are split into contiguous span-balanced
// slices, one per agent; each agent zig-zags through every target of its
// slice (up, then back through the interior) with a uniform starting dwell.
// Plain endpoint-to-endpoint sweeps strand the descent at poor kink minima
// because no switching point ever sits at an interior target; stopping at
// each target starts the search inside the right basin.
inline TrajectoryParams default_initial_params(const MissionConfig& cfg, int gamma = 0,
                                               double dwell0 = -1.0) {
  const int n = cfg.num_agents();
  TrajectoryParams p;
  p.theta.resize(n);
  p.omega.resize(n);
  const std::vector<int> bounds = partition_targets(cfg, n);
  for (int j = 0; j < n; ++j) {
    const int i0 = bounds[j], i1 = bounds[j + 1];  // slice [i0, i1)
    std::vector<double> pattern;
    for (int i = i0; i < i1; ++i) pattern.push_back(cfg.targets[i].position);
    for (int i = i1 - 2; i > i0; --i) pattern.push_back(cfg.targets[i].position);
    double w0 = dwell0;
    if (w0 < 0.0) {
      // Dwell on the order of half the mean gap inside the slice.
      const double span = pattern.empty() ? 0.0 : cfg.targets[i1 - 1].position - cfg.targets[i0].position;
      w0 = i1 - i0 > 1 ? std::max(0.5, 0.5 * span / (i1 - i0 - 1)) : cfg.horizon;
    }
    // Enough pattern entries to fill the horizon, unless gamma caps it.
    const int cap = gamma > 0 ? gamma : 200;
    double t = 0.0, pos = cfg.agents[j].start;
    for (int l = 0; l < cap; ++l) {
      const double th = pattern[l % pattern.size()];
      p.theta[j].push_back(th);
      p.omega[j].push_back(std::min(w0, cfg.horizon));
      t += std::abs(th - pos) + w0;
      pos = th;
      if (gamma <= 0 && t >= cfg.horizon) break;
    }
  }
  return p;
}

}  // namespace persim

#endif  // PERSIM_PARAMS_HPP_

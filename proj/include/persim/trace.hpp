#ifndef PERSIM_TRACE_HPP_
#define PERSIM_TRACE_HPP_

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "persim/params.hpp"
#include "persim/poly.hpp"

namespace persim {

enum class EventKind {
  Start,
  RHitsZero,
  RLeavesZero,
  ArriveSwitch,
  DwellEnd,
  HorizonEnd,
  RangeEnter,
  RangeExit,
  TargetCross,
  InflowResample,
};

inline const char* event_kind_name(EventKind k) {
  switch (k) {
    case EventKind::Start: return "start";
    case EventKind::RHitsZero: return "r-hits-zero";
    case EventKind::RLeavesZero: return "r-leaves-zero";
    case EventKind::ArriveSwitch: return "arrive-at-switch-point";
    case EventKind::DwellEnd: return "dwell-end";
    case EventKind::HorizonEnd: return "horizon-end";
    case EventKind::RangeEnter: return "range-enter";
    case EventKind::RangeExit: return "range-exit";
    case EventKind::TargetCross: return "target-cross";
    case EventKind::InflowResample: return "inflow-resample";
  }
  return "?";
}

struct Event {
  double t = 0.0;
  EventKind kind = EventKind::Start;
  int target = -1;  // when applicable
  int agent = -1;   // when applicable
  int phase = -1;   // parameter index for control events
};

// One interevent interval: controls are constant and every sensing term is
// affine in local time tau = t - t0, so the uncertainty rates are exact
// polynomials.
struct TraceInterval {
  double t0 = 0.0, t1 = 0.0;
  std::vector<double> s0;       // agent positions at t0
  std::vector<double> u;        // controls on the interval
  std::vector<double> R0;       // uncertainties at t0
  std::vector<Poly> rate;       // per target: Rdot(tau); zero poly when frozen
  std::vector<std::uint8_t> frozen;  // per target: pinned at R = 0
};

struct SimTrace {
  double horizon = 0.0;
  int num_agents = 0;
  int num_targets = 0;
  ControlProgram program;
  std::vector<double> target_pos;   // realized positions (jitter applied)
  std::vector<double> agent_range;  // r_j
  std::vector<TraceInterval> intervals;
  std::vector<Event> events;
  double cost_j1 = 0.0;  // (1/T) * integral of sum_i R_i
  bool no_cross_violation = false;

  std::size_t find_interval(double t) const {
    if (intervals.empty()) return 0;
    auto it = std::upper_bound(intervals.begin(), intervals.end(), t,
                               [](double v, const TraceInterval& iv) { return v < iv.t1; });
    if (it == intervals.end()) return intervals.size() - 1;
    return static_cast<std::size_t>(it - intervals.begin());
  }

  void state_at(double t, std::vector<double>& s, std::vector<double>& R,
                std::vector<double>& u_out) const {
    s.assign(num_agents, 0.0);
    R.assign(num_targets, 0.0);
    u_out.assign(num_agents, 0.0);
    if (intervals.empty()) return;
    const TraceInterval& iv = intervals[find_interval(t)];
    const double tau = std::clamp(t, iv.t0, iv.t1) - iv.t0;
    for (int j = 0; j < num_agents; ++j) {
      s[j] = iv.s0[j] + iv.u[j] * tau;
      u_out[j] = iv.u[j];
    }
    for (int i = 0; i < num_targets; ++i)
      R[i] = iv.frozen[i] ? 0.0 : std::max(0.0, iv.R0[i] + iv.rate[i].integral()(tau));
  }
};

}  // namespace persim

#endif  // PERSIM_TRACE_HPP_

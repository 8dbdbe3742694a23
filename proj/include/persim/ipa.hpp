#ifndef PERSIM_IPA_HPP_
#define PERSIM_IPA_HPP_

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

#include "persim/model.hpp"
#include "persim/params.hpp"
#include "persim/poly.hpp"
#include "persim/sim.hpp"
#include "persim/trace.hpp"

namespace persim {

// Derivative state carried along a trace: position sensitivities per agent
// (split into switching-point and dwell blocks) and uncertainty sensitivities
// per target against the full stacked parameter vector.
struct IpaState {
  std::vector<std::vector<double>> ds_theta;  // [agent][l]  ds_j/dtheta_l
  std::vector<std::vector<double>> ds_omega;  // [agent][l]  ds_j/domega_l
  std::vector<std::vector<double>> dR;        // [target][flat param]

  IpaState(const ParamLayout& layout, int num_targets) {
    for (std::size_t j = 0; j < layout.theta_len.size(); ++j) {
      ds_theta.emplace_back(layout.theta_len[j], 0.0);
      ds_omega.emplace_back(layout.omega_len[j], 0.0);
    }
    dR.assign(num_targets, std::vector<double>(layout.total, 0.0));
  }
};

enum class ControlSwitch {
  Case1,  // travel ends: agent stops at theta_xi
  Case2,  // dwell ends: travel toward theta_xi begins
  Case3,  // instantaneous reversal at theta_xi (zero dwell)
};

// Position-sensitivity jumps at control events. `dirs[l]` is the travel
// direction sgn(theta_l - theta_{l-1}) with theta_{-1} the start position
// (zero-length travels contribute sgn 0). R-derivatives are continuous
// across control events and are not touched here.
inline void apply_control_switch(IpaState& st, int agent, ControlSwitch kind, int xi,
                                 double u_new, const std::vector<double>& dirs) {
  auto& dth = st.ds_theta[agent];
  auto& dom = st.ds_omega[agent];
  switch (kind) {
    case ControlSwitch::Case1:
      for (double& v : dth) v = 0.0;
      for (double& v : dom) v = 0.0;
      dth[xi] = 1.0;
      return;
    case ControlSwitch::Case2:
      if (xi <= 0) throw std::invalid_argument("ipa: Case 2 needs a preceding switching point");
      dth[xi - 1] -= u_new * dirs[xi - 1];
      for (int l = 0; l + 1 < xi; ++l) dth[l] -= u_new * (dirs[l] - dirs[l + 1]);
      for (int l = 0; l < xi && l < static_cast<int>(dom.size()); ++l) dom[l] = -u_new;
      return;
    case ControlSwitch::Case3:
      for (int l = 0; l < xi; ++l) dth[l] = -dth[l];
      dth[xi] = 2.0;
      for (int l = 0; l <= xi && l < static_cast<int>(dom.size()); ++l) dom[l] = -u_new;
      return;
  }
  throw std::invalid_argument("ipa: unknown control transition");
}

// Uncertainty-sensitivity jump at an R-boundary event: reset to zero when
// R_i reaches the boundary, carried over unchanged when growth resumes.
inline void apply_uncertainty_switch(IpaState& st, int target, EventKind kind) {
  if (kind == EventKind::RHitsZero) {
    for (double& v : st.dR[target]) v = 0.0;
  } else if (kind != EventKind::RLeavesZero) {
    throw std::invalid_argument("ipa: not an R-boundary event");
  }
}

// Per-interval sensitivity data handed to an observer (used by the
// potential-field gradient). Inside the interval, for a parameter p of
// agent j:  dR_i/dp(tau) = dR0[i][p] + sum_j coeff[i][j] * ds_j/dp * phi[i][j](tau).
struct IntervalSensitivity {
  std::size_t index = 0;
  const TraceInterval* interval = nullptr;
  const std::vector<std::vector<double>>* ds = nullptr;   // [agent][flat param]
  const std::vector<std::vector<double>>* dR0 = nullptr;  // [target][flat param]
  std::vector<std::vector<double>> coeff;                 // [target][agent]
  std::vector<std::vector<Poly>> phi;                     // [target][agent]
};

using IpaObserver = std::function<void(const IntervalSensitivity&)>;

struct IpaResult {
  std::vector<double> grad;  // dJ1/d(theta, omega), stacked per ParamLayout
  double cost = 0.0;         // J1 of the trace
};

// Event-driven gradient of J1 along a recorded trace. Consumes only the
// drain rates B_i, sensing geometry, controls and event times — never the
// inflow rates A_i — so the result is invariant to the declared A_i.
inline IpaResult gradient_from_trace_only(const SimTrace& trace, const TrajectoryParams& params,
                                          const std::vector<double>& decay_rate,
                                          const IpaObserver& observer = nullptr) {
  const int N = trace.num_agents;
  const int M = trace.num_targets;
  const double T = trace.horizon;
  if (static_cast<int>(decay_rate.size()) != M)
    throw std::invalid_argument("ipa: one decay rate per target required");

  const ParamLayout layout(params);
  IpaState st(layout, M);
  IpaResult out;
  out.grad.assign(layout.total, 0.0);
  out.cost = trace.cost_j1;
  if (T <= 0.0 || trace.intervals.empty()) return out;

  // Travel directions per agent from the parameters themselves.
  std::vector<std::vector<double>> dirs(N);
  for (int j = 0; j < N; ++j) {
    double prev = trace.program.agents[j].front().s0;
    for (double th : params.theta[j]) {
      dirs[j].push_back(th > prev ? 1.0 : (th < prev ? -1.0 : 0.0));
      prev = th;
    }
  }

  // Position sensitivities as dense flat vectors, refreshed per phase change.
  std::vector<std::vector<double>> ds_flat(N, std::vector<double>(layout.total, 0.0));
  auto refresh_flat = [&](int j) {
    auto& v = ds_flat[j];
    std::fill(v.begin(), v.end(), 0.0);
    for (std::size_t l = 0; l < st.ds_theta[j].size(); ++l)
      v[layout.theta_offset[j] + l] = st.ds_theta[j][l];
    for (std::size_t l = 0; l < st.ds_omega[j].size(); ++l)
      v[layout.omega_offset[j] + l] = st.ds_omega[j][l];
  };

  std::vector<std::size_t> cursor(N, 0);
  std::size_t next_event = 0;
  const double tiny = 1e-12 * (T + 1.0);

  IntervalSensitivity sens;
  if (observer) {
    sens.ds = &ds_flat;
    sens.dR0 = &st.dR;
    sens.coeff.assign(M, std::vector<double>(N, 0.0));
    sens.phi.assign(M, std::vector<Poly>(N));
  }

  for (std::size_t k = 0; k < trace.intervals.size(); ++k) {
    const TraceInterval& iv = trace.intervals[k];
    const double tmid = 0.5 * (iv.t0 + iv.t1);

    // Control transitions up to this interval.
    for (int j = 0; j < N; ++j) {
      const auto& phases = trace.program.agents[j];
      bool changed = false;
      while (cursor[j] + 1 < phases.size() && phases[cursor[j]].t1 <= tmid) {
        const Phase& done = phases[cursor[j]];
        const Phase& next = phases[cursor[j] + 1];
        if (done.kind == Phase::Kind::Travel)
          apply_control_switch(st, j, ControlSwitch::Case1, done.index, 0.0, dirs[j]);
        if (next.kind == Phase::Kind::Travel && next.index > 0)
          apply_control_switch(st, j, ControlSwitch::Case2, next.index, next.u, dirs[j]);
        ++cursor[j];
        changed = true;
      }
      if (changed) refresh_flat(j);
    }

    // R-boundary resets at or before the interval start.
    while (next_event < trace.events.size() && trace.events[next_event].t <= iv.t0 + tiny) {
      const Event& e = trace.events[next_event++];
      if (e.kind == EventKind::RHitsZero || e.kind == EventKind::RLeavesZero)
        apply_uncertainty_switch(st, e.target, e.kind);
    }

    // Accumulate the interval's gradient contribution first; the dR state
    // update is deferred so an observer sees dR at the interval start.
    const double dt = iv.t1 - iv.t0;
    struct Pending {
      int target, agent;
      double coeff, phi_dt;
    };
    std::vector<Pending> pending;
    std::vector<SenseAffine> sense(N);
    for (int i = 0; i < M; ++i) {
      if (observer)
        for (int j = 0; j < N; ++j) {
          sens.coeff[i][j] = 0.0;
          sens.phi[i][j] = Poly();
        }
      if (iv.frozen[i]) continue;

      const auto& dRi = st.dR[i];
      for (std::size_t p = 0; p < layout.total; ++p) out.grad[p] += dRi[p] * dt;

      for (int j = 0; j < N; ++j)
        sense[j] = sensing_affine(trace.target_pos[i], iv.s0[j], iv.u[j], trace.agent_range[j], dt);
      for (int j = 0; j < N; ++j) {
        if (!sense[j].inside || sense[j].dpds == 0.0) continue;
        const double coeff = -decay_rate[i] * sense[j].dpds;
        const Poly phi = detail::miss_poly(sense, j).integral();
        const double phi_dt = phi(dt);
        const double psi_dt = phi.integral()(dt);
        const std::size_t lo = layout.theta_offset[j];
        const std::size_t hi = layout.omega_offset[j] + layout.omega_len[j];
        for (std::size_t p = lo; p < hi; ++p) out.grad[p] += coeff * ds_flat[j][p] * psi_dt;
        pending.push_back({i, j, coeff, phi_dt});
        if (observer) {
          sens.coeff[i][j] = coeff;
          sens.phi[i][j] = phi;
        }
      }
    }

    if (observer) {
      sens.index = k;
      sens.interval = &iv;
      observer(sens);
    }

    for (const Pending& pd : pending) {
      auto& dRi = st.dR[pd.target];
      const std::size_t lo = layout.theta_offset[pd.agent];
      const std::size_t hi = layout.omega_offset[pd.agent] + layout.omega_len[pd.agent];
      for (std::size_t p = lo; p < hi; ++p) dRi[p] += pd.coeff * ds_flat[pd.agent][p] * pd.phi_dt;
    }
  }

  for (double& g : out.grad) g /= T;
  return out;
}

inline IpaResult accumulate_gradient(const SimTrace& trace, const TrajectoryParams& params,
                                     const MissionConfig& cfg,
                                     const IpaObserver& observer = nullptr) {
  std::vector<double> B(cfg.targets.size());
  for (std::size_t i = 0; i < B.size(); ++i) B[i] = cfg.targets[i].decay_rate;
  return gradient_from_trace_only(trace, params, B, observer);
}

}  // namespace persim

#endif  // PERSIM_IPA_HPP_

#ifndef PERSIM_SIM_HPP_
#define PERSIM_SIM_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "persim/model.hpp"
#include "persim/params.hpp"
#include "persim/poly.hpp"
#include "persim/rng.hpp"
#include "persim/trace.hpp"

namespace persim {

struct SimOptions {
  // Event localization tolerance, relative to T. Kept near machine precision
  // so finite-difference probes of the cost stay clean at steps of 1e-5.
  double tol_event_rel = 1e-12;
  double grid_rel = 1e-3;       // dense output step, relative to T
  std::uint64_t jitter_realization = 0;  // realization index for position jitter
};

struct EventLocation {
  bool found = false;
  double t = 0.0;
  bool touch = false;  // zero touched without a sign change
};

// Bisection root localization of a continuous scalar on [lo, hi].
// Falls back to an interior scan when the endpoints do not bracket; a zero
// without sign change is reported as a touch event.
inline EventLocation locate_event(double lo, double hi,
                                  const std::function<double(double)>& g, double tol) {
  double glo = g(lo), ghi = g(hi);
  if (glo == 0.0) return {true, lo, glo * ghi >= 0.0};
  double a = lo, b = hi, ga = glo;
  if (glo * ghi > 0.0) {
    const int ns = 64;
    bool bracketed = false;
    double prev_t = lo, prev_g = glo;
    for (int k = 1; k <= ns; ++k) {
      double t = lo + (hi - lo) * k / ns;
      double gt = g(t);
      if (gt == 0.0) return {true, t, true};
      if (prev_g * gt < 0.0) {
        a = prev_t;
        ga = prev_g;
        b = t;
        bracketed = true;
        break;
      }
      prev_t = t;
      prev_g = gt;
    }
    if (!bracketed) return {};
  } else if (ghi == 0.0) {
    return {true, hi, false};
  }
  while (b - a > tol) {
    double m = 0.5 * (a + b);
    double gm = g(m);
    if (gm == 0.0) return {true, m, false};
    if (ga * gm < 0.0) {
      b = m;
    } else {
      a = m;
      ga = gm;
    }
  }
  return {true, 0.5 * (a + b), false};
}

// Affine form of one sensing factor on a kink-free span [0, dt]:
// p(tau) = p0 + p1 * tau while the agent stays inside range, identically
// zero otherwise. dpds is dp/ds on the span (+-1/r, or 0 at the peak).
struct SenseAffine {
  bool inside = false;
  double p0 = 0.0, p1 = 0.0, dpds = 0.0;
};

inline SenseAffine sensing_affine(double x, double s0, double u, double r, double dt) {
  SenseAffine out;
  const double mid = s0 + 0.5 * u * dt - x;
  if (1.0 - std::abs(mid) / r <= 0.0) return out;
  const double side = mid > 0.0 ? 1.0 : (mid < 0.0 ? -1.0 : 0.0);
  out.inside = true;
  out.p0 = 1.0 - side * (s0 - x) / r;
  out.p1 = -side * u / r;
  out.dpds = -side / r;
  return out;
}

namespace detail {

// Joint miss probability prod_j (1 - p_ij) as a polynomial in tau, with the
// factor for agent `skip` left out (skip = -1 keeps all factors).
inline Poly miss_poly(const std::vector<SenseAffine>& sense, int skip) {
  Poly m = Poly::constant(1.0);
  for (std::size_t j = 0; j < sense.size(); ++j) {
    if (static_cast<int>(j) == skip || !sense[j].inside) continue;
    m = m * Poly::affine(1.0 - sense[j].p0, -sense[j].p1);
  }
  return m;
}

// First root of `poly` in (0, dt] where the sign changes in the requested
// direction (want_down: + -> <=0, else <=0 -> +), localized by bisection.
inline bool first_crossing(const Poly& poly, double dt, double tol, bool want_down, double* t_out) {
  const int ns = std::max(8, 4 * (static_cast<int>(poly.degree()) + 1));
  double prev_t = 0.0, prev_v = poly(0.0);
  for (int k = 1; k <= ns; ++k) {
    const double t = dt * k / ns;
    const double v = poly(t);
    const bool crossed = want_down ? (prev_v > 0.0 && v <= 0.0) : (prev_v <= 0.0 && v > 0.0);
    if (crossed) {
      auto loc = locate_event(prev_t, t, [&](double x) { return poly(x); }, tol);
      *t_out = loc.found ? loc.t : t;
      return true;
    }
    prev_t = t;
    prev_v = v;
  }
  return false;
}

}  // namespace detail

// Integrates the hybrid dynamics exactly between events. Controls are
// constant per phase and sensing terms are affine on kink-free spans, so the
// uncertainty rates are polynomials integrated in closed form; only the
// R-boundary events need bisection.
inline SimTrace simulate(const ControlProgram& program, const MissionConfig& cfg,
                         const RandomModel& random = {}, const SimOptions& opt = {}) {
  const double T = cfg.horizon;
  const int N = cfg.num_agents();
  const int M = cfg.num_targets();
  const double tol = opt.tol_event_rel * std::max(T, 1.0);

  SimTrace trace;
  trace.horizon = T;
  trace.num_agents = N;
  trace.num_targets = M;
  trace.program = program;
  trace.agent_range.resize(N);
  for (int j = 0; j < N; ++j) trace.agent_range[j] = cfg.agents[j].range;
  if (random.mode == RandomModel::Mode::PositionJitter && random.jitter > 0.0) {
    trace.target_pos = sample_positions(cfg, random, opt.jitter_realization);
  } else {
    trace.target_pos.resize(M);
    for (int i = 0; i < M; ++i) trace.target_pos[i] = cfg.targets[i].position;
  }
  trace.events.push_back({0.0, EventKind::Start, -1, -1, -1});
  if (T <= 0.0) return trace;

  const bool inflow = random.mode == RandomModel::Mode::InflowUniform;

  std::vector<double> R(M);
  std::vector<std::uint8_t> frozen(M, 0);
  for (int i = 0; i < M; ++i) R[i] = cfg.targets[i].initial_uncertainty;

  std::vector<std::size_t> phase_idx(N, 0);
  double t = 0.0;
  double cost = 0.0;

  struct Mark {
    double t;
    EventKind kind;
    int target, agent;
  };
  std::vector<Mark> marks;

  long guard = 0;
  while (t < T - 1e-15 * std::max(T, 1.0)) {
    if (++guard > 50'000'000) throw std::runtime_error("simulate: event loop did not terminate");

    // Advance past completed phases, emitting control events at t.
    for (int j = 0; j < N; ++j) {
      auto& phases = program.agents[j];
      while (phase_idx[j] + 1 < phases.size() && phases[phase_idx[j]].t1 <= t + 0.5 * tol) {
        const Phase& ph = phases[phase_idx[j]];
        if (ph.t1 < T) {
          if (ph.kind == Phase::Kind::Travel)
            trace.events.push_back({ph.t1, EventKind::ArriveSwitch, -1, j, ph.index});
          else if (ph.kind == Phase::Kind::Dwell)
            trace.events.push_back({ph.t1, EventKind::DwellEnd, -1, j, ph.index});
        }
        ++phase_idx[j];
      }
    }

    // Current agent states and the next control boundary.
    std::vector<double> s(N), u(N);
    double next_control = T;
    for (int j = 0; j < N; ++j) {
      const Phase& ph = program.agents[j][phase_idx[j]];
      s[j] = ph.s0 + ph.u * (t - ph.t0);
      u[j] = ph.u;
      if (ph.t1 > t) next_control = std::min(next_control, ph.t1);
    }

    // Kink-free span: control boundaries, sensing kinks, inflow resamples.
    double span_end = next_control;
    marks.clear();
    for (int j = 0; j < N; ++j) {
      if (u[j] == 0.0) continue;
      for (int i = 0; i < M; ++i) {
        const double x = trace.target_pos[i];
        const double r = cfg.agents[j].range;
        const double d0 = std::abs(s[j] - x);
        for (double mark : {x - r, x, x + r}) {
          const double tau = (mark - s[j]) / u[j];
          const double tc = t + tau;
          if (tau > tol && tc < span_end + tol) {
            EventKind kind = EventKind::TargetCross;
            if (mark != x) kind = d0 > r ? EventKind::RangeEnter : EventKind::RangeExit;
            if (tc < span_end - tol) {
              span_end = tc;
              marks.clear();
            }
            if (std::abs(tc - span_end) <= tol) marks.push_back({tc, kind, i, j});
          }
        }
      }
    }
    if (inflow) {
      const double k = std::floor(t / random.resample_dt + 1e-12);
      const double tr = (k + 1.0) * random.resample_dt;
      if (tr > t + tol && tr < span_end - tol) {
        span_end = tr;
        marks.clear();
        marks.push_back({tr, EventKind::InflowResample, -1, -1});
      } else if (tr > t + tol && tr <= span_end + tol && std::abs(tr - span_end) <= tol) {
        marks.push_back({tr, EventKind::InflowResample, -1, -1});
      }
    }
    span_end = std::min(span_end, T);
    const double dt = span_end - t;

    // Per-target rate polynomials on the span.
    std::vector<std::vector<SenseAffine>> sense(M, std::vector<SenseAffine>(N));
    std::vector<Poly> rate(M);
    for (int i = 0; i < M; ++i) {
      const double A = inflow
          ? sample_inflow(random, i, t + 0.5 * std::min(dt, random.resample_dt))
          : cfg.targets[i].growth_rate;
      for (int j = 0; j < N; ++j)
        sense[i][j] = sensing_affine(trace.target_pos[i], s[j], u[j], cfg.agents[j].range, dt);
      Poly P = Poly::constant(1.0) - detail::miss_poly(sense[i], -1);
      rate[i] = Poly::constant(A) - P * cfg.targets[i].decay_rate;
    }

    // Unfreeze targets whose inflow now beats the drain.
    for (int i = 0; i < M; ++i) {
      if (frozen[i] && rate[i](0.0) > 0.0) {
        frozen[i] = 0;
        R[i] = 0.0;
        trace.events.push_back({t, EventKind::RLeavesZero, i, -1, -1});
      }
    }

    // Earliest endogenous R event inside the span.
    double t_event = span_end;
    int event_target = -1;
    EventKind event_kind = EventKind::RHitsZero;
    if (dt > 0.0) {
      for (int i = 0; i < M; ++i) {
        double te;
        if (frozen[i]) {
          if (detail::first_crossing(rate[i], dt, tol, /*want_down=*/false, &te) && t + te < t_event) {
            t_event = t + te;
            event_target = i;
            event_kind = EventKind::RLeavesZero;
          }
        } else {
          Poly Rpoly = rate[i].integral();
          Rpoly += Poly::constant(R[i]);
          if (detail::first_crossing(Rpoly, dt, tol, /*want_down=*/true, &te) && t + te < t_event) {
            t_event = t + te;
            event_target = i;
            event_kind = EventKind::RHitsZero;
          }
        }
      }
    }

    const double t1 = event_target >= 0 ? t_event : span_end;
    const double span = t1 - t;

    if (span > 0.0) {
      TraceInterval iv;
      iv.t0 = t;
      iv.t1 = t1;
      iv.s0 = s;
      iv.u = u;
      iv.R0 = R;
      iv.frozen = frozen;
      iv.rate.resize(M);
      for (int i = 0; i < M; ++i) iv.rate[i] = frozen[i] ? Poly() : rate[i];
      for (int i = 0; i < M; ++i) {
        if (frozen[i]) continue;
        const Poly Ri = iv.rate[i].integral();
        cost += R[i] * span + Ri.integral()(span);
        R[i] = std::max(0.0, R[i] + Ri(span));
      }
      trace.intervals.push_back(std::move(iv));
    }
    t = t1;

    if (event_target >= 0) {
      trace.events.push_back({t, event_kind, event_target, -1, -1});
      if (event_kind == EventKind::RHitsZero) {
        R[event_target] = 0.0;
        frozen[event_target] = rate[event_target](span) <= 0.0 ? 1 : 0;
      } else {
        frozen[event_target] = 0;
      }
      continue;
    }

    for (const Mark& m : marks)
      if (m.t < T) trace.events.push_back({t, m.kind, m.target, m.agent, -1});
  }

  trace.events.push_back({T, EventKind::HorizonEnd, -1, -1, -1});
  trace.cost_j1 = cost / T;

  // No-cross diagnostic: positions are piecewise linear, so checking the
  // interval endpoints is exact.
  if (cfg.no_cross) {
    for (const auto& iv : trace.intervals) {
      const double span = iv.t1 - iv.t0;
      for (int j = 0; j + 1 < N; ++j) {
        if (iv.s0[j] > iv.s0[j + 1] + 1e-12 ||
            iv.s0[j] + iv.u[j] * span > iv.s0[j + 1] + iv.u[j + 1] * span + 1e-12)
          trace.no_cross_violation = true;
      }
    }
  }
  return trace;
}

inline SimTrace simulate(const TrajectoryParams& params, const MissionConfig& cfg,
                         const RandomModel& random = {}, const SimOptions& opt = {}) {
  return simulate(compile_program(params, cfg), cfg, random, opt);
}

}  // namespace persim

#endif  // PERSIM_SIM_HPP_

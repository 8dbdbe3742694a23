#ifndef PERSIM_SCHEDULER_HPP_
#define PERSIM_SCHEDULER_HPP_

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "persim/model.hpp"
#include "persim/params.hpp"
#include "persim/sim.hpp"

namespace persim {

// Discrete solver: enumerate target-visit sequences that fit the horizon,
// optimize the dwell time of every visit by nested scalar searches, and keep
// the cheapest schedule. The continuous cost engine is the single source of
// truth, so early/late sensing while traveling through a target's range is
// priced exactly.

struct SchedulerOptions {
  int max_steps = 0;                 // 0: ceil(horizon / min target gap) + 1
  std::size_t joint_cap = 1000000;   // abort above this many joint candidates
  int shortlist = 200;               // candidates kept for dwell refinement
  double golden_tol_rel = 1e-4;      // stage tolerance as a fraction of the horizon
  int sweeps = 4;                    // backward coordinate-descent passes
  double periodic_tol = 0.5;         // endpoint gap allowed by the periodicity test
  bool require_periodic = false;     // prefer schedules that tile (see extend_periodic)
  double extend_to = 0.0;            // >window: rank repeatable schedules by tiled cost
  int threads = 0;                   // 0: hardware concurrency

  void validate() const {
    if (joint_cap < 1) throw std::invalid_argument("scheduler: cap must be >= 1");
    if (shortlist < 1) throw std::invalid_argument("scheduler: shortlist must be >= 1");
    if (!(golden_tol_rel > 0)) throw std::invalid_argument("scheduler: tolerance must be > 0");
    if (sweeps < 1) throw std::invalid_argument("scheduler: sweeps must be >= 1");
    if (!(periodic_tol > 0)) throw std::invalid_argument("scheduler: periodic_tol must be > 0");
  }
};

// A trajectory abstracted as per-agent visit sequences with derived timing.
// Invariants: travel[j][k] is the distance from the previous anchor, all
// dwells are >= 0, and sum_k (travel + dwell) <= window per agent.
struct VisitSchedule {
  std::vector<std::vector<int>> sequence;   // [agent][step], 0-based target ids
  std::vector<std::vector<double>> arrive;  // switching times
  std::vector<std::vector<double>> travel;
  std::vector<std::vector<double>> dwell;
  double cost = 0.0;
  double window = 0.0;  // horizon the schedule covers
};

// A schedule tiles cleanly when every agent finishes its window next to the
// first target it visited, so a repetition only inserts a short relocation.
inline bool is_periodic(const VisitSchedule& s, const MissionConfig& cfg, double tol = 0.5) {
  for (const auto& seq : s.sequence) {
    if (seq.empty()) return false;
    if (std::abs(cfg.targets[seq.front()].position - cfg.targets[seq.back()].position) > tol)
      return false;
  }
  return true;
}

inline int default_max_steps(const MissionConfig& cfg, double horizon) {
  double gap = cfg.min_target_gap();
  if (!std::isfinite(gap) || gap <= 0) gap = cfg.length;
  return static_cast<int>(std::ceil(horizon / gap)) + 1;
}

// Control parameters induced by a joint sequence and dwell assignment.
inline TrajectoryParams schedule_params(const std::vector<std::vector<int>>& seq,
                                        const std::vector<std::vector<double>>& dwell,
                                        const MissionConfig& cfg) {
  TrajectoryParams p;
  p.theta.resize(seq.size());
  p.omega.resize(seq.size());
  for (std::size_t j = 0; j < seq.size(); ++j) {
    for (std::size_t k = 0; k < seq[j].size(); ++k) {
      p.theta[j].push_back(cfg.targets[seq[j][k]].position);
      p.omega[j].push_back(k < dwell[j].size() ? dwell[j][k] : 0.0);
    }
  }
  return p;
}

namespace detail {

// Depth-first enumeration of visit sequences over `cell`, pruned to those
// whose travel-only completion time fits the budget. Immediate repeats are
// redundant (they equal one longer dwell) and are skipped.
inline void dfs_visits(const MissionConfig& cfg, const std::vector<int>& cell, double pos,
                       double budget, int steps_left, std::size_t cap, std::vector<int>& cur,
                       std::vector<std::vector<int>>& out) {
  for (int i : cell) {
    if (!cur.empty() && cur.back() == i) continue;
    const double hop = std::abs(cfg.targets[i].position - pos);
    if (hop > budget + 1e-9) continue;
    if (out.size() >= cap)
      throw std::runtime_error("scheduler: enumeration exceeded the cap of " +
                               std::to_string(cap) +
                               " candidates (estimate: at least that many); shorten the "
                               "window or lower max_steps");
    cur.push_back(i);
    out.push_back(cur);
    if (steps_left > 1)
      dfs_visits(cfg, cell, cfg.targets[i].position, budget - hop, steps_left - 1, cap, cur, out);
    cur.pop_back();
  }
}

template <class F>
inline void parallel_for_n(std::size_t count, int threads, F&& body) {
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = static_cast<int>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < count;) body(i);
    });
  for (auto& th : pool) th.join();
}

// Scalar minimization on [lo, hi]: a 5-point bracketing scan guards against
// non-unimodal stages, then golden-section refines around the scan winner.
// Endpoint values stay in play because boundary optima (dwell to the end of
// the horizon) are common.
template <class F>
inline std::pair<double, double> line_min(F&& f, double lo, double hi, double tol) {
  if (hi - lo <= tol) {
    const double m = 0.5 * (lo + hi);
    return {m, f(m)};
  }
  double pts[5], vals[5];
  int qmin = 0;
  for (int q = 0; q < 5; ++q) {
    pts[q] = lo + (hi - lo) * q / 4.0;
    vals[q] = f(pts[q]);
    if (vals[q] < vals[qmin]) qmin = q;
  }
  double a = pts[std::max(0, qmin - 1)], b = pts[std::min(4, qmin + 1)];
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = f(x2);
    }
  }
  const double xm = 0.5 * (a + b), fm = f(xm);
  if (vals[qmin] < fm) return {pts[qmin], vals[qmin]};
  return {xm, fm};
}

inline std::vector<std::vector<double>> travel_legs(const std::vector<std::vector<int>>& seq,
                                                    const MissionConfig& cfg) {
  std::vector<std::vector<double>> legs(seq.size());
  for (std::size_t j = 0; j < seq.size(); ++j) {
    double pos = cfg.agents[j].start;
    for (int i : seq[j]) {
      legs[j].push_back(std::abs(cfg.targets[i].position - pos));
      pos = cfg.targets[i].position;
    }
  }
  return legs;
}

}  // namespace detail

// All per-agent visit sequences whose travel-only completion time fits the
// horizon, in depth-first order. Throws once any agent's count passes `cap`.
inline std::vector<std::vector<std::vector<int>>> enumerate_sequences(
    const MissionConfig& cfg, double horizon, int max_steps = 0, std::size_t cap = 1000000) {
  cfg.validate();
  if (!(horizon > 0)) throw std::invalid_argument("scheduler: horizon must be > 0");
  if (max_steps <= 0) max_steps = default_max_steps(cfg, horizon);
  std::vector<int> all(cfg.num_targets());
  std::iota(all.begin(), all.end(), 0);
  std::vector<std::vector<std::vector<int>>> per_agent;
  for (const auto& ag : cfg.agents) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur;
    detail::dfs_visits(cfg, all, ag.start, horizon, max_steps, cap, cur, out);
    per_agent.push_back(std::move(out));
  }
  return per_agent;
}

namespace detail {

// Backward coordinate descent over all dwell stages: one scalar search per
// stage, each bounded by the agent's remaining window budget. `eval` prices
// the current dwell assignment; it is called with `dwell` already mutated.
template <class F>
inline double descend_dwells(const std::vector<std::vector<int>>& seq,
                             const std::vector<double>& travel_total, double budget,
                             const SchedulerOptions& opt, F&& eval,
                             std::vector<std::vector<double>>& dwell) {
  double best = eval();
  const double tol = opt.golden_tol_rel * budget;
  for (int sweep = 0; sweep < opt.sweeps; ++sweep) {
    const double before = best;
    for (std::size_t j = 0; j < seq.size(); ++j) {
      for (std::size_t k = seq[j].size(); k-- > 0;) {
        double used = travel_total[j];
        for (std::size_t q = 0; q < dwell[j].size(); ++q)
          if (q != k) used += dwell[j][q];
        const double hi = std::max(0.0, budget - used);
        auto [d, c] = line_min(
            [&](double x) {
              dwell[j][k] = x;
              return eval();
            },
            0.0, hi, tol);
        dwell[j][k] = d;
        best = c;
      }
    }
    if (before - best <= 1e-9 * std::max(1.0, std::abs(before))) break;
  }
  return best;
}

inline VisitSchedule assemble_schedule(const std::vector<std::vector<int>>& seq,
                                       std::vector<std::vector<double>> dwell,
                                       std::vector<std::vector<double>> legs, double cost,
                                       double window) {
  VisitSchedule out;
  out.sequence = seq;
  out.dwell = std::move(dwell);
  out.travel = std::move(legs);
  out.arrive.resize(seq.size());
  for (std::size_t j = 0; j < seq.size(); ++j) {
    double t = 0.0;
    for (std::size_t k = 0; k < seq[j].size(); ++k) {
      t += out.travel[j][k];
      out.arrive[j].push_back(t);
      t += out.dwell[j][k];
    }
  }
  out.cost = cost;
  out.window = window;
  return out;
}

}  // namespace detail

// Optimizes the dwell times of a fixed joint sequence: backward passes of
// golden-section searches, one scalar stage per visit, each stage bounded by
// the agent's remaining time budget. Cost comes from the hybrid simulator on
// the induced control program.
inline VisitSchedule optimize_dwells(const std::vector<std::vector<int>>& seq,
                                     const MissionConfig& cfg, double horizon,
                                     const SchedulerOptions& opt = {}) {
  opt.validate();
  const std::size_t n = cfg.agents.size();
  if (seq.size() != n) throw std::invalid_argument("scheduler: one sequence per agent required");
  for (const auto& s : seq)
    if (s.empty()) throw std::invalid_argument("scheduler: empty visit sequence");
  MissionConfig cfgw = cfg;
  cfgw.horizon = horizon;
  cfgw.validate();

  auto legs = detail::travel_legs(seq, cfg);
  std::vector<double> travel_total(n, 0.0);
  std::vector<std::vector<double>> dwell(n);
  for (std::size_t j = 0; j < n; ++j) {
    for (double leg : legs[j]) travel_total[j] += leg;
    if (travel_total[j] > horizon + 1e-9)
      throw std::invalid_argument("scheduler: sequence does not fit the horizon");
    dwell[j].assign(seq[j].size(), (horizon - travel_total[j]) / double(seq[j].size()));
  }

  auto cost_of = [&] { return simulate(schedule_params(seq, dwell, cfg), cfgw).cost_j1; };
  double best = detail::descend_dwells(seq, travel_total, horizon, opt, cost_of, dwell);
  // Parking at the last anchor (idle tail) and dwelling there cost the same,
  // so absorb any leftover slack into the final dwell when that is free.
  for (std::size_t j = 0; j < n; ++j) {
    double slack = horizon - travel_total[j];
    for (double d : dwell[j]) slack -= d;
    if (slack <= 0.0) continue;
    const double saved = dwell[j].back();
    dwell[j].back() += slack;
    const double c = cost_of();
    if (c <= best + 1e-9 * std::max(1.0, std::abs(best)))
      best = std::min(best, c);
    else
      dwell[j].back() = saved;
  }
  return detail::assemble_schedule(seq, std::move(dwell), std::move(legs), best, horizon);
}

namespace detail {

using JointSequence = std::vector<std::vector<int>>;

// Cartesian product of per-agent candidate lists. With no_cross set, agent j
// is restricted to targets left of agent j+1's rightmost assigned target.
inline void joint_product(const MissionConfig& cfg,
                          const std::vector<std::vector<std::vector<int>>>& per_agent,
                          std::size_t cap, std::vector<JointSequence>& out) {
  const std::size_t n = per_agent.size();
  for (const auto& lst : per_agent)
    if (lst.empty()) return;
  auto max_pos = [&](const std::vector<int>& s) {
    double mp = -1e300;
    for (int i : s) mp = std::max(mp, cfg.targets[i].position);
    return mp;
  };
  std::vector<std::size_t> idx(n, 0);
  for (;;) {
    bool ok = true;
    if (cfg.no_cross)
      for (std::size_t j = 0; j + 1 < n && ok; ++j)
        ok = max_pos(per_agent[j][idx[j]]) <= max_pos(per_agent[j + 1][idx[j + 1]]);
    if (ok) {
      if (out.size() >= cap)
        throw std::runtime_error("scheduler: joint enumeration exceeded the cap of " +
                                 std::to_string(cap) + "; shorten the window");
      JointSequence js;
      js.reserve(n);
      for (std::size_t j = 0; j < n; ++j) js.push_back(per_agent[j][idx[j]]);
      out.push_back(std::move(js));
    }
    std::size_t j = 0;
    while (j < n && ++idx[j] == per_agent[j].size()) idx[j++] = 0;
    if (j == n) break;
  }
}

// Fallback when the unrestricted joint product explodes: split the ordered
// targets into contiguous cells, one per agent (agents taken in start order),
// and only enumerate sequences that cover their whole cell. Loses candidates
// that share targets across agents, but keeps the search exhaustive within
// each partition.
inline std::vector<JointSequence> partitioned_joints(const MissionConfig& cfg, double horizon,
                                                     int max_steps, std::size_t cap) {
  const int n = cfg.num_agents();
  const int m = cfg.num_targets();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return cfg.agents[a].start < cfg.agents[b].start; });

  std::vector<JointSequence> joints;
  std::vector<int> cuts;  // interior cell boundaries, ascending
  std::function<void(int)> rec = [&](int next_cut) {
    if (static_cast<int>(cuts.size()) == n - 1) {
      std::vector<std::vector<std::vector<int>>> per_agent(n);
      bool viable = true;
      for (int q = 0; q < n && viable; ++q) {
        const int lo = q == 0 ? 0 : cuts[q - 1];
        const int hi = q == n - 1 ? m : cuts[q];
        std::vector<int> cell;
        for (int i = lo; i < hi; ++i) cell.push_back(i);
        std::vector<std::vector<int>> raw, covering;
        std::vector<int> cur;
        dfs_visits(cfg, cell, cfg.agents[order[q]].start, horizon, max_steps, cap, cur, raw);
        for (auto& s : raw) {
          std::vector<bool> seen(m, false);
          int distinct = 0;
          for (int i : s)
            if (!seen[i]) {
              seen[i] = true;
              ++distinct;
            }
          if (distinct == hi - lo) covering.push_back(std::move(s));
        }
        if (covering.empty()) viable = false;
        per_agent[order[q]] = std::move(covering);
      }
      if (viable) joint_product(cfg, per_agent, cap, joints);
      return;
    }
    for (int c = next_cut; c <= m - (n - 1 - static_cast<int>(cuts.size())); ++c) {
      cuts.push_back(c);
      rec(c + 1);
      cuts.pop_back();
    }
  };
  rec(1);
  return joints;
}

}  // namespace detail

// Tiles a window schedule across a longer horizon. Requires each agent to
// finish its window next to the first target it visited, so the repetition
// only inserts a short (<= tol) relocation leg; the full-horizon cost is
// re-simulated, never assumed periodic in the uncertainty state.
inline VisitSchedule extend_periodic(const VisitSchedule& win, const MissionConfig& cfg,
                                     double horizon, double tol = 0.5) {
  if (!(horizon >= win.window)) throw std::invalid_argument("scheduler: horizon shorter than the window");
  if (win.sequence.empty()) throw std::invalid_argument("scheduler: empty schedule");
  for (std::size_t j = 0; j < win.sequence.size(); ++j) {
    const auto& s = win.sequence[j];
    if (s.empty()) throw std::invalid_argument("scheduler: empty visit sequence");
    const double first = cfg.targets[s.front()].position;
    const double last = cfg.targets[s.back()].position;
    if (std::abs(first - last) > tol) {
      std::ostringstream msg;
      msg << "scheduler: schedule is not periodic; agent " << j << " ends at " << last
          << " but its cycle starts at " << first << " (gap > " << tol << ")";
      throw std::runtime_error(msg.str());
    }
  }

  VisitSchedule out;
  const std::size_t n = win.sequence.size();
  out.sequence.resize(n);
  out.arrive.resize(n);
  out.travel.resize(n);
  out.dwell.resize(n);
  out.window = horizon;
  for (std::size_t j = 0; j < n; ++j) {
    // Repeat the window's visit cycle until the horizon is covered. Window
    // schedules often finish their visits early (idle tail slack), so tiling
    // goes by accumulated schedule time, not by window count.
    double t = 0.0, pos = cfg.agents[j].start;
    while (t < horizon) {
      const double t_cycle = t;
      for (std::size_t k = 0; k < win.sequence[j].size() && t < horizon; ++k) {
        const int i = win.sequence[j][k];
        const double hop = std::abs(cfg.targets[i].position - pos);
        if (t + hop >= horizon) {
          t = horizon;
          break;
        }
        const double d = std::min(win.dwell[j][k], horizon - (t + hop));
        out.sequence[j].push_back(i);
        out.travel[j].push_back(hop);
        out.arrive[j].push_back(t + hop);
        out.dwell[j].push_back(d);
        t += hop + d;
        pos = cfg.targets[i].position;
      }
      if (t <= t_cycle + 1e-12) {  // zero-duration cycle: park for the rest
        if (!out.dwell[j].empty()) out.dwell[j].back() += horizon - t;
        break;
      }
    }
  }
  MissionConfig cfgw = cfg;
  cfgw.horizon = horizon;
  out.cost = simulate(schedule_params(out.sequence, out.dwell, cfg), cfgw).cost_j1;
  return out;
}

// Exhaustive search over the enumerated joint sequences: every candidate is
// screened with a uniform dwell split, the best `shortlist` candidates get
// full dwell optimization, and the cheapest schedule wins. Deterministic
// regardless of thread count.
inline VisitSchedule solve(const MissionConfig& cfg, double horizon,
                           const SchedulerOptions& opt = {}) {
  opt.validate();
  const std::size_t n = cfg.agents.size();
  const int max_steps = opt.max_steps > 0 ? opt.max_steps : default_max_steps(cfg, horizon);

  std::vector<detail::JointSequence> joints;
  try {
    auto per_agent = enumerate_sequences(cfg, horizon, max_steps, opt.joint_cap);
    double prod = 1.0;
    for (const auto& lst : per_agent) prod *= double(lst.size());
    if (prod > double(opt.joint_cap))
      throw std::runtime_error("scheduler: joint enumeration exceeded the cap of " +
                               std::to_string(opt.joint_cap) + " (estimate: " +
                               std::to_string(prod) + "); shorten the window");
    detail::joint_product(cfg, per_agent, opt.joint_cap, joints);
  } catch (const std::runtime_error&) {
    if (n < 2) throw;
    joints = detail::partitioned_joints(cfg, horizon, max_steps, opt.joint_cap);
  }
  if (joints.empty()) throw std::runtime_error("scheduler: no feasible sequence fits the horizon");

  MissionConfig cfgw = cfg;
  cfgw.horizon = horizon;

  // When the caller intends to tile the result across a longer horizon
  // (require_periodic + extend_to), candidates are screened, dwell-optimized
  // and ranked by their tiled cost: window-optimal dwells favor the start-up
  // transient and say little about long-run behavior. Otherwise everything
  // is priced on the window itself.
  bool tiled_rank = opt.require_periodic && opt.extend_to > horizon;
  auto seq_periodic = [&](const detail::JointSequence& seq) {
    for (const auto& s : seq)
      if (std::abs(cfg.targets[s.front()].position - cfg.targets[s.back()].position) >
          opt.periodic_tol)
        return false;
    return true;
  };
  if (tiled_rank &&
      std::none_of(joints.begin(), joints.end(), seq_periodic))
    tiled_rank = false;  // nothing repeatable: fall back to the window ranking
  const double gap_dwell = 0.5 * cfg.min_target_gap();  // screening dwell for tiled mode

  // Screening pass: one simulation per candidate with a heuristic dwell.
  std::vector<double> score(joints.size());
  detail::parallel_for_n(joints.size(), opt.threads, [&](std::size_t c) {
    const auto& seq = joints[c];
    score[c] = std::numeric_limits<double>::infinity();
    if (tiled_rank && !seq_periodic(seq)) return;
    auto legs = detail::travel_legs(seq, cfg);
    std::vector<std::vector<double>> dwell(n);
    for (std::size_t j = 0; j < n; ++j) {
      double total = 0.0;
      for (double leg : legs[j]) total += leg;
      if (total > horizon + 1e-9) return;
      const double uniform = std::max(0.0, horizon - total) / double(seq[j].size());
      dwell[j].assign(seq[j].size(), tiled_rank ? std::min(uniform, gap_dwell) : uniform);
    }
    if (tiled_rank) {
      VisitSchedule w = detail::assemble_schedule(seq, dwell, legs, 0.0, horizon);
      score[c] = extend_periodic(w, cfg, opt.extend_to, opt.periodic_tol).cost;
    } else {
      score[c] = simulate(schedule_params(seq, dwell, cfg), cfgw).cost_j1;
    }
  });

  std::vector<std::size_t> rank(joints.size());
  std::iota(rank.begin(), rank.end(), std::size_t{0});
  std::size_t keep = std::min<std::size_t>(opt.shortlist, rank.size());
  std::partial_sort(rank.begin(), rank.begin() + keep, rank.end(),
                    [&](std::size_t a, std::size_t b) {
                      return score[a] != score[b] ? score[a] < score[b] : a < b;
                    });
  rank.resize(keep);
  while (keep > 1 && score[rank[keep - 1]] == std::numeric_limits<double>::infinity()) --keep;
  rank.resize(keep);
  if (std::isinf(score[rank[0]]))
    throw std::runtime_error("scheduler: no feasible candidate survived screening");

  // Refinement: full dwell optimization of the shortlist, against the tiled
  // cost when tiling is requested.
  std::vector<VisitSchedule> refined(keep);
  std::vector<double> refined_key(keep);
  detail::parallel_for_n(keep, opt.threads, [&](std::size_t q) {
    const auto& seq = joints[rank[q]];
    if (!tiled_rank) {
      refined[q] = optimize_dwells(seq, cfg, horizon, opt);
      refined_key[q] = refined[q].cost;
      return;
    }
    auto legs = detail::travel_legs(seq, cfg);
    std::vector<double> travel_total(n, 0.0);
    std::vector<std::vector<double>> dwell(n);
    for (std::size_t j = 0; j < n; ++j) {
      for (double leg : legs[j]) travel_total[j] += leg;
      const double uniform = std::max(0.0, horizon - travel_total[j]) / double(seq[j].size());
      dwell[j].assign(seq[j].size(), std::min(uniform, gap_dwell));
    }
    auto tiled_cost = [&] {
      VisitSchedule w;
      w.sequence = seq;
      w.dwell = dwell;
      w.window = horizon;
      return extend_periodic(w, cfg, opt.extend_to, opt.periodic_tol).cost;
    };
    refined_key[q] = detail::descend_dwells(seq, travel_total, horizon, opt, tiled_cost, dwell);
    const double win_cost = simulate(schedule_params(seq, dwell, cfg), cfgw).cost_j1;
    refined[q] = detail::assemble_schedule(seq, std::move(dwell), std::move(legs), win_cost,
                                           horizon);
  });
  std::size_t best = 0;
  for (std::size_t q = 1; q < keep; ++q)
    if (refined_key[q] < refined_key[best]) best = q;
  return refined[best];
}

// Assignment formulation of the scheduling problem in LP interchange text,
// for external solvers: binaries a_j_k_i (agent j's k-th visit is target i),
// dwell variables split per target, pairwise products for travel legs. The
// linear objective rewards drain capacity B_i per dwell second; the exact
// uncertainty cost is nonlinear and is what the in-tree solver evaluates.
inline std::string export_mip(const MissionConfig& cfg, double horizon, int max_steps = 0) {
  cfg.validate();
  if (max_steps <= 0) max_steps = default_max_steps(cfg, horizon);
  const int n = cfg.num_agents();
  const int m = cfg.num_targets();
  const int K = max_steps;
  std::ostringstream lp;
  lp.precision(12);
  auto a_name = [](int j, int k, int i) {
    return "a_" + std::to_string(j) + "_" + std::to_string(k) + "_" + std::to_string(i);
  };
  auto d_name = [](int j, int k, int i) {
    return "d_" + std::to_string(j) + "_" + std::to_string(k) + "_" + std::to_string(i);
  };
  auto y_name = [](int j, int k, int i, int i2) {
    return "y_" + std::to_string(j) + "_" + std::to_string(k) + "_" + std::to_string(i) + "_" +
           std::to_string(i2);
  };

  lp << "\\ visit-assignment schedule: " << n << " agents, " << m << " targets, up to " << K
     << " visits per agent over " << horizon << " time units\n";
  lp << "Minimize\n obj:";
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < K; ++k)
      for (int i = 0; i < m; ++i)
        lp << " - " << cfg.targets[i].decay_rate << " " << d_name(j, k, i);
  lp << "\nSubject To\n";
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < K; ++k) {
      lp << " assign_" << j << "_" << k << ":";
      for (int i = 0; i < m; ++i) lp << (i ? " + " : " ") << a_name(j, k, i);
      lp << " = 1\n";
    }
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < K; ++k)
      for (int i = 0; i < m; ++i)
        lp << " link_" << j << "_" << k << "_" << i << ": " << d_name(j, k, i) << " - " << horizon
           << " " << a_name(j, k, i) << " <= 0\n";
  for (int j = 0; j < n; ++j)
    for (int k = 1; k < K; ++k)
      for (int i = 0; i < m; ++i)
        for (int i2 = 0; i2 < m; ++i2)
          lp << " pair_" << j << "_" << k << "_" << i << "_" << i2 << ": " << y_name(j, k, i, i2)
             << " - " << a_name(j, k - 1, i) << " - " << a_name(j, k, i2) << " >= -1\n";
  for (int j = 0; j < n; ++j) {
    lp << " budget_" << j << ":";
    bool first = true;
    for (int i = 0; i < m; ++i) {
      const double hop = std::abs(cfg.targets[i].position - cfg.agents[j].start);
      if (hop > 0) {
        lp << (first ? " " : " + ") << hop << " " << a_name(j, 0, i);
        first = false;
      }
    }
    for (int k = 1; k < K; ++k)
      for (int i = 0; i < m; ++i)
        for (int i2 = 0; i2 < m; ++i2) {
          const double hop = std::abs(cfg.targets[i].position - cfg.targets[i2].position);
          if (hop > 0) {
            lp << (first ? " " : " + ") << hop << " " << y_name(j, k, i, i2);
            first = false;
          }
        }
    for (int j2 = 0; j2 < n; ++j2)
      if (j2 == j)
        for (int k = 0; k < K; ++k)
          for (int i = 0; i < m; ++i) {
            lp << (first ? " " : " + ") << d_name(j, k, i);
            first = false;
          }
    lp << " <= " << horizon << "\n";
  }
  lp << "Bounds\n";
  for (int j = 0; j < n; ++j)
    for (int k = 1; k < K; ++k)
      for (int i = 0; i < m; ++i)
        for (int i2 = 0; i2 < m; ++i2) lp << " 0 <= " << y_name(j, k, i, i2) << " <= 1\n";
  lp << "Binary\n";
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < K; ++k)
      for (int i = 0; i < m; ++i) lp << " " << a_name(j, k, i) << "\n";
  lp << "End\n";
  return lp.str();
}

}  // namespace persim

#endif  // PERSIM_SCHEDULER_HPP_

#ifndef PERSIM_DESCENT_HPP_
#define PERSIM_DESCENT_HPP_

#include <chrono>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "persim/ipa.hpp"
#include "persim/model.hpp"
#include "persim/params.hpp"
#include "persim/potential.hpp"
#include "persim/rng.hpp"
#include "persim/sim.hpp"

namespace persim {

struct DescentConfig {
  int max_iterations = 300;
  double step0 = 1.0;
  double armijo_c = 1e-4;
  double backtrack_rho = 0.5;
  int max_backtracks = 40;
  double grad_tol = 1e-6;   // on the 2-norm of the (averaged) gradient
  double cost_tol = 1e-8;   // relative cost stagnation threshold
  int stall_limit = 8;      // consecutive stagnant iterations before stopping
  int restarts = 0;         // extra perturbed starts; best final J1 wins
  std::vector<std::uint64_t> seeds;  // stochastic sub-seeds averaged per iteration
  bool jitter_per_iteration = true;  // resample jitter each iteration
  PotentialConfig excitation;

  void validate() const {
    if (max_iterations < 1) throw std::invalid_argument("descent: max_iterations must be >= 1");
    if (!(armijo_c > 0 && armijo_c < 1)) throw std::invalid_argument("descent: c must be in (0,1)");
    if (!(backtrack_rho > 0 && backtrack_rho < 1))
      throw std::invalid_argument("descent: rho must be in (0,1)");
    if (!(grad_tol > 0) || !(cost_tol > 0))
      throw std::invalid_argument("descent: tolerances must be > 0");
    if (!(step0 > 0)) throw std::invalid_argument("descent: initial step must be > 0");
  }
};

struct DescentIterate {
  double cost_j1 = 0.0;
  double cost_combined = 0.0;
  double grad_norm = 0.0;
  double step = 0.0;
};

struct DescentReport {
  std::vector<DescentIterate> history;
  TrajectoryParams params;
  SimTrace trace;  // final trajectory (first realization in stochastic mode)
  bool converged = false;
  std::string status;
  double wall_seconds = 0.0;
  double final_j1 = 0.0;
};

// Componentwise clamp onto the search box: theta into the target span
// intersected with the feasible band, omega >= 0. Moving past the outermost
// targets can only lengthen travel without adding coverage, so restricting
// the search to the span loses nothing and keeps converged trajectories
// inside it exactly.
inline TrajectoryParams project(TrajectoryParams p, const MissionConfig& cfg) {
  const double a = std::max(cfg.reach_lo(), cfg.first_target());
  const double b = std::min(cfg.reach_hi(), cfg.last_target());
  for (auto& v : p.theta)
    for (double& th : v) th = std::clamp(th, a, b);
  for (auto& v : p.omega)
    for (double& w : v) w = std::max(w, 0.0);
  return p;
}

namespace detail {

struct Objective {
  const MissionConfig& cfg;
  const DescentConfig& dc;
  const RandomModel& random;

  std::vector<RandomModel> realizations(int iteration) const {
    std::vector<RandomModel> out;
    if (random.mode == RandomModel::Mode::None) {
      out.push_back(random);
      return out;
    }
    std::vector<std::uint64_t> seeds = dc.seeds;
    if (seeds.empty()) seeds.push_back(random.seed);
    for (std::uint64_t s : seeds) {
      RandomModel m = random;
      m.seed = CounterRng::mix(random.seed ^ CounterRng::mix(s));
      out.push_back(m);
    }
    (void)iteration;
    return out;
  }

  SimOptions sim_options(std::size_t realization, int iteration) const {
    SimOptions opt;
    opt.jitter_realization =
        realization * 1000003ull + (dc.jitter_per_iteration ? std::uint64_t(iteration) : 0ull);
    return opt;
  }

  // Mean objective value over the iteration's realizations.
  double value(const TrajectoryParams& p, int iteration, double multiplier) const {
    const auto models = realizations(iteration);
    double j = 0.0;
    for (std::size_t r = 0; r < models.size(); ++r) {
      auto tr = simulate(p, cfg, models[r], sim_options(r, iteration));
      j += tr.cost_j1;
      if (multiplier > 0.0) j += multiplier * excitation_value(tr, cfg, dc.excitation);
    }
    return j / double(models.size());
  }

  // Mean value and gradient; also reports the mean plain J1.
  void value_and_gradient(const TrajectoryParams& p, int iteration, double multiplier,
                          double* j_out, double* j1_out, std::vector<double>* grad) const {
    const auto models = realizations(iteration);
    const ParamLayout layout(p);
    grad->assign(layout.total, 0.0);
    double j = 0.0, j1 = 0.0;
    for (std::size_t r = 0; r < models.size(); ++r) {
      auto tr = simulate(p, cfg, models[r], sim_options(r, iteration));
      auto g1 = accumulate_gradient(tr, p, cfg);
      j1 += tr.cost_j1;
      j += tr.cost_j1;
      for (std::size_t k = 0; k < grad->size(); ++k) (*grad)[k] += g1.grad[k];
      if (multiplier > 0.0) {
        auto ex = excitation_term(tr, p, cfg, dc.excitation);
        j += multiplier * ex.value;
        // The exploration term only steers switching points. Its dwell
        // derivative rewards standing still near the field's centroid, which
        // burns mission time without creating the sensing events the term
        // exists to provoke.
        for (std::size_t jj = 0; jj < p.theta.size(); ++jj)
          for (std::size_t l = 0; l < layout.omega_len[jj]; ++l)
            ex.grad[layout.omega_offset[jj] + l] = 0.0;
        for (std::size_t k = 0; k < grad->size(); ++k) (*grad)[k] += multiplier * ex.grad[k];
      }
    }
    const double inv = 1.0 / double(models.size());
    j *= inv;
    j1 *= inv;
    for (double& g : *grad) g *= inv;
    for (double g : *grad)
      if (!std::isfinite(g)) throw std::runtime_error("descent: non-finite gradient component");
    *j_out = j;
    *j1_out = j1;
  }
};

inline DescentReport descend_once(const TrajectoryParams& initial, const MissionConfig& cfg,
                                  const DescentConfig& dc, const RandomModel& random) {
  const auto t_start = std::chrono::steady_clock::now();
  initial.validate(cfg);
  const ParamLayout layout(initial);
  Objective obj{cfg, dc, random};

  DescentReport rep;
  TrajectoryParams p = initial;
  double eta_prev = dc.step0;
  int stall = 0;

  for (int k = 0; k < dc.max_iterations; ++k) {
    const double mult = dc.excitation.enabled ? dc.excitation.multiplier(k) : 0.0;
    double j, j1;
    std::vector<double> grad;
    obj.value_and_gradient(p, k, mult, &j, &j1, &grad);

    double gnorm = 0.0;
    for (double g : grad) gnorm += g * g;
    gnorm = std::sqrt(gnorm);

    DescentIterate it;
    it.cost_j1 = j1;
    it.cost_combined = j;
    it.grad_norm = gnorm;

    if (gnorm <= dc.grad_tol) {
      rep.history.push_back(it);
      rep.converged = true;
      rep.status = "gradient norm below tolerance";
      break;
    }

    // Projected step with Armijo backtracking: accept when the decrease
    // matches c times the projected displacement against the gradient.
    auto x = layout.flatten(p);
    double eta = dc.step0;
    bool accepted = false;
    TrajectoryParams p_next = p;
    double j_next = j;
    for (int bt = 0; bt < dc.max_backtracks; ++bt) {
      auto xc = x;
      for (std::size_t q = 0; q < xc.size(); ++q) xc[q] -= eta * grad[q];
      TrajectoryParams cand = project(layout.unflatten(xc), cfg);
      auto xproj = layout.flatten(cand);
      double decrease_ref = 0.0;
      for (std::size_t q = 0; q < xc.size(); ++q) decrease_ref += grad[q] * (x[q] - xproj[q]);
      if (decrease_ref <= 0.0) {  // projection wiped the step out
        eta *= dc.backtrack_rho;
        continue;
      }
      const double jc = obj.value(cand, k, mult);
      if (jc <= j - dc.armijo_c * decrease_ref) {
        p_next = std::move(cand);
        j_next = jc;
        eta_prev = eta;
        accepted = true;
        break;
      }
      eta *= dc.backtrack_rho;
    }

    it.step = accepted ? eta_prev : 0.0;
    rep.history.push_back(it);

    if (!accepted) {
      rep.converged = true;
      rep.status = "line search found no descent direction";
      break;
    }
    if (std::abs(j - j_next) <= dc.cost_tol * std::max(1.0, std::abs(j))) {
      if (++stall >= dc.stall_limit) {
        p = std::move(p_next);
        rep.converged = true;
        rep.status = "cost stagnated";
        break;
      }
    } else {
      stall = 0;
    }
    p = std::move(p_next);
  }
  if (rep.status.empty()) rep.status = "iteration cap reached";

  rep.params = std::move(p);  // accepted iterates are already projected
  auto opt = obj.sim_options(0, dc.max_iterations);
  RandomModel final_model = obj.realizations(dc.max_iterations).front();
  rep.trace = simulate(rep.params, cfg, final_model, opt);
  rep.final_j1 = rep.trace.cost_j1;
  // Stochastic runs report the seed-averaged final cost instead.
  if (random.mode != RandomModel::Mode::None) {
    double j, j1;
    std::vector<double> g;
    Objective{cfg, dc, random}.value_and_gradient(rep.params, dc.max_iterations, 0.0, &j, &j1, &g);
    rep.final_j1 = j1;
  }
  rep.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return rep;
}

}  // namespace detail

// Projected gradient descent over (theta, omega), with optional excitation
// term, stochastic seed averaging, and perturbed restarts.
inline DescentReport optimize(const TrajectoryParams& initial, const MissionConfig& cfg,
                              const DescentConfig& dc, const RandomModel& random = {}) {
  dc.validate();
  if (random.mode != RandomModel::Mode::None) random.validate();

  DescentReport best = detail::descend_once(initial, cfg, dc, random);
  if (dc.restarts > 0) {
    CounterRng rng(0x5eedu ^ random.seed);
    const double a = cfg.reach_lo(), b = cfg.reach_hi();
    for (int r = 1; r <= dc.restarts; ++r) {
      TrajectoryParams p = initial;
      for (std::size_t j = 0; j < p.theta.size(); ++j) {
        for (std::size_t l = 0; l < p.theta[j].size(); ++l)
          p.theta[j][l] = rng.uniform_in(a, b, r, j, l);
        for (std::size_t l = 0; l < p.omega[j].size(); ++l)
          p.omega[j][l] = rng.uniform_in(0.0, 1.0, 1000 + r, j, l);
      }
      DescentReport cand = detail::descend_once(p, cfg, dc, random);
      if (cand.final_j1 < best.final_j1) best = std::move(cand);
    }
  }
  return best;
}

}  // namespace persim

#endif  // PERSIM_DESCENT_HPP_

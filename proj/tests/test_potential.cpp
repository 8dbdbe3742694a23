#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "persim/potential.hpp"

using namespace persim;

namespace {

MissionConfig pair_of_targets(double T = 30.0) {
  MissionConfig cfg;
  cfg.length = 20.0;
  cfg.horizon = T;
  cfg.targets = {{5.0, 1.0, 5.0, 1.0}, {15.0, 1.0, 5.0, 1.0}};
  cfg.agents = {{10.0, 2.0, +1}};
  return cfg;
}

ExcitationResult eval(const TrajectoryParams& p, const MissionConfig& cfg,
                      const PotentialConfig& pc) {
  auto tr = simulate(p, cfg);
  return excitation_term(tr, p, cfg, pc);
}

}  // namespace

TEST_CASE("reward density: plateau and hyperbolic falloff") {
  std::vector<double> R{1.0}, pos{5.0}, alpha{1.0};
  CHECK(reward_density(5.0, R, pos, alpha, 2.0, 0.0, 20.0) == 0.5);
  CHECK(reward_density(6.0, R, pos, alpha, 2.0, 0.0, 20.0) == 0.5);  // inside plateau
  CHECK(reward_density(9.0, R, pos, alpha, 2.0, 0.0, 20.0) == 0.25);
  R[0] = 0.0;
  CHECK(reward_density(9.0, R, pos, alpha, 2.0, 0.0, 20.0) == 0.0);
  R[0] = 1.0;
  CHECK_THROWS_AS(reward_density(25.0, R, pos, alpha, 2.0, 0.0, 20.0), std::invalid_argument);
}

TEST_CASE("travel cost: sum of absolute distances") {
  CHECK(travel_cost(5.0, {5.0}) == 0.0);
  CHECK(travel_cost(5.0, {3.0, 9.0}) == 6.0);
}

TEST_CASE("excitation value scales linearly with uncertainty") {
  MissionConfig cfg = pair_of_targets();
  TrajectoryParams p;
  p.theta = {{10.0}};  // parked midway, never sensing (gap 5 > r 2)
  p.omega = {{0.0}};
  PotentialConfig pc;
  pc.enabled = true;

  auto base = eval(p, cfg, pc);
  MissionConfig doubled = cfg;
  for (auto& t : doubled.targets) {
    t.initial_uncertainty *= 2.0;
    t.growth_rate *= 2.0;
  }
  auto twice = eval(p, doubled, pc);
  CHECK(base.value > 0.0);
  CHECK(twice.value == Catch::Approx(2.0 * base.value).epsilon(1e-9));
}

TEST_CASE("agent at the symmetry point of an even field: zero gradient") {
  MissionConfig cfg = pair_of_targets();
  TrajectoryParams p;
  p.theta = {{10.0}};
  p.omega = {{0.0}};
  PotentialConfig pc;
  auto res = eval(p, cfg, pc);
  REQUIRE(res.grad.size() == 2);
  CHECK(std::abs(res.grad[0]) < 1e-9);
}

TEST_CASE("eventless trajectory: J1 gradient vanishes, excitation does not") {
  MissionConfig cfg = pair_of_targets();
  TrajectoryParams p;
  p.theta = {{9.0, 11.0, 9.0, 11.0}};  // shuttling between the targets, out of range
  p.omega = {{0.5, 0.5, 0.5, 0.5}};
  auto tr = simulate(p, cfg);
  auto j1 = accumulate_gradient(tr, p, cfg);
  for (double g : j1.grad) CHECK(g == 0.0);

  PotentialConfig pc;
  auto ex = excitation_term(tr, p, cfg, pc);
  double norm = 0.0;
  for (double g : ex.grad) norm += g * g;
  CHECK(std::sqrt(norm) > 1e-6);
}

TEST_CASE("doubling the spatial grid barely moves the value") {
  MissionConfig cfg = pair_of_targets();
  TrajectoryParams p;
  p.theta = {{7.0, 13.0}};
  p.omega = {{1.0, 1.0}};
  PotentialConfig pc;
  auto coarse = eval(p, cfg, pc);
  pc.grid *= 2;
  auto fine = eval(p, cfg, pc);
  CHECK(std::abs(fine.value - coarse.value) < 0.01 * std::abs(coarse.value));
}

TEST_CASE("excitation gradient matches finite differences of its own value") {
  MissionConfig cfg = pair_of_targets(20.0);
  cfg.targets.push_back({18.0, 1.0, 5.0, 0.5});
  // Generic values keep event times off the fixed quadrature nodes, where
  // the value has (measure-zero) kinks in the parameters.
  TrajectoryParams p;
  p.theta = {{8.1371, 14.2917, 6.0533}};
  p.omega = {{1.0713, 0.5261, 0.3141}};
  const ParamLayout layout(p);

  for (auto mode : {PotentialConfig::DecayMode::PerIteration,
                    PotentialConfig::DecayMode::PerMissionTime}) {
    PotentialConfig pc;
    pc.decay_mode = mode;
    pc.grid = 200;       // cheaper probes; value/gradient stay grid-matched
    pc.time_grid = 800;

    auto res = eval(p, cfg, pc);
    auto x = layout.flatten(p);
    const double h = 1e-5;
    int checked = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      auto xp = x, xm = x;
      xp[k] += h;
      xm[k] -= h;
      double jp, jm;
      try {
        jp = eval(layout.unflatten(xp), cfg, pc).value;
        jm = eval(layout.unflatten(xm), cfg, pc).value;
      } catch (const std::invalid_argument&) {
        continue;  // probe left the feasible set
      }
      const double j0 = res.value;
      const double fwd = (jp - j0) / h, bwd = (j0 - jm) / h;
      if (std::abs(fwd - bwd) > 2e-2 * std::max({std::abs(fwd), std::abs(bwd), 1e-3})) continue;
      const double central = (jp - jm) / (2.0 * h);
      const double err = std::abs(res.grad[k] - central);
      INFO("mode " << (mode == PotentialConfig::DecayMode::PerIteration ? "iter" : "time")
                   << " component " << k << ": grad=" << res.grad[k] << " fd=" << central);
      CHECK((err <= 1e-6 || err / std::max(std::abs(central), 1e-12) <= 1e-3));
      ++checked;
    }
    CHECK(checked >= 4);
  }
}

TEST_CASE("per-iteration decay multiplier shrinks to zero") {
  PotentialConfig pc;
  CHECK(pc.multiplier(0) == 1.0);
  CHECK(pc.multiplier(10) == Catch::Approx(std::exp(-0.5)));
  CHECK(pc.multiplier(10) < pc.multiplier(9));
  pc.decay_mode = PotentialConfig::DecayMode::PerMissionTime;
  CHECK(pc.multiplier(50) == 1.0);  // decay folded into the time integral instead
}

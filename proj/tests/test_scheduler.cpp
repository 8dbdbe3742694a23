#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "persim/scheduler.hpp"

using namespace persim;

namespace {

MissionConfig three_targets(double T = 100.0) {
  MissionConfig cfg;
  cfg.length = 20.0;
  cfg.horizon = T;
  cfg.targets = {{5.0, 1.0, 5.0, 1.0}, {10.0, 1.0, 5.0, 1.0}, {15.0, 1.0, 5.0, 1.0}};
  cfg.agents = {{0.0, 2.0, +1}};
  return cfg;
}

MissionConfig two_targets(double T) {
  MissionConfig cfg;
  cfg.length = 12.0;
  cfg.horizon = T;
  cfg.targets = {{5.0, 1.0, 5.0, 1.0}, {10.0, 1.0, 5.0, 1.0}};
  cfg.agents = {{0.0, 2.0, +1}};
  return cfg;
}

bool contains(const std::vector<std::vector<int>>& seqs, const std::vector<int>& s) {
  return std::find(seqs.begin(), seqs.end(), s) != seqs.end();
}

}  // namespace

TEST_CASE("enumeration respects the travel budget") {
  MissionConfig cfg = three_targets();

  SECTION("tight horizon leaves only the nearest target") {
    auto per = enumerate_sequences(cfg, 9.0);
    REQUIRE(per.size() == 1);
    CHECK(per[0] == std::vector<std::vector<int>>{{0}});
  }
  SECTION("looser horizon opens deeper sequences but not beyond the budget") {
    auto per = enumerate_sequences(cfg, 15.0);
    const auto& seqs = per[0];
    CHECK(contains(seqs, {0}));
    CHECK(contains(seqs, {0, 1}));
    CHECK(contains(seqs, {1}));
    CHECK(contains(seqs, {2}));  // 15 time units reaches the far target exactly
    for (const auto& s : seqs) {
      if (s.front() == 2) CHECK(s.size() == 1);  // nothing after the exact-budget leg
      for (std::size_t k = 1; k < s.size(); ++k) CHECK(s[k] != s[k - 1]);
    }
  }
  SECTION("max_steps caps the depth") {
    auto per = enumerate_sequences(cfg, 100.0, 3);
    for (const auto& s : per[0]) CHECK(s.size() <= 3);
  }
  SECTION("enumeration cap aborts with a diagnostic") {
    CHECK_THROWS_AS(enumerate_sequences(cfg, 100.0, 12, 10), std::runtime_error);
  }
}

TEST_CASE("single-visit schedule dwells out the whole residual horizon") {
  MissionConfig cfg = two_targets(20.0);
  auto sched = optimize_dwells({{0}}, cfg, 20.0);
  REQUIRE(sched.sequence[0] == std::vector<int>{0});
  CHECK(sched.travel[0][0] == 5.0);
  CHECK(sched.arrive[0][0] == Catch::Approx(5.0));
  CHECK(sched.dwell[0][0] == Catch::Approx(15.0).margin(1e-6));
}

TEST_CASE("mirror-image sequences cost the same on a symmetric instance") {
  MissionConfig cfg;
  cfg.length = 20.0;
  cfg.horizon = 30.0;
  cfg.targets = {{5.0, 1.0, 5.0, 1.0}, {15.0, 1.0, 5.0, 1.0}};
  cfg.agents = {{10.0, 2.0, +1}};
  auto up = optimize_dwells({{1, 0}}, cfg, 30.0);
  auto down = optimize_dwells({{0, 1}}, cfg, 30.0);
  CHECK(up.cost == Catch::Approx(down.cost).epsilon(1e-6));
}

TEST_CASE("reported cost equals the simulator on the induced program") {
  MissionConfig cfg = two_targets(25.0);
  auto sched = optimize_dwells({{0, 1, 0}}, cfg, 25.0);
  auto tr = simulate(schedule_params(sched.sequence, sched.dwell, cfg), cfg);
  CHECK(sched.cost == Catch::Approx(tr.cost_j1).epsilon(1e-9));
  double used = 0.0;
  for (std::size_t k = 0; k < sched.sequence[0].size(); ++k)
    used += sched.travel[0][k] + sched.dwell[0][k];
  CHECK(used <= 25.0 + 1e-9);
}

TEST_CASE("solve on a horizon that reaches one target only") {
  MissionConfig cfg = two_targets(9.0);
  SchedulerOptions opt;
  opt.max_steps = 4;
  auto sched = solve(cfg, 9.0, opt);
  REQUIRE(sched.sequence[0] == std::vector<int>{0});
  CHECK(sched.dwell[0][0] == Catch::Approx(4.0).margin(1e-6));
}

TEST_CASE("three-target reference instance lands in the reference band") {
  MissionConfig cfg = three_targets();
  SchedulerOptions opt;
  opt.max_steps = 12;
  auto sched = solve(cfg, 100.0, opt);
  INFO("J = " << sched.cost);
  CHECK(sched.cost >= 23.8);
  CHECK(sched.cost <= 26.3);
  std::vector<bool> visited(3, false);
  for (int i : sched.sequence[0]) visited[i] = true;
  CHECK((visited[0] && visited[1] && visited[2]));
}

TEST_CASE("per-unit cost stays stable as the budget grows") {
  MissionConfig cfg = three_targets();
  SchedulerOptions s60;
  s60.max_steps = 8;
  const double j60 = solve(cfg, 60.0, s60).cost;
  SchedulerOptions s100;
  s100.max_steps = 12;
  const double j100 = solve(cfg, 100.0, s100).cost;
  SchedulerOptions s200 = s100;
  s200.require_periodic = true;
  s200.extend_to = 200.0;
  const double j200 = extend_periodic(solve(cfg, 100.0, s200), cfg, 200.0).cost;
  INFO("J(60)=" << j60 << " J(100)=" << j100 << " J(200)=" << j200);
  CHECK(std::abs(j60 - j100) <= 0.2 * j100);
  CHECK(std::abs(j200 - j100) <= 0.2 * j100);
}

TEST_CASE("periodic extension tiles the window and re-simulates") {
  MissionConfig cfg = two_targets(500.0);
  auto win = optimize_dwells({{0, 1, 0}}, cfg, 20.0);

  SECTION("tiling to the same horizon is an identity") {
    auto same = extend_periodic(win, cfg, 20.0);
    CHECK(same.sequence == win.sequence);
    CHECK(same.cost == Catch::Approx(win.cost).epsilon(1e-9));
  }
  SECTION("tiling a longer horizon multiplies the stages and covers it") {
    auto ext = extend_periodic(win, cfg, 100.0);
    CHECK(ext.sequence[0].size() > win.sequence[0].size());
    double used = 0.0;
    for (std::size_t k = 0; k < ext.sequence[0].size(); ++k)
      used += ext.travel[0][k] + ext.dwell[0][k];
    CHECK(used <= 100.0 + 1e-9);
    CHECK(used >= 100.0 - 5.0 - 1e-9);  // covered up to one final travel leg
    auto tr = simulate(schedule_params(ext.sequence, ext.dwell, cfg),
                       [&] {
                         MissionConfig c = cfg;
                         c.horizon = 100.0;
                         return c;
                       }());
    CHECK(ext.cost == Catch::Approx(tr.cost_j1).epsilon(1e-9));
  }
  SECTION("schedules ending far from their cycle start are refused") {
    auto open_ended = optimize_dwells({{0, 1}}, cfg, 20.0);
    CHECK_THROWS_AS(extend_periodic(open_ended, cfg, 100.0), std::runtime_error);
    CHECK(!is_periodic(open_ended, cfg));
    CHECK(is_periodic(win, cfg));
  }
  SECTION("horizon shorter than the window is rejected") {
    CHECK_THROWS_AS(extend_periodic(win, cfg, 10.0), std::invalid_argument);
  }
}

TEST_CASE("solve matches an exhaustive dwell-grid search on a small instance") {
  MissionConfig cfg;
  cfg.length = 8.0;
  cfg.horizon = 10.0;
  cfg.targets = {{2.0, 1.0, 5.0, 1.0}, {4.0, 1.0, 5.0, 1.0}};
  cfg.agents = {{0.0, 1.0, +1}};
  const double T = 10.0;
  const int max_steps = 4;

  // Oracle: every sequence, every dwell assignment on a 0.1 grid.
  auto per = enumerate_sequences(cfg, T, max_steps);
  double grid_best = 1e300;
  for (const auto& seq : per[0]) {
    double travel = 0.0, pos = cfg.agents[0].start;
    for (int i : seq) {
      travel += std::abs(cfg.targets[i].position - pos);
      pos = cfg.targets[i].position;
    }
    const double slack = T - travel;
    std::vector<double> dwell(seq.size(), 0.0);
    std::function<void(std::size_t, double)> rec = [&](std::size_t k, double left) {
      if (k + 1 == dwell.size()) {
        // Final stage: parking equals dwelling, so just use the remainder.
        dwell[k] = std::max(0.0, left);
        double j = simulate(schedule_params({seq}, {dwell}, cfg), cfg).cost_j1;
        grid_best = std::min(grid_best, j);
        return;
      }
      for (double d = 0.0; d <= left + 1e-9; d += 0.1) {
        dwell[k] = d;
        rec(k + 1, left - d);
      }
    };
    rec(0, slack);
  }

  SchedulerOptions opt;
  opt.max_steps = max_steps;
  auto sched = solve(cfg, T, opt);
  INFO("solve J = " << sched.cost << ", grid J = " << grid_best);
  CHECK(sched.cost <= grid_best + 1e-3);
}

TEST_CASE("two agents split the line without crossing when asked") {
  MissionConfig cfg;
  cfg.length = 16.0;
  cfg.horizon = 20.0;
  cfg.targets = {{4.0, 1.0, 5.0, 1.0}, {8.0, 1.0, 5.0, 1.0}, {12.0, 1.0, 5.0, 1.0}};
  cfg.agents = {{0.0, 2.0, +1}, {16.0, 2.0, -1}};
  cfg.no_cross = true;
  SchedulerOptions opt;
  opt.max_steps = 5;
  opt.shortlist = 20;
  auto sched = solve(cfg, 20.0, opt);
  double max0 = -1e300, max1 = -1e300;
  for (int i : sched.sequence[0]) max0 = std::max(max0, cfg.targets[i].position);
  for (int i : sched.sequence[1]) max1 = std::max(max1, cfg.targets[i].position);
  CHECK(max0 <= max1);
  auto tr = simulate(schedule_params(sched.sequence, sched.dwell, cfg), cfg);
  CHECK_FALSE(tr.no_cross_violation);
}

TEST_CASE("assignment formulation exports as LP text") {
  MissionConfig cfg = two_targets(10.0);
  auto lp = export_mip(cfg, 10.0, 3);
  CHECK(lp.find("Minimize") != std::string::npos);
  CHECK(lp.find("Subject To") != std::string::npos);
  CHECK(lp.find("Binary") != std::string::npos);
  CHECK(lp.rfind("End\n") == lp.size() - 4);
  CHECK(lp.find("assign_0_0: a_0_0_0 + a_0_0_1 = 1") != std::string::npos);
  CHECK(lp.find("budget_0:") != std::string::npos);
}

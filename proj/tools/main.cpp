// Command-line front end: one process per run, deterministic artifacts.
//
// Exit codes: 0 success, 2 config error, 3 constraint violation,
// 4 enumeration cap exceeded.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "persim/descent.hpp"
#include "persim/io.hpp"
#include "persim/ipa.hpp"
#include "persim/scheduler.hpp"
#include "persim/sim.hpp"

namespace fs = std::filesystem;
using persim::json;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir = ".";
  std::int64_t seed = -1;       // <0: keep the config's seed
  int threads = 0;              // 0: keep the config's value
  double window = 0.0;          // 0: use the mission horizon
  bool excitation = false;      // force-enable the exploration term
  int iterations = 0;           // 0: keep the config's value
};

void add_common(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--config", a.config_path, "config file (.json or .toml)")
      ->required()
      ->envname("SP_CONFIG");
  cmd->add_option("--out", a.out_dir, "output directory")->envname("SP_OUT");
  cmd->add_option("--seed", a.seed, "master seed override")->envname("SP_SEED");
  cmd->add_option("--threads", a.threads, "parallelism bound")->envname("SP_THREADS");
  cmd->add_option("--window", a.window, "scheduling window override")->envname("SP_WINDOW");
  cmd->add_flag("--excitation", a.excitation, "enable the exploration term")
      ->envname("SP_EXCITATION");
  cmd->add_option("--iterations", a.iterations, "descent iteration cap")->envname("SP_ITERATIONS");
}

// Everything a subcommand needs, assembled from the config tree + overrides.
struct Run {
  json tree;
  persim::MissionConfig cfg;
  persim::TrajectoryParams params;
  bool has_params = false;
  persim::RandomModel random;
  persim::DescentConfig descent;
  persim::SchedulerOptions scheduler;

  std::string digest;
  fs::path out;
  std::vector<std::string> outputs;
  std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();

  void write(const std::string& name, const std::string& content) {
    persim::write_atomic((out / name).string(), content);
    outputs.push_back(name);
  }

  void finish(const std::string& command) {
    persim::RunManifest man;
    man.command = command;
    man.config_digest = digest;
    man.seeds.push_back(random.seed);
    for (auto s : descent.seeds) man.seeds.push_back(s);
    man.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    man.outputs = outputs;
    persim::write_atomic((out / "manifest.json").string(), man.to_json().dump(2) + "\n");
  }
};

Run make_run(const CommonArgs& a) {
  Run r;
  r.tree = persim::load_config_tree(a.config_path);
  r.digest = persim::config_digest(r.tree);
  if (!r.tree.contains("mission")) throw std::invalid_argument("config: missing 'mission' table");
  r.cfg = persim::mission_from_json(r.tree.at("mission"));
  if (r.tree.contains("params")) {
    r.params = persim::params_from_json(r.tree.at("params"), r.cfg);
    r.has_params = true;
  }
  if (r.tree.contains("stochastic")) r.random = persim::stochastic_from_json(r.tree.at("stochastic"));
  if (r.tree.contains("descent")) r.descent = persim::descent_from_json(r.tree.at("descent"));
  if (r.tree.contains("excitation"))
    r.descent.excitation = persim::excitation_from_json(r.tree.at("excitation"));
  if (r.tree.contains("scheduler")) r.scheduler = persim::scheduler_from_json(r.tree.at("scheduler"));

  if (a.seed >= 0) r.random.seed = static_cast<std::uint64_t>(a.seed);
  if (a.iterations > 0) r.descent.max_iterations = a.iterations;
  if (a.excitation) r.descent.excitation.enabled = true;
  if (a.threads > 0) r.scheduler.threads = a.threads;

  r.out = a.out_dir;
  fs::create_directories(r.out);
  return r;
}

persim::TrajectoryParams initial_params(const Run& r) {
  return r.has_params ? r.params : persim::default_initial_params(r.cfg);
}

std::string trace_csv(const persim::SimTrace& tr) {
  std::ostringstream out;
  persim::write_trace_csv(tr, out);
  return out.str();
}

std::string iterations_csv(const persim::DescentReport& rep) {
  std::ostringstream out;
  out << "iter,cost_j1,cost_combined,grad_norm,step\n";
  for (std::size_t k = 0; k < rep.history.size(); ++k) {
    const auto& it = rep.history[k];
    out << k << "," << persim::format_sig(it.cost_j1) << ","
        << persim::format_sig(it.cost_combined) << "," << persim::format_sig(it.grad_norm) << ","
        << persim::format_sig(it.step) << "\n";
  }
  return out.str();
}

json report_json(const persim::DescentReport& rep) {
  json j;
  j["status"] = rep.status;
  j["converged"] = rep.converged;
  j["iterations"] = rep.history.size();
  j["final_j1"] = rep.final_j1;
  j["wall_seconds"] = rep.wall_seconds;
  j["params"]["theta"] = rep.params.theta;
  j["params"]["omega"] = rep.params.omega;
  return j;
}

int cmd_simulate(const CommonArgs& a, const std::string& command) {
  Run r = make_run(a);
  persim::SimTrace tr;
  if (r.cfg.horizon == 0.0) {
    // Zero-length mission: header-only trace, zero cost by convention.
    tr.num_agents = r.cfg.num_agents();
    tr.num_targets = r.cfg.num_targets();
  } else {
    tr = persim::simulate(initial_params(r), r.cfg, r.random);
  }
  if (r.cfg.no_cross && tr.no_cross_violation)
    throw std::domain_error("trajectory violates the agent ordering constraint");
  r.write("trace.csv", trace_csv(tr));
  r.write("events.json", persim::events_to_json(tr).dump(2) + "\n");
  r.finish(command);
  json summary = {{"j1", tr.cost_j1}, {"events", tr.events.size()}};
  std::cout << summary.dump() << "\n";
  return 0;
}

int cmd_ipa_optimize(const CommonArgs& a, const std::string& command) {
  Run r = make_run(a);
  auto rep = persim::optimize(initial_params(r), r.cfg, r.descent, r.random);
  r.write("report.json", report_json(rep).dump(2) + "\n");
  r.write("iterations.csv", iterations_csv(rep));
  r.write("trace.csv", trace_csv(rep.trace));
  r.write("events.json", persim::events_to_json(rep.trace).dump(2) + "\n");
  r.finish(command);
  json summary = {{"final_j1", rep.final_j1},
                  {"iterations", rep.history.size()},
                  {"converged", rep.converged}};
  std::cout << summary.dump() << "\n";
  return 0;
}

persim::VisitSchedule run_scheduler(Run& r, double window) {
  auto sched = persim::solve(r.cfg, window, r.scheduler);
  if (r.scheduler.require_periodic && r.scheduler.extend_to > window)
    sched = persim::extend_periodic(sched, r.cfg, r.scheduler.extend_to, r.scheduler.periodic_tol);
  return sched;
}

int cmd_graph_schedule(const CommonArgs& a, const std::string& command, bool export_mip) {
  Run r = make_run(a);
  const double window = a.window > 0.0 ? a.window : r.cfg.horizon;
  auto sched = run_scheduler(r, window);
  r.write("schedule.json", persim::schedule_to_json(sched).dump(2) + "\n");
  persim::MissionConfig horizon_cfg = r.cfg;
  horizon_cfg.horizon = sched.window;
  auto tr = persim::simulate(persim::schedule_params(sched.sequence, sched.dwell, horizon_cfg),
                             horizon_cfg);
  r.write("trace.csv", trace_csv(tr));
  if (export_mip)
    r.write("model.lp", persim::export_mip(r.cfg, window, r.scheduler.max_steps));
  r.finish(command);
  json summary = {{"cost", sched.cost}, {"window", sched.window}};
  std::cout << summary.dump() << "\n";
  return 0;
}

int cmd_compare(const CommonArgs& a, const std::string& command) {
  Run r = make_run(a);
  auto rep = persim::optimize(initial_params(r), r.cfg, r.descent, r.random);

  const double window = a.window > 0.0 ? std::min(a.window, r.cfg.horizon) : r.cfg.horizon;
  if (window < r.cfg.horizon) {
    // Rank windowed schedules by how well they tile out to the full horizon.
    r.scheduler.require_periodic = true;
    r.scheduler.extend_to = r.cfg.horizon;
  }
  auto sched = run_scheduler(r, window);

  const double gap = std::abs(rep.final_j1 - sched.cost) / std::max(sched.cost, 1e-12);
  json cmp = {{"ipa_j1", rep.final_j1},
              {"graph_cost", sched.cost},
              {"relative_gap", gap},
              {"window", window},
              {"horizon", r.cfg.horizon}};
  r.write("compare.json", cmp.dump(2) + "\n");
  r.write("schedule.json", persim::schedule_to_json(sched).dump(2) + "\n");
  r.write("trace.csv", trace_csv(rep.trace));
  r.finish(command);
  std::cout << cmp.dump() << "\n";
  if (gap > 0.15)
    throw std::domain_error("method disagreement: relative gap " + std::to_string(gap) +
                            " exceeds 0.15");
  return 0;
}

int cmd_gradient_check(const CommonArgs& a, const std::string& command) {
  Run r = make_run(a);
  auto p = initial_params(r);
  auto tr = persim::simulate(p, r.cfg, r.random);
  auto ipa = persim::accumulate_gradient(tr, p, r.cfg);

  const persim::ParamLayout layout(p);
  auto x = layout.flatten(p);
  auto eval = [&](const std::vector<double>& xv) {
    return persim::simulate(layout.unflatten(xv), r.cfg, r.random).cost_j1;
  };

  std::ostringstream csv;
  csv << "component,agent,index,value,ipa,fd,abs_err,rel_err\n";
  double max_rel = 0.0, max_abs = 0.0;
  for (std::size_t j = 0; j < p.theta.size(); ++j) {
    auto one = [&](const char* name, std::size_t offset, std::size_t len, bool nonneg) {
      for (std::size_t l = 0; l < len; ++l) {
        const std::size_t q = offset + l;
        const double h = 1e-5 * std::max(1.0, std::abs(x[q]));
        auto xp = x, xm = x;
        xp[q] += h;
        double fd;
        if (nonneg && x[q] < h) {  // one-sided at the boundary
          fd = (eval(xp) - eval(x)) / h;
        } else {
          xm[q] -= h;
          fd = (eval(xp) - eval(xm)) / (2.0 * h);
        }
        const double abs_err = std::abs(ipa.grad[q] - fd);
        const double rel = abs_err / std::max({std::abs(fd), std::abs(ipa.grad[q]), 1e-6});
        max_rel = std::max(max_rel, rel);
        max_abs = std::max(max_abs, abs_err);
        csv << name << "," << j << "," << l << "," << persim::format_sig(x[q]) << ","
            << persim::format_sig(ipa.grad[q]) << "," << persim::format_sig(fd) << ","
            << persim::format_sig(abs_err) << "," << persim::format_sig(rel) << "\n";
      }
    };
    one("theta", layout.theta_offset[j], layout.theta_len[j], false);
    one("omega", layout.omega_offset[j], layout.omega_len[j], true);
  }
  r.write("gradient_check.csv", csv.str());
  r.finish(command);
  json summary = {{"j1", ipa.cost},
                  {"components", layout.total},
                  {"max_rel_err", max_rel},
                  {"max_abs_err", max_abs}};
  std::cout << summary.dump() << "\n";
  return 0;
}

void print_error(const char* type, const std::string& message) {
  json err = {{"error", {{"type", type}, {"message", message}}}};
  std::cout << err.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"persistent monitoring toolkit: simulation, gradient descent, and scheduling"};
  app.require_subcommand(1);

  CommonArgs args;
  bool export_mip = false;
  auto* sim = app.add_subcommand("simulate", "run the hybrid simulator and export the trace");
  auto* ipa = app.add_subcommand("ipa-optimize", "projected gradient descent on (theta, omega)");
  auto* graph = app.add_subcommand("graph-schedule", "exact visit-sequence search");
  auto* cmp = app.add_subcommand("compare", "run both methods and report the gap");
  auto* gc = app.add_subcommand("gradient-check", "event-driven gradient vs finite differences");
  for (auto* c : {sim, ipa, graph, cmp, gc}) add_common(c, args);
  graph->add_flag("--export-mip", export_mip, "also write the assignment model in LP format");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  std::string command;
  for (int i = 0; i < argc; ++i) command += (i ? " " : "") + std::string(argv[i]);

  try {
    if (sim->parsed()) return cmd_simulate(args, command);
    if (ipa->parsed()) return cmd_ipa_optimize(args, command);
    if (graph->parsed()) return cmd_graph_schedule(args, command, export_mip);
    if (cmp->parsed()) return cmd_compare(args, command);
    if (gc->parsed()) return cmd_gradient_check(args, command);
  } catch (const std::invalid_argument& e) {
    print_error("config", e.what());
    return 2;
  } catch (const std::domain_error& e) {
    print_error("constraint", e.what());
    return 3;
  } catch (const std::runtime_error& e) {
    const bool cap = std::string(e.what()).find("cap") != std::string::npos;
    print_error(cap ? "enumeration-cap" : "constraint", e.what());
    return cap ? 4 : 3;
  }
  return 0;
}

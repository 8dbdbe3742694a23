#ifndef PERSIM_IO_HPP_
#define PERSIM_IO_HPP_

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "persim/descent.hpp"
#include "persim/model.hpp"
#include "persim/params.hpp"
#include "persim/potential.hpp"
#include "persim/rng.hpp"
#include "persim/scheduler.hpp"
#include "persim/trace.hpp"

namespace persim {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// TOML front-end. A deliberately small subset — tables, arrays of tables,
// dotted keys, strings, booleans, numbers, and (nested) inline arrays — that
// covers the whole config schema. Both front-ends produce the same JSON tree.

namespace detail_toml {

inline void skip_ws(const std::string& s, std::size_t& p) {
  while (p < s.size() && (s[p] == ' ' || s[p] == '\t')) ++p;
}

inline std::vector<std::string> split_key(const std::string& raw) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : raw) {
    if (c == '.') {
      parts.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      cur += c;
    }
  }
  parts.push_back(cur);
  for (const auto& k : parts)
    if (k.empty()) throw std::invalid_argument("toml: empty key segment in '" + raw + "'");
  return parts;
}

inline json parse_value(const std::string& s, std::size_t& p);

inline json parse_array(const std::string& s, std::size_t& p) {
  json arr = json::array();
  ++p;  // '['
  for (;;) {
    skip_ws(s, p);
    if (p >= s.size()) throw std::invalid_argument("toml: unterminated array");
    if (s[p] == ']') {
      ++p;
      return arr;
    }
    arr.push_back(parse_value(s, p));
    skip_ws(s, p);
    if (p < s.size() && s[p] == ',') ++p;
  }
}

inline json parse_value(const std::string& s, std::size_t& p) {
  skip_ws(s, p);
  if (p >= s.size()) throw std::invalid_argument("toml: missing value");
  if (s[p] == '[') return parse_array(s, p);
  if (s[p] == '"') {
    std::string out;
    for (++p; p < s.size() && s[p] != '"'; ++p) {
      if (s[p] == '\\' && p + 1 < s.size()) ++p;
      out += s[p];
    }
    if (p >= s.size()) throw std::invalid_argument("toml: unterminated string");
    ++p;
    return out;
  }
  std::size_t start = p;
  while (p < s.size() && s[p] != ',' && s[p] != ']' && s[p] != '#') ++p;
  std::string tok = s.substr(start, p - start);
  while (!tok.empty() && std::isspace(static_cast<unsigned char>(tok.back()))) tok.pop_back();
  if (tok == "true") return true;
  if (tok == "false") return false;
  try {
    std::size_t used = 0;
    if (tok.find_first_of(".eE") == std::string::npos &&
        tok.find_first_not_of("+-0123456789_") == std::string::npos) {
      std::string digits;
      for (char c : tok)
        if (c != '_') digits += c;
      const long long v = std::stoll(digits, &used);
      if (used == digits.size()) return v;
    }
    const double v = std::stod(tok, &used);
    if (used == tok.size()) return v;
  } catch (const std::exception&) {
  }
  throw std::invalid_argument("toml: cannot parse value '" + tok + "'");
}

inline json* descend(json& root, const std::vector<std::string>& path) {
  json* node = &root;
  for (const auto& k : path) {
    if (node->is_array()) node = &node->back();
    node = &(*node)[k];
    if (node->is_null()) *node = json::object();
  }
  if (node->is_array()) node = &node->back();
  return node;
}

}  // namespace detail_toml

inline json toml_lite_parse(const std::string& text) {
  using namespace detail_toml;
  json root = json::object();
  json* table = &root;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    // strip comments outside strings
    bool in_str = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) in_str = !in_str;
      if (line[i] == '#' && !in_str) {
        line.resize(i);
        break;
      }
    }
    std::size_t p = 0;
    skip_ws(line, p);
    if (p >= line.size() || line[p] == '\r') continue;
    try {
      if (line[p] == '[') {
        const bool array_table = p + 1 < line.size() && line[p + 1] == '[';
        const std::size_t open = p + (array_table ? 2 : 1);
        const std::size_t close = line.find(array_table ? "]]" : "]", open);
        if (close == std::string::npos) throw std::invalid_argument("toml: unterminated header");
        auto path = split_key(line.substr(open, close - open));
        json* node = &root;
        for (std::size_t k = 0; k < path.size(); ++k) {
          if (node->is_array()) node = &node->back();
          json& child = (*node)[path[k]];
          if (k + 1 == path.size() && array_table) {
            if (child.is_null()) child = json::array();
            child.push_back(json::object());
          } else if (child.is_null()) {
            child = json::object();
          }
          node = &child;
        }
        if (node->is_array()) node = &node->back();
        table = node;
      } else {
        const std::size_t eq = line.find('=', p);
        if (eq == std::string::npos) throw std::invalid_argument("toml: expected key = value");
        auto path = split_key(line.substr(p, eq - p));
        std::size_t vp = eq + 1;
        json value = parse_value(line, vp);
        json* node = table;
        for (std::size_t k = 0; k + 1 < path.size(); ++k) {
          node = &(*node)[path[k]];
          if (node->is_null()) *node = json::object();
        }
        (*node)[path.back()] = std::move(value);
      }
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(std::string(e.what()) + " (line " + std::to_string(lineno) + ")");
    }
  }
  return root;
}

// ---------------------------------------------------------------------------
// Canonical config tree -> typed objects. Unknown keys are rejected so typos
// fail loudly.

namespace detail_cfg {

inline void check_keys(const json& j, std::initializer_list<const char*> allowed,
                       const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) ok = true;
    if (!ok) throw std::invalid_argument("config: unknown key '" + it.key() + "' in " + where);
  }
}

}  // namespace detail_cfg

inline MissionConfig mission_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("config: 'mission' must be a table");
  detail_cfg::check_keys(j, {"length", "horizon", "no_cross", "targets", "agents"}, "mission");
  MissionConfig cfg;
  cfg.length = j.at("length").get<double>();
  cfg.horizon = j.at("horizon").get<double>();
  cfg.no_cross = j.value("no_cross", false);
  for (const auto& t : j.at("targets")) {
    detail_cfg::check_keys(t, {"position", "growth", "decay", "initial", "weight"},
                           "mission.targets");
    Target tg;
    tg.position = t.at("position").get<double>();
    tg.growth_rate = t.at("growth").get<double>();
    tg.decay_rate = t.at("decay").get<double>();
    tg.initial_uncertainty = t.value("initial", 0.0);
    tg.weight = t.value("weight", 1.0);
    cfg.targets.push_back(tg);
  }
  for (const auto& a : j.at("agents")) {
    detail_cfg::check_keys(a, {"start", "range", "direction"}, "mission.agents");
    AgentSpec ag;
    ag.start = a.at("start").get<double>();
    ag.range = a.at("range").get<double>();
    ag.direction = a.value("direction", +1);
    cfg.agents.push_back(ag);
  }
  cfg.validate();
  return cfg;
}

inline TrajectoryParams params_from_json(const json& j, const MissionConfig& cfg) {
  detail_cfg::check_keys(j, {"theta", "omega"}, "params");
  TrajectoryParams p;
  p.theta = j.at("theta").get<std::vector<std::vector<double>>>();
  p.omega = j.at("omega").get<std::vector<std::vector<double>>>();
  p.validate(cfg);
  return p;
}

inline RandomModel stochastic_from_json(const json& j) {
  detail_cfg::check_keys(j, {"mode", "lo", "hi", "resample_dt", "jitter", "seed"}, "stochastic");
  RandomModel m;
  const std::string mode = j.value("mode", "none");
  if (mode == "none")
    m.mode = RandomModel::Mode::None;
  else if (mode == "inflow-uniform")
    m.mode = RandomModel::Mode::InflowUniform;
  else if (mode == "position-jitter")
    m.mode = RandomModel::Mode::PositionJitter;
  else
    throw std::invalid_argument("config: unknown stochastic mode '" + mode + "'");
  m.inflow_lo = j.value("lo", 0.0);
  m.inflow_hi = j.value("hi", 0.0);
  m.resample_dt = j.value("resample_dt", 1.0);
  m.jitter = j.value("jitter", 0.0);
  m.seed = j.value("seed", std::uint64_t{1});
  if (m.mode != RandomModel::Mode::None) m.validate();
  return m;
}

inline PotentialConfig excitation_from_json(const json& j) {
  detail_cfg::check_keys(j, {"enabled", "beta", "weight", "decay_mode", "grid", "time_grid"},
                         "excitation");
  PotentialConfig pc;
  pc.enabled = j.value("enabled", false);
  pc.beta = j.value("beta", pc.beta);
  pc.weight = j.value("weight", pc.weight);
  pc.grid = j.value("grid", pc.grid);
  pc.time_grid = j.value("time_grid", pc.time_grid);
  const std::string mode = j.value("decay_mode", "per-iteration");
  if (mode == "per-iteration")
    pc.decay_mode = PotentialConfig::DecayMode::PerIteration;
  else if (mode == "per-mission-time")
    pc.decay_mode = PotentialConfig::DecayMode::PerMissionTime;
  else
    throw std::invalid_argument("config: unknown excitation decay_mode '" + mode + "'");
  pc.validate();
  return pc;
}

inline DescentConfig descent_from_json(const json& j) {
  detail_cfg::check_keys(j,
                         {"max_iterations", "step0", "armijo_c", "backtrack_rho", "max_backtracks",
                          "grad_tol", "cost_tol", "stall_limit", "restarts", "seeds",
                          "jitter_per_iteration"},
                         "descent");
  DescentConfig dc;
  dc.max_iterations = j.value("max_iterations", dc.max_iterations);
  dc.step0 = j.value("step0", dc.step0);
  dc.armijo_c = j.value("armijo_c", dc.armijo_c);
  dc.backtrack_rho = j.value("backtrack_rho", dc.backtrack_rho);
  dc.max_backtracks = j.value("max_backtracks", dc.max_backtracks);
  dc.grad_tol = j.value("grad_tol", dc.grad_tol);
  dc.cost_tol = j.value("cost_tol", dc.cost_tol);
  dc.stall_limit = j.value("stall_limit", dc.stall_limit);
  dc.restarts = j.value("restarts", dc.restarts);
  if (j.contains("seeds")) dc.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  dc.jitter_per_iteration = j.value("jitter_per_iteration", true);
  dc.validate();
  return dc;
}

inline SchedulerOptions scheduler_from_json(const json& j) {
  detail_cfg::check_keys(j,
                         {"max_steps", "joint_cap", "shortlist", "golden_tol_rel", "sweeps",
                          "periodic_tol", "require_periodic", "extend_to", "threads"},
                         "scheduler");
  SchedulerOptions so;
  so.max_steps = j.value("max_steps", so.max_steps);
  so.joint_cap = j.value("joint_cap", so.joint_cap);
  so.shortlist = j.value("shortlist", so.shortlist);
  so.golden_tol_rel = j.value("golden_tol_rel", so.golden_tol_rel);
  so.sweeps = j.value("sweeps", so.sweeps);
  so.periodic_tol = j.value("periodic_tol", so.periodic_tol);
  so.require_periodic = j.value("require_periodic", so.require_periodic);
  so.extend_to = j.value("extend_to", so.extend_to);
  so.threads = j.value("threads", so.threads);
  so.validate();
  return so;
}

// Loads a config file, dispatching on the extension (.toml vs .json); both
// front-ends yield the same canonical tree.
inline json load_config_tree(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const bool toml = path.size() > 5 && path.compare(path.size() - 5, 5, ".toml") == 0;
  if (toml) return toml_lite_parse(text);
  return json::parse(text);
}

// ---------------------------------------------------------------------------
// Artifact writers.

inline std::string format_sig(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

// CSV rows at every interval start plus the horizon end; columns are fixed:
// t, agent positions, target uncertainties, controls.
inline void write_trace_csv(const SimTrace& trace, std::ostream& out) {
  out << "t";
  for (int jj = 1; jj <= trace.num_agents; ++jj) out << ",s_" << jj;
  for (int i = 1; i <= trace.num_targets; ++i) out << ",R_" << i;
  for (int jj = 1; jj <= trace.num_agents; ++jj) out << ",u_" << jj;
  out << "\n";
  auto row = [&](double t, const std::vector<double>& s, const std::vector<double>& R,
                 const std::vector<double>& u) {
    out << format_sig(t);
    for (double v : s) out << "," << format_sig(v);
    for (double v : R) out << "," << format_sig(v);
    for (double v : u) out << "," << format_sig(v);
    out << "\n";
  };
  for (const auto& iv : trace.intervals) {
    std::vector<double> R(iv.R0);
    for (std::size_t i = 0; i < R.size(); ++i)
      if (iv.frozen[i]) R[i] = 0.0;
    row(iv.t0, iv.s0, R, iv.u);
  }
  if (!trace.intervals.empty()) {
    std::vector<double> s(trace.num_agents), R(trace.num_targets), u(trace.num_agents);
    trace.state_at(trace.horizon, s, R, u);
    row(trace.horizon, s, R, u);
  }
}

inline json events_to_json(const SimTrace& trace) {
  json out = json::array();
  for (const auto& e : trace.events) {
    json rec;
    rec["t"] = e.t;
    rec["kind"] = event_kind_name(e.kind);
    if (e.target >= 0) rec["target"] = e.target;
    if (e.agent >= 0) rec["agent"] = e.agent;
    out.push_back(std::move(rec));
  }
  return out;
}

inline json schedule_to_json(const VisitSchedule& s) {
  json out;
  out["agents"] = json::array();
  for (std::size_t j = 0; j < s.sequence.size(); ++j) {
    json a;
    a["sequence"] = s.sequence[j];
    a["t"] = s.arrive[j];
    a["dwell"] = s.dwell[j];
    a["travel"] = s.travel[j];
    out["agents"].push_back(std::move(a));
  }
  out["cost"] = s.cost;
  out["window"] = s.window;
  return out;
}

// FNV-1a over the canonical JSON dump: platform-independent and cheap.
inline std::string config_digest(const json& tree) {
  const std::string dump = tree.dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct RunManifest {
  std::string command;
  std::string config_digest;
  std::vector<std::uint64_t> seeds;
  std::string version = "persistent-sweep 1.0.0";
  double wall_seconds = 0.0;
  std::vector<std::string> outputs;

  json to_json() const {
    json j;
    j["command"] = command;
    j["config_digest"] = config_digest;
    j["seeds"] = seeds;
    j["version"] = version;
    j["wall_seconds"] = wall_seconds;
    j["outputs"] = outputs;
    return j;
  }
};

// Write-then-rename so readers never observe a half-written file.
inline void write_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("io: cannot write '" + tmp + "'");
    out << content;
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("io: cannot move '" + tmp + "' into place");
}

}  // namespace persim

#endif  // PERSIM_IO_HPP_

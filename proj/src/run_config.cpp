#include "replaykit/run_config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "replaykit/envs.hpp"
#include "replaykit/errors.hpp"

namespace replaykit {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' expects a number, got '" + v + "'");
  }
}

std::int64_t parse_int(const std::string& key, const std::string& v) {
  std::int64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("config key '" + key + "' expects an integer, got '" + v + "'");
  }
  return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("config key '" + key + "' expects an unsigned integer, got '" + v + "'");
  }
  return out;
}

std::size_t parse_size(const std::string& key, const std::string& v) {
  const std::int64_t n = parse_int(key, v);
  if (n < 0) throw ConfigError("config key '" + key + "' must be non-negative");
  return static_cast<std::size_t>(n);
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError("config key '" + key + "' expects a boolean, got '" + v + "'");
}

std::vector<std::size_t> parse_sizes(const std::string& key, const std::string& v) {
  std::vector<std::size_t> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_size(key, trim(item)));
  if (out.empty()) throw ConfigError("config key '" + key + "' expects a comma-separated size list");
  return out;
}

std::string fmt(double d) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", d);
  return buf;
}

std::string fmt(bool b) { return b ? "true" : "false"; }

std::string fmt_sizes(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(v[i]);
  }
  return s;
}

}  // namespace

std::string default_agent_for(const std::string& env) {
  return env_spec(env).action.discrete ? "dqn" : "ddpg";
}

void RunConfig::validate() const {
  const EnvSpec& spec = env_spec(env);
  if (agent != "dqn" && agent != "ddpg") {
    throw ConfigError("unknown agent '" + agent + "' (expected dqn or ddpg)");
  }
  if (strategy.hindsight && !spec.supports_goals()) {
    throw ConfigError("env=" + env + " conflicts with hindsight=true: " + env +
                      " does not support hindsight goals");
  }
  if (agent == "dqn" && !spec.action.discrete) {
    throw ConfigError("agent=dqn conflicts with env=" + env + ": continuous actions");
  }
  if (agent == "ddpg" && spec.action.discrete) {
    throw ConfigError("agent=ddpg conflicts with env=" + env + ": discrete actions");
  }
  if (episodes < 0) throw ConfigError("episodes must be non-negative");
  if (eval_interval < 0) throw ConfigError("eval_interval must be non-negative");
  if (eval_episodes < 1) throw ConfigError("eval_episodes must be positive");
  if (agent == "dqn") dqn.validate();
  if (agent == "ddpg") ddpg.validate();
  if (strategy.prioritized) per.validate();
}

void RunConfig::set(const std::string& raw_key, const std::string& raw_value) {
  const std::string key = trim(raw_key);
  const std::string v = trim(raw_value);
  if (key == "env") env = v;
  else if (key == "agent") agent = v;
  else if (key == "strategy") strategy = StrategyFlags::parse(v);
  else if (key == "combined") strategy.combined = parse_bool(key, v);
  else if (key == "prioritized") strategy.prioritized = parse_bool(key, v);
  else if (key == "hindsight") strategy.hindsight = parse_bool(key, v);
  else if (key == "seed") seed = parse_u64(key, v);
  else if (key == "episodes") episodes = static_cast<int>(parse_int(key, v));
  else if (key == "eval_interval") eval_interval = static_cast<int>(parse_int(key, v));
  else if (key == "eval_episodes") eval_episodes = static_cast<int>(parse_int(key, v));
  else if (key == "stop_on_convergence") stop_on_convergence = parse_bool(key, v);
  else if (key == "solve_threshold") {
    if (v.empty() || v == "default") solve_threshold.reset();
    else solve_threshold = parse_double(key, v);
  } else if (key == "record_wallclock") record_wallclock = parse_bool(key, v);
  else if (key == "her.tolerance") {
    if (v.empty() || v == "default") goal_tolerance.reset();
    else goal_tolerance = parse_double(key, v);
  }
  else if (key == "dqn.gamma") dqn.gamma = parse_double(key, v);
  else if (key == "dqn.epsilon_start") dqn.epsilon_start = parse_double(key, v);
  else if (key == "dqn.epsilon_end") dqn.epsilon_end = parse_double(key, v);
  else if (key == "dqn.epsilon_decay_steps") dqn.epsilon_decay_steps = parse_int(key, v);
  else if (key == "dqn.target_update_period") dqn.target_update_period = parse_int(key, v);
  else if (key == "dqn.batch_size") dqn.batch_size = parse_size(key, v);
  else if (key == "dqn.learning_rate") dqn.learning_rate = parse_double(key, v);
  else if (key == "dqn.warmup") dqn.warmup = parse_size(key, v);
  else if (key == "dqn.buffer_capacity") dqn.buffer_capacity = parse_size(key, v);
  else if (key == "dqn.hidden") dqn.hidden = parse_sizes(key, v);
  else if (key == "dqn.divergence_limit") dqn.divergence_limit = parse_double(key, v);
  else if (key == "ddpg.gamma") ddpg.gamma = parse_double(key, v);
  else if (key == "ddpg.tau") ddpg.tau = parse_double(key, v);
  else if (key == "ddpg.actor_learning_rate") ddpg.actor_learning_rate = parse_double(key, v);
  else if (key == "ddpg.critic_learning_rate") ddpg.critic_learning_rate = parse_double(key, v);
  else if (key == "ddpg.ou_theta") ddpg.ou_theta = parse_double(key, v);
  else if (key == "ddpg.ou_sigma") ddpg.ou_sigma = parse_double(key, v);
  else if (key == "ddpg.ou_mu") ddpg.ou_mu = parse_double(key, v);
  else if (key == "ddpg.batch_size") ddpg.batch_size = parse_size(key, v);
  else if (key == "ddpg.warmup") ddpg.warmup = parse_size(key, v);
  else if (key == "ddpg.buffer_capacity") ddpg.buffer_capacity = parse_size(key, v);
  else if (key == "ddpg.hidden") ddpg.hidden = parse_sizes(key, v);
  else if (key == "ddpg.divergence_limit") ddpg.divergence_limit = parse_double(key, v);
  else if (key == "per.alpha") per.alpha = parse_double(key, v);
  else if (key == "per.beta") per.beta = parse_double(key, v);
  else if (key == "per.epsilon") per.epsilon = parse_double(key, v);
  else if (key == "per.max_priority_init") per.max_priority_init = parse_double(key, v);
  else if (key.rfind("effective.", 0) == 0) return;  // derived values echoed by manifests
  else throw ConfigError("unknown config key '" + key + "'");
}

std::vector<std::pair<std::string, std::string>> RunConfig::to_key_values() const {
  std::vector<std::pair<std::string, std::string>> kv = {
      {"env", env},
      {"agent", agent},
      {"strategy", strategy.name()},
      {"combined", fmt(strategy.combined)},
      {"prioritized", fmt(strategy.prioritized)},
      {"hindsight", fmt(strategy.hindsight)},
      {"seed", std::to_string(seed)},
      {"episodes", std::to_string(episodes)},
      {"eval_interval", std::to_string(eval_interval)},
      {"eval_episodes", std::to_string(eval_episodes)},
      {"stop_on_convergence", fmt(stop_on_convergence)},
      {"solve_threshold", solve_threshold ? fmt(*solve_threshold) : "default"},
      {"record_wallclock", fmt(record_wallclock)},
  };
  if (strategy.hindsight) {
    kv.emplace_back("her.tolerance", goal_tolerance ? fmt(*goal_tolerance) : "default");
  }
  if (agent == "dqn") {
    kv.insert(kv.end(), {
                            {"dqn.gamma", fmt(dqn.gamma)},
                            {"dqn.epsilon_start", fmt(dqn.epsilon_start)},
                            {"dqn.epsilon_end", fmt(dqn.epsilon_end)},
                            {"dqn.epsilon_decay_steps", std::to_string(dqn.epsilon_decay_steps)},
                            {"dqn.target_update_period", std::to_string(dqn.target_update_period)},
                            {"dqn.batch_size", std::to_string(dqn.batch_size)},
                            {"dqn.learning_rate", fmt(dqn.learning_rate)},
                            {"dqn.warmup", std::to_string(dqn.warmup)},
                            {"dqn.buffer_capacity", std::to_string(dqn.buffer_capacity)},
                            {"dqn.hidden", fmt_sizes(dqn.hidden)},
                            {"dqn.divergence_limit", fmt(dqn.divergence_limit)},
                        });
  } else {
    kv.insert(kv.end(), {
                            {"ddpg.gamma", fmt(ddpg.gamma)},
                            {"ddpg.tau", fmt(ddpg.tau)},
                            {"ddpg.actor_learning_rate", fmt(ddpg.actor_learning_rate)},
                            {"ddpg.critic_learning_rate", fmt(ddpg.critic_learning_rate)},
                            {"ddpg.ou_theta", fmt(ddpg.ou_theta)},
                            {"ddpg.ou_sigma", fmt(ddpg.ou_sigma)},
                            {"ddpg.ou_mu", fmt(ddpg.ou_mu)},
                            {"ddpg.batch_size", std::to_string(ddpg.batch_size)},
                            {"ddpg.warmup", std::to_string(ddpg.warmup)},
                            {"ddpg.buffer_capacity", std::to_string(ddpg.buffer_capacity)},
                            {"ddpg.hidden", fmt_sizes(ddpg.hidden)},
                            {"ddpg.divergence_limit", fmt(ddpg.divergence_limit)},
                        });
  }
  if (strategy.prioritized) {
    kv.insert(kv.end(), {
                            {"per.alpha", fmt(per.alpha)},
                            {"per.beta", fmt(per.beta)},
                            {"per.epsilon", fmt(per.epsilon)},
                            {"per.max_priority_init", fmt(per.max_priority_init)},
                        });
  }
  return kv;
}

void apply_config_text(RunConfig& cfg, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + " is not key=value: '" + line + "'");
    }
    cfg.set(line.substr(0, eq), line.substr(eq + 1));
  }
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  apply_config_text(cfg, ss.str());
}

}  // namespace replaykit

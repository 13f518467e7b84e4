#include "ltot/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ltot::harness {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

const std::vector<std::string>& known_config_keys() {
  static const std::vector<std::string> keys = {
      // canonical
      "policy", "env", "n0", "eta", "b0", "b_micro", "rho", "kappa", "delta",
      "bar_family", "orders", "window", "m_mu", "alpha_smooth", "tau_v", "tau_c",
      "beam_w", "k_children", "budget_cap", "horizon_schedule", "seed", "seeds",
      "out_dir",
      // controller / race extras
      "threads", "b_t0", "delta_promote", "lateral_c_threshold",
      "explore_fraction", "short_circuit", "depth_banded", "calibrate_tail",
      "use_effective_width", "nu_r", "c_r", "epsilon_r", "k_r", "alpha_w",
      "omega_max", "temperature", "aggregator", "depth_d", "quantile_q",
      "trace_rungs",
      // environment parameters
      "env_noise", "env_noise_scale", "env_base", "env_drift", "env_hstar",
      "env_gamma", "env_order", "env_clusters", "env_rho", "env_mu",
      "env_lambda_bias", "env_delta", "env_solution_depth",
      "env_drift_amplitude", "env_instances", "env_instance",
      "env_contamination", "env_inflation", "env_planted", "env_c_consistent",
      "env_c_inconsistent"};
  return keys;
}

Config Config::parse(const std::string& text) {
  Config cfg;
  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  const auto& known = known_config_keys();
  while (std::getline(ss, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw std::invalid_argument("config: unknown key '" + key + "'");
    cfg.values_[key] = value;
  }
  return cfg;
}

Config Config::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("config: cannot open " + path);
  std::stringstream buf;
  buf << f.rdbuf();
  return parse(buf.str());
}

std::string Config::str(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double Config::num(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    return std::stod(it->second);
  } catch (const std::exception&) {
    throw std::invalid_argument("config: key '" + key + "' is not a number");
  }
}

std::int64_t Config::integer(const std::string& key, std::int64_t fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    return std::stoll(it->second);
  } catch (const std::exception&) {
    throw std::invalid_argument("config: key '" + key + "' is not an integer");
  }
}

bool Config::boolean(const std::string& key, bool fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string& v = it->second;
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw std::invalid_argument("config: key '" + key + "' is not a boolean");
}

std::vector<std::int64_t> Config::int_list(const std::string& key,
                                           std::vector<std::int64_t> fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<std::int64_t> out;
  std::stringstream ss(it->second);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (tok.empty()) continue;
    try {
      out.push_back(std::stoll(tok));
    } catch (const std::exception&) {
      throw std::invalid_argument("config: key '" + key + "' has a bad list entry '" +
                                  tok + "'");
    }
  }
  if (out.empty())
    throw std::invalid_argument("config: key '" + key + "' is an empty list");
  return out;
}

void Config::set(const std::string& key, const std::string& value) {
  const auto& known = known_config_keys();
  if (std::find(known.begin(), known.end(), key) == known.end())
    throw std::invalid_argument("config: unknown key '" + key + "'");
  values_[key] = value;
}

}  // namespace ltot::harness

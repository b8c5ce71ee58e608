#ifndef IRSCRB_CONFIG_HPP
#define IRSCRB_CONFIG_HPP

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "optimizer.hpp"

namespace irscrb {

// Flat key = value file, '#' starts a comment. Unknown keys are an error.
class KeyValues {
public:
  static KeyValues parse(std::istream& in, const std::string& origin = "<config>") {
    KeyValues kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
      const std::string key = trim(line.substr(0, eq));
      if (key.empty()) throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
      if (kv.values_.count(key)) throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
      kv.values_[key] = trim(line.substr(eq + 1));
      kv.lines_[key] = origin + ":" + std::to_string(lineno);
    }
    return kv;
  }

  static KeyValues load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file '" + path + "'");
    return parse(f, path);
  }

  bool has(const std::string& k) const { return values_.count(k) > 0; }

  void set(const std::string& k, const std::string& v) { values_[k] = v; lines_[k] = "override"; }

  template <class F>
  void take(const std::string& k, F&& fn) {
    auto it = values_.find(k);
    if (it == values_.end()) return;
    try {
      fn(it->second);
    } catch (const ConfigError& e) {
      throw ConfigError(where(k) + ": " + k + ": " + e.what());
    }
    used_.push_back(k);
  }

  void reject_unused() const {
    for (const auto& [k, v] : values_)
      if (std::find(used_.begin(), used_.end(), k) == used_.end())
        throw ConfigError(where(k) + ": unknown key '" + k + "'");
  }

  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
  }

  static std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) {
      item = trim(item);
      if (!item.empty()) out.push_back(item);
    }
    return out;
  }

  static double to_double(const std::string& s) {
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw ConfigError("not a number: '" + s + "'");
    return v;
  }

  static long long to_int(const std::string& s) {
    long long v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw ConfigError("not an integer: '" + s + "'");
    return v;
  }

  static bool to_bool(const std::string& s) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ConfigError("not a boolean: '" + s + "'");
  }

  static Vec3 to_vec3(const std::string& s) {
    const auto p = split(s, ',');
    if (p.size() != 3) throw ConfigError("expected x, y, z: '" + s + "'");
    return Vec3(to_double(p[0]), to_double(p[1]), to_double(p[2]));
  }

  static std::vector<double> to_doubles(const std::string& s) {
    std::vector<double> out;
    for (const auto& p : split(s, ',')) out.push_back(to_double(p));
    return out;
  }

private:
  std::string where(const std::string& k) const {
    auto it = lines_.find(k);
    return it == lines_.end() ? "<config>" : it->second;
  }

  std::map<std::string, std::string> values_;
  std::map<std::string, std::string> lines_;
  std::vector<std::string> used_;
};

enum class SweepParam { P_t, P_s, M, a_max };

inline const char* to_string(SweepParam p) {
  switch (p) {
    case SweepParam::P_t: return "P_t";
    case SweepParam::P_s: return "P_s";
    case SweepParam::M: return "M";
    case SweepParam::a_max: return "a_max";
  }
  return "?";
}

inline SweepParam parse_sweep_param(const std::string& s) {
  for (SweepParam p : {SweepParam::P_t, SweepParam::P_s, SweepParam::M, SweepParam::a_max})
    if (s == to_string(p)) return p;
  throw ConfigError("unknown sweep parameter '" + s + "' (expected P_t, P_s, M or a_max)");
}

inline void apply_param(ScenarioConfig& cfg, SweepParam p, double v) {
  switch (p) {
    case SweepParam::P_t: cfg.P_t = v; break;
    case SweepParam::P_s: cfg.P_s = v; break;
    case SweepParam::a_max: cfg.a_max = v; break;
    case SweepParam::M:
      if (v != std::floor(v) || v < 1) throw ConfigError("M grid values must be positive integers");
      cfg.M = static_cast<int>(v);
      break;
  }
}

struct SweepSpec {
  SweepParam param = SweepParam::P_t;
  std::vector<double> grid{20.0};
  // optional second grid dimension; empty means the fixed config value
  std::vector<double> a_max_grid;
  ScenarioConfig base;
  std::vector<Scheme> schemes{Scheme::Proposed};
  std::vector<SensingCase> cases{SensingCase::AtBs, SensingCase::AtIrs};
  int n_draws = 1;
  std::uint64_t seed = 1;
  AoOptions ao;
  int threads = 0;  // 0 = hardware concurrency

  void validate() const {
    if (grid.empty()) throw ConfigError("sweep grid is empty");
    if (!std::is_sorted(grid.begin(), grid.end())) throw ConfigError("sweep grid must be sorted");
    if (!std::is_sorted(a_max_grid.begin(), a_max_grid.end())) throw ConfigError("a_max grid must be sorted");
    if (!a_max_grid.empty() && param == SweepParam::a_max)
      throw ConfigError("a_max cannot be both the swept parameter and the second grid");
    if (n_draws < 1) throw ConfigError("draws must be >= 1");
    if (schemes.empty() || cases.empty()) throw ConfigError("schemes and cases must be non-empty");
    if (threads < 0) throw ConfigError("threads must be >= 0");
    ao.validate();
    for (double v : grid) {
      ScenarioConfig c = base;
      apply_param(c, param, v);
      c.validate();
    }
    for (double v : a_max_grid) {
      ScenarioConfig c = base;
      c.a_max = v;
      c.validate();
    }
  }
};

// Fills `spec` from the key-value set. Scenario keys are bare, the sweep
// and optimizer keys carry a "sweep." / "ao." prefix.
inline SweepSpec sweep_from(KeyValues& kv) {
  SweepSpec s;
  ScenarioConfig& c = s.base;
  using K = KeyValues;
  auto dbl = [&](const char* k, double& out) { kv.take(k, [&](const std::string& v) { out = K::to_double(v); }); };
  auto integer = [&](const char* k, int& out) {
    kv.take(k, [&](const std::string& v) { out = static_cast<int>(K::to_int(v)); });
  };
  auto boolean = [&](const char* k, bool& out) { kv.take(k, [&](const std::string& v) { out = K::to_bool(v); }); };

  bool full_size = false;
  boolean("full_size", full_size);
  if (full_size) c.M = 16;

  kv.take("bs_position", [&](const std::string& v) { c.bs_position = K::to_vec3(v); });
  kv.take("target_position", [&](const std::string& v) { c.target_position = K::to_vec3(v); });
  kv.take("irs_positions", [&](const std::string& v) {
    c.irs_positions.clear();
    for (const auto& p : K::split(v, ';')) c.irs_positions.push_back(K::to_vec3(p));
  });
  integer("M", c.M);
  integer("n_h", c.n_h);
  integer("n_v", c.n_v);
  integer("sensor_n_h", c.sensor_n_h);
  integer("sensor_n_v", c.sensor_n_v);
  dbl("d_h", c.d_h);
  dbl("d_v", c.d_v);
  dbl("sensor_d_h", c.sensor_d_h);
  dbl("sensor_d_v", c.sensor_d_v);
  dbl("bs_spacing", c.bs_spacing);
  dbl("P_t", c.P_t);
  dbl("P_s", c.P_s);
  dbl("a_max", c.a_max);
  dbl("sigma_r2", c.sigma_r2);
  dbl("sigma_b2", c.sigma_b2);
  dbl("sigma_s2", c.sigma_s2);
  kv.take("noise_dbm", [&](const std::string& v) { c.sigma_r2 = c.sigma_b2 = c.sigma_s2 = dbm_to_watts(K::to_double(v)); });
  integer("T_c", c.T_c);
  dbl("K_dB", c.K_dB);
  dbl("rcs", c.rcs);
  dbl("wavelength", c.wavelength);
  kv.take("seed", [&](const std::string& v) { c.seed = static_cast<std::uint64_t>(K::to_int(v)); });
  kv.take("beta", [&](const std::string& v) {
    c.beta_override.clear();
    for (const auto& p : K::split(v, ';')) {
      if (p == "auto") {
        c.beta_override.emplace_back();
        continue;
      }
      const auto ri = K::to_doubles(p);
      if (ri.size() != 2) throw ConfigError("beta entries are 're, im' or 'auto'");
      c.beta_override.emplace_back(cplx(ri[0], ri[1]));
    }
  });

  kv.take("sweep.param", [&](const std::string& v) { s.param = parse_sweep_param(v); });
  kv.take("sweep.grid", [&](const std::string& v) { s.grid = K::to_doubles(v); });
  kv.take("sweep.a_max_grid", [&](const std::string& v) { s.a_max_grid = K::to_doubles(v); });
  kv.take("sweep.schemes", [&](const std::string& v) {
    s.schemes.clear();
    for (const auto& p : K::split(v, ',')) s.schemes.push_back(parse_scheme(p));
  });
  kv.take("sweep.cases", [&](const std::string& v) {
    s.cases.clear();
    for (const auto& p : K::split(v, ',')) s.cases.push_back(parse_case(p));
  });
  integer("sweep.draws", s.n_draws);
  integer("sweep.threads", s.threads);

  integer("ao.max_outer_iters", s.ao.max_outer_iters);
  integer("ao.max_sca_iters", s.ao.max_sca_iters);
  dbl("ao.rel_tol", s.ao.rel_tol);
  integer("ao.n_randomizations", s.ao.n_randomizations);
  boolean("ao.transmit_first", s.ao.transmit_first);
  boolean("ao.passive_zero_sigma_r", s.ao.passive_zero_sigma_r);
  dbl("ao.solver_tol", s.ao.solver_tol);

  s.seed = c.seed;
  return s;
}

inline SweepSpec load_sweep(const std::string& path) {
  KeyValues kv = KeyValues::load(path);
  SweepSpec s = sweep_from(kv);
  kv.reject_unused();
  return s;
}

} // namespace irscrb

#endif

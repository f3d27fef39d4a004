#include "srsim/config.hpp"

#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "srsim/errors.hpp"

namespace srsim {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& ctx) {
  if (!j.is_object()) {
    throw ConfigError(ctx + ": expected a JSON object");
  }
  for (const auto& item : j.items()) {
    if (allowed.find(item.key()) == allowed.end()) {
      throw ConfigError(ctx + ": unknown key '" + item.key() + "'");
    }
  }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& ctx) {
  if (!j.contains(key)) return;
  try {
    j.at(key).get_to(out);
  } catch (const json::exception& e) {
    throw ConfigError(ctx + "." + key + ": " + e.what());
  }
}

void read_pair(const json& j, const char* key, std::array<double, 2>& out,
               const std::string& ctx) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    throw ConfigError(ctx + "." + key + ": expected [x, y]");
  }
  out = {v[0].get<double>(), v[1].get<double>()};
}

Constellation constellation_from_string(const std::string& s) {
  if (s == "CSCG") return Constellation::kCscg;
  if (s == "QPSK") return Constellation::kQpsk;
  throw ConfigError("params.constellation: expected CSCG or QPSK, got '" + s + "'");
}

std::string constellation_to_string(Constellation c) {
  return c == Constellation::kCscg ? "CSCG" : "QPSK";
}

SolveMode mode_from_string(const std::string& s) {
  if (s == "sample_average") return SolveMode::kSampleAverage;
  if (s == "upper_bound") return SolveMode::kUpperBound;
  throw ConfigError("solver.mode: expected sample_average or upper_bound, got '" + s + "'");
}

std::string mode_to_string(SolveMode m) {
  return m == SolveMode::kSampleAverage ? "sample_average" : "upper_bound";
}

Scenario scenario_from_json(const json& j) {
  check_keys(j,
             {"pt_position", "ap_position", "bd_center", "bd_radius", "carrier_hz", "gamma_ta",
              "gamma_tb", "rice_k_db", "cascade_scale"},
             "scenario");
  Scenario sc;
  read_pair(j, "pt_position", sc.pt_position, "scenario");
  read_pair(j, "ap_position", sc.ap_position, "scenario");
  read_pair(j, "bd_center", sc.bd_center, "scenario");
  read(j, "bd_radius", sc.bd_radius, "scenario");
  read(j, "carrier_hz", sc.carrier_hz, "scenario");
  read(j, "gamma_ta", sc.gamma_ta, "scenario");
  read(j, "gamma_tb", sc.gamma_tb, "scenario");
  read(j, "rice_k_db", sc.rice_k_db, "scenario");
  read(j, "cascade_scale", sc.cascade_scale, "scenario");
  return sc;
}

json scenario_to_json(const Scenario& sc) {
  return json{{"pt_position", sc.pt_position}, {"ap_position", sc.ap_position},
              {"bd_center", sc.bd_center},     {"bd_radius", sc.bd_radius},
              {"carrier_hz", sc.carrier_hz},   {"gamma_ta", sc.gamma_ta},
              {"gamma_tb", sc.gamma_tb},       {"rice_k_db", sc.rice_k_db},
              {"cascade_scale", sc.cascade_scale}};
}

SystemParams params_from_json(const json& j) {
  check_keys(j, {"M_t", "M_r", "J", "K", "P_dbm", "sigma2_dbm", "alpha", "constellation"},
             "params");
  SystemParams p;
  read(j, "M_t", p.m_t, "params");
  read(j, "M_r", p.m_r, "params");
  read(j, "J", p.j_bds, "params");
  read(j, "K", p.k_spread, "params");
  read(j, "P_dbm", p.p_dbm, "params");
  read(j, "sigma2_dbm", p.sigma2_dbm, "params");
  read(j, "alpha", p.alpha, "params");
  if (j.contains("constellation")) {
    p.constellation = constellation_from_string(j.at("constellation").get<std::string>());
  }
  return p;
}

json params_to_json(const SystemParams& p) {
  return json{{"M_t", p.m_t},
              {"M_r", p.m_r},
              {"J", p.j_bds},
              {"K", p.k_spread},
              {"P_dbm", p.p_dbm},
              {"sigma2_dbm", p.sigma2_dbm},
              {"alpha", p.alpha},
              {"constellation", constellation_to_string(p.constellation)}};
}

SweepConfig sweep_from_json(const json& j) {
  check_keys(j, {"power_dbm", "J", "r_bd"}, "sweep");
  if (j.size() > 1) {
    throw ConfigError("sweep: provide at most one of power_dbm, J, r_bd");
  }
  SweepConfig s;
  read(j, "power_dbm", s.power_dbm, "sweep");
  read(j, "J", s.j_bds, "sweep");
  read(j, "r_bd", s.r_bd, "sweep");
  return s;
}

json sweep_to_json(const SweepConfig& s) {
  json j = json::object();
  if (!s.power_dbm.empty()) j["power_dbm"] = s.power_dbm;
  if (!s.j_bds.empty()) j["J"] = s.j_bds;
  if (!s.r_bd.empty()) j["r_bd"] = s.r_bd;
  return j;
}

SeedConfig seeds_from_json(const json& j) {
  check_keys(j, {"base", "replications"}, "seeds");
  SeedConfig s;
  read(j, "base", s.base, "seeds");
  read(j, "replications", s.replications, "seeds");
  return s;
}

json seeds_to_json(const SeedConfig& s) {
  return json{{"base", s.base}, {"replications", s.replications}};
}

SolveOptions solver_from_json(const json& j) {
  check_keys(j,
             {"mode", "r_bd", "S", "grad_tol", "slack_tol_bits", "mu_max", "max_outer",
              "max_inner", "armijo_c", "backtrack"},
             "solver");
  SolveOptions o;
  if (j.contains("mode")) o.mode = mode_from_string(j.at("mode").get<std::string>());
  read(j, "r_bd", o.r_bd_bits, "solver");
  read(j, "S", o.sample_count, "solver");
  read(j, "grad_tol", o.grad_tol, "solver");
  read(j, "slack_tol_bits", o.slack_tol_bits, "solver");
  read(j, "mu_max", o.mu_max, "solver");
  read(j, "max_outer", o.max_outer, "solver");
  read(j, "max_inner", o.max_inner, "solver");
  read(j, "armijo_c", o.armijo_c, "solver");
  read(j, "backtrack", o.backtrack, "solver");
  return o;
}

json solver_to_json(const SolveOptions& o) {
  return json{{"mode", mode_to_string(o.mode)},
              {"r_bd", o.r_bd_bits},
              {"S", o.sample_count},
              {"grad_tol", o.grad_tol},
              {"slack_tol_bits", o.slack_tol_bits},
              {"mu_max", o.mu_max},
              {"max_outer", o.max_outer},
              {"max_inner", o.max_inner},
              {"armijo_c", o.armijo_c},
              {"backtrack", o.backtrack}};
}

Fig2Config fig2_from_json(const json& j) {
  check_keys(j, {"p_bar_db", "beta_hd_db", "r_bd_max", "r_bd_step"}, "fig2");
  Fig2Config f;
  read(j, "p_bar_db", f.p_bar_db, "fig2");
  read(j, "beta_hd_db", f.beta_hd_db, "fig2");
  read(j, "r_bd_max", f.r_bd_max, "fig2");
  read(j, "r_bd_step", f.r_bd_step, "fig2");
  return f;
}

json fig2_to_json(const Fig2Config& f) {
  return json{{"p_bar_db", f.p_bar_db},
              {"beta_hd_db", f.beta_hd_db},
              {"r_bd_max", f.r_bd_max},
              {"r_bd_step", f.r_bd_step}};
}

RatesPrecoder rates_precoder_from_string(const std::string& s) {
  if (s == "uniform") return RatesPrecoder::kUniform;
  if (s == "direct_link") return RatesPrecoder::kDirectLink;
  throw ConfigError("rates_precoder: expected uniform or direct_link, got '" + s + "'");
}

}  // namespace

void ExperimentConfig::validate() const {
  scenario.validate();
  params.validate();
  solver.validate();
  if (seeds.replications < 1) {
    throw ConfigError("seeds.replications must be >= 1");
  }
  if (fig2.r_bd_step <= 0 || fig2.r_bd_max < 0) {
    throw ConfigError("fig2: r_bd grid must have positive step and non-negative max");
  }
  if (threads < 0) {
    throw ConfigError("threads must be >= 0");
  }
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  check_keys(j,
             {"scenario", "params", "sweep", "seeds", "solver", "fig2", "rates_precoder",
              "output_path", "threads"},
             "config");
  ExperimentConfig c;
  if (j.contains("scenario")) c.scenario = scenario_from_json(j.at("scenario"));
  if (j.contains("params")) c.params = params_from_json(j.at("params"));
  if (j.contains("sweep")) c.sweep = sweep_from_json(j.at("sweep"));
  if (j.contains("seeds")) c.seeds = seeds_from_json(j.at("seeds"));
  if (j.contains("solver")) c.solver = solver_from_json(j.at("solver"));
  if (j.contains("fig2")) c.fig2 = fig2_from_json(j.at("fig2"));
  if (j.contains("rates_precoder")) {
    c.rates_precoder = rates_precoder_from_string(j.at("rates_precoder").get<std::string>());
  }
  read(j, "output_path", c.output_path, "config");
  read(j, "threads", c.threads, "config");
  c.validate();
  return c;
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
  return json{{"scenario", scenario_to_json(c.scenario)},
              {"params", params_to_json(c.params)},
              {"sweep", sweep_to_json(c.sweep)},
              {"seeds", seeds_to_json(c.seeds)},
              {"solver", solver_to_json(c.solver)},
              {"fig2", fig2_to_json(c.fig2)},
              {"rates_precoder",
               c.rates_precoder == RatesPrecoder::kUniform ? "uniform" : "direct_link"},
              {"output_path", c.output_path},
              {"threads", c.threads}};
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file: " + path);
  }
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  return config_from_json(j);
}

void apply_override(nlohmann::json& j, const std::string& key, const std::string& value) {
  if (key.empty()) {
    throw ConfigError("--set: empty key");
  }
  std::string pointer = "/";
  for (char ch : key) {
    pointer += (ch == '.') ? '/' : ch;
  }
  json parsed = json::parse(value, nullptr, false);
  if (parsed.is_discarded()) {
    parsed = value;  // plain string value
  }
  try {
    j[nlohmann::json::json_pointer(pointer)] = parsed;
  } catch (const json::exception& e) {
    throw ConfigError("--set " + key + ": " + e.what());
  }
}

}  // namespace srsim

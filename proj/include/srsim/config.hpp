#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "srsim/channel.hpp"
#include "srsim/precoder.hpp"

namespace srsim {

// Sweep axis for figure runs; at most one list may be set in a config file.
// Runners fall back to their figure-specific default when their axis is empty.
struct SweepConfig {
  std::vector<double> power_dbm;
  std::vector<int> j_bds;
  std::vector<double> r_bd;
};

struct SeedConfig {
  std::uint64_t base = 1;
  int replications = 100;
};

// Grid of the closed-form rate trade-off plot.
struct Fig2Config {
  std::vector<double> p_bar_db{80.0, 90.0, 100.0, 110.0};
  double beta_hd_db = -120.0;
  double r_bd_max = 25.0;
  double r_bd_step = 0.25;
};

enum class RatesPrecoder { kUniform, kDirectLink };

// Figure runs solve the constrained problem by default; 0.02 bits is feasible
// for every default sweep point down to J = 1 at 0 dBm.
inline SolveOptions default_experiment_solver() {
  SolveOptions o;
  o.r_bd_bits = 0.02;
  return o;
}

struct ExperimentConfig {
  Scenario scenario;
  SystemParams params;
  SweepConfig sweep;
  SeedConfig seeds;
  SolveOptions solver = default_experiment_solver();
  Fig2Config fig2;
  RatesPrecoder rates_precoder = RatesPrecoder::kUniform;
  std::string output_path;
  int threads = 0;  // 0 = hardware concurrency

  void validate() const;
};

// Strict JSON binding: unknown keys are rejected, missing keys fall back to
// defaults, values are type-checked. Throws ConfigError on any violation.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& config);

ExperimentConfig load_config_file(const std::string& path);

// Applies one `--set key=value` override: `key` is a dotted path into the
// config JSON (e.g. params.M_t), `value` is parsed as JSON with a fallback to
// a plain string. The resulting document is re-validated.
void apply_override(nlohmann::json& j, const std::string& key, const std::string& value);

}  // namespace srsim

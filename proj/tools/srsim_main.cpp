// Command-line front end: rate reports, asymptotic closed forms, precoding
// solves, and figure-table generation from JSON configs.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "srsim/asymptotics.hpp"
#include "srsim/config.hpp"
#include "srsim/errors.hpp"
#include "srsim/experiments.hpp"
#include "srsim/threading.hpp"

namespace {

constexpr const char* kVersion = "srsim 0.1.0";

constexpr std::uint64_t kTagCliChannel = 0xC1;
constexpr std::uint64_t kTagCliSolver = 0xC2;
constexpr std::uint64_t kTagCliMc = 0xC3;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitNoConvergence = 4;

using nlohmann::json;

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_path;
  int threads = 0;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "JSON config file (defaults used when omitted)");
  cmd->add_option("--seed", args.seed, "Base seed; overrides seeds.base from the config");
  cmd->add_option("--out", args.out_path, "Output file path");
  cmd->add_option("--threads", args.threads, "Max worker threads (0 = machine cores)");
  cmd->add_option("--set", args.overrides,
                  "Config override as key=value with dotted keys, e.g. params.M_t=2")
      ->take_all();
}

srsim::ExperimentConfig resolve_config(const CommonArgs& args) {
  json doc = json::object();
  if (!args.config_path.empty()) {
    std::ifstream in(args.config_path);
    if (!in) throw srsim::ConfigError("cannot open config file: " + args.config_path);
    try {
      in >> doc;
    } catch (const json::exception& e) {
      throw srsim::ConfigError(std::string("config parse error: ") + e.what());
    }
  }
  for (const std::string& kv : args.overrides) {
    const std::size_t eq = kv.find('=');
    if (eq == std::string::npos) {
      throw srsim::ConfigError("--set expects key=value, got '" + kv + "'");
    }
    srsim::apply_override(doc, kv.substr(0, eq), kv.substr(eq + 1));
  }
  srsim::ExperimentConfig config = srsim::config_from_json(doc);
  if (args.seed) config.seeds.base = *args.seed;
  if (args.threads > 0) config.threads = args.threads;
  return config;
}

json matrix_to_json(const srsim::CMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      row.push_back({m(i, j).real(), m(i, j).imag()});
    }
    rows.push_back(row);
  }
  return rows;
}

json vector_to_json(const srsim::RVector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

void emit(const json& j, const std::string& out_path) {
  const std::string text = j.dump(2) + "\n";
  std::cout << text;
  if (!out_path.empty()) {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw srsim::Error("cannot write " + out_path);
    out << text;
  }
}

srsim::AsymParams asym_params_from(const srsim::ExperimentConfig& config) {
  const auto& sc = config.scenario;
  const auto& p = config.params;
  const double d_ta = std::hypot(sc.ap_position[0] - sc.pt_position[0],
                                 sc.ap_position[1] - sc.pt_position[1]);
  const double d_tb = std::hypot(sc.bd_center[0] - sc.pt_position[0],
                                 sc.bd_center[1] - sc.pt_position[1]);
  srsim::AsymParams ap;
  ap.j_bds = p.j_bds;
  ap.k_spread = p.k_spread;
  ap.m_t = p.m_t;
  ap.m_r = p.m_r;
  ap.p_bar = p.p_bar();
  ap.alpha = p.alpha;
  ap.beta_h = srsim::pathloss(d_tb, sc.gamma_tb, sc.carrier_hz);
  ap.beta_g = sc.cascade_scale;
  ap.beta_hd = srsim::pathloss(d_ta, sc.gamma_ta, sc.carrier_hz);
  return ap;
}

int run_rates(const CommonArgs& args) {
  const srsim::ExperimentConfig config = resolve_config(args);
  const srsim::Rng base(config.seeds.base);
  const srsim::ChannelSet ch =
      srsim::sample_scenario(config.scenario, config.params, base.substream(kTagCliChannel));

  srsim::CMatrix f;
  if (config.rates_precoder == srsim::RatesPrecoder::kDirectLink) {
    f = srsim::direct_link_matching(ch.h_d, config.params.p_bar(), config.params.m_t);
  } else {
    f = srsim::CMatrix::Identity(config.params.m_t, config.params.m_t) /
        std::sqrt(static_cast<double>(config.params.m_t));
  }
  const srsim::CMatrix q = f * f.adjoint();
  const srsim::BDSymbolSource source(config.params.constellation, base.substream(kTagCliMc));
  const srsim::RateReport report =
      srsim::make_rate_report(ch, q, f, config.params, source, config.solver.sample_count,
                              srsim::resolve_threads(config.threads));

  json decode = json::array();
  for (int idx : report.decode_order) decode.push_back(idx);
  emit(json{{"primary_rate_bits", report.primary_rate_bits},
            {"primary_rate_stderr", report.primary_rate_stderr},
            {"bd_sum_rate_bits", report.bd_sum_rate_bits},
            {"per_bd_sinr", vector_to_json(report.per_bd_sinr)},
            {"decode_order", decode},
            {"seed", config.seeds.base}},
       args.out_path);
  return kExitOk;
}

int run_asym(const CommonArgs& args) {
  const srsim::ExperimentConfig config = resolve_config(args);
  const srsim::AsymParams ap = asym_params_from(config);
  const srsim::CMatrix h_d =
      srsim::los_channel(config.scenario, config.params.m_t, config.params.m_r);

  const srsim::CMatrix uniform =
      srsim::CMatrix::Identity(ap.m_t, ap.m_t) / static_cast<double>(ap.m_t);
  const double r_bd_asym = srsim::bd_sumrate_asym(uniform, ap);
  const srsim::AsymPrimary primary = srsim::primary_rate_asym(h_d, ap);
  const double theorem2 = srsim::rs_of_rbd(r_bd_asym, ap.p_bar, ap.beta_hd * ap.m_r, ap.m_r,
                                           ap.k_spread);

  json out{{"J", ap.j_bds},
           {"beta_h", ap.beta_h},
           {"beta_g", ap.beta_g},
           {"beta_hd", ap.beta_hd},
           {"r_bd_asym_bits", r_bd_asym},
           {"r_s_asym_bits", primary.rate_bits},
           {"power_allocation", vector_to_json(primary.alloc.p)},
           {"theorem2_r_s_bits", theorem2}};
  if (ap.m_t == 1) {
    const srsim::SimoRates simo = srsim::simo_asym(ap, ap.beta_hd * ap.m_r);
    out["simo"] = json{{"r_bd", simo.r_bd}, {"r_s", simo.r_s}};
  }
  emit(out, args.out_path);
  return kExitOk;
}

int run_optimize(const CommonArgs& args) {
  const srsim::ExperimentConfig config = resolve_config(args);
  const srsim::Rng base(config.seeds.base);
  const srsim::ChannelSet ch =
      srsim::sample_scenario(config.scenario, config.params, base.substream(kTagCliChannel));
  srsim::SolveOptions opts = config.solver;
  opts.threads = srsim::resolve_threads(config.threads);
  const srsim::SolveResult res =
      srsim::solve_precoding(ch, config.params, opts, base.substream(kTagCliSolver));
  const srsim::PrecoderFactor factor = srsim::covariance_to_precoder(res.q);

  emit(json{{"q", matrix_to_json(res.q)},
            {"f", matrix_to_json(factor.f)},
            {"m_s", factor.m_s},
            {"diagnostics",
             {{"objective_bits", res.diag.objective_bits},
              {"constraint_bits", res.diag.constraint_bits},
              {"mu", res.diag.mu},
              {"iterations", res.diag.iterations},
              {"converged", res.diag.converged},
              {"wall_time_s", res.diag.wall_time_s}}}},
       args.out_path);
  return kExitOk;
}

int run_figure(const CommonArgs& args, int figure_id) {
  const srsim::ExperimentConfig config = resolve_config(args);
  const srsim::FigureOutput output = srsim::run_figure(figure_id, config);
  std::string csv_path = args.out_path;
  if (csv_path.empty()) csv_path = config.output_path;
  if (csv_path.empty()) csv_path = "fig" + std::to_string(figure_id) + ".csv";
  srsim::write_figure_output(output, csv_path);
  std::filesystem::path sidecar(csv_path);
  sidecar.replace_extension(".json");
  std::cout << "wrote " << csv_path << " and " << sidecar.string() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MIMO symbiotic radio rate analysis and precoding toolkit"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  CommonArgs rates_args, asym_args, optimize_args, figure_args;
  int figure_id = 2;

  CLI::App* rates = app.add_subcommand(
      "rates", "Rate report (Monte Carlo primary rate + MMSE-SIC BD rates) for one realization");
  add_common(rates, rates_args);

  CLI::App* asym = app.add_subcommand(
      "asym", "Closed-form large-J rates: BD sum rate, waterfilling primary rate, trade-off");
  add_common(asym, asym_args);

  CLI::App* optimize = app.add_subcommand(
      "optimize", "Solve the rate-constrained precoding problem for one realization");
  add_common(optimize, optimize_args);

  CLI::App* figure =
      app.add_subcommand("figure", "Generate a figure data table (CSV + JSON sidecar)");
  figure->add_option("--id", figure_id, "Figure id in 2..7")->required();
  add_common(figure, figure_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (rates->parsed()) return run_rates(rates_args);
    if (asym->parsed()) return run_asym(asym_args);
    if (optimize->parsed()) return run_optimize(optimize_args);
    if (figure->parsed()) return run_figure(figure_args, figure_id);
    std::cerr << "no subcommand given\n";
    return kExitConfig;
  } catch (const srsim::InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const srsim::NoConvergenceError& e) {
    std::cerr << "no convergence: " << e.what() << "\n";
    return kExitNoConvergence;
  } catch (const srsim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

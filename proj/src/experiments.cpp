#include "srsim/experiments.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "srsim/asymptotics.hpp"
#include "srsim/errors.hpp"
#include "srsim/threading.hpp"

namespace srsim {

namespace {

// Substream tags; one namespace per figure so sweeps never share draws.
constexpr std::uint64_t kTagFig3Channel = 0x30;
constexpr std::uint64_t kTagFig3Solver = 0x31;
constexpr std::uint64_t kTagFig45Channel = 0x45;
constexpr std::uint64_t kTagFig45Solver = 0x46;
constexpr std::uint64_t kTagFig45Mc = 0x47;
constexpr std::uint64_t kTagFig67Channel = 0x67;
constexpr std::uint64_t kTagFig67Solver = 0x68;
constexpr std::uint64_t kTagFig67Mc = 0x69;

const std::vector<int> kDefaultJSweep{1, 5, 10, 20, 50};
const std::vector<double> kDefaultPowerSweep{0.0, 5.0, 10.0, 15.0, 20.0};

std::vector<int> j_sweep(const ExperimentConfig& c) {
  return c.sweep.j_bds.empty() ? kDefaultJSweep : c.sweep.j_bds;
}

std::vector<double> power_sweep(const ExperimentConfig& c) {
  return c.sweep.power_dbm.empty() ? kDefaultPowerSweep : c.sweep.power_dbm;
}

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;
};

MeanStderr mean_stderr(const std::vector<double>& xs) {
  MeanStderr out;
  const std::size_t n = xs.size();
  if (n == 0) return out;
  for (double x : xs) out.mean += x;
  out.mean /= static_cast<double>(n);
  if (n > 1) {
    double var = 0.0;
    for (double x : xs) var += (x - out.mean) * (x - out.mean);
    out.stderr_ = std::sqrt(var / (static_cast<double>(n) * static_cast<double>(n - 1)));
  }
  return out;
}

}  // namespace

std::string format_cell(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", value);
  return buf;
}

std::string Table::to_csv() const {
  std::string out;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) out += ',';
    out += columns[i];
  }
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += row[i];
    }
    out += '\n';
  }
  return out;
}

Table run_fig2(const ExperimentConfig& config) {
  config.validate();
  const double beta_hd = std::pow(10.0, config.fig2.beta_hd_db / 10.0);
  const double h_d_norm2 = beta_hd * config.params.m_r;
  Table t;
  t.columns = {"r_bd_asym", "p_bar_db", "r_s_asym"};
  for (double p_bar_db : config.fig2.p_bar_db) {
    const double p_bar = std::pow(10.0, p_bar_db / 10.0);
    for (double r_bd = 0.0; r_bd <= config.fig2.r_bd_max + 1e-12;
         r_bd += config.fig2.r_bd_step) {
      const double r_s =
          rs_of_rbd(r_bd, p_bar, h_d_norm2, config.params.m_r, config.params.k_spread);
      t.rows.push_back({format_cell(r_bd), format_cell(p_bar_db), format_cell(r_s)});
    }
  }
  return t;
}

Table run_fig3(const ExperimentConfig& config) {
  config.validate();
  const Rng base(config.seeds.base);
  const int draws = config.seeds.replications;
  const int threads = resolve_threads(config.threads);

  Table t;
  t.columns = {"J", "mode", "mean_wall_time_s", "stderr_wall_time_s"};
  for (int j : j_sweep(config)) {
    SystemParams params = config.params;
    params.j_bds = j;
    std::vector<double> times_sa(static_cast<std::size_t>(draws));
    std::vector<double> times_ub(static_cast<std::size_t>(draws));
    // Threads fan out across channel draws; each solve runs single-threaded.
    parallel_map<int>(draws, threads, [&](int d) {
      const Rng ch_rng = base.substream(kTagFig3Channel, static_cast<std::uint64_t>(j),
                                        static_cast<std::uint64_t>(d));
      const ChannelSet ch = sample_scenario(config.scenario, params, ch_rng);
      const Rng solver_rng = base.substream(kTagFig3Solver, static_cast<std::uint64_t>(j),
                                            static_cast<std::uint64_t>(d));
      for (SolveMode mode : {SolveMode::kSampleAverage, SolveMode::kUpperBound}) {
        SolveOptions opts = config.solver;
        opts.mode = mode;
        opts.threads = 1;
        const SolveResult res = solve_precoding(ch, params, opts, solver_rng);
        auto& slot = (mode == SolveMode::kSampleAverage ? times_sa : times_ub);
        slot[static_cast<std::size_t>(d)] = res.diag.wall_time_s;
      }
      return 0;
    });
    const MeanStderr sa = mean_stderr(times_sa);
    const MeanStderr ub = mean_stderr(times_ub);
    t.rows.push_back({format_cell(j), "sample_average", format_cell(sa.mean),
                      format_cell(sa.stderr_)});
    t.rows.push_back(
        {format_cell(j), "upper_bound", format_cell(ub.mean), format_cell(ub.stderr_)});
  }
  return t;
}

Table run_fig4_5(const ExperimentConfig& config) {
  config.validate();
  const Rng base(config.seeds.base);
  const int threads = resolve_threads(config.threads);

  // One stored channel realization, replayed for every power point.
  const ChannelSet ch = sample_scenario(config.scenario, config.params,
                                        base.substream(kTagFig45Channel, 0));

  Table t;
  t.columns = {"P_dbm", "scheme", "R_s", "R_s_stderr", "R_BD"};
  const std::vector<double> powers = power_sweep(config);
  for (std::size_t pi = 0; pi < powers.size(); ++pi) {
    SystemParams params = config.params;
    params.p_dbm = powers[pi];

    struct Scheme {
      const char* name;
      CMatrix q;
    };
    std::vector<Scheme> schemes;
    for (SolveMode mode : {SolveMode::kSampleAverage, SolveMode::kUpperBound}) {
      SolveOptions opts = config.solver;
      opts.mode = mode;
      opts.threads = threads;
      const Rng solver_rng = base.substream(kTagFig45Solver, static_cast<std::uint64_t>(pi));
      const SolveResult res = solve_precoding(ch, params, opts, solver_rng);
      schemes.push_back(
          {mode == SolveMode::kSampleAverage ? "sample_average" : "upper_bound", res.q});
    }
    const CMatrix f_dl = direct_link_matching(ch.h_d, params.p_bar(), params.m_t);
    schemes.push_back({"direct_link", f_dl * f_dl.adjoint()});

    // One fresh sample source per power point, shared by all schemes.
    const BDSymbolSource source(params.constellation,
                                base.substream(kTagFig45Mc, static_cast<std::uint64_t>(pi)));
    for (const Scheme& s : schemes) {
      const McRate mc =
          primary_rate_mc(ch, s.q, params, source, config.solver.sample_count, threads);
      const double r_bd = constraint_rate(s.q, ch, params);
      t.rows.push_back({format_cell(params.p_dbm), s.name, format_cell(mc.mean_bits),
                        format_cell(mc.stderr_bits), format_cell(r_bd)});
    }
  }
  return t;
}

Table run_fig6_7(const ExperimentConfig& config) {
  config.validate();
  const Rng base(config.seeds.base);
  const int draws = config.seeds.replications;
  const int threads = resolve_threads(config.threads);

  Table t;
  t.columns = {"J", "R_s_mean", "R_s_stderr", "R_BD_mean", "R_BD_stderr"};
  for (int j : j_sweep(config)) {
    SystemParams params = config.params;
    params.j_bds = j;
    struct DrawResult {
      double r_s = 0.0;
      double r_bd = 0.0;
    };
    const std::vector<DrawResult> results =
        parallel_map<DrawResult>(draws, threads, [&](int d) {
          const Rng ch_rng = base.substream(kTagFig67Channel, static_cast<std::uint64_t>(j),
                                            static_cast<std::uint64_t>(d));
          const ChannelSet ch = sample_scenario(config.scenario, params, ch_rng);
          SolveOptions opts = config.solver;
          opts.mode = SolveMode::kUpperBound;
          opts.threads = 1;
          const Rng solver_rng = base.substream(
              kTagFig67Solver, static_cast<std::uint64_t>(j), static_cast<std::uint64_t>(d));
          const SolveResult res = solve_precoding(ch, params, opts, solver_rng);
          const BDSymbolSource source(
              params.constellation,
              base.substream(kTagFig67Mc, static_cast<std::uint64_t>(j),
                             static_cast<std::uint64_t>(d)));
          const McRate mc =
              primary_rate_mc(ch, res.q, params, source, config.solver.sample_count, 1);
          return DrawResult{mc.mean_bits, constraint_rate(res.q, ch, params)};
        });
    std::vector<double> r_s, r_bd;
    r_s.reserve(results.size());
    r_bd.reserve(results.size());
    for (const DrawResult& r : results) {
      r_s.push_back(r.r_s);
      r_bd.push_back(r.r_bd);
    }
    const MeanStderr ms = mean_stderr(r_s);
    const MeanStderr mb = mean_stderr(r_bd);
    t.rows.push_back({format_cell(j), format_cell(ms.mean), format_cell(ms.stderr_),
                      format_cell(mb.mean), format_cell(mb.stderr_)});
  }
  return t;
}

FigureOutput run_figure(int figure_id, const ExperimentConfig& config) {
  FigureOutput out;
  switch (figure_id) {
    case 2:
      out.table = run_fig2(config);
      break;
    case 3:
      out.table = run_fig3(config);
      break;
    case 4:
    case 5:
      out.table = run_fig4_5(config);
      break;
    case 6:
    case 7:
      out.table = run_fig6_7(config);
      break;
    default:
      throw ConfigError("figure id must be in 2..7");
  }
  out.sidecar = nlohmann::json{
      {"figure", figure_id},
      {"config", config_to_json(config)},
      {"rng",
       {{"algorithm", Rng::algorithm()},
        {"seeding", Rng::seeding()},
        {"base_seed", config.seeds.base}}},
      {"columns", out.table.columns}};
  return out;
}

void write_figure_output(const FigureOutput& output, const std::string& csv_path) {
  const std::filesystem::path path(csv_path);
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream csv(path, std::ios::binary);
  if (!csv) {
    throw Error("cannot write " + csv_path);
  }
  csv << output.table.to_csv();
  csv.close();

  std::filesystem::path sidecar = path;
  sidecar.replace_extension(".json");
  std::ofstream meta(sidecar, std::ios::binary);
  if (!meta) {
    throw Error("cannot write " + sidecar.string());
  }
  meta << output.sidecar.dump(2) << "\n";
}

}  // namespace srsim

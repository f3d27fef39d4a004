#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "srsim/config.hpp"

namespace srsim {

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::string to_csv() const;
};

struct FigureOutput {
  Table table;
  nlohmann::json sidecar;  // resolved config + PRNG identification
};

// Closed-form rate trade-off grid: rows (r_bd_asym, p_bar_db, r_s_asym) over
// the fig2 r_bd grid for each configured transmit SNR.
Table run_fig2(const ExperimentConfig& config);

// Solver wall time per number of BDs: rows (J, mode, mean_wall_time_s,
// stderr_wall_time_s), both solver modes on the same channel draws.
Table run_fig3(const ExperimentConfig& config);

// Rates versus transmit power on one stored channel realization: rows
// (P_dbm, scheme, R_s, R_s_stderr, R_BD) for the two solver modes and the
// direct-link matching benchmark, with a common fresh sample set per power.
Table run_fig4_5(const ExperimentConfig& config);

// Mean rates versus number of BDs with the upper-bound solver: rows
// (J, R_s_mean, R_s_stderr, R_BD_mean, R_BD_stderr) over replicated draws.
Table run_fig6_7(const ExperimentConfig& config);

// Dispatch on figure id in {2,...,7}; ids 4/5 and 6/7 share a table.
FigureOutput run_figure(int figure_id, const ExperimentConfig& config);

// Writes table CSV to csv_path and the sidecar JSON next to it (.json suffix).
void write_figure_output(const FigureOutput& output, const std::string& csv_path);

std::string format_cell(double value);

}  // namespace srsim

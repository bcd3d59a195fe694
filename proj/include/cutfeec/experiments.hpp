// Copyright 2026 The cutfeec Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CUTFEEC_EXPERIMENTS_HPP
#define CUTFEEC_EXPERIMENTS_HPP

#include "cutfeec/config.hpp"
#include "cutfeec/hodge.hpp"

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace cutfeec {

inline constexpr const char *kCsvVersion = "cutfeec-csv 1";

/// Exit codes of the command-line tool.
enum ExitCode
{
  kExitOk = 0,
  kExitConfig = 2,
  kExitSolver = 3,
  kExitGeometry = 4
};

/// Header row, data rows and trailing comment lines ("# ..." without the marker).
struct CsvTable
{
  std::string command;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> footer;

  int column(const std::string &name) const;
};

/// "# cutfeec-csv 1 <command>", one "# config: key = value" line per key, header, rows, footer.
void write_csv(std::ostream &os, const ExperimentConfig &cfg, const CsvTable &table);

/// %.15e, or "nan" / "inf" / "-inf".
std::string format_number(double x);

LevelSet make_level_set(const ExperimentConfig &cfg, double epsilon);
std::shared_ptr<const ActiveMesh> make_active_mesh(const ExperimentConfig &cfg, int m, double epsilon);
/// Closed-form fields of cfg.problem for the domain translated by epsilon.
ExactSolution make_exact(const ExperimentConfig &cfg, double epsilon);
HodgeOptions make_options(const ExperimentConfig &cfg, FacetChoice facets, bool stabilize);

/// One row per m; observed orders for every error column in the footer.
CsvTable run_converge(const ExperimentConfig &cfg);
/// One row per (m, ε) with κ₁ of the stabilised and unstabilised systems.
CsvTable run_sweep_cut(const ExperimentConfig &cfg);
/// One row per (k, m, ε, facet set); per-group and global extremes in the footer.
CsvTable run_norm_equiv(const ExperimentConfig &cfg);
/// Single solve on m_list[0], epsilon_list[0]; writes the optional dumps.
CsvTable run_solve(const ExperimentConfig &cfg);

/// Runs one command end to end and maps failures to exit codes; messages go to `err`.
int run_command(const std::string &command, const std::string &config_path, const std::string &out_path,
                std::ostream &err);

/// Applies the CUTFEEC_THREADS environment variable, if set.
void apply_thread_limit();

}  // namespace cutfeec

#endif  // CUTFEEC_EXPERIMENTS_HPP

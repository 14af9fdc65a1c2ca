#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "clusterplan/cost.hpp"
#include "clusterplan/scenario.hpp"
#include "clusterplan/simulation.hpp"

namespace clusterplan {

inline constexpr int kDefaultHorizonMonths = 16;

// Command-line overrides applied on top of the scenario.
struct CommandOptions {
  std::optional<int> months;
  std::optional<SchedMode> mode;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out_dir;
  std::optional<std::vector<double>> fractions;
  // Offering plotted by `sweep`; defaults to the first per-GPU-hour one.
  std::optional<std::string> offering;
};

struct RunReport {
  std::optional<UtilizationReport> utilization;
  std::optional<CostSeries> costs;
  std::optional<SweepResult> sweep;
  std::map<std::string, std::optional<int>> break_even;
  std::vector<std::filesystem::path> files;
};

// 0.10, 0.15, ..., 0.70
std::vector<double> default_sweep_fractions();

RunReport cmd_simulate(const Scenario& scenario, const CommandOptions& options);
RunReport cmd_cost(const Scenario& scenario, const CommandOptions& options);
RunReport cmd_sweep(const Scenario& scenario, const CommandOptions& options);
RunReport cmd_pipeline(const Scenario& scenario, const CommandOptions& options);

}  // namespace clusterplan

#pragma once

#include <filesystem>
#include <ostream>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "clusterplan/cost.hpp"
#include "clusterplan/simulation.hpp"

namespace clusterplan {

// Locale-independent fixed-point formatting used by every CSV writer.
std::string format_number(double value, int decimals);

// Single header row plus one data row; per-node busy fractions become
// busy_fraction_<node> columns.
void write_utilization_csv(std::ostream& out, const UtilizationReport& report);

// month,onprem_monthly,onprem_cumulative,<offering>_monthly,<offering>_cumulative...
void write_cost_csv(std::ostream& out, const CostSeries& series);

// usage_fraction,month,onprem_cumulative,cloud_cumulative
void write_sweep_csv(std::ostream& out, std::span<const SweepPoint> points,
                     const std::string& cloud_name);

// {"<offering>": month-or-null, ...}
nlohmann::json break_even_json(const CostSeries& series);

nlohmann::json utilization_json(const UtilizationReport& report);

// Writes `content` to `path`, creating parent directories.
void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace clusterplan

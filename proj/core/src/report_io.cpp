#include "clusterplan/report_io.hpp"

#include <fstream>

#include <fmt/format.h>

namespace clusterplan {

std::string format_number(double value, int decimals) {
  std::string text = fmt::format("{:.{}f}", value, decimals);
  // Never print "-0.00".
  if (text.front() == '-' && text.find_first_not_of("-0.") == std::string::npos) text.erase(0, 1);
  return text;
}

void write_utilization_csv(std::ostream& out, const UtilizationReport& r) {
  out << "gpu_hours,total_gpu_capacity_hours,grade_of_operation,mean_monthly_usage_hours,"
         "jobs_started,jobs_completed,jobs_denied,wait_min_min,wait_mean_min,wait_max_min";
  for (const auto& [node, fraction] : r.per_node_busy_fraction) out << ",busy_fraction_" << node;
  out << '\n';

  out << format_number(r.gpu_hours, 4) << ',' << format_number(r.total_gpu_capacity_hours, 4)
      << ',' << format_number(r.grade_of_operation, 6) << ','
      << format_number(r.mean_monthly_usage_hours, 4) << ',' << r.jobs_started << ','
      << r.jobs_completed << ',' << r.jobs_denied << ',' << format_number(r.wait_time.min_min, 2)
      << ',' << format_number(r.wait_time.mean_min, 2) << ','
      << format_number(r.wait_time.max_min, 2);
  for (const auto& [node, fraction] : r.per_node_busy_fraction) {
    out << ',' << format_number(fraction, 6);
  }
  out << '\n';
}

void write_cost_csv(std::ostream& out, const CostSeries& series) {
  out << "month,onprem_monthly,onprem_cumulative";
  for (const auto& cloud : series.clouds) {
    out << ',' << cloud.name << "_monthly," << cloud.name << "_cumulative";
  }
  out << '\n';
  for (int m = 0; m < series.months; ++m) {
    out << (m + 1) << ',' << format_number(series.onprem.monthly[m], 2) << ','
        << format_number(series.onprem.cumulative[m], 2);
    for (const auto& cloud : series.clouds) {
      out << ',' << format_number(cloud.monthly[m], 2) << ','
          << format_number(cloud.cumulative[m], 2);
    }
    out << '\n';
  }
}

void write_sweep_csv(std::ostream& out, std::span<const SweepPoint> points,
                     const std::string& cloud_name) {
  out << "usage_fraction,month,onprem_cumulative,cloud_cumulative\n";
  for (const auto& point : points) {
    const CostColumn* cloud = point.series.find_cloud(cloud_name);
    for (int m = 0; m < point.series.months; ++m) {
      out << format_number(point.usage_fraction, 6) << ',' << (m + 1) << ','
          << format_number(point.series.onprem.cumulative[m], 2) << ','
          << format_number(cloud->cumulative[m], 2) << '\n';
    }
  }
}

nlohmann::json break_even_json(const CostSeries& series) {
  auto out = nlohmann::json::object();
  for (const auto& cloud : series.clouds) {
    auto month = break_even(series, cloud.name);
    out[cloud.name] = month ? nlohmann::json(*month) : nlohmann::json(nullptr);
  }
  return out;
}

nlohmann::json utilization_json(const UtilizationReport& r) {
  return {
      {"gpu_hours", r.gpu_hours},
      {"total_gpu_capacity_hours", r.total_gpu_capacity_hours},
      {"grade_of_operation", r.grade_of_operation},
      {"mean_monthly_usage_hours", r.mean_monthly_usage_hours},
      {"per_node_busy_fraction", r.per_node_busy_fraction},
      {"wait_time_min", {{"min", r.wait_time.min_min},
                         {"mean", r.wait_time.mean_min},
                         {"max", r.wait_time.max_min}}},
      {"jobs_started", r.jobs_started},
      {"jobs_completed", r.jobs_completed},
      {"jobs_denied", r.jobs_denied},
  };
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
  out << content;
  if (!out) throw Error(fmt::format("failed writing '{}'", path.string()));
}

}  // namespace clusterplan

#include "clusterplan/commands.hpp"

#include <cmath>
#include <locale>
#include <sstream>

#include <fmt/format.h>

#include "clusterplan/report_io.hpp"

namespace clusterplan {

namespace fs = std::filesystem;

std::vector<double> default_sweep_fractions() {
  std::vector<double> out;
  // Integer steps avoid accumulating 0.05 in floating point.
  for (int step = 2; step <= 14; ++step) out.push_back(step * 0.05);
  return out;
}

namespace {

class Outputs {
 public:
  Outputs(const Scenario& scenario, const CommandOptions& options, RunReport& report)
      : dir_(options.out_dir.value_or(scenario.output.directory.value_or("out"))),
        report_(report) {}

  void write(const std::string& name, const std::string& content) {
    const fs::path path = dir_ / name;
    write_file(path, content);
    report_.files.push_back(path);
  }

  template <typename Fn>
  void write_csv(const std::string& name, Fn&& fill) {
    std::ostringstream out;
    out.imbue(std::locale::classic());
    fill(out);
    write(name, out.str());
  }

 private:
  fs::path dir_;
  RunReport& report_;
};

const ValidatedCluster& require_cluster(const Scenario& scenario, std::string_view command) {
  if (!scenario.cluster) {
    throw UsageError(fmt::format("{}: scenario has no cluster section", command));
  }
  return *scenario.cluster;
}

const CostConfig& require_cost(const Scenario& scenario, std::string_view command) {
  if (!scenario.cost) throw UsageError(fmt::format("{}: scenario has no cost section", command));
  return *scenario.cost;
}

std::vector<JobRequest> materialize_workload(const Scenario& scenario,
                                             const CommandOptions& options,
                                             std::string_view command) {
  if (!scenario.workload) {
    throw UsageError(fmt::format("{}: scenario has no workload section", command));
  }
  if (const auto* jobs = std::get_if<std::vector<JobRequest>>(&*scenario.workload)) return *jobs;
  WorkloadParams params = std::get<WorkloadParams>(*scenario.workload);
  if (options.seed) params.seed = *options.seed;
  return generate_workload(params);
}

int total_gpus_for(const Scenario& scenario) {
  if (scenario.cost && scenario.cost->total_gpus) return *scenario.cost->total_gpus;
  return scenario.cluster ? scenario.cluster->total_gpus() : 0;
}

int months_for(const Scenario& scenario, const CommandOptions& options) {
  int months = options.months.value_or(
      scenario.cost && scenario.cost->months ? *scenario.cost->months : kDefaultHorizonMonths);
  if (months < 1) throw UsageError("--months must be at least 1");
  return months;
}

SimulationTrace simulate_into(const Scenario& scenario, const CommandOptions& options,
                              std::string_view command, RunReport& report, Outputs& outputs) {
  const ValidatedCluster& cluster = require_cluster(scenario, command);
  std::vector<JobRequest> jobs = materialize_workload(scenario, options, command);
  outputs.write("jobs.json", jobs_to_json(jobs).dump(2) + "\n");

  SimulationTrace trace =
      run(cluster, std::move(jobs), options.mode.value_or(scenario.mode), scenario.horizon_min);
  report.utilization = utilization(trace);

  outputs.write_csv("trace.csv", [&](std::ostream& out) { write_trace_csv(out, trace); });
  outputs.write_csv("utilization.csv",
                    [&](std::ostream& out) { write_utilization_csv(out, *report.utilization); });
  return trace;
}

void emit_costs(const CostConfig& cost, const UsageProfile& usage, int months, RunReport& report,
                Outputs& outputs) {
  report.costs = cumulative_series(cost.onprem, cost.offerings, usage, months);
  outputs.write_csv("cost_table.csv",
                    [&](std::ostream& out) { write_cost_csv(out, *report.costs); });
  if (cost.offerings.empty()) return;
  for (const auto& offering : cost.offerings) {
    report.break_even[offering.name] = break_even(*report.costs, offering.name);
  }
  outputs.write("breakeven.json", break_even_json(*report.costs).dump(2) + "\n");
}

nlohmann::json report_json(const RunReport& report) {
  nlohmann::json out = nlohmann::json::object();
  if (report.utilization) out["utilization"] = utilization_json(*report.utilization);
  if (!report.break_even.empty()) {
    auto be = nlohmann::json::object();
    for (const auto& [name, month] : report.break_even) {
      be[name] = month ? nlohmann::json(*month) : nlohmann::json(nullptr);
    }
    out["break_even"] = be;
  }
  if (report.costs) {
    out["months"] = report.costs->months;
    out["onprem_cumulative"] = report.costs->onprem.cumulative.back();
  }
  auto files = nlohmann::json::array();
  for (const auto& f : report.files) files.push_back(f.filename().string());
  out["files"] = files;
  return out;
}

void finish(const Scenario& scenario, RunReport& report, Outputs& outputs) {
  if (scenario.output.write_json_report) {
    const auto content = report_json(report).dump(2) + "\n";
    outputs.write("report.json", content);
  }
}

}  // namespace

RunReport cmd_simulate(const Scenario& scenario, const CommandOptions& options) {
  RunReport report;
  Outputs outputs(scenario, options, report);
  simulate_into(scenario, options, "simulate", report, outputs);
  finish(scenario, report, outputs);
  return report;
}

RunReport cmd_cost(const Scenario& scenario, const CommandOptions& options) {
  const CostConfig& cost = require_cost(scenario, "cost");
  const auto* fixed = std::get_if<FixedUsage>(&cost.usage);
  if (fixed == nullptr) {
    throw UsageError("cost: usage source is 'simulated'; run the pipeline command instead");
  }
  RunReport report;
  Outputs outputs(scenario, options, report);
  const auto usage = UsageProfile::from_hours(fixed->gpu_hours_per_month, total_gpus_for(scenario));
  emit_costs(cost, usage, months_for(scenario, options), report, outputs);
  finish(scenario, report, outputs);
  return report;
}

RunReport cmd_sweep(const Scenario& scenario, const CommandOptions& options) {
  const CostConfig& cost = require_cost(scenario, "sweep");
  const std::vector<double> fractions = options.fractions.value_or(default_sweep_fractions());
  if (fractions.empty()) throw UsageError("sweep: the fraction list is empty");
  const int months = months_for(scenario, options);

  const CloudOffering* offering = nullptr;
  if (options.offering) {
    for (const auto& o : cost.offerings) {
      if (o.name == *options.offering) offering = &o;
    }
    if (offering == nullptr) throw CostError(fmt::format("unknown offering '{}'", *options.offering));
  } else {
    for (const auto& o : cost.offerings) {
      if (!o.is_flat()) {
        offering = &o;
        break;
      }
    }
    if (offering == nullptr && !cost.offerings.empty()) offering = &cost.offerings.front();
  }
  if (offering == nullptr) throw CostError("sweep: scenario defines no cloud offering");

  const bool fixed_power = std::holds_alternative<FixedElectricity>(cost.onprem.electricity);
  if (offering->is_flat() && fixed_power) {
    throw CostError(
        "sweep: flat cloud pricing and fixed electricity do not depend on usage; "
        "add a per_gpu_hour offering or modeled electricity");
  }
  const int gpus = total_gpus_for(scenario);
  if (gpus <= 0) throw CostError("sweep: usage fractions need a positive total GPU count");

  RunReport report;
  Outputs outputs(scenario, options, report);
  report.sweep = usage_sweep(cost.onprem, *offering, fractions, gpus, months);
  const SweepResult& sweep = *report.sweep;

  outputs.write_csv("sweep.csv", [&](std::ostream& out) {
    write_sweep_csv(out, sweep.points, offering->name);
  });
  outputs.write_csv("sweep_band.csv", [&](std::ostream& out) {
    out << "month,onprem_lower,onprem_upper,cloud_lower,cloud_upper,"
           "onprem_u20,cloud_u20,onprem_u40,cloud_u40\n";
    for (int m = 0; m < months; ++m) {
      auto band = [&](const std::vector<double>& v) {
        return v.empty() ? std::string() : format_number(v[m], 2);
      };
      out << (m + 1) << ',' << band(sweep.onprem_band.lower) << ','
          << band(sweep.onprem_band.upper) << ',' << band(sweep.cloud_band.lower) << ','
          << band(sweep.cloud_band.upper) << ','
          << format_number(sweep.at_20.series.onprem.cumulative[m], 2) << ','
          << format_number(sweep.at_20.series.clouds.front().cumulative[m], 2) << ','
          << format_number(sweep.at_40.series.onprem.cumulative[m], 2) << ','
          << format_number(sweep.at_40.series.clouds.front().cumulative[m], 2) << '\n';
    }
  });
  finish(scenario, report, outputs);
  return report;
}

RunReport cmd_pipeline(const Scenario& scenario, const CommandOptions& options) {
  const CostConfig& cost = require_cost(scenario, "pipeline");
  if (!std::holds_alternative<SimulatedUsage>(cost.usage)) {
    throw UsageError("pipeline: cost.usage.source must be 'simulated'");
  }
  RunReport report;
  Outputs outputs(scenario, options, report);
  simulate_into(scenario, options, "pipeline", report, outputs);

  const auto usage = UsageProfile::from_hours(report.utilization->mean_monthly_usage_hours,
                                              total_gpus_for(scenario));
  emit_costs(cost, usage, months_for(scenario, options), report, outputs);
  finish(scenario, report, outputs);
  return report;
}

}  // namespace clusterplan

// clusterplan: simulate a FIFO GPU cluster and compare on-premises against
// cloud costs.
//
//   clusterplan simulate|cost|sweep|pipeline --scenario <path> [--months N]
//               [--mode strict|skip] [--seed S] [--out DIR]
//
// Exit codes: 0 success, 1 domain or validation error, 2 usage error.

#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "clusterplan/commands.hpp"
#include "clusterplan/report_io.hpp"
#include "clusterplan/scenario.hpp"

namespace {

constexpr int kExitDomainError = 1;
constexpr int kExitUsage = 2;

void print_report(const clusterplan::RunReport& report) {
  using clusterplan::format_number;
  if (report.utilization) {
    const auto& u = *report.utilization;
    fmt::print("gpu_hours:          {}\n", format_number(u.gpu_hours, 1));
    fmt::print("grade_of_operation: {}%\n", format_number(100.0 * u.grade_of_operation, 1));
    fmt::print("mean_monthly_usage: {} h\n", format_number(u.mean_monthly_usage_hours, 1));
    fmt::print("jobs:               {} started, {} completed, {} denied\n", u.jobs_started,
               u.jobs_completed, u.jobs_denied);
  }
  if (report.costs) {
    const auto& c = *report.costs;
    fmt::print("onprem cumulative (month {}): {} EUR\n", c.months,
               format_number(c.onprem.cumulative.back(), 0));
    for (const auto& cloud : c.clouds) {
      fmt::print("{} cumulative (month {}): {} EUR\n", cloud.name, c.months,
                 format_number(cloud.cumulative.back(), 0));
    }
  }
  for (const auto& [name, month] : report.break_even) {
    if (month) {
      fmt::print("break-even vs {}: month {}\n", name, *month);
    } else {
      fmt::print("break-even vs {}: never within horizon\n", name);
    }
  }
  for (const auto& file : report.files) fmt::print("wrote {}\n", file.string());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GPU cluster scheduling simulator and TCO calculator"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::optional<int> months;
  std::string mode_text;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::vector<double> fractions;
  std::string offering;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--scenario", scenario_path, "Scenario JSON file")->required();
    cmd->add_option("--out", out_dir, "Output directory (default: scenario output.directory or ./out)");
  };
  auto add_sim = [&](CLI::App* cmd) {
    cmd->add_option("--mode", mode_text, "Scheduling mode")
        ->check(CLI::IsMember({"strict", "skip"}));
    cmd->add_option("--seed", seed, "Override the workload generator seed");
  };
  auto add_months = [&](CLI::App* cmd) {
    cmd->add_option("--months", months, "Cost horizon in months (default 16)")
        ->check(CLI::PositiveNumber);
  };

  auto* simulate = app.add_subcommand("simulate", "Run the scheduler simulation");
  add_common(simulate);
  add_sim(simulate);

  auto* cost = app.add_subcommand("cost", "Monthly and cumulative cost table with break-even");
  add_common(cost);
  add_months(cost);

  auto* sweep = app.add_subcommand("sweep", "Cumulative costs across usage fractions");
  add_common(sweep);
  add_months(sweep);
  auto* fractions_opt =
      sweep->add_option("--fractions", fractions, "Usage fractions (default 0.10..0.70 step 0.05)")
          ->delimiter(',')
          ->expected(0, -1);
  sweep->add_option("--offering", offering, "Cloud offering to sweep");

  auto* pipeline = app.add_subcommand("pipeline", "Simulate, then feed measured usage into costs");
  add_common(pipeline);
  add_sim(pipeline);
  add_months(pipeline);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  clusterplan::CommandOptions options;
  options.months = months;
  options.seed = seed;
  if (!mode_text.empty()) options.mode = clusterplan::parse_sched_mode(mode_text);
  if (!out_dir.empty()) options.out_dir = out_dir;
  if (fractions_opt->count() > 0) {
    // A bare --fractions yields one empty result, which CLI11 converts to 0.
    std::vector<double> given;
    const auto& raw = fractions_opt->results();
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (!raw[i].empty()) given.push_back(fractions.at(i));
    }
    options.fractions = std::move(given);
  }
  if (!offering.empty()) options.offering = offering;

  try {
    const auto scenario = clusterplan::load_scenario(scenario_path);
    clusterplan::RunReport report;
    if (simulate->parsed()) {
      report = clusterplan::cmd_simulate(scenario, options);
    } else if (cost->parsed()) {
      report = clusterplan::cmd_cost(scenario, options);
    } else if (sweep->parsed()) {
      report = clusterplan::cmd_sweep(scenario, options);
    } else {
      report = clusterplan::cmd_pipeline(scenario, options);
    }
    print_report(report);
  } catch (const clusterplan::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDomainError;
  }
  return EXIT_SUCCESS;
}

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "clusterplan/cluster.hpp"
#include "clusterplan/cost.hpp"
#include "clusterplan/error.hpp"
#include "clusterplan/scheduler.hpp"
#include "clusterplan/workload.hpp"

namespace clusterplan {

struct FixedUsage {
  double gpu_hours_per_month = 0.0;
};
struct SimulatedUsage {};

using UsageSource = std::variant<FixedUsage, SimulatedUsage>;

struct CostConfig {
  OnPremScenario onprem;
  std::vector<CloudOffering> offerings;
  UsageSource usage = FixedUsage{};
  std::optional<int> months;
  // GPUs the usage fraction refers to; defaults to the cluster inventory.
  std::optional<int> total_gpus;
};

using WorkloadSource = std::variant<std::vector<JobRequest>, WorkloadParams>;

struct OutputConfig {
  std::optional<std::filesystem::path> directory;
  bool write_json_report = false;
};

struct Scenario {
  std::optional<ValidatedCluster> cluster;
  SchedMode mode = SchedMode::Strict;
  std::optional<Minutes> horizon_min;
  std::optional<WorkloadSource> workload;
  std::optional<CostConfig> cost;
  OutputConfig output;
};

class ScenarioError : public Error {
 public:
  enum class Kind { FileNotFound, SyntaxError, SchemaError, ValidationError };

  ScenarioError(Kind kind, std::string location, const std::string& message);

  Kind kind() const { return kind_; }
  // JSON-pointer style path, e.g. "/cluster/nodes/1/gpus_".
  const std::string& location() const { return location_; }

 private:
  Kind kind_;
  std::string location_;
};

std::string_view to_string(ScenarioError::Kind kind);

// Unknown keys anywhere are rejected. Relative paths inside the document
// (workload.jobs_file) are resolved against `base_dir`.
Scenario parse_scenario(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
Scenario load_scenario(const std::filesystem::path& path);

// Strict job-list reader, the inverse of jobs_to_json.
std::vector<JobRequest> parse_job_list(const nlohmann::json& doc, const std::string& location = "");

}  // namespace clusterplan

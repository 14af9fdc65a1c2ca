#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "clusterplan/scenario.hpp"

namespace clusterplan {
namespace {

using nlohmann::json;

const std::filesystem::path kScenarios = CLUSTERPLAN_SCENARIO_DIR;

json small_cluster() {
  return json::parse(R"({
    "cluster": {
      "gpu_types": [{"name": "a6000", "vram_gb": 48}],
      "nodes": [{"id": "C2", "gpus": [{"type": "a6000", "count": 3}], "ram_gb": 512}]
    },
    "groups": [{"name": "faculty"}]
  })");
}

ScenarioError parse_error(const json& doc) {
  try {
    parse_scenario(doc);
  } catch (const ScenarioError& e) {
    return e;
  }
  ADD_FAILURE() << "expected ScenarioError";
  return ScenarioError(ScenarioError::Kind::SchemaError, "", "");
}

TEST(Scenario, ShippedLabClusterValidates) {
  const Scenario s = load_scenario(kScenarios / "lab_cluster.json");
  ASSERT_TRUE(s.cluster);
  EXPECT_EQ(s.cluster->nodes().size(), 3u);
  EXPECT_EQ(s.cluster->total_gpus(), 11);
  const GroupPolicy* students = s.cluster->find_group("students");
  ASSERT_NE(students, nullptr);
  EXPECT_EQ(students->max_running_jobs, 1);
  EXPECT_TRUE(students->allows_node("C1"));
  EXPECT_FALSE(students->allows_node("C2"));
  EXPECT_EQ(s.mode, SchedMode::Strict);
}

TEST(Scenario, AllShippedScenariosLoad) {
  int count = 0;
  for (const auto& entry : std::filesystem::directory_iterator(kScenarios)) {
    if (entry.path().extension() != ".json") continue;
    SCOPED_TRACE(entry.path().string());
    EXPECT_NO_THROW(load_scenario(entry.path()));
    ++count;
  }
  EXPECT_GE(count, 4);
}

TEST(Scenario, FlatRateCostSection) {
  const Scenario s = load_scenario(kScenarios / "flat_rate_costs.json");
  ASSERT_TRUE(s.cost);
  EXPECT_EQ(s.cost->onprem.procurement_eur, 24'500);
  EXPECT_EQ(s.cost->offerings.size(), 2u);
  EXPECT_EQ(s.cost->months, 16);
  ASSERT_TRUE(std::holds_alternative<FixedUsage>(s.cost->usage));
  EXPECT_EQ(std::get<FixedUsage>(s.cost->usage).gpu_hours_per_month, 1843);
}

TEST(Scenario, CalibratedPerGpuHourRate) {
  const Scenario s = load_scenario(kScenarios / "cost_sweep.json");
  ASSERT_TRUE(s.cost);
  const auto& per_use = s.cost->offerings.front();
  ASSERT_FALSE(per_use.is_flat());
  EXPECT_DOUBLE_EQ(std::get<PerGpuHourPricing>(per_use.pricing).eur_per_gpu_hour, 2057.0 / 1843.0);
}

TEST(Scenario, UnknownKeyReportsLocation) {
  json doc = small_cluster();
  doc["cluster"]["nodes"][0]["gpus_"] = 1;
  const auto e = parse_error(doc);
  EXPECT_EQ(e.kind(), ScenarioError::Kind::SchemaError);
  EXPECT_EQ(e.location(), "/cluster/nodes/0/gpus_");

  doc = small_cluster();
  doc["extra"] = true;
  EXPECT_EQ(parse_error(doc).location(), "/extra");
}

TEST(Scenario, WrongTypeIsSchemaError) {
  json doc = small_cluster();
  doc["cluster"]["nodes"][0]["ram_gb"] = "lots";
  const auto e = parse_error(doc);
  EXPECT_EQ(e.kind(), ScenarioError::Kind::SchemaError);
  EXPECT_EQ(e.location(), "/cluster/nodes/0/ram_gb");
}

TEST(Scenario, NegativeMeanInterarrivalIsValidationError) {
  json doc = small_cluster();
  doc["workload"] = json::parse(R"({"generate": {
    "seed": 1, "n_jobs": 5,
    "interarrival": {"distribution": "exponential", "mean_min": -1},
    "duration_min": {"lo": 1, "hi": 2},
    "gpu_count": [{"value": 1, "weight": 1}],
    "groups": [{"value": "faculty", "weight": 1}]
  }})");
  const auto e = parse_error(doc);
  EXPECT_EQ(e.kind(), ScenarioError::Kind::ValidationError);
  EXPECT_EQ(e.location(), "/workload/generate/interarrival/mean_min");
}

TEST(Scenario, InvalidClusterIsValidationError) {
  json doc = small_cluster();
  doc["cluster"]["nodes"][0]["gpus"][0]["type"] = "h100";
  const auto e = parse_error(doc);
  EXPECT_EQ(e.kind(), ScenarioError::Kind::ValidationError);
  EXPECT_EQ(e.location(), "/cluster");
}

TEST(Scenario, WorkloadNeedsExactlyOneSource) {
  json doc = small_cluster();
  doc["workload"] = json::object();
  EXPECT_EQ(parse_error(doc).kind(), ScenarioError::Kind::SchemaError);
}

TEST(Scenario, InlineJobsRoundTrip) {
  json doc = small_cluster();
  doc["workload"]["jobs"] = json::parse(R"([
    {"id": 1, "user": "u", "group": "faculty", "gpus": 2, "gpu_type": "a6000",
     "mem_gb": 8, "duration_min": 60, "submit_min": 0}
  ])");
  const Scenario s = parse_scenario(doc);
  const auto& jobs = std::get<std::vector<JobRequest>>(*s.workload);
  ASSERT_EQ(jobs.size(), 1u);
  EXPECT_EQ(jobs[0].gpu_count, 2);
  EXPECT_EQ(jobs_to_json(jobs), doc["workload"]["jobs"]);
}

TEST(Scenario, JobsFileResolvedRelativeToScenario) {
  const auto dir = std::filesystem::temp_directory_path() / "clusterplan_scenario_test";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "jobs.json") << R"([{"id": 3, "user": "u", "group": "faculty", "gpus": 1,
      "gpu_type": "any", "mem_gb": 0, "duration_min": 5, "submit_min": 7}])";
  json doc = small_cluster();
  doc["workload"]["jobs_file"] = "jobs.json";
  std::ofstream(dir / "scenario.json") << doc.dump();
  const Scenario s = load_scenario(dir / "scenario.json");
  const auto& jobs = std::get<std::vector<JobRequest>>(*s.workload);
  ASSERT_EQ(jobs.size(), 1u);
  EXPECT_EQ(jobs[0].submit_time_min, 7);
  std::filesystem::remove_all(dir);
}

TEST(Scenario, MissingFileAndBadSyntax) {
  try {
    load_scenario(kScenarios / "does_not_exist.json");
    FAIL();
  } catch (const ScenarioError& e) {
    EXPECT_EQ(e.kind(), ScenarioError::Kind::FileNotFound);
  }

  const auto path = std::filesystem::temp_directory_path() / "clusterplan_bad.json";
  std::ofstream(path) << "{\"cluster\": [";
  try {
    load_scenario(path);
    FAIL();
  } catch (const ScenarioError& e) {
    EXPECT_EQ(e.kind(), ScenarioError::Kind::SyntaxError);
  }
  std::filesystem::remove(path);
}

TEST(Scenario, UnknownSchedulerMode) {
  json doc = small_cluster();
  doc["scheduler"]["mode"] = "fifo";
  const auto e = parse_error(doc);
  EXPECT_EQ(e.kind(), ScenarioError::Kind::SchemaError);
  EXPECT_EQ(e.location(), "/scheduler/mode");
}

}  // namespace
}  // namespace clusterplan

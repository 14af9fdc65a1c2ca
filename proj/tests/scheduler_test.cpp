#include <gtest/gtest.h>

#include "clusterplan/scheduler.hpp"
#include "test_support.hpp"

namespace clusterplan {
namespace {

using testing::job;

class LabScheduler : public ::testing::Test {
 protected:
  ValidatedCluster cluster = validate_cluster(testing::lab_spec());
  const GroupPolicy& faculty = *cluster.find_group("faculty");
  const GroupPolicy& students = *cluster.find_group("students");
};

TEST_F(LabScheduler, StudentRequestingA6000IsDenied) {
  auto decision = authorize(job(1, 1, 60, 0, "students", "a6000"), students, cluster);
  EXPECT_FALSE(decision.allowed);
  EXPECT_EQ(decision.reason, DenyReason::GpuTypeForbidden);
}

TEST_F(LabScheduler, FacultyMayUseAnyTypeAndCount) {
  for (const char* type : {"any", "rtx2080ti"}) {
    for (int count = 0; count <= 8; ++count) {
      EXPECT_TRUE(authorize(job(1, count, 60, 0, "faculty", type), faculty, cluster).allowed)
          << type << " x" << count;
    }
  }
  for (int count = 0; count <= 3; ++count) {
    EXPECT_TRUE(authorize(job(1, count, 60, 0, "faculty", "a6000"), faculty, cluster).allowed);
  }
}

TEST_F(LabScheduler, MemoryOnlyJobAllowedUnderDefaultPolicy) {
  auto decision = authorize(job(1, 0, 30, 0, "faculty", "any", 100), faculty, cluster);
  EXPECT_TRUE(decision.allowed);
  EXPECT_EQ(decision.reason, DenyReason::None);
}

TEST_F(LabScheduler, UnknownGroup) {
  try {
    authorize(job(1, 1, 60, 0, "visitors"), cluster);
    FAIL();
  } catch (const SchedError& e) {
    EXPECT_EQ(e.code(), SchedErrc::UnknownGroup);
  }
}

TEST_F(LabScheduler, LimitsAndUnsatisfiableRequests) {
  GroupPolicy limited = faculty;
  limited.max_gpus_per_job = 2;
  limited.max_runtime_hours = 1.5;
  EXPECT_EQ(authorize(job(1, 3, 60, 0, "faculty"), limited, cluster).reason,
            DenyReason::TooManyGpus);
  EXPECT_EQ(authorize(job(1, 1, 91, 0, "faculty"), limited, cluster).reason,
            DenyReason::RuntimeExceeded);
  EXPECT_TRUE(authorize(job(1, 1, 90, 0, "faculty"), limited, cluster).allowed);
  // 9 GPUs fit on no single node; jobs never span nodes.
  EXPECT_EQ(authorize(job(1, 9, 60, 0, "faculty"), faculty, cluster).reason,
            DenyReason::Unsatisfiable);
  EXPECT_EQ(authorize(job(1, 4, 60, 0, "faculty", "a6000"), faculty, cluster).reason,
            DenyReason::Unsatisfiable);
  EXPECT_EQ(authorize(job(1, 1, 60, 0, "faculty", "any", 1000), faculty, cluster).reason,
            DenyReason::Unsatisfiable);
  EXPECT_EQ(authorize(job(1, 1, 60, 0, "faculty", "h100"), faculty, cluster).reason,
            DenyReason::GpuTypeForbidden);
}

TEST_F(LabScheduler, StudentsDeferredByConcurrencyCap) {
  QueueState state(cluster);
  state.submit(job(1, 1, 60, 0, "students"));
  state.submit(job(2, 1, 60, 0, "students"));
  auto started = state.schedule_step(0, SchedMode::Skip);
  ASSERT_EQ(started.size(), 1u);
  EXPECT_EQ(started[0].job_id, 1);
  EXPECT_EQ(state.pending().size(), 1u);
  EXPECT_TRUE(state.schedule_step(10, SchedMode::Skip).empty());

  state.release(1, 60);
  started = state.schedule_step(60, SchedMode::Skip);
  ASSERT_EQ(started.size(), 1u);
  EXPECT_EQ(started[0].job_id, 2);
  EXPECT_EQ(started[0].placement.node_id, "C1");
}

TEST_F(LabScheduler, InterfaceNodeIsNeverATarget) {
  QueueState state(cluster);
  state.submit(job(1, 0, 60, 0, "faculty", "any", 4));
  auto started = state.schedule_step(0, SchedMode::Strict);
  ASSERT_EQ(started.size(), 1u);
  EXPECT_NE(started[0].placement.node_id, "I");
  EXPECT_EQ(started[0].placement.gpu_type, "");
}

TEST(Submit, PreservesOrderAndRejectsDuplicates) {
  auto cluster = validate_cluster(testing::uniform_spec(1, 4));
  QueueState state(cluster);
  state.submit(job(1, 1, 10));
  state.submit(job(2, 1, 10));
  ASSERT_EQ(state.pending().size(), 2u);
  EXPECT_EQ(state.pending()[0].job_id, 1);
  EXPECT_EQ(state.pending()[1].job_id, 2);

  try {
    state.submit(job(1, 2, 5));
    FAIL();
  } catch (const SchedError& e) {
    EXPECT_EQ(e.code(), SchedErrc::DuplicateJobId);
  }
  EXPECT_EQ(state.pending().size(), 2u);
  EXPECT_EQ(state.pending()[0].gpu_count, 1);
}

TEST(Submit, RejectsInvalidJobs) {
  auto cluster = validate_cluster(testing::uniform_spec(1, 4));
  QueueState state(cluster);
  EXPECT_THROW(state.submit(job(1, -1, 10)), SchedError);
  EXPECT_THROW(state.submit(job(2, 1, 0)), SchedError);
  EXPECT_THROW(state.submit(job(3, 1, 10, 0, "nobody")), SchedError);
  EXPECT_TRUE(state.pending().empty());
}

// Hand trace: one 8-GPU node with 4 GPUs busy; the head wants 8, the next
// job wants 2. STRICT blocks behind the head, SKIP starts the second job.
TEST(ScheduleStep, StrictBlocksSkipBackfills) {
  auto cluster = validate_cluster(testing::uniform_spec(1, 8));
  for (SchedMode mode : {SchedMode::Strict, SchedMode::Skip}) {
    QueueState state(cluster);
    state.submit(job(1, 4, 100));
    ASSERT_EQ(state.schedule_step(0, mode).size(), 1u);
    state.submit(job(2, 8, 10, 1));
    state.submit(job(3, 2, 10, 1));
    auto started = state.schedule_step(1, mode);
    if (mode == SchedMode::Strict) {
      EXPECT_TRUE(started.empty());
      EXPECT_EQ(state.pending().size(), 2u);
    } else {
      ASSERT_EQ(started.size(), 1u);
      EXPECT_EQ(started[0].job_id, 3);
      EXPECT_EQ(state.pending().front().job_id, 2);
    }
  }
}

TEST(ScheduleStep, EmptyQueueIsANoOp) {
  auto cluster = validate_cluster(testing::uniform_spec(2, 2));
  QueueState state(cluster);
  EXPECT_TRUE(state.schedule_step(0, SchedMode::Strict).empty());
  EXPECT_TRUE(state.running().empty());
  EXPECT_EQ(state.nodes()[0].free_gpus.at("gpu"), 2);
}

TEST(Place, PrefersLeastLoadedNode) {
  auto cluster = validate_cluster(testing::uniform_spec(2, 2));
  QueueState state(cluster);
  state.submit(job(1, 1, 100));
  ASSERT_EQ(state.schedule_step(0, SchedMode::Strict)[0].placement.node_id, "A");
  // A has one busy GPU, B none.
  auto placement = place(job(2, 1, 10), state, cluster.groups()[0]);
  ASSERT_TRUE(placement);
  EXPECT_EQ(placement->node_id, "B");
}

TEST(Place, SingleNodeWithExactCapacity) {
  auto cluster = validate_cluster(testing::uniform_spec(1, 3, 32));
  QueueState state(cluster);
  auto placement = place(job(1, 3, 10, 0, "default", "gpu", 32), state, cluster.groups()[0]);
  ASSERT_TRUE(placement);
  EXPECT_EQ(placement->node_id, "A");
  EXPECT_EQ(placement->gpu_type, "gpu");
  EXPECT_FALSE(place(job(2, 4, 10), state, cluster.groups()[0]));
}

// Four one-GPU jobs onto two empty two-GPU nodes: A, B, A, B.
TEST(Place, SpreadsLoadAcrossNodes) {
  auto cluster = validate_cluster(testing::uniform_spec(2, 2));
  QueueState state(cluster);
  for (JobId id = 1; id <= 4; ++id) state.submit(job(id, 1, 10));
  auto started = state.schedule_step(0, SchedMode::Strict);
  ASSERT_EQ(started.size(), 4u);
  std::vector<std::string> nodes;
  for (const auto& a : started) nodes.push_back(a.placement.node_id);
  EXPECT_EQ(nodes, (std::vector<std::string>{"A", "B", "A", "B"}));
  EXPECT_EQ(state.find_node("A")->busy_gpus(), 2);
  EXPECT_EQ(state.find_node("B")->busy_gpus(), 2);
}

TEST(LeastLoaded, TieBreaksOnNodeId) {
  std::vector<NodeLoad> loads{{"C", 1}, {"B", 0}, {"A", 0}};
  EXPECT_EQ(least_loaded(loads), 2u);
  EXPECT_FALSE(least_loaded({}));
}

TEST(LeastLoaded, InvariantUnderUniformShift) {
  std::mt19937_64 rng(3);
  const std::vector<std::string> names{"a", "b", "c", "d", "e"};
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<NodeLoad> loads;
    for (const auto& n : names) {
      if (rng() % 3 != 0) loads.push_back({n, static_cast<int>(rng() % 6)});
    }
    const int shift = static_cast<int>(rng() % 10);
    auto shifted = loads;
    for (auto& l : shifted) l.busy_gpus += shift;
    EXPECT_EQ(least_loaded(loads), least_loaded(shifted));
  }
}

TEST(Release, RestoresInstalledCapacity) {
  auto cluster = validate_cluster(testing::uniform_spec(1, 4, 64));
  QueueState state(cluster);
  state.submit(job(1, 3, 10, 0, "default", "any", 16));
  state.schedule_step(0, SchedMode::Strict);
  EXPECT_EQ(state.nodes()[0].free_gpus.at("gpu"), 1);
  state.release(1, 10);
  EXPECT_EQ(state.nodes()[0].free_gpus.at("gpu"), 4);
  EXPECT_DOUBLE_EQ(state.nodes()[0].free_mem_gb, 64);
  ASSERT_TRUE(state.finished().contains(1));
  EXPECT_EQ(state.finished().at(1).end_min, 10);
  EXPECT_FALSE(state.check_invariants());
}

// Hand trace: 4 GPUs, job 1 holds 3; head job 2 needs 2 and waits until job
// 1 is released.
TEST(Release, UnblocksHeadJob) {
  auto cluster = validate_cluster(testing::uniform_spec(1, 4));
  QueueState state(cluster);
  state.submit(job(1, 3, 10));
  state.schedule_step(0, SchedMode::Strict);
  state.submit(job(2, 2, 10, 5));
  EXPECT_TRUE(state.schedule_step(5, SchedMode::Strict).empty());
  state.release(1, 10);
  auto started = state.schedule_step(10, SchedMode::Strict);
  ASSERT_EQ(started.size(), 1u);
  EXPECT_EQ(started[0].job_id, 2);
}

TEST(Release, ErrorCodes) {
  auto cluster = validate_cluster(testing::uniform_spec(1, 1));
  QueueState state(cluster);
  state.submit(job(1, 1, 10));
  state.submit(job(2, 1, 10));
  state.schedule_step(0, SchedMode::Strict);
  auto code_of = [&](JobId id) {
    try {
      state.release(id, 1);
    } catch (const SchedError& e) {
      return e.code();
    }
    return SchedErrc::InvalidJob;
  };
  EXPECT_EQ(code_of(42), SchedErrc::UnknownJob);
  EXPECT_EQ(code_of(2), SchedErrc::NotRunning);
  state.release(1, 10);
  EXPECT_EQ(code_of(1), SchedErrc::NotRunning);
}

TEST(ScheduleStep, AnyTypeUsesSmallestPermittedTypeName) {
  ClusterSpec spec;
  spec.gpu_types = {{"zeta", 8}, {"alpha", 8}};
  spec.nodes = {{"N", {{"zeta", 2}, {"alpha", 2}}, "", 64, 0, 0}};
  GroupPolicy zeta_only = testing::open_policy("z");
  zeta_only.allowed_gpu_types = std::set<std::string>{"zeta"};
  spec.groups = {testing::open_policy("default"), zeta_only};
  auto cluster = validate_cluster(spec);
  QueueState state(cluster);
  state.submit(job(1, 2, 10));
  state.submit(job(2, 1, 10, 0, "z"));
  auto started = state.schedule_step(0, SchedMode::Strict);
  ASSERT_EQ(started.size(), 2u);
  EXPECT_EQ(started[0].placement.gpu_type, "alpha");
  EXPECT_EQ(started[1].placement.gpu_type, "zeta");
}

}  // namespace
}  // namespace clusterplan

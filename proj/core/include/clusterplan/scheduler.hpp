#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "clusterplan/cluster.hpp"
#include "clusterplan/error.hpp"

namespace clusterplan {

using JobId = std::int64_t;
using Minutes = std::int64_t;

inline constexpr std::string_view kAnyGpuType = "any";

enum class SchedMode {
  // Head-of-line blocking: nothing behind a blocked head may start.
  Strict,
  // Start every pending job that fits, in queue order.
  Skip,
};

std::string_view to_string(SchedMode mode);
std::optional<SchedMode> parse_sched_mode(std::string_view text);

struct JobRequest {
  JobId job_id = 0;
  std::string user;
  std::string group;
  int gpu_count = 0;
  std::string gpu_type{kAnyGpuType};
  double mem_gb = 0.0;
  Minutes duration_min = 1;
  Minutes submit_time_min = 0;

  bool wants_any_gpu_type() const { return gpu_type == kAnyGpuType; }
  bool operator==(const JobRequest&) const = default;
};

enum class DenyReason {
  None,
  // No allowed node hosts a permitted GPU of the requested type.
  GpuTypeForbidden,
  TooManyGpus,
  RuntimeExceeded,
  // Permitted, but larger than any single allowed node (GPUs or memory).
  Unsatisfiable,
};

std::string_view to_string(DenyReason reason);

struct PolicyDecision {
  bool allowed = true;
  DenyReason reason = DenyReason::None;

  static PolicyDecision allow() { return {}; }
  static PolicyDecision deny(DenyReason why) { return {false, why}; }
};

enum class SchedErrc { UnknownGroup, DuplicateJobId, UnknownJob, NotRunning, InvalidJob };

std::string_view to_string(SchedErrc code);

class SchedError : public Error {
 public:
  SchedError(SchedErrc code, const std::string& what);
  SchedErrc code() const { return code_; }

 private:
  SchedErrc code_;
};

// Free and installed resources of one node.
struct NodeState {
  std::string node_id;
  std::map<std::string, int> installed_gpus;
  std::map<std::string, int> free_gpus;
  double installed_mem_gb = 0.0;
  double free_mem_gb = 0.0;

  int installed_gpu_total() const;
  int busy_gpus() const;
};

struct Placement {
  std::string node_id;
  // Empty for zero-GPU jobs.
  std::string gpu_type;

  bool operator==(const Placement&) const = default;
};

struct RunningJob {
  JobRequest job;
  Placement placement;
  Minutes start_min = 0;
};

struct FinishedJob {
  JobRequest job;
  Placement placement;
  Minutes start_min = 0;
  Minutes end_min = 0;
};

struct Assignment {
  JobId job_id = 0;
  Placement placement;

  bool operator==(const Assignment&) const = default;
};

// Queue and resource bookkeeping for one cluster. Not thread-safe; the
// simulation engine serializes access. `cluster` must outlive the state.
class QueueState {
 public:
  explicit QueueState(const ValidatedCluster& cluster);

  const ValidatedCluster& cluster() const { return *cluster_; }

  // Appends an (already authorized) job at the tail of the pending queue.
  // Throws SchedError{DuplicateJobId|UnknownGroup|InvalidJob}; the state is
  // unchanged on throw.
  void submit(JobRequest job);

  // Starts jobs at `now_min` according to `mode` and returns the starts in
  // the order they were made.
  std::vector<Assignment> schedule_step(Minutes now_min, SchedMode mode);

  // Moves a running job to finished and returns its resources to the pool.
  void release(JobId job_id, Minutes now_min);

  const std::deque<JobRequest>& pending() const { return pending_; }
  const std::map<JobId, RunningJob>& running() const { return running_; }
  const std::map<JobId, FinishedJob>& finished() const { return finished_; }
  const std::vector<NodeState>& nodes() const { return nodes_; }
  const NodeState* find_node(std::string_view node_id) const;

  int running_in_group(std::string_view group) const;

  // Re-derives free resources from the running set and compares against the
  // incremental bookkeeping. Returns a description of the first violation.
  std::optional<std::string> check_invariants() const;

 private:
  void start(const JobRequest& job, const Placement& placement, Minutes now_min);

  const ValidatedCluster* cluster_;
  std::vector<NodeState> nodes_;
  std::deque<JobRequest> pending_;
  std::map<JobId, RunningJob> running_;
  std::map<JobId, FinishedJob> finished_;
  std::map<std::string, int, std::less<>> running_per_group_;
};

// Static policy check. Concurrency caps are not enforced here: they defer
// jobs in schedule_step instead of rejecting them.
PolicyDecision authorize(const JobRequest& job, const GroupPolicy& policy,
                         const ValidatedCluster& cluster);

// Looks up the job's group; throws SchedError{UnknownGroup}.
PolicyDecision authorize(const JobRequest& job, const ValidatedCluster& cluster);

struct NodeLoad {
  std::string_view node_id;
  int busy_gpus = 0;
};

// Index of the least-loaded entry, ties broken by the smallest node id.
std::optional<std::size_t> least_loaded(std::span<const NodeLoad> candidates);

// Chooses a node for `job` given current free resources, or nullopt when
// nothing fits right now. A job never spans nodes.
std::optional<Placement> place(const JobRequest& job, const QueueState& state,
                               const GroupPolicy& policy);

}  // namespace clusterplan

#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "clusterplan/cluster.hpp"
#include "clusterplan/scheduler.hpp"

namespace clusterplan {

// Month length used for every hours <-> months conversion (730 h).
inline constexpr Minutes kMinutesPerMonth = 43'800;

enum class EventKind { Submit, Start, Complete, Deny };

std::string_view to_string(EventKind kind);

struct TraceEvent {
  Minutes time_min = 0;
  EventKind kind = EventKind::Submit;
  JobId job_id = 0;
  // Set for START and COMPLETE.
  std::string node_id;
  // GPU type actually used; not part of the CSV export.
  std::string gpu_type;

  bool operator==(const TraceEvent&) const = default;
};

// Installed resources of one node, snapshotted into the trace so it can be
// replayed without the cluster object.
struct NodeCapacity {
  std::map<std::string, int> gpus;
  double mem_gb = 0.0;

  int total_gpus() const;
  bool operator==(const NodeCapacity&) const = default;
};

struct SimulationTrace {
  std::vector<TraceEvent> events;
  // Observation window [start_min, horizon_min].
  Minutes start_min = 0;
  Minutes horizon_min = 0;
  std::map<JobId, JobRequest> jobs;
  std::map<std::string, NodeCapacity> nodes;

  static SimulationTrace empty_for(const ValidatedCluster& cluster, Minutes start_min,
                                   Minutes horizon_min);

  bool operator==(const SimulationTrace&) const = default;
};

struct WaitStats {
  double min_min = 0.0;
  double mean_min = 0.0;
  double max_min = 0.0;
};

struct UtilizationReport {
  double gpu_hours = 0.0;
  double total_gpu_capacity_hours = 0.0;
  double grade_of_operation = 0.0;
  double mean_monthly_usage_hours = 0.0;
  std::map<std::string, double> per_node_busy_fraction;
  WaitStats wait_time;
  std::size_t jobs_started = 0;
  std::size_t jobs_completed = 0;
  std::size_t jobs_denied = 0;
};

class TraceError : public Error {
 public:
  using Error::Error;
};

// Event-driven run. At each timestamp: all COMPLETEs (ascending job id), then
// all SUBMITs (ascending job id, denied jobs logged as DENY), then exactly
// one schedule_step. Without a horizon the run continues until the queue
// drains and the horizon becomes the time of the last event.
SimulationTrace run(const ValidatedCluster& cluster, std::vector<JobRequest> jobs,
                    SchedMode mode, std::optional<Minutes> horizon_min = std::nullopt);

// Throws TraceError on a malformed trace. Busy time is clipped to the
// observation window; jobs still running at the horizon are truncated there.
UtilizationReport utilization(const SimulationTrace& trace,
                              Minutes month_length_min = kMinutesPerMonth);

// Replays START/COMPLETE events and checks per-node, per-type capacity and
// memory at every timestamp. Returns the first violation found.
std::optional<std::string> replay_capacity_check(const SimulationTrace& trace);

// CSV with header time_min,kind,job_id,node_id.
void write_trace_csv(std::ostream& out, const SimulationTrace& trace);

}  // namespace clusterplan

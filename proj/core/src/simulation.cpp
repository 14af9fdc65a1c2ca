#include "clusterplan/simulation.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <utility>

#include <fmt/format.h>

namespace clusterplan {

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::Submit: return "SUBMIT";
    case EventKind::Start: return "START";
    case EventKind::Complete: return "COMPLETE";
    case EventKind::Deny: return "DENY";
  }
  return "UNKNOWN";
}

int NodeCapacity::total_gpus() const {
  int total = 0;
  for (const auto& [type, count] : gpus) total += count;
  return total;
}

SimulationTrace SimulationTrace::empty_for(const ValidatedCluster& cluster, Minutes start_min,
                                           Minutes horizon_min) {
  SimulationTrace trace;
  trace.start_min = start_min;
  trace.horizon_min = horizon_min;
  for (const auto& node : cluster.nodes()) {
    NodeCapacity capacity;
    for (const auto& slot : node.gpus) {
      if (slot.count > 0) capacity.gpus[slot.type] += slot.count;
    }
    capacity.mem_gb = node.ram_gb;
    trace.nodes.emplace(node.node_id, std::move(capacity));
  }
  return trace;
}

SimulationTrace run(const ValidatedCluster& cluster, std::vector<JobRequest> jobs,
                    SchedMode mode, std::optional<Minutes> horizon_min) {
  std::sort(jobs.begin(), jobs.end(), [](const JobRequest& a, const JobRequest& b) {
    return std::pair(a.submit_time_min, a.job_id) < std::pair(b.submit_time_min, b.job_id);
  });

  SimulationTrace trace = SimulationTrace::empty_for(cluster, 0, 0);
  for (const auto& job : jobs) {
    if (job.submit_time_min < 0) {
      throw SchedError(SchedErrc::InvalidJob,
                       fmt::format("job {} has negative submit time", job.job_id));
    }
    if (!trace.jobs.emplace(job.job_id, job).second) {
      throw SchedError(SchedErrc::DuplicateJobId,
                       fmt::format("job {} appears twice in the workload", job.job_id));
    }
  }

  constexpr Minutes kNever = std::numeric_limits<Minutes>::max();
  QueueState state(cluster);
  std::set<std::pair<Minutes, JobId>> completions;
  std::size_t next_submit = 0;
  Minutes last_event = 0;

  while (true) {
    Minutes now = kNever;
    if (next_submit < jobs.size()) now = jobs[next_submit].submit_time_min;
    if (!completions.empty()) now = std::min(now, completions.begin()->first);
    if (now == kNever || (horizon_min && now > *horizon_min)) break;

    while (!completions.empty() && completions.begin()->first == now) {
      JobId id = completions.begin()->second;
      completions.erase(completions.begin());
      const RunningJob& running = state.running().at(id);
      trace.events.push_back(
          {now, EventKind::Complete, id, running.placement.node_id, running.placement.gpu_type});
      state.release(id, now);
    }

    while (next_submit < jobs.size() && jobs[next_submit].submit_time_min == now) {
      const JobRequest& job = jobs[next_submit++];
      trace.events.push_back({now, EventKind::Submit, job.job_id, {}, {}});
      if (authorize(job, cluster).allowed) {
        state.submit(job);
      } else {
        trace.events.push_back({now, EventKind::Deny, job.job_id, {}, {}});
      }
    }

    for (auto& started : state.schedule_step(now, mode)) {
      const JobRequest& job = state.running().at(started.job_id).job;
      completions.emplace(now + job.duration_min, started.job_id);
      trace.events.push_back({now, EventKind::Start, started.job_id,
                              std::move(started.placement.node_id),
                              std::move(started.placement.gpu_type)});
    }
    last_event = now;
  }

  trace.horizon_min = horizon_min.value_or(last_event);
  return trace;
}

namespace {

struct JobTimeline {
  std::optional<Minutes> submit;
  std::optional<Minutes> start;
  std::optional<Minutes> complete;
  bool denied = false;
  std::string node_id;
  std::string gpu_type;
};

std::map<JobId, JobTimeline> build_timelines(const SimulationTrace& trace) {
  std::map<JobId, JobTimeline> timelines;
  Minutes previous = std::numeric_limits<Minutes>::min();
  for (const auto& event : trace.events) {
    auto fail = [&](std::string_view what) {
      throw TraceError(fmt::format("malformed trace at t={} job {}: {}", event.time_min,
                                   event.job_id, what));
    };
    if (event.time_min < previous) fail("events out of time order");
    previous = event.time_min;

    auto job = trace.jobs.find(event.job_id);
    if (job == trace.jobs.end()) fail("unknown job id");
    JobTimeline& line = timelines[event.job_id];

    switch (event.kind) {
      case EventKind::Submit:
        if (line.submit) fail("duplicate SUBMIT");
        line.submit = event.time_min;
        break;
      case EventKind::Deny:
        if (!line.submit || line.start || line.denied) fail("DENY without a pending SUBMIT");
        line.denied = true;
        break;
      case EventKind::Start:
        if (!line.submit || line.denied) fail("START without an accepted SUBMIT");
        if (line.start) fail("duplicate START");
        if (!trace.nodes.contains(event.node_id)) fail("START on unknown node");
        line.start = event.time_min;
        line.node_id = event.node_id;
        line.gpu_type = event.gpu_type;
        break;
      case EventKind::Complete:
        if (!line.start) fail("COMPLETE without START");
        if (line.complete) fail("duplicate COMPLETE");
        if (event.time_min - *line.start != job->second.duration_min) {
          fail("COMPLETE - START differs from the job duration");
        }
        line.complete = event.time_min;
        break;
    }
  }
  return timelines;
}

}  // namespace

UtilizationReport utilization(const SimulationTrace& trace, Minutes month_length_min) {
  if (month_length_min <= 0) throw TraceError("month length must be positive");
  if (trace.horizon_min < trace.start_min) throw TraceError("horizon precedes window start");

  const auto timelines = build_timelines(trace);
  const Minutes window = trace.horizon_min - trace.start_min;

  UtilizationReport report;
  std::map<std::string, double> node_gpu_minutes;
  double gpu_minutes = 0.0;
  double wait_sum = 0.0;
  bool first_wait = true;

  for (const auto& [id, line] : timelines) {
    if (line.denied) ++report.jobs_denied;
    if (!line.start) continue;
    ++report.jobs_started;
    if (line.complete) ++report.jobs_completed;

    const JobRequest& job = trace.jobs.at(id);
    Minutes end = line.complete.value_or(trace.horizon_min);
    Minutes lo = std::max(*line.start, trace.start_min);
    Minutes hi = std::min(end, trace.horizon_min);
    if (hi > lo) {
      double busy = static_cast<double>(job.gpu_count) * static_cast<double>(hi - lo);
      gpu_minutes += busy;
      node_gpu_minutes[line.node_id] += busy;
    }

    double wait = static_cast<double>(*line.start - *line.submit);
    wait_sum += wait;
    if (first_wait) {
      report.wait_time.min_min = report.wait_time.max_min = wait;
      first_wait = false;
    } else {
      report.wait_time.min_min = std::min(report.wait_time.min_min, wait);
      report.wait_time.max_min = std::max(report.wait_time.max_min, wait);
    }
  }
  if (report.jobs_started > 0) {
    report.wait_time.mean_min = wait_sum / static_cast<double>(report.jobs_started);
  }

  int total_gpus = 0;
  for (const auto& [node_id, capacity] : trace.nodes) {
    total_gpus += capacity.total_gpus();
    double node_capacity = static_cast<double>(capacity.total_gpus()) * static_cast<double>(window);
    report.per_node_busy_fraction[node_id] =
        node_capacity > 0.0 ? node_gpu_minutes[node_id] / node_capacity : 0.0;
  }

  report.gpu_hours = gpu_minutes / 60.0;
  report.total_gpu_capacity_hours =
      static_cast<double>(total_gpus) * static_cast<double>(window) / 60.0;
  report.grade_of_operation = report.total_gpu_capacity_hours > 0.0
                                  ? report.gpu_hours / report.total_gpu_capacity_hours
                                  : 0.0;
  report.mean_monthly_usage_hours =
      window > 0 ? gpu_minutes / static_cast<double>(window) *
                       static_cast<double>(month_length_min) / 60.0
                 : 0.0;
  return report;
}

std::optional<std::string> replay_capacity_check(const SimulationTrace& trace) {
  std::map<std::string, std::map<std::string, int>> used_gpus;
  std::map<std::string, double> used_mem;
  std::map<JobId, std::pair<std::string, std::string>> placed;

  // Within one timestamp, completions are applied before starts.
  auto apply = [&](const TraceEvent& event) -> std::optional<std::string> {
    auto job = trace.jobs.find(event.job_id);
    if (job == trace.jobs.end()) return fmt::format("unknown job {}", event.job_id);
    auto node = trace.nodes.find(event.node_id);
    if (node == trace.nodes.end()) return fmt::format("unknown node '{}'", event.node_id);
    const int count = job->second.gpu_count;
    std::string type = event.gpu_type;
    if (type.empty() && count > 0) {
      if (job->second.wants_any_gpu_type()) {
        return fmt::format("job {} started without a GPU type", event.job_id);
      }
      type = job->second.gpu_type;
    }

    if (event.kind == EventKind::Start) {
      placed[event.job_id] = {event.node_id, type};
      used_mem[event.node_id] += job->second.mem_gb;
      if (count > 0) {
        int& used = used_gpus[event.node_id][type];
        used += count;
        auto installed = node->second.gpus.find(type);
        int limit = installed == node->second.gpus.end() ? 0 : installed->second;
        if (used > limit) {
          return fmt::format("t={} node {} type {}: {} GPUs busy > {} installed", event.time_min,
                             event.node_id, type, used, limit);
        }
      }
      if (used_mem[event.node_id] > node->second.mem_gb + 1e-9) {
        return fmt::format("t={} node {}: memory over-committed", event.time_min, event.node_id);
      }
    } else {
      auto it = placed.find(event.job_id);
      if (it == placed.end()) return fmt::format("job {} completed without start", event.job_id);
      used_mem[it->second.first] -= job->second.mem_gb;
      if (count > 0) used_gpus[it->second.first][it->second.second] -= count;
      placed.erase(it);
    }
    return std::nullopt;
  };

  std::size_t i = 0;
  while (i < trace.events.size()) {
    std::size_t j = i;
    while (j < trace.events.size() && trace.events[j].time_min == trace.events[i].time_min) ++j;
    for (EventKind pass : {EventKind::Complete, EventKind::Start}) {
      for (std::size_t k = i; k < j; ++k) {
        if (trace.events[k].kind != pass) continue;
        if (auto problem = apply(trace.events[k])) return problem;
      }
    }
    i = j;
  }
  return std::nullopt;
}

void write_trace_csv(std::ostream& out, const SimulationTrace& trace) {
  out << "time_min,kind,job_id,node_id\n";
  for (const auto& event : trace.events) {
    out << fmt::format("{},{},{},{}\n", event.time_min, to_string(event.kind), event.job_id,
                       event.node_id);
  }
}

}  // namespace clusterplan

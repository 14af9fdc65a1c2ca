#include "clusterplan/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include <fmt/format.h>

namespace clusterplan {

std::string_view to_string(SchedMode mode) {
  return mode == SchedMode::Strict ? "strict" : "skip";
}

std::optional<SchedMode> parse_sched_mode(std::string_view text) {
  if (text == "strict" || text == "STRICT") return SchedMode::Strict;
  if (text == "skip" || text == "SKIP") return SchedMode::Skip;
  return std::nullopt;
}

std::string_view to_string(DenyReason reason) {
  switch (reason) {
    case DenyReason::None: return "None";
    case DenyReason::GpuTypeForbidden: return "GpuTypeForbidden";
    case DenyReason::TooManyGpus: return "TooManyGpus";
    case DenyReason::RuntimeExceeded: return "RuntimeExceeded";
    case DenyReason::Unsatisfiable: return "Unsatisfiable";
  }
  return "Unknown";
}

std::string_view to_string(SchedErrc code) {
  switch (code) {
    case SchedErrc::UnknownGroup: return "UnknownGroup";
    case SchedErrc::DuplicateJobId: return "DuplicateJobId";
    case SchedErrc::UnknownJob: return "UnknownJob";
    case SchedErrc::NotRunning: return "NotRunning";
    case SchedErrc::InvalidJob: return "InvalidJob";
  }
  return "Unknown";
}

SchedError::SchedError(SchedErrc code, const std::string& what)
    : Error(fmt::format("{}: {}", to_string(code), what)), code_(code) {}

int NodeState::installed_gpu_total() const {
  int total = 0;
  for (const auto& [type, count] : installed_gpus) total += count;
  return total;
}

int NodeState::busy_gpus() const {
  int busy = 0;
  for (const auto& [type, count] : installed_gpus) busy += count - free_gpus.at(type);
  return busy;
}

namespace {

bool type_matches(const JobRequest& job, std::string_view type) {
  return job.wants_any_gpu_type() || job.gpu_type == type;
}

// Permitted GPU types on `node` that match the request, in name order.
std::vector<std::string> permitted_types(const JobRequest& job, const GroupPolicy& policy,
                                         const NodeSpec& node) {
  std::vector<std::string> out;
  for (const auto& slot : node.gpus) {
    if (slot.count > 0 && policy.allows_gpu_type(slot.type) && type_matches(job, slot.type)) {
      out.push_back(slot.type);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

PolicyDecision authorize(const JobRequest& job, const GroupPolicy& policy,
                         const ValidatedCluster& cluster) {
  // Nodes without GPUs are never placement targets.
  std::vector<const NodeSpec*> targets;
  for (const auto& node : cluster.nodes()) {
    if (node.total_gpus() > 0 && policy.allows_node(node.node_id)) targets.push_back(&node);
  }

  if (job.gpu_count > 0) {
    bool any_permitted = std::any_of(targets.begin(), targets.end(), [&](const NodeSpec* node) {
      return !permitted_types(job, policy, *node).empty();
    });
    if (!any_permitted) return PolicyDecision::deny(DenyReason::GpuTypeForbidden);
  }
  if (policy.max_gpus_per_job && job.gpu_count > *policy.max_gpus_per_job) {
    return PolicyDecision::deny(DenyReason::TooManyGpus);
  }
  if (policy.max_runtime_hours &&
      static_cast<double>(job.duration_min) > 60.0 * *policy.max_runtime_hours) {
    return PolicyDecision::deny(DenyReason::RuntimeExceeded);
  }

  bool fits_somewhere = std::any_of(targets.begin(), targets.end(), [&](const NodeSpec* node) {
    if (node->ram_gb < job.mem_gb) return false;
    if (job.gpu_count == 0) return true;
    for (const auto& type : permitted_types(job, policy, *node)) {
      if (node->gpu_count(type) >= job.gpu_count) return true;
    }
    return false;
  });
  if (!fits_somewhere) return PolicyDecision::deny(DenyReason::Unsatisfiable);
  return PolicyDecision::allow();
}

PolicyDecision authorize(const JobRequest& job, const ValidatedCluster& cluster) {
  const GroupPolicy* policy = cluster.find_group(job.group);
  if (policy == nullptr) {
    throw SchedError(SchedErrc::UnknownGroup,
                     fmt::format("job {} references group '{}'", job.job_id, job.group));
  }
  return authorize(job, *policy, cluster);
}

std::optional<std::size_t> least_loaded(std::span<const NodeLoad> candidates) {
  if (candidates.empty()) return std::nullopt;
  auto best = std::min_element(candidates.begin(), candidates.end(),
                               [](const NodeLoad& a, const NodeLoad& b) {
                                 return std::tie(a.busy_gpus, a.node_id) <
                                        std::tie(b.busy_gpus, b.node_id);
                               });
  return static_cast<std::size_t>(best - candidates.begin());
}

std::optional<Placement> place(const JobRequest& job, const QueueState& state,
                               const GroupPolicy& policy) {
  std::vector<NodeLoad> loads;
  std::vector<std::string> chosen_types;
  for (const auto& node : state.nodes()) {
    if (node.installed_gpu_total() == 0 || !policy.allows_node(node.node_id)) continue;
    if (node.free_mem_gb < job.mem_gb) continue;

    std::optional<std::string> type;
    if (job.gpu_count == 0) {
      type = std::string();
    } else {
      for (const auto& [name, free] : node.free_gpus) {
        if (free >= job.gpu_count && policy.allows_gpu_type(name) && type_matches(job, name)) {
          type = name;
          break;
        }
      }
    }
    if (!type) continue;
    loads.push_back({node.node_id, node.busy_gpus()});
    chosen_types.push_back(std::move(*type));
  }

  auto index = least_loaded(loads);
  if (!index) return std::nullopt;
  return Placement{std::string(loads[*index].node_id), chosen_types[*index]};
}

QueueState::QueueState(const ValidatedCluster& cluster) : cluster_(&cluster) {
  for (const auto& spec : cluster.nodes()) {
    NodeState node;
    node.node_id = spec.node_id;
    for (const auto& slot : spec.gpus) {
      if (slot.count <= 0) continue;
      node.installed_gpus[slot.type] += slot.count;
    }
    node.free_gpus = node.installed_gpus;
    node.installed_mem_gb = spec.ram_gb;
    node.free_mem_gb = spec.ram_gb;
    nodes_.push_back(std::move(node));
  }
}

const NodeState* QueueState::find_node(std::string_view node_id) const {
  auto it = std::find_if(nodes_.begin(), nodes_.end(),
                         [&](const NodeState& n) { return n.node_id == node_id; });
  return it == nodes_.end() ? nullptr : &*it;
}

int QueueState::running_in_group(std::string_view group) const {
  auto it = running_per_group_.find(group);
  return it == running_per_group_.end() ? 0 : it->second;
}

void QueueState::submit(JobRequest job) {
  if (job.gpu_count < 0 || job.duration_min <= 0 || job.mem_gb < 0.0) {
    throw SchedError(SchedErrc::InvalidJob,
                     fmt::format("job {} has a negative or zero resource field", job.job_id));
  }
  if (cluster_->find_group(job.group) == nullptr) {
    throw SchedError(SchedErrc::UnknownGroup,
                     fmt::format("job {} references group '{}'", job.job_id, job.group));
  }
  bool known = running_.contains(job.job_id) || finished_.contains(job.job_id) ||
               std::any_of(pending_.begin(), pending_.end(),
                           [&](const JobRequest& p) { return p.job_id == job.job_id; });
  if (known) {
    throw SchedError(SchedErrc::DuplicateJobId, fmt::format("job {} already submitted", job.job_id));
  }
  pending_.push_back(std::move(job));
}

void QueueState::start(const JobRequest& job, const Placement& placement, Minutes now_min) {
  auto node = std::find_if(nodes_.begin(), nodes_.end(),
                           [&](const NodeState& n) { return n.node_id == placement.node_id; });
  if (job.gpu_count > 0) node->free_gpus.at(placement.gpu_type) -= job.gpu_count;
  node->free_mem_gb -= job.mem_gb;
  ++running_per_group_[job.group];
  running_.emplace(job.job_id, RunningJob{job, placement, now_min});
}

std::vector<Assignment> QueueState::schedule_step(Minutes now_min, SchedMode mode) {
  std::vector<Assignment> started;
  for (auto it = pending_.begin(); it != pending_.end();) {
    const GroupPolicy& policy = *cluster_->find_group(it->group);
    bool capped = policy.max_running_jobs && running_in_group(it->group) >= *policy.max_running_jobs;
    std::optional<Placement> placement;
    if (!capped) placement = place(*it, *this, policy);

    if (!placement) {
      if (mode == SchedMode::Strict) break;
      ++it;
      continue;
    }
    start(*it, *placement, now_min);
    started.push_back({it->job_id, std::move(*placement)});
    it = pending_.erase(it);
  }
  return started;
}

void QueueState::release(JobId job_id, Minutes now_min) {
  auto it = running_.find(job_id);
  if (it == running_.end()) {
    bool pending = std::any_of(pending_.begin(), pending_.end(),
                               [&](const JobRequest& p) { return p.job_id == job_id; });
    if (pending || finished_.contains(job_id)) {
      throw SchedError(SchedErrc::NotRunning, fmt::format("job {} is not running", job_id));
    }
    throw SchedError(SchedErrc::UnknownJob, fmt::format("job {} is unknown", job_id));
  }

  RunningJob job = std::move(it->second);
  running_.erase(it);
  auto node = std::find_if(nodes_.begin(), nodes_.end(), [&](const NodeState& n) {
    return n.node_id == job.placement.node_id;
  });
  if (job.job.gpu_count > 0) node->free_gpus.at(job.placement.gpu_type) += job.job.gpu_count;
  node->free_mem_gb += job.job.mem_gb;
  if (--running_per_group_[job.job.group] == 0) running_per_group_.erase(job.job.group);
  finished_.emplace(job_id, FinishedJob{std::move(job.job), std::move(job.placement),
                                        job.start_min, now_min});
}

std::optional<std::string> QueueState::check_invariants() const {
  for (const auto& node : nodes_) {
    std::map<std::string, int> used;
    double used_mem = 0.0;
    for (const auto& [id, job] : running_) {
      if (job.placement.node_id != node.node_id) continue;
      if (job.job.gpu_count > 0) used[job.placement.gpu_type] += job.job.gpu_count;
      used_mem += job.job.mem_gb;
    }
    for (const auto& [type, installed] : node.installed_gpus) {
      int free = node.free_gpus.at(type);
      if (free < 0 || free > installed) {
        return fmt::format("node {} type {}: free {} outside [0, {}]", node.node_id, type, free,
                           installed);
      }
      if (free + used[type] != installed) {
        return fmt::format("node {} type {}: free {} + busy {} != installed {}", node.node_id,
                           type, free, used[type], installed);
      }
      used.erase(type);
    }
    if (!used.empty()) {
      return fmt::format("node {} runs jobs on uninstalled type {}", node.node_id,
                         used.begin()->first);
    }
    if (node.free_mem_gb < -1e-9 ||
        std::abs(node.free_mem_gb + used_mem - node.installed_mem_gb) > 1e-6) {
      return fmt::format("node {}: memory accounting broken", node.node_id);
    }
  }

  std::map<std::string, int> per_group;
  for (const auto& [id, job] : running_) ++per_group[job.job.group];
  if (per_group.size() != running_per_group_.size()) return "stale per-group running counts";
  for (const auto& [group, count] : per_group) {
    if (running_in_group(group) != count) {
      return fmt::format("group {}: running count {} != {}", group, running_in_group(group), count);
    }
    const GroupPolicy* policy = cluster_->find_group(group);
    if (policy && policy->max_running_jobs && count > *policy->max_running_jobs) {
      return fmt::format("group {}: {} running exceeds cap {}", group, count,
                         *policy->max_running_jobs);
    }
  }

  std::set<JobId> seen;
  for (const auto& job : pending_) {
    if (!seen.insert(job.job_id).second) return fmt::format("job {} listed twice", job.job_id);
  }
  for (const auto& [id, job] : running_) {
    if (!seen.insert(id).second) return fmt::format("job {} listed twice", id);
  }
  for (const auto& [id, job] : finished_) {
    if (!seen.insert(id).second) return fmt::format("job {} listed twice", id);
  }
  return std::nullopt;
}

}  // namespace clusterplan

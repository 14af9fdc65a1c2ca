#include "clusterplan/cluster.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include <fmt/format.h>

namespace clusterplan {

int NodeSpec::total_gpus() const {
  return std::accumulate(gpus.begin(), gpus.end(), 0,
                         [](int acc, const GpuSlot& slot) { return acc + slot.count; });
}

int NodeSpec::gpu_count(std::string_view type) const {
  int total = 0;
  for (const auto& slot : gpus) {
    if (slot.type == type) total += slot.count;
  }
  return total;
}

bool GroupPolicy::allows_node(std::string_view node_id) const {
  return !allowed_nodes || allowed_nodes->contains(std::string(node_id));
}

bool GroupPolicy::allows_gpu_type(std::string_view type) const {
  return !allowed_gpu_types || allowed_gpu_types->contains(std::string(type));
}

std::string_view to_string(IssueKind kind) {
  switch (kind) {
    case IssueKind::NoNodes: return "NoNodes";
    case IssueKind::DuplicateNodeId: return "DuplicateNodeId";
    case IssueKind::DuplicateGpuType: return "DuplicateGpuType";
    case IssueKind::InvalidGpuType: return "InvalidGpuType";
    case IssueKind::UnknownGpuType: return "UnknownGpuType";
    case IssueKind::NegativeCount: return "NegativeCount";
    case IssueKind::NegativeCapacity: return "NegativeCapacity";
    case IssueKind::DuplicateGroup: return "DuplicateGroup";
    case IssueKind::UnknownPolicyReference: return "UnknownPolicyReference";
    case IssueKind::NonPositiveLimit: return "NonPositiveLimit";
  }
  return "Unknown";
}

namespace {

std::string join_messages(const std::vector<ValidationIssue>& issues) {
  std::string out = "invalid cluster:";
  for (const auto& issue : issues) {
    out += fmt::format("\n  {}: {}", to_string(issue.kind), issue.message);
  }
  return out;
}

}  // namespace

ValidationError::ValidationError(std::vector<ValidationIssue> issues)
    : Error(join_messages(issues)), issues_(std::move(issues)) {}

bool ValidationError::has(IssueKind kind) const {
  return std::any_of(issues_.begin(), issues_.end(),
                     [kind](const ValidationIssue& i) { return i.kind == kind; });
}

const NodeSpec* ValidatedCluster::find_node(std::string_view node_id) const {
  auto it = std::find_if(spec_.nodes.begin(), spec_.nodes.end(),
                         [&](const NodeSpec& n) { return n.node_id == node_id; });
  return it == spec_.nodes.end() ? nullptr : &*it;
}

const GroupPolicy* ValidatedCluster::find_group(std::string_view group_name) const {
  auto it = std::find_if(spec_.groups.begin(), spec_.groups.end(),
                         [&](const GroupPolicy& g) { return g.group_name == group_name; });
  return it == spec_.groups.end() ? nullptr : &*it;
}

const GpuType* ValidatedCluster::find_gpu_type(std::string_view name) const {
  auto it = std::find_if(spec_.gpu_types.begin(), spec_.gpu_types.end(),
                         [&](const GpuType& t) { return t.name == name; });
  return it == spec_.gpu_types.end() ? nullptr : &*it;
}

int ValidatedCluster::total_gpus() const {
  int total = 0;
  for (const auto& node : spec_.nodes) total += node.total_gpus();
  return total;
}

std::vector<ValidationIssue> check_cluster(const ClusterSpec& spec) {
  std::vector<ValidationIssue> issues;
  auto report = [&](IssueKind kind, std::string subject, std::string message) {
    issues.push_back({kind, std::move(subject), std::move(message)});
  };

  std::set<std::string, std::less<>> type_names;
  for (const auto& type : spec.gpu_types) {
    if (type.name.empty()) {
      report(IssueKind::InvalidGpuType, type.name, "GPU type with empty name");
    } else if (!type_names.insert(type.name).second) {
      report(IssueKind::DuplicateGpuType, type.name,
             fmt::format("GPU type '{}' defined more than once", type.name));
    }
    if (!(type.vram_gb > 0.0)) {
      report(IssueKind::InvalidGpuType, type.name,
             fmt::format("GPU type '{}' has non-positive vram_gb", type.name));
    }
  }

  if (spec.nodes.empty()) {
    report(IssueKind::NoNodes, "", "cluster must contain at least one node");
  }

  std::set<std::string, std::less<>> node_ids;
  std::set<std::string, std::less<>> installed_types;
  for (const auto& node : spec.nodes) {
    if (!node_ids.insert(node.node_id).second) {
      report(IssueKind::DuplicateNodeId, node.node_id,
             fmt::format("node id '{}' is not unique", node.node_id));
    }
    std::set<std::string, std::less<>> seen_on_node;
    for (const auto& slot : node.gpus) {
      if (!type_names.contains(slot.type)) {
        report(IssueKind::UnknownGpuType, slot.type,
               fmt::format("node '{}' references undefined GPU type '{}'", node.node_id,
                           slot.type));
      }
      if (!seen_on_node.insert(slot.type).second) {
        report(IssueKind::DuplicateGpuType, slot.type,
               fmt::format("node '{}' lists GPU type '{}' twice", node.node_id, slot.type));
      }
      if (slot.count < 0) {
        report(IssueKind::NegativeCount, node.node_id,
               fmt::format("node '{}' has negative count for '{}'", node.node_id, slot.type));
      } else if (slot.count > 0) {
        installed_types.insert(slot.type);
      }
    }
    if (node.ram_gb < 0.0 || node.storage_gb < 0.0 || node.max_power_watts < 0.0) {
      report(IssueKind::NegativeCapacity, node.node_id,
             fmt::format("node '{}' has a negative capacity field", node.node_id));
    }
  }

  std::set<std::string, std::less<>> group_names;
  for (const auto& group : spec.groups) {
    if (!group_names.insert(group.group_name).second) {
      report(IssueKind::DuplicateGroup, group.group_name,
             fmt::format("group '{}' defined more than once", group.group_name));
    }
    if (group.allowed_nodes) {
      for (const auto& id : *group.allowed_nodes) {
        if (!node_ids.contains(id)) {
          report(IssueKind::UnknownPolicyReference, id,
                 fmt::format("group '{}' allows unknown node '{}'", group.group_name, id));
        }
      }
    }
    if (group.allowed_gpu_types) {
      for (const auto& type : *group.allowed_gpu_types) {
        if (!installed_types.contains(type)) {
          report(IssueKind::UnknownPolicyReference, type,
                 fmt::format("group '{}' allows GPU type '{}' that no node hosts",
                             group.group_name, type));
        }
      }
    }
    auto check_limit = [&](const char* field, bool positive) {
      if (!positive) {
        report(IssueKind::NonPositiveLimit, group.group_name,
               fmt::format("group '{}' has non-positive {}", group.group_name, field));
      }
    };
    if (group.max_running_jobs) check_limit("max_running_jobs", *group.max_running_jobs > 0);
    if (group.max_gpus_per_job) check_limit("max_gpus_per_job", *group.max_gpus_per_job > 0);
    if (group.max_runtime_hours) check_limit("max_runtime_hours", *group.max_runtime_hours > 0.0);
  }
  return issues;
}

ValidatedCluster validate_cluster(ClusterSpec spec) {
  auto issues = check_cluster(spec);
  if (!issues.empty()) throw ValidationError(std::move(issues));
  return ValidatedCluster(std::move(spec));
}

std::map<std::string, int> gpu_inventory(std::span<const NodeSpec> nodes) {
  std::map<std::string, int> inventory;
  for (const auto& node : nodes) {
    for (const auto& slot : node.gpus) inventory[slot.type] += slot.count;
  }
  std::erase_if(inventory, [](const auto& entry) { return entry.second == 0; });
  return inventory;
}

std::map<std::string, int> gpu_inventory(const ValidatedCluster& cluster) {
  return gpu_inventory(std::span<const NodeSpec>(cluster.nodes()));
}

}  // namespace clusterplan

#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "clusterplan/error.hpp"

namespace clusterplan {

struct GpuType {
  std::string name;
  double vram_gb = 0.0;

  bool operator==(const GpuType&) const = default;
};

// One homogeneous block of GPUs inside a node.
struct GpuSlot {
  std::string type;
  int count = 0;

  bool operator==(const GpuSlot&) const = default;
};

struct NodeSpec {
  std::string node_id;
  std::vector<GpuSlot> gpus;
  std::string cpu_desc;
  double ram_gb = 0.0;
  double storage_gb = 0.0;
  // Whole-node draw; 0 means "not modeled".
  double max_power_watts = 0.0;

  int total_gpus() const;
  int gpu_count(std::string_view type) const;

  bool operator==(const NodeSpec&) const = default;
};

// Per-group restrictions. An empty optional means ALL / UNLIMITED.
struct GroupPolicy {
  std::string group_name;
  std::optional<std::set<std::string>> allowed_nodes;
  std::optional<std::set<std::string>> allowed_gpu_types;
  std::optional<int> max_running_jobs;
  std::optional<int> max_gpus_per_job;
  std::optional<double> max_runtime_hours;

  bool allows_node(std::string_view node_id) const;
  bool allows_gpu_type(std::string_view type) const;

  bool operator==(const GroupPolicy&) const = default;
};

struct ClusterSpec {
  std::vector<GpuType> gpu_types;
  std::vector<NodeSpec> nodes;
  std::vector<GroupPolicy> groups;

  bool operator==(const ClusterSpec&) const = default;
};

enum class IssueKind {
  NoNodes,
  DuplicateNodeId,
  DuplicateGpuType,
  InvalidGpuType,
  UnknownGpuType,
  NegativeCount,
  NegativeCapacity,
  DuplicateGroup,
  UnknownPolicyReference,
  NonPositiveLimit,
};

std::string_view to_string(IssueKind kind);

struct ValidationIssue {
  IssueKind kind;
  // The offending identifier, e.g. the dangling node id "C9".
  std::string subject;
  std::string message;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<ValidationIssue> issues);

  const std::vector<ValidationIssue>& issues() const { return issues_; }
  bool has(IssueKind kind) const;

 private:
  std::vector<ValidationIssue> issues_;
};

// A cluster whose invariants have been checked. Immutable; share freely
// between readers.
class ValidatedCluster {
 public:
  const ClusterSpec& spec() const { return spec_; }
  const std::vector<NodeSpec>& nodes() const { return spec_.nodes; }
  const std::vector<GroupPolicy>& groups() const { return spec_.groups; }

  const NodeSpec* find_node(std::string_view node_id) const;
  const GroupPolicy* find_group(std::string_view group_name) const;
  const GpuType* find_gpu_type(std::string_view name) const;

  int total_gpus() const;

  bool operator==(const ValidatedCluster&) const = default;

 private:
  friend ValidatedCluster validate_cluster(ClusterSpec spec);
  explicit ValidatedCluster(ClusterSpec spec) : spec_(std::move(spec)) {}

  ClusterSpec spec_;
};

// Every invariant violation in `spec`, in a stable order. Empty when valid.
std::vector<ValidationIssue> check_cluster(const ClusterSpec& spec);

// Throws ValidationError listing all violations.
ValidatedCluster validate_cluster(ClusterSpec spec);

// Total GPUs per type across `nodes`; types with a zero total are omitted.
std::map<std::string, int> gpu_inventory(std::span<const NodeSpec> nodes);
std::map<std::string, int> gpu_inventory(const ValidatedCluster& cluster);

}  // namespace clusterplan

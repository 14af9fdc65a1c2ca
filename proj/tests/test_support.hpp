#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "clusterplan/cluster.hpp"
#include "clusterplan/scheduler.hpp"

namespace clusterplan::testing {

// Nodes I (no GPUs), C1 (8x rtx2080ti), C2 (3x a6000) with faculty/students.
inline ClusterSpec lab_spec() {
  ClusterSpec spec;
  spec.gpu_types = {{"rtx2080ti", 11}, {"a6000", 48}};
  spec.nodes = {
      {"I", {}, "1x AMD EPYC 7302P", 126, 460, 0},
      {"C1", {{"rtx2080ti", 8}}, "2x Intel Xeon Silver 4114", 230, 8230, 2600},
      {"C2", {{"a6000", 3}}, "2x AMD EPYC 7452", 512, 8240, 0},
  };
  GroupPolicy faculty{"faculty", std::nullopt, std::nullopt, std::nullopt, std::nullopt,
                      std::nullopt};
  GroupPolicy students{"students", std::set<std::string>{"C1"}, std::nullopt, 1, std::nullopt,
                       std::nullopt};
  spec.groups = {faculty, students};
  return spec;
}

inline GroupPolicy open_policy(std::string name) {
  GroupPolicy p;
  p.group_name = std::move(name);
  return p;
}

// Cluster of identical single-type nodes named A, B, C, ...
inline ClusterSpec uniform_spec(int nodes, int gpus_per_node, double ram_gb = 64) {
  ClusterSpec spec;
  spec.gpu_types = {{"gpu", 16}};
  for (int i = 0; i < nodes; ++i) {
    spec.nodes.push_back({std::string(1, static_cast<char>('A' + i)), {{"gpu", gpus_per_node}},
                          "", ram_gb, 0, 0});
  }
  spec.groups = {open_policy("default")};
  return spec;
}

inline JobRequest job(JobId id, int gpus, Minutes duration, Minutes submit = 0,
                      std::string group = "default", std::string type = "any", double mem = 0) {
  JobRequest j;
  j.job_id = id;
  j.user = group + "_1";
  j.group = std::move(group);
  j.gpu_count = gpus;
  j.gpu_type = std::move(type);
  j.mem_gb = mem;
  j.duration_min = duration;
  j.submit_time_min = submit;
  return j;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Random small instance: 1-3 nodes, up to two GPU types, 1-2 groups with
// optional caps/partitions, up to `max_jobs` jobs.
struct Instance {
  ClusterSpec spec;
  std::vector<JobRequest> jobs;
};

inline Instance random_instance(std::mt19937_64& rng, int max_nodes = 3, int max_jobs = 10) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  Instance inst;
  inst.spec.gpu_types = {{"t0", 8}, {"t1", 24}};
  const int n_nodes = pick(1, max_nodes);
  for (int i = 0; i < n_nodes; ++i) {
    NodeSpec node;
    node.node_id = "n" + std::to_string(i);
    int c0 = pick(0, 4);
    int c1 = pick(0, 2);
    if (c0 > 0) node.gpus.push_back({"t0", c0});
    if (c1 > 0) node.gpus.push_back({"t1", c1});
    node.ram_gb = pick(8, 64);
    inst.spec.nodes.push_back(std::move(node));
  }

  const int n_groups = pick(1, 2);
  for (int g = 0; g < n_groups; ++g) {
    GroupPolicy p = open_policy("g" + std::to_string(g));
    if (pick(0, 2) == 0) p.max_running_jobs = pick(1, 2);
    if (pick(0, 3) == 0) p.allowed_nodes = std::set<std::string>{inst.spec.nodes.front().node_id};
    if (pick(0, 4) == 0) p.max_gpus_per_job = pick(1, 3);
    if (pick(0, 4) == 0) p.max_runtime_hours = 0.25;
    inst.spec.groups.push_back(std::move(p));
  }

  const int n_jobs = pick(0, max_jobs);
  for (int j = 0; j < n_jobs; ++j) {
    const char* types[] = {"any", "any", "t0", "t1"};
    inst.jobs.push_back(job(j + 1, pick(0, 4), pick(1, 30), pick(0, 40),
                            "g" + std::to_string(pick(0, n_groups - 1)), types[pick(0, 3)],
                            pick(0, 3) * 8.0));
  }
  return inst;
}

}  // namespace clusterplan::testing

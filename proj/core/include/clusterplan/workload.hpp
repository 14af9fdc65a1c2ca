#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "clusterplan/error.hpp"
#include "clusterplan/scheduler.hpp"

namespace clusterplan {

template <typename T>
struct Weighted {
  T value{};
  double weight = 0.0;

  bool operator==(const Weighted&) const = default;
};

// Inclusive integer range.
struct UniformRange {
  std::int64_t lo = 0;
  std::int64_t hi = 0;

  bool operator==(const UniformRange&) const = default;
};

enum class InterarrivalKind { Exponential, Fixed };

struct WorkloadParams {
  std::uint64_t seed = 1;
  // Exactly one of n_jobs / horizon_min bounds the generated list.
  std::optional<std::int64_t> n_jobs;
  std::optional<Minutes> horizon_min;
  InterarrivalKind interarrival = InterarrivalKind::Exponential;
  double mean_interarrival_min = 60.0;
  UniformRange duration_min{60, 60};
  std::vector<Weighted<int>> gpu_count{{1, 1.0}};
  std::vector<Weighted<std::string>> groups;
  UniformRange mem_gb{0, 0};
  std::vector<Weighted<std::string>> gpu_types{{std::string(kAnyGpuType), 1.0}};
  int users_per_group = 1;

  bool operator==(const WorkloadParams&) const = default;
};

class WorkloadError : public Error {
 public:
  using Error::Error;
};

// Throws WorkloadError (invalid distribution) describing the first problem.
void validate_workload_params(const WorkloadParams& params);

// Deterministic in `params.seed`. Arrival times are non-decreasing and job ids
// ascend from 1 in arrival order.
//
// The stream is std::mt19937_64 (fully specified by the C++ standard); all
// sampling on top of it is done here rather than with <random>
// distributions, whose algorithms are implementation-defined:
//   uniform integer in [lo, hi]  rejection sampling on the raw 64-bit output
//   uniform real in [0, 1)       top 53 bits scaled by 2^-53
//   exponential(mean)            -mean * log1p(-u)
//   weighted choice              first index whose running weight sum exceeds u * total
std::vector<JobRequest> generate_workload(const WorkloadParams& params);

// JSON job list: [{"id", "user", "group", "gpus", "gpu_type", "mem_gb",
// "duration_min", "submit_min"}, ...].
nlohmann::json jobs_to_json(const std::vector<JobRequest>& jobs);

}  // namespace clusterplan

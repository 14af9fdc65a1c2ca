#include "clusterplan/workload.hpp"

#include <cmath>
#include <limits>
#include <random>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace clusterplan {

namespace {

// Portable sampling on top of mt19937_64; see generate_workload.
class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : engine_(seed) {}

  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return lo + static_cast<std::int64_t>(engine_());
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % span;
    std::uint64_t draw;
    do {
      draw = engine_();
    } while (draw >= limit);
    return lo + static_cast<std::int64_t>(draw % span);
  }

  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double exponential(double mean) { return -mean * std::log1p(-uniform01()); }

  template <typename T>
  const T& choose(const std::vector<Weighted<T>>& options) {
    double total = 0.0;
    for (const auto& o : options) total += o.weight;
    const double target = uniform01() * total;
    double running = 0.0;
    for (const auto& o : options) {
      running += o.weight;
      if (target < running) return o.value;
    }
    // Rounding can leave target == total; fall back to the last positive weight.
    for (auto it = options.rbegin(); it != options.rend(); ++it) {
      if (it->weight > 0.0) return it->value;
    }
    return options.back().value;
  }

 private:
  std::mt19937_64 engine_;
};

template <typename T>
void check_weights(const std::vector<Weighted<T>>& options, std::string_view what) {
  if (options.empty()) throw WorkloadError(fmt::format("{}: no choices given", what));
  double total = 0.0;
  for (const auto& o : options) {
    if (!(o.weight >= 0.0) || !std::isfinite(o.weight)) {
      throw WorkloadError(fmt::format("{}: weights must be finite and non-negative", what));
    }
    total += o.weight;
  }
  if (!(total > 0.0)) throw WorkloadError(fmt::format("{}: weights must sum to > 0", what));
}

}  // namespace

void validate_workload_params(const WorkloadParams& p) {
  if (p.n_jobs.has_value() == p.horizon_min.has_value()) {
    throw WorkloadError("exactly one of n_jobs and horizon_min must be set");
  }
  if (p.n_jobs && *p.n_jobs < 0) throw WorkloadError("n_jobs must be non-negative");
  if (p.horizon_min && *p.horizon_min < 0) throw WorkloadError("horizon_min must be non-negative");
  if (!(p.mean_interarrival_min > 0.0) || !std::isfinite(p.mean_interarrival_min)) {
    throw WorkloadError("mean interarrival must be positive");
  }
  if (p.duration_min.lo < 1 || p.duration_min.hi < p.duration_min.lo) {
    throw WorkloadError("duration range must satisfy 1 <= lo <= hi");
  }
  if (p.mem_gb.lo < 0 || p.mem_gb.hi < p.mem_gb.lo) {
    throw WorkloadError("mem_gb range must satisfy 0 <= lo <= hi");
  }
  check_weights(p.gpu_count, "gpu_count");
  for (const auto& o : p.gpu_count) {
    if (o.value < 0) throw WorkloadError("gpu_count values must be non-negative");
  }
  check_weights(p.groups, "groups");
  check_weights(p.gpu_types, "gpu_types");
  if (p.users_per_group < 1) throw WorkloadError("users_per_group must be >= 1");
}

std::vector<JobRequest> generate_workload(const WorkloadParams& params) {
  validate_workload_params(params);

  Sampler rng(params.seed);
  std::vector<JobRequest> jobs;
  double clock = 0.0;
  for (JobId id = 1;; ++id) {
    if (params.n_jobs && static_cast<std::int64_t>(jobs.size()) >= *params.n_jobs) break;

    clock += params.interarrival == InterarrivalKind::Fixed
                 ? params.mean_interarrival_min
                 : rng.exponential(params.mean_interarrival_min);
    const auto submit = static_cast<Minutes>(std::floor(clock));
    if (params.horizon_min && submit > *params.horizon_min) break;

    JobRequest job;
    job.job_id = id;
    job.submit_time_min = submit;
    job.duration_min = rng.uniform_int(params.duration_min.lo, params.duration_min.hi);
    job.gpu_count = rng.choose(params.gpu_count);
    job.group = rng.choose(params.groups);
    job.user = fmt::format("{}_{}", job.group, rng.uniform_int(1, params.users_per_group));
    job.mem_gb = static_cast<double>(rng.uniform_int(params.mem_gb.lo, params.mem_gb.hi));
    job.gpu_type = rng.choose(params.gpu_types);
    jobs.push_back(std::move(job));
  }
  return jobs;
}

nlohmann::json jobs_to_json(const std::vector<JobRequest>& jobs) {
  auto out = nlohmann::json::array();
  for (const auto& job : jobs) {
    out.push_back({
        {"id", job.job_id},
        {"user", job.user},
        {"group", job.group},
        {"gpus", job.gpu_count},
        {"gpu_type", job.gpu_type},
        {"mem_gb", job.mem_gb},
        {"duration_min", job.duration_min},
        {"submit_min", job.submit_time_min},
    });
  }
  return out;
}

}  // namespace clusterplan

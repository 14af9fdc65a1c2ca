#include "clusterplan/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include <fmt/format.h>

namespace clusterplan {

using nlohmann::json;

ScenarioError::ScenarioError(Kind kind, std::string location, const std::string& message)
    : Error(fmt::format("{} at {}: {}", to_string(kind), location.empty() ? "/" : location,
                        message)),
      kind_(kind),
      location_(std::move(location)) {}

std::string_view to_string(ScenarioError::Kind kind) {
  switch (kind) {
    case ScenarioError::Kind::FileNotFound: return "FileNotFound";
    case ScenarioError::Kind::SyntaxError: return "SyntaxError";
    case ScenarioError::Kind::SchemaError: return "SchemaError";
    case ScenarioError::Kind::ValidationError: return "ValidationError";
  }
  return "Error";
}

namespace {

[[noreturn]] void schema_error(const std::string& where, const std::string& what) {
  throw ScenarioError(ScenarioError::Kind::SchemaError, where, what);
}

[[noreturn]] void invalid(const std::string& where, const std::string& what) {
  throw ScenarioError(ScenarioError::Kind::ValidationError, where, what);
}

std::string child(const std::string& path, std::string_view key) {
  // JSON pointer escaping.
  std::string escaped;
  for (char c : key) {
    if (c == '~') escaped += "~0";
    else if (c == '/') escaped += "~1";
    else escaped += c;
  }
  return path + "/" + escaped;
}

std::string child(const std::string& path, std::size_t index) {
  return path + "/" + std::to_string(index);
}

double as_number(const json& j, const std::string& where) {
  if (!j.is_number()) schema_error(where, "expected a number");
  double value = j.get<double>();
  if (!std::isfinite(value)) schema_error(where, "expected a finite number");
  return value;
}

std::int64_t as_int(const json& j, const std::string& where) {
  if (!j.is_number_integer()) schema_error(where, "expected an integer");
  return j.get<std::int64_t>();
}

std::string as_string(const json& j, const std::string& where) {
  if (!j.is_string()) schema_error(where, "expected a string");
  return j.get<std::string>();
}

const json& as_array(const json& j, const std::string& where) {
  if (!j.is_array()) schema_error(where, "expected an array");
  return j;
}

// Object view that remembers which keys were read, so that leftovers can be
// reported as unknown.
class Object {
 public:
  Object(const json& j, std::string path) : json_(j), path_(std::move(path)) {
    if (!j.is_object()) schema_error(path_, "expected an object");
  }

  const std::string& path() const { return path_; }
  std::string at(std::string_view key) const { return child(path_, key); }

  const json* find(std::string_view key) {
    seen_.insert(std::string(key));
    auto it = json_.find(key);
    return it == json_.end() ? nullptr : &*it;
  }

  // Absent and null both mean "not given".
  const json* optional(std::string_view key) {
    const json* j = find(key);
    return (j == nullptr || j->is_null()) ? nullptr : j;
  }

  const json& require(std::string_view key) {
    const json* j = find(key);
    if (j == nullptr) schema_error(at(key), "missing required key");
    return *j;
  }

  double number(std::string_view key) { return as_number(require(key), at(key)); }
  double number_or(std::string_view key, double fallback) {
    const json* j = optional(key);
    return j ? as_number(*j, at(key)) : fallback;
  }
  std::int64_t integer(std::string_view key) { return as_int(require(key), at(key)); }
  std::string string(std::string_view key) { return as_string(require(key), at(key)); }
  std::string string_or(std::string_view key, std::string fallback) {
    const json* j = optional(key);
    return j ? as_string(*j, at(key)) : std::move(fallback);
  }

  void finish() const {
    for (const auto& [key, value] : json_.items()) {
      if (!seen_.contains(key)) schema_error(child(path_, key), "unknown key");
    }
  }

 private:
  const json& json_;
  std::string path_;
  std::set<std::string> seen_;
};

std::set<std::string> string_set(const json& j, const std::string& where) {
  std::set<std::string> out;
  const json& array = as_array(j, where);
  for (std::size_t i = 0; i < array.size(); ++i) out.insert(as_string(array[i], child(where, i)));
  return out;
}

ClusterSpec parse_cluster(const json& j, const std::string& where) {
  Object obj(j, where);
  ClusterSpec spec;

  if (const json* types = obj.optional("gpu_types")) {
    const auto path = obj.at("gpu_types");
    for (std::size_t i = 0; i < as_array(*types, path).size(); ++i) {
      Object t((*types)[i], child(path, i));
      spec.gpu_types.push_back({t.string("name"), t.number("vram_gb")});
      t.finish();
    }
  }

  const auto nodes_path = obj.at("nodes");
  const json& nodes = as_array(obj.require("nodes"), nodes_path);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    Object n(nodes[i], child(nodes_path, i));
    NodeSpec node;
    node.node_id = n.string("id");
    if (const json* gpus = n.optional("gpus")) {
      const auto gpus_path = n.at("gpus");
      for (std::size_t k = 0; k < as_array(*gpus, gpus_path).size(); ++k) {
        Object g((*gpus)[k], child(gpus_path, k));
        node.gpus.push_back({g.string("type"), static_cast<int>(g.integer("count"))});
        g.finish();
      }
    }
    node.cpu_desc = n.string_or("cpu", "");
    node.ram_gb = n.number("ram_gb");
    node.storage_gb = n.number_or("storage_gb", 0.0);
    node.max_power_watts = n.number_or("max_power_watts", 0.0);
    n.finish();
    spec.nodes.push_back(std::move(node));
  }
  obj.finish();
  return spec;
}

std::vector<GroupPolicy> parse_groups(const json& j, const std::string& where) {
  std::vector<GroupPolicy> groups;
  for (std::size_t i = 0; i < as_array(j, where).size(); ++i) {
    Object g(j[i], child(where, i));
    GroupPolicy policy;
    policy.group_name = g.string("name");
    if (const json* nodes = g.optional("allowed_nodes")) {
      policy.allowed_nodes = string_set(*nodes, g.at("allowed_nodes"));
    }
    if (const json* types = g.optional("allowed_gpu_types")) {
      policy.allowed_gpu_types = string_set(*types, g.at("allowed_gpu_types"));
    }
    if (const json* v = g.optional("max_running_jobs")) {
      policy.max_running_jobs = static_cast<int>(as_int(*v, g.at("max_running_jobs")));
    }
    if (const json* v = g.optional("max_gpus_per_job")) {
      policy.max_gpus_per_job = static_cast<int>(as_int(*v, g.at("max_gpus_per_job")));
    }
    if (const json* v = g.optional("max_runtime_hours")) {
      policy.max_runtime_hours = as_number(*v, g.at("max_runtime_hours"));
    }
    g.finish();
    groups.push_back(std::move(policy));
  }
  return groups;
}

UniformRange parse_range(const json& j, const std::string& where) {
  Object r(j, where);
  UniformRange range{r.integer("lo"), r.integer("hi")};
  r.finish();
  return range;
}

template <typename T, typename Read>
std::vector<Weighted<T>> parse_weighted(const json& j, const std::string& where, Read read) {
  std::vector<Weighted<T>> out;
  for (std::size_t i = 0; i < as_array(j, where).size(); ++i) {
    Object w(j[i], child(where, i));
    T value = read(w.require("value"), w.at("value"));
    out.push_back({std::move(value), w.number("weight")});
    w.finish();
  }
  return out;
}

WorkloadParams parse_generate(const json& j, const std::string& where) {
  Object obj(j, where);
  WorkloadParams p;
  p.seed = static_cast<std::uint64_t>(obj.integer("seed"));
  if (const json* v = obj.optional("n_jobs")) p.n_jobs = as_int(*v, obj.at("n_jobs"));
  if (const json* v = obj.optional("horizon_min")) p.horizon_min = as_int(*v, obj.at("horizon_min"));

  {
    Object ia(obj.require("interarrival"), obj.at("interarrival"));
    const std::string kind = ia.string("distribution");
    if (kind == "exponential") {
      p.interarrival = InterarrivalKind::Exponential;
    } else if (kind == "fixed") {
      p.interarrival = InterarrivalKind::Fixed;
    } else {
      schema_error(ia.at("distribution"), "expected \"exponential\" or \"fixed\"");
    }
    p.mean_interarrival_min = ia.number("mean_min");
    if (!(p.mean_interarrival_min > 0.0)) {
      invalid(ia.at("mean_min"), "mean interarrival must be positive");
    }
    ia.finish();
  }

  p.duration_min = parse_range(obj.require("duration_min"), obj.at("duration_min"));
  auto read_int = [](const json& v, const std::string& at) { return static_cast<int>(as_int(v, at)); };
  auto read_str = [](const json& v, const std::string& at) { return as_string(v, at); };
  p.gpu_count = parse_weighted<int>(obj.require("gpu_count"), obj.at("gpu_count"), read_int);
  p.groups = parse_weighted<std::string>(obj.require("groups"), obj.at("groups"), read_str);
  if (const json* v = obj.optional("mem_gb")) p.mem_gb = parse_range(*v, obj.at("mem_gb"));
  if (const json* v = obj.optional("gpu_type")) {
    p.gpu_types = parse_weighted<std::string>(*v, obj.at("gpu_type"), read_str);
  }
  if (const json* v = obj.optional("users_per_group")) {
    p.users_per_group = static_cast<int>(as_int(*v, obj.at("users_per_group")));
  }
  obj.finish();

  try {
    validate_workload_params(p);
  } catch (const WorkloadError& e) {
    invalid(where, e.what());
  }
  return p;
}

json read_json_file(const std::filesystem::path& path, const std::string& where) {
  std::ifstream in(path);
  if (!in) {
    throw ScenarioError(ScenarioError::Kind::FileNotFound, where,
                        fmt::format("cannot open '{}'", path.string()));
  }
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ScenarioError(ScenarioError::Kind::SyntaxError,
                        fmt::format("{}@byte{}", where, e.byte), e.what());
  }
}

WorkloadSource parse_workload(const json& j, const std::string& where,
                              const std::filesystem::path& base_dir) {
  Object obj(j, where);
  const json* jobs = obj.optional("jobs");
  const json* file = obj.optional("jobs_file");
  const json* generate = obj.optional("generate");
  obj.finish();
  if ((jobs != nullptr) + (file != nullptr) + (generate != nullptr) != 1) {
    schema_error(where, "workload needs exactly one of jobs, jobs_file, generate");
  }
  if (jobs) return parse_job_list(*jobs, obj.at("jobs"));
  if (generate) return parse_generate(*generate, obj.at("generate"));

  std::filesystem::path path = as_string(*file, obj.at("jobs_file"));
  if (path.is_relative()) path = base_dir / path;
  return parse_job_list(read_json_file(path, obj.at("jobs_file")), "");
}

ElectricityModel parse_electricity(const json& j, const std::string& where) {
  Object obj(j, where);
  const std::string mode = obj.string("mode");
  ElectricityModel model;
  if (mode == "fixed") {
    model = FixedElectricity{obj.number("eur_per_month")};
  } else if (mode == "modeled") {
    ModeledElectricity m;
    m.power_max_kw = obj.number("power_max_kw");
    m.idle_fraction = obj.number("idle_fraction");
    m.tariff_eur_per_kwh = obj.number("tariff_eur_per_kwh");
    m.solar_offset_fraction = obj.number_or("solar_offset_fraction", 0.0);
    model = m;
  } else {
    schema_error(obj.at("mode"), "expected \"fixed\" or \"modeled\"");
  }
  obj.finish();
  return model;
}

CloudOffering parse_offering(const json& j, const std::string& where) {
  Object obj(j, where);
  CloudOffering offering;
  offering.name = obj.string("name");
  offering.commitment_months = static_cast<int>(
      obj.optional("commitment_months") ? obj.integer("commitment_months") : 0);

  Object pricing(obj.require("pricing"), obj.at("pricing"));
  const std::string mode = pricing.string("mode");
  if (mode == "flat") {
    offering.pricing = FlatPricing{pricing.number("eur_per_month")};
  } else if (mode == "per_gpu_hour") {
    const json* rate = pricing.optional("eur_per_gpu_hour");
    const json* calibrate = pricing.optional("calibrate");
    if ((rate != nullptr) == (calibrate != nullptr)) {
      schema_error(pricing.path(), "per_gpu_hour needs exactly one of eur_per_gpu_hour, calibrate");
    }
    if (rate) {
      offering.pricing = PerGpuHourPricing{as_number(*rate, pricing.at("eur_per_gpu_hour"))};
    } else {
      // Rate back-solved from a monthly price at a known monthly usage.
      Object cal(*calibrate, pricing.at("calibrate"));
      const double monthly = cal.number("eur_per_month");
      const double hours = cal.number("gpu_hours_per_month");
      cal.finish();
      if (!(hours > 0.0)) invalid(cal.at("gpu_hours_per_month"), "must be positive");
      offering.pricing = PerGpuHourPricing{monthly / hours};
    }
  } else {
    schema_error(pricing.at("mode"), "expected \"flat\" or \"per_gpu_hour\"");
  }
  pricing.finish();
  obj.finish();

  try {
    validate_offering(offering);
  } catch (const CostError& e) {
    invalid(where, e.what());
  }
  return offering;
}

CostConfig parse_cost(const json& j, const std::string& where) {
  Object obj(j, where);
  CostConfig cost;

  {
    Object onprem(obj.require("onprem"), obj.at("onprem"));
    cost.onprem.procurement_eur = onprem.number("procurement_eur");
    cost.onprem.electricity = parse_electricity(onprem.require("electricity"),
                                                onprem.at("electricity"));
    if (const json* manpower = onprem.optional("manpower")) {
      Object m(*manpower, onprem.at("manpower"));
      const auto hours_path = m.at("hours_by_month");
      const json& hours = as_array(m.require("hours_by_month"), hours_path);
      for (std::size_t i = 0; i < hours.size(); ++i) {
        cost.onprem.manpower_hours_by_month.push_back(as_number(hours[i], child(hours_path, i)));
      }
      cost.onprem.manpower_rate_eur_per_hour = m.number("rate_eur_per_hour");
      m.finish();
    }
    onprem.finish();
    try {
      validate_onprem(cost.onprem);
    } catch (const CostError& e) {
      invalid(onprem.path(), e.what());
    }
  }

  if (const json* clouds = obj.optional("cloud")) {
    const auto path = obj.at("cloud");
    std::set<std::string> names;
    for (std::size_t i = 0; i < as_array(*clouds, path).size(); ++i) {
      auto offering = parse_offering((*clouds)[i], child(path, i));
      if (!names.insert(offering.name).second) {
        invalid(child(path, i), fmt::format("duplicate offering '{}'", offering.name));
      }
      cost.offerings.push_back(std::move(offering));
    }
  }

  if (const json* usage = obj.optional("usage")) {
    Object u(*usage, obj.at("usage"));
    const std::string source = u.string("source");
    if (source == "fixed") {
      const double hours = u.number("gpu_hours_per_month");
      if (hours < 0.0) invalid(u.at("gpu_hours_per_month"), "must be non-negative");
      cost.usage = FixedUsage{hours};
    } else if (source == "simulated") {
      cost.usage = SimulatedUsage{};
    } else {
      schema_error(u.at("source"), "expected \"fixed\" or \"simulated\"");
    }
    u.finish();
  }

  if (const json* v = obj.optional("months")) {
    cost.months = static_cast<int>(as_int(*v, obj.at("months")));
    if (*cost.months < 1) invalid(obj.at("months"), "must be at least 1");
  }
  if (const json* v = obj.optional("total_gpus")) {
    cost.total_gpus = static_cast<int>(as_int(*v, obj.at("total_gpus")));
    if (*cost.total_gpus < 0) invalid(obj.at("total_gpus"), "must be non-negative");
  }
  obj.finish();
  return cost;
}

OutputConfig parse_output(const json& j, const std::string& where) {
  Object obj(j, where);
  OutputConfig out;
  if (const json* dir = obj.optional("directory")) {
    out.directory = as_string(*dir, obj.at("directory"));
  }
  if (const json* formats = obj.optional("formats")) {
    for (const auto& f : string_set(*formats, obj.at("formats"))) {
      if (f == "json") {
        out.write_json_report = true;
      } else if (f != "csv") {
        schema_error(obj.at("formats"), fmt::format("unknown format '{}'", f));
      }
    }
  }
  obj.finish();
  return out;
}

void check_workload_groups(const Scenario& scenario) {
  if (!scenario.workload || !scenario.cluster) return;
  std::set<std::string> groups;
  if (const auto* jobs = std::get_if<std::vector<JobRequest>>(&*scenario.workload)) {
    for (const auto& job : *jobs) groups.insert(job.group);
  } else {
    for (const auto& g : std::get<WorkloadParams>(*scenario.workload).groups) groups.insert(g.value);
  }
  for (const auto& g : groups) {
    if (scenario.cluster->find_group(g) == nullptr) {
      invalid("/workload", fmt::format("workload uses undefined group '{}'", g));
    }
  }
}

}  // namespace

std::vector<JobRequest> parse_job_list(const json& doc, const std::string& location) {
  std::vector<JobRequest> jobs;
  std::set<JobId> ids;
  for (std::size_t i = 0; i < as_array(doc, location).size(); ++i) {
    const auto path = child(location, i);
    Object obj(doc[i], path);
    JobRequest job;
    job.job_id = obj.integer("id");
    job.user = obj.string_or("user", "");
    job.group = obj.string("group");
    job.gpu_count = static_cast<int>(obj.integer("gpus"));
    job.gpu_type = obj.string_or("gpu_type", std::string(kAnyGpuType));
    job.mem_gb = obj.number_or("mem_gb", 0.0);
    job.duration_min = obj.integer("duration_min");
    job.submit_time_min = obj.integer("submit_min");
    obj.finish();

    if (job.gpu_count < 0) invalid(obj.at("gpus"), "must be non-negative");
    if (job.mem_gb < 0.0) invalid(obj.at("mem_gb"), "must be non-negative");
    if (job.duration_min <= 0) invalid(obj.at("duration_min"), "must be positive");
    if (job.submit_time_min < 0) invalid(obj.at("submit_min"), "must be non-negative");
    if (!ids.insert(job.job_id).second) invalid(obj.at("id"), "duplicate job id");
    jobs.push_back(std::move(job));
  }
  return jobs;
}

Scenario parse_scenario(const json& doc, const std::filesystem::path& base_dir) {
  Object root(doc, "");
  Scenario scenario;

  std::optional<ClusterSpec> spec;
  if (const json* cluster = root.optional("cluster")) spec = parse_cluster(*cluster, "/cluster");
  if (const json* groups = root.optional("groups")) {
    if (!spec) invalid("/groups", "groups require a cluster section");
    spec->groups = parse_groups(*groups, "/groups");
  }
  if (spec) {
    try {
      scenario.cluster = validate_cluster(std::move(*spec));
    } catch (const ValidationError& e) {
      invalid("/cluster", e.what());
    }
  }

  if (const json* scheduler = root.optional("scheduler")) {
    Object s(*scheduler, "/scheduler");
    if (const json* mode = s.optional("mode")) {
      auto parsed = parse_sched_mode(as_string(*mode, s.at("mode")));
      if (!parsed) schema_error(s.at("mode"), "expected \"strict\" or \"skip\"");
      scenario.mode = *parsed;
    }
    if (const json* horizon = s.optional("horizon_min")) {
      scenario.horizon_min = as_int(*horizon, s.at("horizon_min"));
      if (*scenario.horizon_min < 0) invalid(s.at("horizon_min"), "must be non-negative");
    }
    s.finish();
  }

  if (const json* workload = root.optional("workload")) {
    scenario.workload = parse_workload(*workload, "/workload", base_dir);
  }
  if (const json* cost = root.optional("cost")) scenario.cost = parse_cost(*cost, "/cost");
  if (const json* output = root.optional("output")) {
    scenario.output = parse_output(*output, "/output");
  }
  root.find("description");
  root.finish();

  check_workload_groups(scenario);
  return scenario;
}

Scenario load_scenario(const std::filesystem::path& path) {
  const json doc = read_json_file(path, "");
  return parse_scenario(doc, path.parent_path());
}

}  // namespace clusterplan

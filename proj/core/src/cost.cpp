#include "clusterplan/cost.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace clusterplan {

namespace {

void require(bool ok, std::string_view message) {
  if (!ok) throw CostError(std::string(message));
}

bool is_fraction(double x) { return x >= 0.0 && x <= 1.0; }
bool is_amount(double x) { return x >= 0.0 && std::isfinite(x); }

}  // namespace

UsageProfile UsageProfile::from_hours(double gpu_hours_per_month, int total_gpus) {
  require(is_amount(gpu_hours_per_month), "GPU-hours per month must be non-negative");
  require(total_gpus >= 0, "total GPU count must be non-negative");
  return UsageProfile(gpu_hours_per_month, total_gpus);
}

UsageProfile UsageProfile::from_fraction(double utilization_fraction, int total_gpus) {
  require(is_fraction(utilization_fraction), "usage fraction must lie in [0, 1]");
  require(total_gpus >= 0, "total GPU count must be non-negative");
  return UsageProfile(utilization_fraction * total_gpus * kHoursPerMonth, total_gpus);
}

double UsageProfile::busy_fraction() const {
  if (total_gpus_ == 0) return 0.0;
  return std::min(1.0, gpu_hours_ / (total_gpus_ * kHoursPerMonth));
}

void validate_onprem(const OnPremScenario& s) {
  require(is_amount(s.procurement_eur), "procurement must be non-negative");
  require(is_amount(s.manpower_rate_eur_per_hour), "manpower rate must be non-negative");
  for (double hours : s.manpower_hours_by_month) {
    require(is_amount(hours), "manpower hours must be non-negative");
  }
  if (const auto* fixed = std::get_if<FixedElectricity>(&s.electricity)) {
    require(is_amount(fixed->eur_per_month), "electricity cost must be non-negative");
  } else {
    const auto& m = std::get<ModeledElectricity>(s.electricity);
    require(is_amount(m.power_max_kw), "power must be non-negative");
    require(is_amount(m.tariff_eur_per_kwh), "tariff must be non-negative");
    require(is_fraction(m.idle_fraction), "idle fraction must lie in [0, 1]");
    require(is_fraction(m.solar_offset_fraction), "solar offset must lie in [0, 1]");
  }
}

void validate_offering(const CloudOffering& offering) {
  require(!offering.name.empty(), "cloud offering needs a name");
  require(offering.name != "onprem", "'onprem' is reserved for the on-premises column");
  require(offering.commitment_months >= 0, "commitment must be non-negative");
  if (const auto* flat = std::get_if<FlatPricing>(&offering.pricing)) {
    require(is_amount(flat->eur_per_month), "flat rate must be non-negative");
  } else {
    require(is_amount(std::get<PerGpuHourPricing>(offering.pricing).eur_per_gpu_hour),
            "per-GPU-hour rate must be non-negative");
  }
}

double electricity_cost(double power_max_kw, double idle_fraction, double busy_fraction,
                        double tariff_eur_per_kwh, double hours_in_month,
                        double solar_offset_fraction) {
  const double load = idle_fraction + (1.0 - idle_fraction) * busy_fraction;
  return tariff_eur_per_kwh * power_max_kw * hours_in_month * load * (1.0 - solar_offset_fraction);
}

OnPremMonth onprem_monthly(const OnPremScenario& scenario, int month, const UsageProfile& usage) {
  require(month >= 1, "months are numbered from 1");
  OnPremMonth out;
  out.procurement = month == 1 ? scenario.procurement_eur : 0.0;

  const auto& hours = scenario.manpower_hours_by_month;
  if (!hours.empty()) {
    const auto index = std::min(static_cast<std::size_t>(month), hours.size()) - 1;
    out.manpower = hours[index] * scenario.manpower_rate_eur_per_hour;
  }

  if (const auto* fixed = std::get_if<FixedElectricity>(&scenario.electricity)) {
    out.electricity = fixed->eur_per_month;
  } else {
    const auto& m = std::get<ModeledElectricity>(scenario.electricity);
    out.electricity = electricity_cost(m.power_max_kw, m.idle_fraction, usage.busy_fraction(),
                                       m.tariff_eur_per_kwh, kHoursPerMonth,
                                       m.solar_offset_fraction);
  }
  out.total = out.procurement + out.electricity + out.manpower;
  return out;
}

double cloud_monthly(const CloudOffering& offering, const UsageProfile& usage) {
  if (const auto* flat = std::get_if<FlatPricing>(&offering.pricing)) return flat->eur_per_month;
  return std::get<PerGpuHourPricing>(offering.pricing).eur_per_gpu_hour *
         usage.gpu_hours_per_month();
}

const CostColumn* CostSeries::find_cloud(std::string_view name) const {
  auto it = std::find_if(clouds.begin(), clouds.end(),
                         [&](const CostColumn& c) { return c.name == name; });
  return it == clouds.end() ? nullptr : &*it;
}

namespace {

// Monthly amounts are snapped to a 2^-20 EUR grid. Sums of grid values below
// 2^32 EUR are exact in a double, so cumulative differences reproduce the
// monthly column bit for bit.
constexpr int kGridBits = 20;

double snap(double eur) { return std::ldexp(std::round(std::ldexp(eur, kGridBits)), -kGridBits); }

void append_month(CostColumn& column, double monthly) {
  monthly = snap(monthly);
  const double previous = column.cumulative.empty() ? 0.0 : column.cumulative.back();
  column.monthly.push_back(monthly);
  column.cumulative.push_back(previous + monthly);
}

}  // namespace

CostSeries cumulative_series(const OnPremScenario& scenario,
                             std::span<const CloudOffering> offerings, const UsageProfile& usage,
                             int n_months) {
  require(n_months >= 1, "horizon must be at least one month");
  validate_onprem(scenario);
  for (const auto& offering : offerings) validate_offering(offering);

  CostSeries series;
  series.months = n_months;
  series.onprem.name = "onprem";
  for (const auto& offering : offerings) {
    if (series.find_cloud(offering.name) != nullptr) {
      throw CostError(fmt::format("duplicate cloud offering '{}'", offering.name));
    }
    series.clouds.push_back({offering.name, {}, {}});
  }

  for (int month = 1; month <= n_months; ++month) {
    const OnPremMonth onprem = onprem_monthly(scenario, month, usage);
    series.onprem_components.push_back(onprem);
    append_month(series.onprem, onprem.total);
    for (std::size_t i = 0; i < offerings.size(); ++i) {
      append_month(series.clouds[i], cloud_monthly(offerings[i], usage));
    }
  }
  return series;
}

std::optional<int> break_even(const CostSeries& series, std::string_view cloud_name) {
  const CostColumn* cloud = series.find_cloud(cloud_name);
  if (cloud == nullptr) throw CostError(fmt::format("unknown offering '{}'", cloud_name));
  for (int m = 0; m < series.months; ++m) {
    if (series.onprem.cumulative[m] <= cloud->cumulative[m]) return m + 1;
  }
  return std::nullopt;
}

SweepResult usage_sweep(const OnPremScenario& scenario, const CloudOffering& offering,
                        std::span<const double> usage_fractions, int total_gpus, int n_months) {
  auto evaluate = [&](double fraction) {
    const auto usage = UsageProfile::from_fraction(fraction, total_gpus);
    return SweepPoint{fraction, cumulative_series(scenario, std::span(&offering, 1), usage,
                                                  n_months)};
  };

  SweepResult result;
  for (double fraction : usage_fractions) result.points.push_back(evaluate(fraction));
  result.at_20 = evaluate(0.20);
  result.at_40 = evaluate(0.40);

  // Small slack so grid values such as 0.1 + 12 * 0.05 still count as in-band.
  constexpr double kSlack = 1e-9;
  for (const auto& point : result.points) {
    if (point.usage_fraction < kBandLow - kSlack || point.usage_fraction > kBandHigh + kSlack) {
      continue;
    }
    const auto& onprem = point.series.onprem.cumulative;
    const auto& cloud = point.series.clouds.front().cumulative;
    if (result.onprem_band.lower.empty()) {
      result.onprem_band = {onprem, onprem};
      result.cloud_band = {cloud, cloud};
      continue;
    }
    for (int m = 0; m < n_months; ++m) {
      result.onprem_band.lower[m] = std::min(result.onprem_band.lower[m], onprem[m]);
      result.onprem_band.upper[m] = std::max(result.onprem_band.upper[m], onprem[m]);
      result.cloud_band.lower[m] = std::min(result.cloud_band.lower[m], cloud[m]);
      result.cloud_band.upper[m] = std::max(result.cloud_band.upper[m], cloud[m]);
    }
  }
  return result;
}

}  // namespace clusterplan

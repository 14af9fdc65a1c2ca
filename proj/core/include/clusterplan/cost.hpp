#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "clusterplan/error.hpp"

namespace clusterplan {

inline constexpr double kHoursPerMonth = 730.0;

struct FixedElectricity {
  double eur_per_month = 0.0;
};

// Idle draw is a fixed share of peak; the remainder scales with usage.
struct ModeledElectricity {
  double power_max_kw = 0.0;
  double idle_fraction = 0.0;
  double tariff_eur_per_kwh = 0.0;
  double solar_offset_fraction = 0.0;
};

using ElectricityModel = std::variant<FixedElectricity, ModeledElectricity>;

struct OnPremScenario {
  // Charged once, in month 1.
  double procurement_eur = 0.0;
  ElectricityModel electricity = FixedElectricity{};
  // Hours of staff time per month; the last entry repeats forever.
  std::vector<double> manpower_hours_by_month;
  double manpower_rate_eur_per_hour = 0.0;
};

struct FlatPricing {
  double eur_per_month = 0.0;
};

struct PerGpuHourPricing {
  double eur_per_gpu_hour = 0.0;
};

struct CloudOffering {
  std::string name;
  std::variant<FlatPricing, PerGpuHourPricing> pricing;
  int commitment_months = 0;

  bool is_flat() const { return std::holds_alternative<FlatPricing>(pricing); }
};

// Monthly GPU demand. Always carries the GPU count so that a busy fraction
// (for modeled electricity) can be derived from hours and vice versa.
class UsageProfile {
 public:
  static UsageProfile from_hours(double gpu_hours_per_month, int total_gpus);
  static UsageProfile from_fraction(double utilization_fraction, int total_gpus);

  double gpu_hours_per_month() const { return gpu_hours_; }
  int total_gpus() const { return total_gpus_; }
  // Share of the cluster's monthly GPU-hours in use, capped at 1.
  double busy_fraction() const;

 private:
  UsageProfile(double hours, int gpus) : gpu_hours_(hours), total_gpus_(gpus) {}

  double gpu_hours_;
  int total_gpus_;
};

class CostError : public Error {
 public:
  using Error::Error;
};

struct OnPremMonth {
  double procurement = 0.0;
  double electricity = 0.0;
  double manpower = 0.0;
  double total = 0.0;
};

// Throws CostError if any monetary value is negative or a fraction is
// outside [0, 1].
void validate_onprem(const OnPremScenario& scenario);
void validate_offering(const CloudOffering& offering);

double electricity_cost(double power_max_kw, double idle_fraction, double busy_fraction,
                        double tariff_eur_per_kwh, double hours_in_month = kHoursPerMonth,
                        double solar_offset_fraction = 0.0);

// `month` is 1-based.
OnPremMonth onprem_monthly(const OnPremScenario& scenario, int month, const UsageProfile& usage);

double cloud_monthly(const CloudOffering& offering, const UsageProfile& usage);

struct CostColumn {
  std::string name;
  std::vector<double> monthly;
  std::vector<double> cumulative;
};

// Index i holds month i + 1. Values are EUR on a 2^-20 grid (not rounded to
// cents) so that cumulative[i] - cumulative[i - 1] == monthly[i] exactly.
struct CostSeries {
  int months = 0;
  std::vector<OnPremMonth> onprem_components;
  CostColumn onprem;
  std::vector<CostColumn> clouds;

  const CostColumn* find_cloud(std::string_view name) const;
};

CostSeries cumulative_series(const OnPremScenario& scenario,
                             std::span<const CloudOffering> offerings, const UsageProfile& usage,
                             int n_months);

// First month (1-based) whose cumulative on-premises cost is no greater than
// the named offering's; nullopt when that never happens within the series.
// Throws CostError for an unknown offering.
std::optional<int> break_even(const CostSeries& series, std::string_view cloud_name);

struct CostBand {
  std::vector<double> lower;
  std::vector<double> upper;
};

struct SweepPoint {
  double usage_fraction = 0.0;
  CostSeries series;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  // Reference usage levels, always evaluated.
  SweepPoint at_20;
  SweepPoint at_40;
  // Per-month envelope over every evaluated fraction inside [0.10, 0.70].
  CostBand onprem_band;
  CostBand cloud_band;
};

inline constexpr double kBandLow = 0.10;
inline constexpr double kBandHigh = 0.70;

// Throws CostError when a fraction is outside [0, 1].
SweepResult usage_sweep(const OnPremScenario& scenario, const CloudOffering& offering,
                        std::span<const double> usage_fractions, int total_gpus, int n_months);

}  // namespace clusterplan

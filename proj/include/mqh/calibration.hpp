#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mqh/hawkes.hpp"
#include "mqh/lob.hpp"
#include "mqh/sampling.hpp"

namespace mqh {

struct IsPowerLawFit {
  double alpha = 0.0;
  double beta = 0.0;
  double intercept = 0.0;  // of the log-rate vs log(spread-1) regression
  double lambda0 = 0.0;    // baseline in-spread rate used to split the intercept
  double lambda0_activity = 0.0;  // median-activity-bin rate (diagnostic)
  double r2 = 0.0;
  double beta_std_err = 0.0;
  std::size_t spread_levels = 0;
  std::map<std::int64_t, std::pair<double, double>> rate_by_spread;  // s -> (time, rate)
};

// Bin the in-spread arrivals, attach each bin to its prevailing spread,
// exclude spread = 1, and regress log rate on log(s-1) weighted by the
// occupancy time of each spread value. beta is the slope; alpha comes from
// the intercept after removing the baseline in-spread rate. The baseline is
// not identifiable from the arrivals alone (it multiplies the same factor as
// (delta/alpha)^beta), so pass `baseline_rate` from the separately estimated
// Hawkes stage when available; otherwise the median-activity proxy is used.
IsPowerLawFit calibrate_is_power_law(const std::vector<LogRow>& rows, double horizon,
                                     double tick_size, double bin_width = 0.01,
                                     std::optional<double> baseline_rate = std::nullopt);

// Mean base in-spread intensity implied by a spec's kernel norms and the
// observed per-type event rates: mu_IS + sum_j |phi_{j->IS}| N_j / T.
double implied_is_baseline(const HawkesSpec& spec, const std::vector<LogRow>& rows,
                           double horizon);

struct EtaFamilyFit {
  std::optional<GeomFit> fit;  // absent when the family is undersampled
  std::size_t observations = 0;
};

struct EtaCalibration {
  EtaFamilyFit eta_is;
  EtaFamilyFit eta_t;    // support starts at 0; fitted on shifted samples
  EtaFamilyFit eta_t1;
  std::optional<double> pooled;  // IS and T+1 families pooled
};

EtaCalibration calibrate_eta(const std::vector<LogRow>& rows, std::size_t min_observations = 100);

struct KappaCalibration {
  std::map<std::string, GeomFit> by_family;  // keys: is, top, mo, deep
};

KappaCalibration calibrate_kappa(const std::vector<LogRow>& rows,
                                 std::size_t min_observations = 100);

// Per-level deep volume parameter from the deep meta-queue columns.
std::optional<double> calibrate_deep_volume(const std::vector<LogRow>& rows);

struct BinnedKernelEstimate {
  std::array<std::array<double, kEventTypeCount>, kEventTypeCount> norms{};  // [src][dst], >= 0
  std::array<double, kEventTypeCount> mu_hat{};
  double spectral_radius = 0.0;
  bool regularized = false;  // ridge fallback on a singular design
};

// Least-squares vector autoregression of bin counts; the summed lag
// coefficients estimate the kernel norms (clipped at zero).
BinnedKernelEstimate estimate_kernels_binned(const std::vector<LogRow>& rows, double horizon,
                                             double bin_width, int lag_count);

struct CalibrationResult {
  IsPowerLawFit is_fit;
  EtaCalibration eta;
  KappaCalibration kappa;
  std::optional<double> q_hat_deep;
  std::optional<BinnedKernelEstimate> kernels;
};

nlohmann::ordered_json calibration_to_json(const CalibrationResult& r);
// Run-config fragment with the calibrated critical parameters filled in.
nlohmann::ordered_json calibration_config_fragment(const CalibrationResult& r);

CalibrationResult calibrate_all(const std::vector<LogRow>& rows, double horizon,
                                double tick_size, bool with_kernels = false,
                                std::optional<double> is_baseline = std::nullopt);

}  // namespace mqh

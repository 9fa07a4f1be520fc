#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mqh/analytics.hpp"
#include "mqh/calibration.hpp"
#include "mqh/io.hpp"

namespace mqh {

// Run the indexed tasks on `jobs` worker threads (cells are independent and
// results land by index, so aggregation is order-free).
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& task);

struct RunOutput {
  std::vector<LogRow> rows;
  std::vector<Snapshot> snapshots;
  LobState initial_state;
  LobState final_state;
  RunDiagnostics diag;
  double horizon = 0.0;
};

RunOutput simulate_to_rows(const RunConfig& cfg, std::optional<std::uint64_t> seed = std::nullopt,
                           std::optional<double> horizon = std::nullopt,
                           std::uint64_t max_events = 0);

// Per-run stylized-fact summary used by the sweep commands.
struct PointMetrics {
  bool ok = false;
  std::string error;
  double mean_spread = 0.0;
  double iod = 0.0;
  double r_mid = 0.0;      // mean mid move over mid-moving trades, currency
  double arg_max = 0.0;    // ticks
  double wasserstein = 0.0;
  std::uint64_t events = 0;
};

PointMetrics run_point_metrics(const RunConfig& cfg, std::uint64_t seed, double burn_in_frac = 0.2);

RunConfig with_critical(const RunConfig& base, double alpha, double beta,
                        std::optional<double> eta = std::nullopt);

// Reference calibrated critical parameters for the 15 assets shipped with the
// toolkit (used as phase-diagram overlay points and sweep anchors).
struct ReferenceAsset {
  const char* ticker;
  double alpha;
  double beta;
  double eta;
  const char* category;  // large / medium / small
};
const std::vector<ReferenceAsset>& reference_assets();

// Reference scaling slopes reported alongside the measured ones.
struct ReferenceSlopes {
  double iod;
  double r_mid;
  double arg_max;
};
ReferenceSlopes reference_simulated_slopes();  // targets for this model family
ReferenceSlopes reference_empirical_slopes();  // empirical anchors (external data)

// ---- commands (CLI entry points; return artifacts and write them) ----

struct SimulateSummary {
  double mean_spread = 0.0;
  std::uint64_t events = 0;
  std::array<std::uint64_t, kEventTypeCount> counts{};
  bool stability_warning = false;
};

SimulateSummary cmd_simulate(const RunConfig& cfg, const std::string& out_dir);

struct ErgodicityResult {
  std::vector<std::pair<std::int64_t, double>> spread_means;  // (s0, long-run mean)
  struct KsEntry {
    double m0_a, m0_b, stat, critical;
    bool pass;
  };
  std::vector<KsEntry> ks_pairs;
};

ErgodicityResult cmd_ergodicity(const RunConfig& cfg, const std::vector<std::int64_t>& s0_list,
                                const std::vector<double>& m0_list, const std::string& out_dir,
                                int jobs, int seeds_per_init = 6);

struct PhaseCell {
  double alpha, beta;
  double mean_spread = 0.0;
  std::string regime;  // large / medium / small / failed
};

struct PhaseDiagramResult {
  std::vector<PhaseCell> cells;  // row-major over (alpha, beta)
  std::vector<double> alpha_grid, beta_grid;
};

PhaseDiagramResult cmd_phase_diagram(const RunConfig& cfg, const std::vector<double>& alpha_grid,
                                     const std::vector<double>& beta_grid,
                                     const std::string& out_dir, int jobs,
                                     int seeds_per_cell = 3);

struct ScalingPoint {
  double alpha, beta, eta;
};

struct ScalingResult {
  std::vector<ScalingPoint> grid;
  std::vector<PointMetrics> metrics;       // median over seeds, aligned with grid
  std::vector<std::size_t> used;           // indices that landed small/medium
  SlopeFit iod_fit, r_mid_fit, arg_max_fit;
  double wasserstein_spearman = 0.0;
  int usable_points = 0;
};

std::vector<ScalingPoint> default_scaling_grid();

ScalingResult cmd_scaling(const RunConfig& cfg, const std::vector<ScalingPoint>& grid,
                          const std::string& out_dir, int jobs, int seeds_per_point = 3);

MetricReport cmd_report(const std::vector<LogRow>& rows, double horizon, double tick_size,
                        const std::string& out_dir);

CalibrationResult cmd_calibrate(const std::vector<LogRow>& rows, double horizon, double tick_size,
                                const std::string& out_dir, bool with_kernels = true,
                                const HawkesSpec* known_hawkes = nullptr);

// The shipped reference configuration (small-tick regime).
RunConfig reference_config();

// Reference config with the in-spread excitation softened; the round-trip
// calibration study runs on this base so the spread-rate regression is not
// confounded by in-spread avalanches.
RunConfig calibration_study_config();

// m_deep on one side sampled at a regular cadence after a burn-in.
std::vector<double> sample_m_deep(const std::vector<LogRow>& rows, double burn_in, double horizon,
                                  double step, Side side);

}  // namespace mqh

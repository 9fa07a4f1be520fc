#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "mqh/common.hpp"
#include "mqh/dynamics.hpp"
#include "mqh/lob.hpp"

namespace mqh {

// Piecewise-constant series: values[i] holds on [times[i], times[i+1]), the
// last segment closed at total_duration.
struct WeightedSeries {
  std::vector<double> times;
  std::vector<double> values;
  double total_duration = 0.0;

  void validate() const;
};

WeightedSeries spread_series(const std::vector<LogRow>& rows, double horizon,
                             std::optional<std::int64_t> initial_spread = std::nullopt);

double time_weighted_mean(const WeightedSeries& s);
double time_weighted_variance(const WeightedSeries& s);
double index_of_dispersion(const WeightedSeries& s);
double index_of_dispersion(std::span<const double> samples);

// One book observation: signed half-tick offsets from the mid (ask positive)
// with the resting volume, held for `duration` seconds.
struct ProfileSnapshot {
  double t = 0.0;
  double duration = 0.0;
  std::vector<std::pair<std::int64_t, std::int64_t>> levels;  // (offset_half, volume)
};

std::vector<ProfileSnapshot> profiles_from_rows(const std::vector<LogRow>& rows, double horizon);
std::vector<ProfileSnapshot> profiles_from_snapshots(const std::vector<Snapshot>& snaps,
                                                     double horizon);

struct ShapeProfile {
  // Combined-sides time-weighted profile over |offset| in half-ticks.
  std::map<std::int64_t, double> half_tick_mass;
  // Whole-tick binning: bin k covers offsets in ((k-1), k] ticks.
  std::map<std::int64_t, double> tick_mass;
  double arg_max_ticks = 0.0;
  double q25 = 0.0, q50 = 0.0, q75 = 0.0;
  bool side_combined = true;
};

ShapeProfile average_shape(const std::vector<ProfileSnapshot>& snaps);

struct SparsityMetrics {
  // rank -> (empty levels -> time-weighted probability), both sides pooled.
  std::map<std::int64_t, std::map<std::int64_t, double>> empty_levels;
  double wasserstein_mean = 0.0;
  double wasserstein_variance = 0.0;
};

SparsityMetrics sparsity_metrics(const std::vector<ProfileSnapshot>& snaps);

// L1 distance between two whole-tick shape distributions (tick-width bins).
double wasserstein_l1(const std::map<std::int64_t, double>& a,
                      const std::map<std::int64_t, double>& b);

struct TradeMidStats {
  std::int64_t n_trades = 0;
  std::int64_t n_moving = 0;  // trades that moved the mid
  double mean_abs_currency = 0.0;
  std::map<std::int64_t, std::int64_t> hist_abs_half_ticks;
  bool has_data() const { return n_moving > 0; }
};

// Mid-price changes caused by market orders only; in-spread and cancel driven
// moves never enter. The mean is over mid-moving trades.
TradeMidStats trade_mid_changes(const std::vector<LogRow>& rows, double tick_size);

struct LeverageBinning {
  std::vector<double> edges;  // ascending |offset| edges; bin k = [e_k, e_{k+1})
  int bin_of(double x) const;
  int bins() const { return static_cast<int>(edges.size()) - 1; }
  // Linear single-tick bins up to 10 ticks, logarithmic out to the 95% shape
  // quantile beyond that.
  static LeverageBinning make(double shape_q95);
};

struct LeverageCellKey {
  EventFamily family;
  Side side;
  int bin;
  auto operator<=>(const LeverageCellKey&) const = default;
};

struct LeverageCell {
  double ratio = 0.0;
  std::int64_t pair_count = 0;
  bool defined = false;
};

struct LeverageEvent {
  EventFamily family;
  Side side;
  double offset_abs = 0.0;
};

struct LeverageGrid {
  LeverageBinning binning;
  std::map<LeverageCellKey, std::int64_t> occurrences;
  std::map<std::pair<LeverageCellKey, LeverageCellKey>, LeverageCell> cells;
  std::int64_t total_events = 0;
};

LeverageGrid leverage_grid(const std::vector<LeverageEvent>& events, const LeverageBinning& bins);
std::vector<LeverageEvent> leverage_events_from_rows(const std::vector<LogRow>& rows);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double slope_std_err = 0.0;
};

// OLS on (log x, log y); optional weights.
SlopeFit loglog_slope(std::span<const double> x, std::span<const double> y,
                      std::span<const double> weights = {});

// 1/mean_spread for small/medium regimes; throws DomainError at s_bar <= 1.
double epsilon_proxy(double mean_spread_ticks);

struct RatioCell {
  double ratio = 0.0;
  double lo = 0.0, hi = 0.0;  // binomial confidence band on the ratio
  std::int64_t joint_count = 0;
  bool defined = false;
};

struct IndependenceTable {
  std::vector<double> bin_edges;
  // (event code, bin) -> cell
  std::map<std::pair<int, int>, RatioCell> cells;
};

IndependenceTable independence_ratio(const std::vector<std::pair<int, double>>& events,
                                     const std::vector<double>& bin_edges,
                                     std::int64_t min_count = 25);

struct AcfResult {
  std::vector<double> values;  // lags 1..max_lag
  double band = 0.0;           // +-1.96/sqrt(n)
};

AcfResult acf(std::span<const double> series, int max_lag);

struct MoBestRatio {
  std::vector<double> ratios;
  double mean = 0.0;
  double frac_above_one = 0.0;
};

MoBestRatio mo_to_best_ratio(const std::vector<LogRow>& rows);

// The full stylized-fact bundle for one event log.
struct MetricReport {
  double horizon = 0.0;
  double tick_size = 0.01;
  std::uint64_t events = 0;
  std::array<std::uint64_t, kEventTypeCount> counts{};
  double mean_spread_ticks = 0.0;
  double spread_iod = 0.0;
  std::map<std::int64_t, double> spread_pdf;  // time-weighted
  std::optional<double> eps_proxy;            // absent in the large-tick regime
  TradeMidStats trade_mids;
  ShapeProfile shape;
  SparsityMetrics sparsity;
  LeverageGrid leverage;
  MoBestRatio mo_ratio;
  std::vector<std::pair<double, double>> spread_by_time;  // (bin start, mean spread)
};

MetricReport build_report(const std::vector<LogRow>& rows, double horizon, double tick_size,
                          std::optional<std::int64_t> initial_spread = std::nullopt);

}  // namespace mqh

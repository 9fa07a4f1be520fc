#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "mqh/common.hpp"
#include "mqh/hawkes.hpp"
#include "mqh/lob.hpp"
#include "mqh/sampling.hpp"

namespace mqh {

// Mark distributions for every handler family.
struct HandlerConfig {
  GeomWithSpikes eta_is{0.5, 1};   // in-spread improvement, ticks >= 1
  GeomWithSpikes eta_t{0.5, 0};    // top placement, 0 = join the best queue
  GeomWithSpikes eta_t1{0.5, 1};   // new top width after a depletion
  GeomWithSpikes kappa_is{0.5, 1};
  GeomWithSpikes kappa_t{0.5, 1};
  GeomWithSpikes kappa_mo{0.5, 1};
  GeomWithSpikes kappa_d{0.5, 1};
  DeepVolumeDist deep_volume{GeomWithSpikes{0.5, 1}};

  enum class XiMode { Uniform };
  enum class PartitionMode { Uniform };
  XiMode xi_mode = XiMode::Uniform;
  PartitionMode partition_mode = PartitionMode::Uniform;
};

struct InitConfig {
  std::int64_t s0 = 11;
  double m0_top = 0.5;   // geometric parameter for the initial top widths
  double m0_deep = 0.5;  // geometric parameter for the initial deep widths
  std::int64_t price_anchor_ticks = 10000;
};

// Volume removed when purging `purged_levels` of `total_levels` from a deep
// queue holding q shares, flat-shape rule; at least one share stays while the
// purge is partial.
std::int64_t xi_uniform(std::int64_t q, std::int64_t purged_levels, std::int64_t total_levels);

// Shares promoted to a fresh top spanning new_top_levels out of
// old_deep_levels; proportional split, floored at one share.
std::int64_t partition_uniform(std::int64_t q_deep, std::int64_t new_top_levels,
                               std::int64_t old_deep_levels);

// Source of the draws a depletion waterfall needs. Production wraps the
// handler distributions; tests script exact values.
class WaterfallSampler {
 public:
  virtual ~WaterfallSampler() = default;
  virtual std::int64_t new_top_width(std::int64_t max_width) = 0;  // eta_{T+1} in [1, max]
  virtual std::int64_t deep_volume(std::int64_t m_deep) = 0;       // Pi_Q draw
};

class ConfigWaterfallSampler : public WaterfallSampler {
 public:
  ConfigWaterfallSampler(const HandlerConfig& cfg, Rng& rng) : cfg_(&cfg), rng_(&rng) {}
  std::int64_t new_top_width(std::int64_t max_width) override {
    return cfg_->eta_t1.sample_bounded(*rng_, 1, max_width);
  }
  std::int64_t deep_volume(std::int64_t m_deep) override {
    return cfg_->deep_volume.sample(*rng_, m_deep);
  }

 private:
  const HandlerConfig* cfg_;
  Rng* rng_;
};

// Event handlers. Each mutates the state in place and returns the filled
// EventRecord (time/type left to the caller). Handlers never leave the book
// crossed or in breach of the depth constraints.
EventRecord apply_is_limit_order(LobState& st, Side side, std::int64_t eta, std::int64_t kappa);
EventRecord apply_top_limit_order(LobState& st, Side side, std::int64_t eta, std::int64_t kappa);
EventRecord apply_top_cancel(LobState& st, Side side, std::int64_t kappa, WaterfallSampler& ws);
EventRecord apply_market_order(LobState& st, Side side, std::int64_t kappa, WaterfallSampler& ws);
EventRecord apply_deep_limit_order(LobState& st, Side side, std::int64_t kappa);
EventRecord apply_deep_cancel(LobState& st, Side side, std::int64_t kappa, WaterfallSampler& ws);

// Largest admissible in-spread improvement at the current spread (keeps the
// post-event spread >= 1 and the new book within the depth budget).
std::int64_t max_is_eta(const LobState& st);

struct Snapshot {
  double t = 0.0;
  LobState state;
};

struct RunOptions {
  double horizon = 1000.0;
  std::uint64_t seed = 1;
  std::int64_t snapshot_every = 100;
  std::uint64_t max_events = 0;  // 0 = horizon-bound only
  bool keep_log = true;
  bool keep_snapshots = true;
  bool check_invariants = true;
  std::function<void(const EventRecord&, const LobState&)> on_event;
};

struct RunDiagnostics {
  std::uint64_t events = 0;
  std::array<std::uint64_t, kEventTypeCount> counts{};
  bool stability_warning = false;
  std::uint64_t purge_events = 0;
  std::uint64_t replenish_events = 0;
  double end_time = 0.0;
};

struct SimResult {
  std::vector<EventRecord> log;
  std::vector<Snapshot> snapshots;
  LobState initial_state;
  LobState final_state;
  RunDiagnostics diag;
};

LobState make_initial_state(const InitConfig& init, const HandlerConfig& handlers,
                            std::int64_t m_half_depth, double tick_size, Rng& rng);

// The coupled loop: Hawkes stream -> mark draws -> handler -> EventRecord,
// with post-event constraint checks and an exact per-event volume ledger.
SimResult run_simulation(const HawkesSpec& spec, const HandlerConfig& handlers,
                         const InitConfig& init, std::int64_t m_half_depth,
                         const RunOptions& opts);

}  // namespace mqh

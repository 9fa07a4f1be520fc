#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "mqh/common.hpp"

namespace mqh {

enum class Side : std::uint8_t { Bid = 0, Ask = 1 };

constexpr Side other_side(Side s) { return s == Side::Bid ? Side::Ask : Side::Bid; }

constexpr const char* side_name(Side s) { return s == Side::Bid ? "bid" : "ask"; }

// Prices live on a half-tick integer grid: quoted levels sit on even values,
// so mid-prices (possibly half-tick) stay exact over arbitrarily long runs.
struct TickPrice {
  std::int64_t half_ticks = 0;
  double tick_size = 0.01;  // currency per tick

  double ticks() const { return 0.5 * static_cast<double>(half_ticks); }
  double currency() const { return 0.5 * static_cast<double>(half_ticks) * tick_size; }
  bool on_whole_tick() const { return half_ticks % 2 == 0; }
};

// The 12 event types, index-stable in this canonical order.
enum class EventType : int {
  LoAskDeep = 0,
  CoAskDeep = 1,
  LoAskTop = 2,
  CoAskTop = 3,
  MoAsk = 4,
  LoAskIs = 5,
  LoBidIs = 6,
  LoBidTop = 7,
  CoBidTop = 8,
  MoBid = 9,
  LoBidDeep = 10,
  CoBidDeep = 11,
};

inline constexpr int kEventTypeCount = 12;

enum class EventFamily : int { LimitOrder = 0, CancelOrder = 1, MarketOrder = 2, InSpread = 3 };

Side side_of(EventType t);
EventType mirror_type(EventType t);
EventFamily family_of(EventType t);
bool is_in_spread(EventType t);
std::string_view event_type_name(EventType t);
EventType event_type_from_name(std::string_view name);

// One side's meta-queues: a top queue (volume at the best limit, spanning
// m_top ticks up to the second-best quote) and an aggregate deep queue
// (m_deep ticks starting at the second-best quote).
struct SideState {
  std::int64_t best_half = 0;  // best price in half-ticks, always even
  std::int64_t q_top = 1;      // shares at the best limit
  std::int64_t m_top = 1;      // ticks from best to just before second-best
  std::int64_t q_deep = 1;     // total shares in the deep meta-queue
  std::int64_t m_deep = 1;     // ticks spanned by the deep meta-queue
};

struct LobState {
  SideState bid;
  SideState ask;
  std::int64_t m_half_depth = 30;  // depth budget from the mid, in ticks
  double sim_time = 0.0;
  double tick_size = 0.01;

  std::int64_t spread_ticks() const { return (ask.best_half - bid.best_half) / 2; }

  // Exact mid in half-ticks; throws StateError on a crossed or locked book.
  std::int64_t mid_half() const;
  TickPrice mid_price() const;

  const SideState& side(Side s) const { return s == Side::Bid ? bid : ask; }
  SideState& side(Side s) { return s == Side::Bid ? bid : ask; }
};

enum class ConstraintKind { DepthOverflow, MinDepth };

struct ConstraintViolation {
  ConstraintKind kind;
  Side side;
  // For DepthOverflow: (s/2 + m_top + m_deep) - M, the overshoot beyond the
  // depth budget. For MinDepth: 1 - m_deep.
  double slack = 0.0;
  std::string describe() const;
};

// The four depth constraints. A side passes iff its deepest modeled level
// stays within M ticks of the mid, i.e. s/2 + m_top + m_deep <= M + 1,
// and m_deep >= 1.
std::vector<ConstraintViolation> check_constraints(const LobState& state);

// Widest admissible m_deep given the spread and a top width (may be <= 0
// when no deep queue fits).
inline std::int64_t max_deep_width(std::int64_t m_half_depth, std::int64_t spread_ticks,
                                   std::int64_t m_top) {
  return floor_div(2 * m_half_depth + 2 - spread_ticks, 2) - m_top;
}

// delta / <P_mid> in basis points.
double relative_tick_size(double tick_size_currency, double avg_mid_price);

// One row of the event-log format: the event plus the full post-event
// meta-queue state (the documented 15 columns).
struct LogRow {
  double time = 0.0;
  EventType type = EventType::LoAskDeep;
  std::int64_t size = 0;
  std::int64_t offset = 0;
  std::int64_t bid_ticks = 0;
  std::int64_t ask_ticks = 0;
  std::int64_t q_top_bid = 0;
  std::int64_t q_top_ask = 0;
  std::int64_t m_top_bid = 0;
  std::int64_t m_top_ask = 0;
  std::int64_t q_deep_bid = 0;
  std::int64_t q_deep_ask = 0;
  std::int64_t m_deep_bid = 0;
  std::int64_t m_deep_ask = 0;
  std::int64_t depleted_levels = 0;

  std::int64_t spread() const { return ask_ticks - bid_ticks; }
  std::int64_t mid_half() const { return bid_ticks + ask_ticks; }
  std::int64_t q_top(Side s) const { return s == Side::Bid ? q_top_bid : q_top_ask; }
  std::int64_t m_top(Side s) const { return s == Side::Bid ? m_top_bid : m_top_ask; }
  std::int64_t q_deep(Side s) const { return s == Side::Bid ? q_deep_bid : q_deep_ask; }
  std::int64_t m_deep(Side s) const { return s == Side::Bid ? m_deep_bid : m_deep_ask; }
};

// One realized jump of the event process plus its book effects. The ledger
// fields (consumed/added/purged/replenished) are in-memory only; the event-log
// CSV carries the documented 15 columns.
struct EventRecord {
  double time = 0.0;
  EventType type = EventType::LoAskDeep;
  std::int64_t size = 0;         // realized order size draw
  std::int64_t offset_ticks = 0; // realized eta; 0 when not applicable
  std::int64_t mid_before_half = 0;
  std::int64_t mid_after_half = 0;
  std::int64_t spread_before = 0;
  std::int64_t spread_after = 0;
  std::int64_t depleted_levels = 0;
  std::int64_t consumed = 0;     // shares actually removed by CO/MO
  std::int64_t added = 0;        // shares entering via LO
  std::int64_t purged = 0;       // shares removed by a depth-budget purge
  std::int64_t purged_passive = 0;  // purge on the opposite side after the spread widened
  std::int64_t replenished = 0;  // shares drawn from the unmodeled deeper book
};

LogRow make_log_row(const EventRecord& rec, const LobState& after);

}  // namespace mqh

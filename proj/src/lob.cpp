#include "mqh/lob.hpp"

#include <sstream>

namespace mqh {

namespace {

constexpr std::array<const char*, kEventTypeCount> kTypeNames = {
    "LO_ask_D", "CO_ask_D", "LO_ask_T", "CO_ask_T", "MO_ask",   "LO_ask_IS",
    "LO_bid_IS", "LO_bid_T", "CO_bid_T", "MO_bid",   "LO_bid_D", "CO_bid_D",
};

constexpr std::array<int, kEventTypeCount> kMirror = {10, 11, 7, 8, 9, 6, 5, 2, 3, 4, 0, 1};

}  // namespace

Side side_of(EventType t) {
  return static_cast<int>(t) <= static_cast<int>(EventType::LoAskIs) ? Side::Ask : Side::Bid;
}

EventType mirror_type(EventType t) { return static_cast<EventType>(kMirror[static_cast<int>(t)]); }

EventFamily family_of(EventType t) {
  switch (t) {
    case EventType::LoAskDeep:
    case EventType::LoAskTop:
    case EventType::LoBidTop:
    case EventType::LoBidDeep:
      return EventFamily::LimitOrder;
    case EventType::CoAskDeep:
    case EventType::CoAskTop:
    case EventType::CoBidTop:
    case EventType::CoBidDeep:
      return EventFamily::CancelOrder;
    case EventType::MoAsk:
    case EventType::MoBid:
      return EventFamily::MarketOrder;
    case EventType::LoAskIs:
    case EventType::LoBidIs:
      return EventFamily::InSpread;
  }
  throw DomainError("unknown event type");
}

bool is_in_spread(EventType t) {
  return t == EventType::LoAskIs || t == EventType::LoBidIs;
}

std::string_view event_type_name(EventType t) { return kTypeNames[static_cast<int>(t)]; }

EventType event_type_from_name(std::string_view name) {
  for (int i = 0; i < kEventTypeCount; ++i) {
    if (name == kTypeNames[i]) return static_cast<EventType>(i);
  }
  throw ParseError("unknown event type name: " + std::string(name));
}

std::int64_t LobState::mid_half() const {
  std::int64_t s = ask.best_half - bid.best_half;
  if (s <= 0) throw StateError("crossed or locked book: spread <= 0");
  return (bid.best_half + ask.best_half) / 2;
}

TickPrice LobState::mid_price() const { return TickPrice{mid_half(), tick_size}; }

std::string ConstraintViolation::describe() const {
  std::ostringstream os;
  if (kind == ConstraintKind::DepthOverflow) {
    os << side_name(side) << " depth-overflow, slack " << slack;
  } else {
    os << side_name(side) << " min-depth, slack " << slack;
  }
  return os.str();
}

std::vector<ConstraintViolation> check_constraints(const LobState& state) {
  std::vector<ConstraintViolation> out;
  const std::int64_t s = state.spread_ticks();
  for (Side sd : {Side::Bid, Side::Ask}) {
    const SideState& x = state.side(sd);
    // Compare in half-ticks so s/2 stays exact: s + 2(m_T + m_D) <= 2M + 2.
    const std::int64_t doubled = s + 2 * (x.m_top + x.m_deep);
    if (doubled > 2 * state.m_half_depth + 2) {
      out.push_back({ConstraintKind::DepthOverflow, sd,
                     0.5 * static_cast<double>(doubled - 2 * state.m_half_depth)});
    }
    if (x.m_deep < 1) {
      out.push_back({ConstraintKind::MinDepth, sd, static_cast<double>(1 - x.m_deep)});
    }
  }
  return out;
}

LogRow make_log_row(const EventRecord& rec, const LobState& after) {
  LogRow r;
  r.time = rec.time;
  r.type = rec.type;
  r.size = rec.size;
  r.offset = rec.offset_ticks;
  r.bid_ticks = after.bid.best_half / 2;
  r.ask_ticks = after.ask.best_half / 2;
  r.q_top_bid = after.bid.q_top;
  r.q_top_ask = after.ask.q_top;
  r.m_top_bid = after.bid.m_top;
  r.m_top_ask = after.ask.m_top;
  r.q_deep_bid = after.bid.q_deep;
  r.q_deep_ask = after.ask.q_deep;
  r.m_deep_bid = after.bid.m_deep;
  r.m_deep_ask = after.ask.m_deep;
  r.depleted_levels = rec.depleted_levels;
  return r;
}

double relative_tick_size(double tick_size_currency, double avg_mid_price) {
  if (tick_size_currency <= 0.0 || avg_mid_price <= 0.0) {
    throw DomainError("relative_tick_size requires positive inputs");
  }
  return tick_size_currency / avg_mid_price * 1e4;
}

}  // namespace mqh

#include "mqh/dynamics.hpp"

#include <algorithm>
#include <sstream>

namespace mqh {

std::int64_t xi_uniform(std::int64_t q, std::int64_t purged_levels, std::int64_t total_levels) {
  if (total_levels < 1 || purged_levels < 0 || purged_levels > total_levels) {
    throw DomainError("xi_uniform: bad level counts");
  }
  if (purged_levels == 0) return 0;
  if (purged_levels == total_levels) return q;
  std::int64_t r = round_div(q * purged_levels, total_levels);
  return std::min(r, q - 1);  // partial purge leaves at least one share
}

std::int64_t partition_uniform(std::int64_t q_deep, std::int64_t new_top_levels,
                               std::int64_t old_deep_levels) {
  if (q_deep < 1 || new_top_levels < 1 || new_top_levels > old_deep_levels) {
    throw DomainError("partition_uniform: bad arguments");
  }
  if (new_top_levels == old_deep_levels) return q_deep;
  std::int64_t r = round_div(q_deep * new_top_levels, old_deep_levels);
  r = std::min(r, q_deep - 1);
  return std::max<std::int64_t>(1, r);
}

std::int64_t max_is_eta(const LobState& st) {
  const std::int64_t s = st.spread_ticks();
  return std::min(s - 1, 2 * st.m_half_depth - s);
}

namespace {

void begin_record(EventRecord& rec, const LobState& st) {
  rec.spread_before = st.spread_ticks();
  rec.mid_before_half = st.mid_half();
}

void end_record(EventRecord& rec, const LobState& st) {
  rec.spread_after = st.spread_ticks();
  rec.mid_after_half = st.mid_half();
}

// When the spread widens, levels drift away from the mid and a side's deep
// queue can overrun the depth budget; shrink it to saturation with the same
// flat purge rule. Returns the purged volume.
std::int64_t purge_to_budget(LobState& st, Side side) {
  SideState& x = st.side(side);
  const std::int64_t s = st.spread_ticks();
  std::int64_t sat = max_deep_width(st.m_half_depth, s, x.m_top);
  std::int64_t purged = 0;
  if (sat < 1) {
    const std::int64_t widest = floor_div(2 * st.m_half_depth + 2 - s, 2);
    if (widest - 1 < 1) {
      throw SimulationError("liquidity exhausted: spread exceeds the depth budget");
    }
    x.m_top = widest - 1;
    sat = 1;
  }
  if (x.m_deep > sat) {
    purged = xi_uniform(x.q_deep, x.m_deep - sat, x.m_deep);
    x.q_deep -= purged;
    x.m_deep = sat;
  }
  return purged;
}

// Rebuild the deep meta-queue from the unmodeled book: absorb any leftover
// width into the top, saturate the depth budget, draw a fresh volume.
void deep_replenish(LobState& st, Side side, WaterfallSampler& ws, EventRecord& rec) {
  SideState& x = st.side(side);
  const std::int64_t s = st.spread_ticks();
  x.m_top += std::max<std::int64_t>(x.m_deep, 0);
  const std::int64_t widest = floor_div(2 * st.m_half_depth + 2 - s, 2);
  const std::int64_t sat = widest - x.m_top;
  if (sat >= 1) {
    x.m_deep = sat;
  } else {
    x.m_deep = 1;
    if (widest - 1 < 1) {
      throw SimulationError("liquidity exhausted: spread exceeds the depth budget");
    }
    x.m_top = std::min(x.m_top, widest - 1);
  }
  x.q_deep = ws.deep_volume(x.m_deep);
  rec.replenished += x.q_deep;
}

// Queue depletion at the top: the spread opens by the old top width and the
// deep meta-queue seeds a new top.
void promote_top(LobState& st, Side side, WaterfallSampler& ws, EventRecord& rec) {
  SideState& x = st.side(side);
  const std::int64_t mt_old = x.m_top;
  x.best_half += (side == Side::Ask ? +2 : -2) * mt_old;
  const std::int64_t eta1 = ws.new_top_width(x.m_deep);
  if (eta1 < 1 || eta1 > x.m_deep) throw DomainError("new top width out of range");
  x.q_top = partition_uniform(x.q_deep, eta1, x.m_deep);
  x.q_deep -= x.q_top;
  x.m_deep -= eta1;
  x.m_top = eta1;
  rec.depleted_levels += 1;
  if (x.m_deep < 1 || x.q_deep < 1) {
    x.q_deep = std::max<std::int64_t>(x.q_deep, 0);
    deep_replenish(st, side, ws, rec);
  }
}

}  // namespace

EventRecord apply_is_limit_order(LobState& st, Side side, std::int64_t eta, std::int64_t kappa) {
  EventRecord rec;
  rec.type = side == Side::Ask ? EventType::LoAskIs : EventType::LoBidIs;
  begin_record(rec, st);
  const std::int64_t s = rec.spread_before;
  if (s < 2) throw DomainError("in-spread order requires spread >= 2");
  if (eta < 1 || eta > max_is_eta(st)) throw DomainError("eta_IS out of range");
  if (kappa < 1) throw DomainError("kappa must be >= 1");
  SideState& x = st.side(side);

  // Old top merges into the deep meta-queue, the order becomes the new top.
  std::int64_t m_merged = x.m_deep + x.m_top;
  std::int64_t q_merged = x.q_deep + x.q_top;
  x.m_top = eta;
  x.q_top = kappa;
  x.best_half += (side == Side::Ask ? -2 : +2) * eta;

  // Depth-budget purge of the widened deep queue.
  const std::int64_t sat = max_deep_width(st.m_half_depth, s - eta, eta);
  if (m_merged > sat) {
    const std::int64_t dq = xi_uniform(q_merged, m_merged - sat, m_merged);
    rec.purged = dq;
    q_merged -= dq;
    m_merged = sat;
  }
  x.m_deep = m_merged;
  x.q_deep = q_merged;

  rec.offset_ticks = eta;
  rec.size = kappa;
  rec.added = kappa;
  end_record(rec, st);
  return rec;
}

EventRecord apply_top_limit_order(LobState& st, Side side, std::int64_t eta, std::int64_t kappa) {
  EventRecord rec;
  rec.type = side == Side::Ask ? EventType::LoAskTop : EventType::LoBidTop;
  begin_record(rec, st);
  SideState& x = st.side(side);
  if (eta < 0 || eta > x.m_top - 1) throw DomainError("eta_T out of range");
  if (kappa < 1) throw DomainError("kappa must be >= 1");
  if (eta == 0) {
    x.q_top += kappa;
  } else {
    // The order becomes the new second-best and joins the deep meta-queue.
    x.m_deep += x.m_top - eta;
    x.m_top = eta;
    x.q_deep += kappa;
  }
  rec.offset_ticks = eta;
  rec.size = kappa;
  rec.added = kappa;
  end_record(rec, st);
  return rec;
}

EventRecord apply_top_cancel(LobState& st, Side side, std::int64_t kappa, WaterfallSampler& ws) {
  EventRecord rec;
  rec.type = side == Side::Ask ? EventType::CoAskTop : EventType::CoBidTop;
  begin_record(rec, st);
  SideState& x = st.side(side);
  if (kappa < 1) throw DomainError("kappa must be >= 1");
  rec.consumed = std::min(kappa, x.q_top);
  x.q_top -= kappa;
  if (x.q_top < 1) {
    x.q_top = 0;
    promote_top(st, side, ws, rec);
    rec.purged_passive = purge_to_budget(st, other_side(side));
  }
  rec.size = kappa;
  end_record(rec, st);
  return rec;
}

EventRecord apply_market_order(LobState& st, Side side, std::int64_t kappa, WaterfallSampler& ws) {
  EventRecord rec;
  rec.type = side == Side::Ask ? EventType::MoAsk : EventType::MoBid;
  begin_record(rec, st);
  SideState& x = st.side(side);
  if (kappa < 1) throw DomainError("kappa must be >= 1");
  std::int64_t remaining = kappa;
  while (remaining >= x.q_top) {
    remaining -= x.q_top;
    x.q_top = 0;
    promote_top(st, side, ws, rec);
    if (rec.depleted_levels > 1000000) {
      throw SimulationError("market order waterfall did not terminate");
    }
  }
  x.q_top -= remaining;
  if (rec.depleted_levels > 0) rec.purged_passive = purge_to_budget(st, other_side(side));
  rec.consumed = kappa;
  rec.size = kappa;
  end_record(rec, st);
  return rec;
}

EventRecord apply_deep_limit_order(LobState& st, Side side, std::int64_t kappa) {
  EventRecord rec;
  rec.type = side == Side::Ask ? EventType::LoAskDeep : EventType::LoBidDeep;
  begin_record(rec, st);
  if (kappa < 1) throw DomainError("kappa must be >= 1");
  st.side(side).q_deep += kappa;
  rec.size = kappa;
  rec.added = kappa;
  end_record(rec, st);
  return rec;
}

EventRecord apply_deep_cancel(LobState& st, Side side, std::int64_t kappa, WaterfallSampler& ws) {
  EventRecord rec;
  rec.type = side == Side::Ask ? EventType::CoAskDeep : EventType::CoBidDeep;
  begin_record(rec, st);
  SideState& x = st.side(side);
  if (kappa < 1) throw DomainError("kappa must be >= 1");
  rec.consumed = std::min(kappa, x.q_deep);
  x.q_deep -= kappa;
  if (x.q_deep < 1) {
    // Depletion: the emptied span is absorbed by the top and a fresh deep
    // queue is drawn from the unmodeled book.
    x.q_deep = 0;
    deep_replenish(st, side, ws, rec);
  }
  rec.size = kappa;
  end_record(rec, st);
  return rec;
}

LobState make_initial_state(const InitConfig& init, const HandlerConfig& handlers,
                            std::int64_t m_half_depth, double tick_size, Rng& rng) {
  if (init.s0 < 1) throw DomainError("initial spread must be >= 1");
  if (init.s0 > 2 * m_half_depth - 2) {
    throw DomainError("initial spread exceeds the depth budget");
  }
  LobState st;
  st.m_half_depth = m_half_depth;
  st.tick_size = tick_size;
  const std::int64_t bid_tick = init.price_anchor_ticks - (init.s0 + 1) / 2;
  st.bid.best_half = 2 * bid_tick;
  st.ask.best_half = 2 * (bid_tick + init.s0);

  GeomWithSpikes top_width(init.m0_top, 1);
  GeomWithSpikes deep_width(init.m0_deep, 1);
  const std::int64_t widest = floor_div(2 * m_half_depth + 2 - init.s0, 2);
  for (Side sd : {Side::Bid, Side::Ask}) {
    SideState& x = st.side(sd);
    x.m_top = top_width.sample_bounded(rng, 1, widest - 1);
    x.m_deep = deep_width.sample_bounded(rng, 1, widest - x.m_top);
    x.q_top = handlers.kappa_t.sample(rng);
    x.q_deep = handlers.deep_volume.sample(rng, x.m_deep);
  }
  return st;
}

SimResult run_simulation(const HawkesSpec& spec, const HandlerConfig& handlers,
                         const InitConfig& init, std::int64_t m_half_depth,
                         const RunOptions& opts) {
  spec.validate();
  Rng rng(opts.seed);
  SimResult out;
  LobState st = make_initial_state(init, handlers, m_half_depth, spec.tick_size, rng);
  out.initial_state = st;
  out.diag.stability_warning = HawkesSimulator::stability_warning(spec, init.s0);

  HawkesSimulator hawkes(spec);
  ConfigWaterfallSampler ws(handlers, rng);
  if (opts.keep_snapshots) out.snapshots.push_back({0.0, st});

  while (true) {
    if (opts.max_events > 0 && out.diag.events >= opts.max_events) break;
    const std::int64_t s = st.spread_ticks();
    auto nxt = hawkes.next(rng, opts.horizon, s);
    if (!nxt) break;
    const auto [t, type] = *nxt;
    st.sim_time = t;
    const Side sd = side_of(type);
    const SideState& x = st.side(sd);

    EventRecord rec;
    switch (family_of(type)) {
      case EventFamily::InSpread: {
        const std::int64_t eta = handlers.eta_is.sample_bounded(rng, 1, max_is_eta(st));
        const std::int64_t kappa = handlers.kappa_is.sample(rng);
        rec = apply_is_limit_order(st, sd, eta, kappa);
        break;
      }
      case EventFamily::LimitOrder: {
        if (type == EventType::LoAskTop || type == EventType::LoBidTop) {
          const std::int64_t eta = handlers.eta_t.sample_bounded(rng, 0, x.m_top - 1);
          const std::int64_t kappa = handlers.kappa_t.sample(rng);
          rec = apply_top_limit_order(st, sd, eta, kappa);
        } else {
          rec = apply_deep_limit_order(st, sd, handlers.kappa_d.sample(rng));
        }
        break;
      }
      case EventFamily::CancelOrder: {
        if (type == EventType::CoAskTop || type == EventType::CoBidTop) {
          const std::int64_t kappa = handlers.kappa_t.sample_bounded(rng, 1, x.q_top + 1);
          rec = apply_top_cancel(st, sd, kappa, ws);
        } else {
          const std::int64_t kappa = handlers.kappa_d.sample_bounded(rng, 1, x.q_deep + 1);
          rec = apply_deep_cancel(st, sd, kappa, ws);
        }
        break;
      }
      case EventFamily::MarketOrder: {
        rec = apply_market_order(st, sd, handlers.kappa_mo.sample(rng), ws);
        break;
      }
    }
    rec.time = t;

    if (opts.check_invariants) {
      auto violations = check_constraints(st);
      if (!violations.empty()) {
        std::ostringstream os;
        os << "post-handler invariant breach at t=" << t << ": " << violations[0].describe();
        throw SimulationError(os.str());
      }
      if (st.spread_ticks() < 1) throw SimulationError("post-handler spread < 1");
    }
    if (rec.purged > 0) ++out.diag.purge_events;
    if (rec.replenished > 0) ++out.diag.replenish_events;
    ++out.diag.counts[static_cast<int>(type)];
    ++out.diag.events;
    if (opts.on_event) opts.on_event(rec, st);
    if (opts.keep_log) out.log.push_back(rec);
    if (opts.keep_snapshots && opts.snapshot_every > 0 &&
        out.diag.events % static_cast<std::uint64_t>(opts.snapshot_every) == 0) {
      out.snapshots.push_back({t, st});
    }
  }
  out.diag.end_time = (opts.max_events > 0 && out.diag.events >= opts.max_events)
                          ? st.sim_time
                          : opts.horizon;
  st.sim_time = out.diag.end_time;
  out.final_state = st;
  return out;
}

}  // namespace mqh

#include <doctest.h>

#include <cmath>

#include "mqh/dynamics.hpp"
#include "mqh/experiments.hpp"
#include "testutil.hpp"

using namespace mqh;
using testutil::make_state;
using testutil::ScriptedSampler;

namespace {

// Ledger identity: shares only enter via LO, leave via CO/MO and purges, or
// arrive through the replenishment boundary.
void check_ledger(const LobState& before, const LobState& after, const EventRecord& rec) {
  const Side sd = side_of(rec.type);
  const SideState& b = before.side(sd);
  const SideState& a = after.side(sd);
  const std::int64_t delta = (a.q_top + a.q_deep) - (b.q_top + b.q_deep);
  CHECK(delta == rec.added - rec.consumed - rec.purged + rec.replenished);
  const SideState& ob = before.side(other_side(sd));
  const SideState& oa = after.side(other_side(sd));
  CHECK((oa.q_top + oa.q_deep) - (ob.q_top + ob.q_deep) == -rec.purged_passive);
}

LobState mirrored(const LobState& st) {
  LobState m = st;
  const std::int64_t mid2 = st.bid.best_half + st.ask.best_half;
  m.bid = st.ask;
  m.ask = st.bid;
  m.bid.best_half = mid2 - st.ask.best_half;
  m.ask.best_half = mid2 - st.bid.best_half;
  return m;
}

bool states_mirror_equal(const LobState& a, const LobState& b) {
  const LobState mb = mirrored(b);
  return a.bid.q_top == mb.bid.q_top && a.bid.q_deep == mb.bid.q_deep &&
         a.bid.m_top == mb.bid.m_top && a.bid.m_deep == mb.bid.m_deep &&
         a.ask.q_top == mb.ask.q_top && a.ask.q_deep == mb.ask.q_deep &&
         a.ask.m_top == mb.ask.m_top && a.ask.m_deep == mb.ask.m_deep &&
         a.spread_ticks() == b.spread_ticks();
}

}  // namespace

TEST_CASE("xi purge rule") {
  CHECK(xi_uniform(570, 5, 29) == 98);
  CHECK(xi_uniform(1000, 0, 7) == 0);
  CHECK(xi_uniform(1000, 7, 7) == 1000);
  CHECK(xi_uniform(1, 1, 2) == 0);  // partial purge keeps one share
  CHECK(xi_uniform(5, 4, 5) == 4);
  CHECK_THROWS_AS(xi_uniform(10, 3, 2), DomainError);
}

TEST_CASE("partition rule") {
  CHECK(partition_uniform(120, 3, 12) == 30);
  CHECK(partition_uniform(77, 4, 4) == 77);
  CHECK(partition_uniform(5, 1, 10) == 1);
  CHECK(partition_uniform(1, 1, 10) == 1);  // floor dominates; caller replenishes
  CHECK_THROWS_AS(partition_uniform(10, 0, 5), DomainError);
  CHECK_THROWS_AS(partition_uniform(10, 6, 5), DomainError);
}

TEST_CASE("in-spread limit order") {
  SUBCASE("no purge needed") {
    LobState st = make_state(30, 10, 3, 50, 20, 500);
    const LobState before = st;
    const EventRecord rec = apply_is_limit_order(st, Side::Ask, 4, 7);
    CHECK(st.spread_ticks() == 6);
    CHECK(st.ask.m_top == 4);
    CHECK(st.ask.q_top == 7);
    CHECK(st.ask.m_deep == 23);
    CHECK(st.ask.q_deep == 550);
    CHECK(rec.purged == 0);
    CHECK(rec.spread_before == 10);
    CHECK(rec.spread_after == 6);
    CHECK(rec.mid_after_half == rec.mid_before_half - 4);  // ask improved by 4 ticks
    CHECK(check_constraints(st).empty());
    check_ledger(before, st, rec);
  }

  SUBCASE("purge saturates the depth budget") {
    LobState st = make_state(30, 10, 3, 50, 26, 520);
    st.bid.m_deep = 20;  // keep the passive side within budget
    const LobState before = st;
    const EventRecord rec = apply_is_limit_order(st, Side::Ask, 4, 7);
    CHECK(st.ask.m_deep == 24);
    CHECK(rec.purged == 98);
    CHECK(st.ask.q_deep == 472);
    CHECK(check_constraints(st).empty());
    check_ledger(before, st, rec);
  }

  SUBCASE("minimal improvement at a two-tick spread") {
    LobState st = make_state(30, 2, 1, 10, 5, 50);
    const EventRecord rec = apply_is_limit_order(st, Side::Bid, 1, 3);
    CHECK(st.spread_ticks() == 1);
    CHECK(st.bid.m_top == 1);
    CHECK(st.bid.q_top == 3);
    CHECK(rec.mid_after_half == rec.mid_before_half + 1);
    CHECK(check_constraints(st).empty());
  }

  SUBCASE("preconditions") {
    LobState locked = make_state(30, 1, 1, 10, 5, 50);
    CHECK_THROWS_AS(apply_is_limit_order(locked, Side::Ask, 1, 5), DomainError);
    LobState st = make_state(30, 10, 3, 50, 20, 500);
    CHECK_THROWS_AS(apply_is_limit_order(st, Side::Ask, 10, 5), DomainError);
    CHECK_THROWS_AS(apply_is_limit_order(st, Side::Ask, 0, 5), DomainError);
  }
}

TEST_CASE("top limit order") {
  SUBCASE("joins the best queue at eta zero") {
    LobState st = make_state(30, 10, 3, 50, 20, 500);
    const LobState before = st;
    const EventRecord rec = apply_top_limit_order(st, Side::Ask, 0, 10);
    CHECK(st.ask.q_top == 60);
    CHECK(st.ask.m_top == 3);
    CHECK(st.spread_ticks() == 10);
    check_ledger(before, st, rec);
  }

  SUBCASE("narrows the top and feeds the deep queue") {
    LobState st = make_state(30, 10, 5, 50, 10, 200);
    const LobState before = st;
    const EventRecord rec = apply_top_limit_order(st, Side::Bid, 2, 7);
    CHECK(st.bid.m_top == 2);
    CHECK(st.bid.m_deep == 13);
    CHECK(st.bid.q_deep == 207);
    CHECK(st.bid.q_top == 50);
    CHECK(check_constraints(st).empty());
    check_ledger(before, st, rec);
  }

  SUBCASE("narrowest legal insertion") {
    LobState st = make_state(30, 10, 5, 50, 10, 200);
    apply_top_limit_order(st, Side::Ask, 4, 7);
    CHECK(st.ask.m_top == 4);
    CHECK(st.ask.m_deep == 11);
  }

  SUBCASE("eta at or beyond the top width is rejected") {
    LobState st = make_state(30, 10, 5, 50, 10, 200);
    CHECK_THROWS_AS(apply_top_limit_order(st, Side::Ask, 5, 7), DomainError);
  }
}

TEST_CASE("top cancel") {
  SUBCASE("plain decrement") {
    LobState st = make_state(30, 4, 2, 10, 12, 120);
    ScriptedSampler ws;
    const LobState before = st;
    const EventRecord rec = apply_top_cancel(st, Side::Ask, 4, ws);
    CHECK(st.ask.q_top == 6);
    CHECK(rec.depleted_levels == 0);
    CHECK(rec.consumed == 4);
    check_ledger(before, st, rec);
  }

  SUBCASE("depletion promotes a partitioned top") {
    LobState st = make_state(30, 4, 2, 5, 12, 120);
    ScriptedSampler ws;
    ws.widths = {3};
    const EventRecord rec = apply_top_cancel(st, Side::Ask, 5, ws);
    CHECK(st.spread_ticks() == 6);
    CHECK(st.ask.m_top == 3);
    CHECK(st.ask.q_top == 30);
    CHECK(st.ask.m_deep == 9);
    CHECK(st.ask.q_deep == 90);
    CHECK(rec.depleted_levels == 1);
    CHECK(rec.mid_after_half == rec.mid_before_half + 2);
    CHECK(check_constraints(st).empty());
  }

  SUBCASE("exact cancel depletes") {
    LobState st = make_state(30, 4, 2, 5, 12, 120);
    ScriptedSampler ws;
    ws.widths = {1};
    const EventRecord rec = apply_top_cancel(st, Side::Bid, 5, ws);
    CHECK(rec.depleted_levels == 1);
    CHECK(st.bid.m_top == 1);
  }

  SUBCASE("over-cancel consumes only the resting volume") {
    LobState st = make_state(30, 4, 2, 5, 12, 120);
    ScriptedSampler ws;
    ws.widths = {2};
    const LobState before = st;
    const EventRecord rec = apply_top_cancel(st, Side::Ask, 6, ws);
    CHECK(rec.consumed == 5);
    check_ledger(before, st, rec);
  }
}

TEST_CASE("market order waterfall") {
  SUBCASE("partial fill leaves the top standing") {
    LobState st = make_state(30, 4, 2, 10, 12, 120);
    ScriptedSampler ws;
    const EventRecord rec = apply_market_order(st, Side::Ask, 4, ws);
    CHECK(st.ask.q_top == 6);
    CHECK(rec.depleted_levels == 0);
    CHECK(rec.mid_after_half == rec.mid_before_half);
  }

  SUBCASE("one depletion, remainder from the new top") {
    LobState st = make_state(30, 4, 2, 5, 12, 120);
    ScriptedSampler ws;
    ws.widths = {3};
    const LobState before = st;
    const EventRecord rec = apply_market_order(st, Side::Ask, 12, ws);
    CHECK(rec.depleted_levels == 1);
    CHECK(st.ask.q_top == 23);  // partitioned 30 minus the remaining 7
    CHECK(st.spread_ticks() == 6);
    CHECK(rec.mid_after_half - rec.mid_before_half == 2);  // old top width / 2
    CHECK(check_constraints(st).empty());
    check_ledger(before, st, rec);
  }

  SUBCASE("three levels swept") {
    LobState st = make_state(30, 4, 1, 5, 12, 120);
    ScriptedSampler ws;
    ws.widths = {2, 2, 2};
    // partitions: 20 of 120 over 2 of 12 levels, then 20 of 100 over 10, then 20 of 80
    const EventRecord rec = apply_market_order(st, Side::Bid, 5 + 20 + 20 + 10, ws);
    CHECK(rec.depleted_levels == 3);
    CHECK(st.bid.q_top == 10);
    CHECK(st.bid.q_deep == 60);
    CHECK(st.spread_ticks() == 4 + 1 + 2 + 2);
    CHECK(rec.mid_before_half - rec.mid_after_half == 5);  // bid fell 1+2+2 ticks
    CHECK(check_constraints(st).empty());
  }
}

TEST_CASE("deep limit order and cancel") {
  SUBCASE("deep add is a pure increment") {
    LobState st = make_state(30, 4, 3, 50, 10, 100);
    const LobState before = st;
    const EventRecord rec = apply_deep_limit_order(st, Side::Ask, 25);
    CHECK(st.ask.q_deep == 125);
    check_ledger(before, st, rec);
  }

  SUBCASE("deep depletion absorbs and replenishes") {
    LobState st = make_state(30, 4, 3, 50, 10, 8);
    ScriptedSampler ws;
    ws.volumes = {400};
    const LobState before = st;
    const EventRecord rec = apply_deep_cancel(st, Side::Ask, 8, ws);
    CHECK(st.ask.m_top == 13);
    CHECK(st.ask.m_deep == 16);  // saturates the depth budget
    CHECK(st.ask.q_deep == 400);
    CHECK(rec.replenished == 400);
    CHECK(rec.consumed == 8);
    CHECK(check_constraints(st).empty());
    check_ledger(before, st, rec);
  }

  SUBCASE("saturated absorb falls back to a one-tick deep queue") {
    LobState st = make_state(30, 4, 10, 50, 19, 5);  // 2+10+19 = 31 saturated
    ScriptedSampler ws;
    ws.volumes = {77};
    const EventRecord rec = apply_deep_cancel(st, Side::Bid, 5, ws);
    CHECK(st.bid.m_deep == 1);
    CHECK(st.bid.m_top == 28);
    CHECK(st.bid.q_deep == 77);
    CHECK(rec.replenished == 77);
    CHECK(check_constraints(st).empty());
  }
}

TEST_CASE("mirror replay yields the mirrored trajectory") {
  LobState a = make_state(40, 8, 3, 40, 12, 300);
  LobState b = mirrored(a);
  REQUIRE(states_mirror_equal(a, b));

  struct Step {
    int op;
    Side side;
    std::int64_t x, y;
  };
  const std::vector<Step> script = {
      {0, Side::Ask, 3, 12}, {1, Side::Bid, 2, 9},   {2, Side::Ask, 41, 0}, {3, Side::Bid, 60, 0},
      {4, Side::Ask, 25, 0}, {5, Side::Bid, 301, 0}, {0, Side::Bid, 2, 6},  {2, Side::Bid, 8, 0},
  };
  for (const Step& s : script) {
    ScriptedSampler wa, wb;
    wa.widths = {2, 3, 4};
    wb.widths = {2, 3, 4};
    wa.volumes = {150, 200};
    wb.volumes = {150, 200};
    const Side ms = other_side(s.side);
    switch (s.op) {
      case 0:
        apply_is_limit_order(a, s.side, s.x, s.y);
        apply_is_limit_order(b, ms, s.x, s.y);
        break;
      case 1:
        apply_top_limit_order(a, s.side, s.x, s.y);
        apply_top_limit_order(b, ms, s.x, s.y);
        break;
      case 2:
        apply_top_cancel(a, s.side, s.x, wa);
        apply_top_cancel(b, ms, s.x, wb);
        break;
      case 3:
        apply_deep_limit_order(a, s.side, s.x);
        apply_deep_limit_order(b, ms, s.x);
        break;
      case 4:
        apply_market_order(a, s.side, s.x, wa);
        apply_market_order(b, ms, s.x, wb);
        break;
      case 5:
        apply_deep_cancel(a, s.side, s.x, wa);
        apply_deep_cancel(b, ms, s.x, wb);
        break;
    }
    CAPTURE(s.op);
    REQUIRE(states_mirror_equal(a, b));
    REQUIRE(check_constraints(a).empty());
  }
}

TEST_CASE("coupled run: Poisson reduction with invariants") {
  RunConfig cfg = reference_config();
  for (auto& row : cfg.hawkes.kernels) {
    for (auto& k : row) k = PowerLawKernel{};
  }
  cfg.hawkes.mu.fill(0.05);
  cfg.hawkes.is_alpha = 0.01;
  cfg.hawkes.is_beta = 1.0;
  cfg.init.s0 = 2;
  RunOptions opts;
  opts.horizon = 10.0;
  opts.seed = 5;
  SimResult res = run_simulation(cfg.hawkes, cfg.handlers, cfg.init, cfg.m_half_depth, opts);
  // Every record passed the in-loop constraint check; the total count sits
  // within a Poisson band (the in-spread intensity is state-modulated, so
  // allow a loose margin around the 12-type total).
  const double expect = 0.05 * 12.0 * 10.0;
  CHECK(std::abs(static_cast<double>(res.diag.events) - expect) <
        3.0 * std::sqrt(expect) + 3.0);
  for (const EventRecord& r : res.log) {
    CHECK(r.spread_after >= 1);
  }
}

TEST_CASE("coupled run: determinism and exact per-event ledger") {
  RunConfig cfg = reference_config();
  RunOptions opts;
  opts.horizon = 100.0;
  opts.seed = 2024;

  SimResult a = run_simulation(cfg.hawkes, cfg.handlers, cfg.init, cfg.m_half_depth, opts);
  SimResult b = run_simulation(cfg.hawkes, cfg.handlers, cfg.init, cfg.m_half_depth, opts);
  REQUIRE(a.log.size() == b.log.size());
  REQUIRE(a.log.size() > 100);
  for (std::size_t i = 0; i < a.log.size(); ++i) {
    CHECK(a.log[i].time == b.log[i].time);
    CHECK(a.log[i].type == b.log[i].type);
    CHECK(a.log[i].size == b.log[i].size);
  }

  LobState prev = a.initial_state;
  std::int64_t checked = 0;
  RunOptions opts2 = opts;
  opts2.keep_log = false;
  opts2.on_event = [&](const EventRecord& rec, const LobState& st) {
    const Side sd = side_of(rec.type);
    const SideState& pb = prev.side(sd);
    const SideState& cb = st.side(sd);
    const std::int64_t delta = (cb.q_top + cb.q_deep) - (pb.q_top + pb.q_deep);
    CHECK(delta == rec.added - rec.consumed - rec.purged + rec.replenished);
    const SideState& po = prev.side(other_side(sd));
    const SideState& co = st.side(other_side(sd));
    CHECK((co.q_top + co.q_deep) - (po.q_top + po.q_deep) == -rec.purged_passive);
    prev = st;
    ++checked;
  };
  run_simulation(cfg.hawkes, cfg.handlers, cfg.init, cfg.m_half_depth, opts2);
  CHECK(checked == static_cast<std::int64_t>(a.log.size()));
}

TEST_CASE("reference config holds a wide stationary spread") {
  RunConfig cfg = reference_config();
  cfg.horizon = 2000.0;
  const PointMetrics m = run_point_metrics(cfg, 7, 0.3);
  REQUIRE(m.ok);
  CHECK(m.mean_spread > 2.0);
  CHECK(m.events > 1000);
}

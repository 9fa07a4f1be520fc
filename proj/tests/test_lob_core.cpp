#include <doctest.h>

#include "mqh/lob.hpp"
#include "testutil.hpp"

using namespace mqh;
using testutil::make_state;

TEST_CASE("relative tick size") {
  CHECK(relative_tick_size(0.01, 6.07) == doctest::Approx(16.47).epsilon(0.001));
  CHECK(relative_tick_size(0.01, 1859.92) == doctest::Approx(0.05).epsilon(0.08));
  CHECK(relative_tick_size(1.0, 10000.0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(relative_tick_size(0.0, 5.0), DomainError);
  CHECK_THROWS_AS(relative_tick_size(0.01, -1.0), DomainError);
}

TEST_CASE("event type canonical order and mirror") {
  CHECK(event_type_name(EventType::LoAskDeep) == "LO_ask_D");
  CHECK(event_type_name(EventType::MoAsk) == "MO_ask");
  CHECK(event_type_name(EventType::CoBidDeep) == "CO_bid_D");
  CHECK(static_cast<int>(EventType::LoBidIs) == 6);
  CHECK(static_cast<int>(EventType::MoBid) == 9);
  for (int i = 0; i < kEventTypeCount; ++i) {
    const EventType t = static_cast<EventType>(i);
    CHECK(mirror_type(mirror_type(t)) == t);
    CHECK(side_of(mirror_type(t)) == other_side(side_of(t)));
    CHECK(family_of(mirror_type(t)) == family_of(t));
    CHECK(event_type_from_name(event_type_name(t)) == t);
  }
  CHECK(mirror_type(EventType::LoAskDeep) == EventType::LoBidDeep);
  CHECK(mirror_type(EventType::MoAsk) == EventType::MoBid);
  CHECK(mirror_type(EventType::LoAskIs) == EventType::LoBidIs);
}

TEST_CASE("depth constraints") {
  // M=30, s=10, m_T=3, m_D=22: 5+3+22 = 30 within budget.
  CHECK(check_constraints(make_state(30, 10, 3, 50, 22, 500)).empty());

  // Saturated post-purge state: 3+4+24 = 31 = M+1 still passes.
  {
    LobState st = make_state(30, 6, 4, 7, 24, 472);
    CHECK(check_constraints(st).empty());
  }

  // m_T=4, m_D=29 on the ask: 5+4+29 = 38 overflows with slack 8.
  {
    LobState st = make_state(30, 10, 3, 50, 22, 500);
    st.ask.m_top = 4;
    st.ask.m_deep = 29;
    const auto v = check_constraints(st);
    REQUIRE(v.size() == 1);
    CHECK(v[0].kind == ConstraintKind::DepthOverflow);
    CHECK(v[0].side == Side::Ask);
    CHECK(v[0].slack == doctest::Approx(8.0));
  }

  // One past the saturation boundary.
  {
    LobState st = make_state(30, 6, 4, 7, 25, 472);
    const auto v = check_constraints(st);
    REQUIRE(v.size() == 2);
    CHECK(v[0].slack == doctest::Approx(2.0));
  }

  // m_D = 0 on the bid violates the minimum depth.
  {
    LobState st = make_state(30, 10, 3, 50, 22, 500);
    st.bid.m_deep = 0;
    const auto v = check_constraints(st);
    REQUIRE(v.size() == 1);
    CHECK(v[0].kind == ConstraintKind::MinDepth);
    CHECK(v[0].side == Side::Bid);
    CHECK(v[0].describe().find("bid") != std::string::npos);
  }
}

TEST_CASE("mid price in exact half-ticks") {
  LobState st;
  st.bid.best_half = 200;  // 100 ticks
  st.ask.best_half = 202;  // 101 ticks
  CHECK(st.mid_half() == 201);
  CHECK(st.mid_price().ticks() == doctest::Approx(100.5));

  st.ask.best_half = 220;  // 110 ticks
  CHECK(st.mid_half() == 210);

  st.ask.best_half = st.bid.best_half;
  CHECK_THROWS_AS(st.mid_half(), StateError);
}

TEST_CASE("odd spreads keep exact half-tick arithmetic") {
  LobState st = make_state(30, 7, 2, 10, 3, 40);
  CHECK(st.spread_ticks() == 7);
  CHECK(st.mid_half() % 2 != 0);  // mid on a half-tick
  CHECK(st.bid.best_half % 2 == 0);
  CHECK(st.ask.best_half % 2 == 0);
  // Budget comparison at s=7: 2M+2-s odd, floor keeps the state legal.
  CHECK(max_deep_width(30, 7, 2) == (2 * 30 + 2 - 7) / 2 - 2);
}

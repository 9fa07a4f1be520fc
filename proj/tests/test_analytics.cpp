#include <doctest.h>

#include <cmath>

#include "mqh/analytics.hpp"
#include "mqh/experiments.hpp"

using namespace mqh;

namespace {

LogRow row_at(double t, EventType type, std::int64_t bid, std::int64_t ask, std::int64_t size = 1,
              std::int64_t offset = 0) {
  LogRow r;
  r.time = t;
  r.type = type;
  r.size = size;
  r.offset = offset;
  r.bid_ticks = bid;
  r.ask_ticks = ask;
  r.q_top_bid = r.q_top_ask = 10;
  r.m_top_bid = r.m_top_ask = 1;
  r.q_deep_bid = r.q_deep_ask = 20;
  r.m_deep_bid = r.m_deep_ask = 5;
  return r;
}

}  // namespace

TEST_CASE("time-weighted mean") {
  SUBCASE("constant series") {
    WeightedSeries s{{0.0}, {2.0}, 7.0};
    CHECK(time_weighted_mean(s) == doctest::Approx(2.0));
  }

  SUBCASE("hand integration") {
    // value 1 on [0,1), 3 on [1,4), T=4 -> (1 + 9)/4
    WeightedSeries s{{0.0, 1.0}, {1.0, 3.0}, 4.0};
    CHECK(time_weighted_mean(s) == doctest::Approx(2.5));
  }

  SUBCASE("zero-duration breakpoints do not move the mean") {
    WeightedSeries a{{0.0, 1.0}, {1.0, 3.0}, 4.0};
    WeightedSeries b{{0.0, 0.5, 0.5, 1.0}, {1.0, 7.0, 1.0, 3.0}, 4.0};
    CHECK(time_weighted_mean(a) == doctest::Approx(time_weighted_mean(b)));
    CHECK(index_of_dispersion(a) == doctest::Approx(index_of_dispersion(b)));
  }

  SUBCASE("empty series errors") {
    WeightedSeries s;
    CHECK_THROWS_AS(time_weighted_mean(s), DomainError);
  }
}

TEST_CASE("index of dispersion") {
  SUBCASE("degenerate distribution") {
    WeightedSeries s{{0.0}, {2.0}, 5.0};
    CHECK(index_of_dispersion(s) == doctest::Approx(0.0));
  }

  SUBCASE("two-point distribution") {
    // 1 w.p. 1/2, 3 w.p. 1/2: mean 2, var 1.
    WeightedSeries s{{0.0, 5.0}, {1.0, 3.0}, 10.0};
    CHECK(index_of_dispersion(s) == doctest::Approx(0.5));
  }

  SUBCASE("poisson samples approach one") {
    Rng rng(8);
    std::vector<double> samples;
    const double lam = 7.0;
    for (int i = 0; i < 200000; ++i) {
      double l = std::exp(-lam), p = 1.0;
      int k = 0;
      do {
        ++k;
        p *= rng.uniform();
      } while (p > l);
      samples.push_back(k - 1);
    }
    CHECK(index_of_dispersion(samples) == doctest::Approx(1.0).epsilon(0.02));
  }

  SUBCASE("zero mean errors") {
    WeightedSeries s{{0.0}, {0.0}, 5.0};
    CHECK_THROWS_AS(index_of_dispersion(s), DomainError);
  }
}

TEST_CASE("trade-driven mid changes") {
  SUBCASE("half-tick moves only") {
    std::vector<LogRow> rows;
    rows.push_back(row_at(0.0, EventType::LoAskDeep, 100, 101));
    std::int64_t bid = 100, ask = 101;
    for (int i = 0; i < 4; ++i) {
      ask += 1;  // ask-side depletion, mid up half a tick
      LogRow r = row_at(1.0 + i, EventType::MoAsk, bid, ask);
      r.depleted_levels = 1;
      rows.push_back(r);
    }
    const TradeMidStats st = trade_mid_changes(rows, 0.01);
    CHECK(st.n_trades == 4);
    CHECK(st.n_moving == 4);
    CHECK(st.mean_abs_currency == doctest::Approx(0.005));
  }

  SUBCASE("waterfall arithmetic by hand") {
    // MO depletes a 3-tick-wide top and the promoted 2-tick top behind it:
    // the ask moves 3 + 2 ticks, the mid by (3+2)/2 ticks.
    std::vector<LogRow> rows;
    rows.push_back(row_at(0.0, EventType::LoAskDeep, 100, 104));
    LogRow r = row_at(1.0, EventType::MoAsk, 100, 109);
    r.depleted_levels = 2;
    rows.push_back(r);
    const TradeMidStats st = trade_mid_changes(rows, 0.01);
    CHECK(st.n_moving == 1);
    CHECK(st.mean_abs_currency == doctest::Approx(0.01 * 2.5));
    CHECK(st.hist_abs_half_ticks.at(5) == 1);
  }

  SUBCASE("no market orders yields the empty sentinel") {
    std::vector<LogRow> rows = {row_at(0.0, EventType::LoAskDeep, 100, 101)};
    const TradeMidStats st = trade_mid_changes(rows, 0.01);
    CHECK(!st.has_data());
    CHECK(st.n_trades == 0);
  }
}

TEST_CASE("average shape") {
  SUBCASE("single snapshot, all volume half a tick from the mid") {
    ProfileSnapshot snap;
    snap.t = 0.0;
    snap.duration = 1.0;
    snap.levels = {{1, 50}, {-1, 50}};
    const ShapeProfile sh = average_shape({snap});
    CHECK(sh.arg_max_ticks == doctest::Approx(0.5));
    CHECK(sh.q25 == doctest::Approx(0.5));
    CHECK(sh.q50 == doctest::Approx(0.5));
    CHECK(sh.q75 == doctest::Approx(0.5));
    CHECK(sh.tick_mass.at(1) == doctest::Approx(1.0));
  }

  SUBCASE("two equal-duration snapshots average to half-half") {
    ProfileSnapshot a{0.0, 1.0, {{2, 10}}};
    ProfileSnapshot b{1.0, 1.0, {{4, 10}}};
    const ShapeProfile sh = average_shape({a, b});
    CHECK(sh.tick_mass.at(1) == doctest::Approx(0.5));
    CHECK(sh.tick_mass.at(2) == doctest::Approx(0.5));
  }

  SUBCASE("zero total volume errors") {
    ProfileSnapshot snap{0.0, 1.0, {{1, 0}}};
    CHECK_THROWS_AS(average_shape({snap}), DomainError);
  }

  SUBCASE("mass normalizes to one") {
    Rng rng(4);
    std::vector<ProfileSnapshot> snaps;
    for (int i = 0; i < 50; ++i) {
      ProfileSnapshot s;
      s.t = i;
      s.duration = 0.5 + rng.uniform();
      for (int l = 0; l < 4; ++l) {
        s.levels.emplace_back((1 + static_cast<std::int64_t>(rng.raw() % 30)) *
                                  (l % 2 == 0 ? 1 : -1),
                              1 + static_cast<std::int64_t>(rng.raw() % 100));
      }
      snaps.push_back(s);
    }
    const ShapeProfile sh = average_shape(snaps);
    double acc = 0.0;
    for (const auto& [off, m] : sh.half_tick_mass) acc += m;
    CHECK(acc == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("wasserstein sparsity") {
  SUBCASE("identical shapes have zero distance") {
    std::map<std::int64_t, double> q = {{1, 0.5}, {2, 0.5}};
    CHECK(wasserstein_l1(q, q) == doctest::Approx(0.0));
  }

  SUBCASE("hand-computed L1 distance") {
    std::map<std::int64_t, double> avg = {{1, 0.5}, {2, 0.5}};
    std::map<std::int64_t, double> inst = {{1, 1.0}};
    CHECK(wasserstein_l1(avg, inst) == doctest::Approx(1.0));
  }

  SUBCASE("bounded by two") {
    std::map<std::int64_t, double> a = {{1, 1.0}};
    std::map<std::int64_t, double> b = {{9, 1.0}};
    CHECK(wasserstein_l1(a, b) == doctest::Approx(2.0));
  }

  SUBCASE("dense book has empty-level mass at zero") {
    std::vector<ProfileSnapshot> snaps;
    for (int i = 0; i < 3; ++i) {
      ProfileSnapshot s;
      s.t = i;
      s.duration = 1.0;
      s.levels = {{1, 10}, {3, 20}, {-1, 10}, {-3, 20}};
      snaps.push_back(s);
    }
    const SparsityMetrics sp = sparsity_metrics(snaps);
    CHECK(sp.wasserstein_mean == doctest::Approx(0.0));
    CHECK(sp.empty_levels.at(1).at(0) == doctest::Approx(1.0));
  }

  SUBCASE("gap between best and second best") {
    ProfileSnapshot s{0.0, 1.0, {{1, 10}, {9, 20}, {-1, 10}, {-9, 20}}};
    const SparsityMetrics sp = sparsity_metrics({s});
    CHECK(sp.empty_levels.at(1).at(3) == doctest::Approx(1.0));
  }
}

TEST_CASE("leverage grid") {
  const LeverageBinning bins = LeverageBinning::make(20.0);

  SUBCASE("iid stream has unit ratios") {
    Rng rng(21);
    std::vector<LeverageEvent> evs;
    for (int i = 0; i < 200000; ++i) {
      const EventFamily fam =
          rng.uniform() < 0.5 ? EventFamily::LimitOrder : EventFamily::CancelOrder;
      evs.push_back({fam, Side::Ask, 0.5});
    }
    const LeverageGrid g = leverage_grid(evs, bins);
    for (const auto& [key, cell] : g.cells) {
      REQUIRE(cell.defined);
      CHECK(cell.ratio == doctest::Approx(1.0).epsilon(0.03));
    }
  }

  SUBCASE("deterministic alternation doubles the conditional") {
    std::vector<LeverageEvent> evs;
    for (int i = 0; i < 1000; ++i) {
      evs.push_back({i % 2 == 0 ? EventFamily::LimitOrder : EventFamily::CancelOrder,
                     Side::Bid, 0.0});
    }
    const LeverageGrid g = leverage_grid(evs, bins);
    const LeverageCellKey lo{EventFamily::LimitOrder, Side::Bid, 0};
    const LeverageCellKey co{EventFamily::CancelOrder, Side::Bid, 0};
    CHECK(g.cells.at({lo, co}).ratio == doctest::Approx(2.0).epsilon(0.01));
    CHECK(g.cells.at({lo, lo}).ratio == doctest::Approx(0.0));
  }

  SUBCASE("inhibition shows as a zero diagonal") {
    Rng rng(3);
    std::vector<LeverageEvent> evs;
    bool last_was_a = false;
    for (int i = 0; i < 5000; ++i) {
      bool a = !last_was_a && rng.uniform() < 0.6;
      evs.push_back({a ? EventFamily::MarketOrder : EventFamily::InSpread, Side::Ask, 0.0});
      last_was_a = a;
    }
    const LeverageGrid g = leverage_grid(evs, bins);
    const LeverageCellKey mo{EventFamily::MarketOrder, Side::Ask, 0};
    CHECK(g.cells.at({mo, mo}).ratio == doctest::Approx(0.0));
    CHECK(g.cells.at({mo, mo}).defined);
  }

  SUBCASE("binning is linear to ten then logarithmic") {
    CHECK(bins.bin_of(0.0) == 0);
    CHECK(bins.bin_of(0.5) == 0);
    CHECK(bins.bin_of(9.5) == 9);
    CHECK(bins.bin_of(10.5) == 10);
    CHECK(bins.edges[10] == doctest::Approx(10.0));
    CHECK(bins.edges.back() == doctest::Approx(20.0));
    CHECK(bins.bin_of(1000.0) == -1);
  }
}

TEST_CASE("log-log slope") {
  SUBCASE("exact power law") {
    std::vector<double> x, y;
    for (double v : {1.0, 2.0, 5.0, 10.0, 20.0}) {
      x.push_back(v);
      y.push_back(std::pow(v, -1.5));
    }
    const SlopeFit f = loglog_slope(x, y);
    CHECK(f.slope == doctest::Approx(-1.5));
    CHECK(f.r2 == doctest::Approx(1.0));
  }

  SUBCASE("noisy slope recovered") {
    Rng rng(14);
    std::vector<double> x, y;
    for (int i = 0; i < 200; ++i) {
      const double v = 1.0 + 0.5 * i;
      x.push_back(v);
      y.push_back(3.0 / v * (1.0 + 0.01 * (2.0 * rng.uniform() - 1.0)));
    }
    const SlopeFit f = loglog_slope(x, y);
    CHECK(std::abs(f.slope + 1.0) < 0.05);
  }

  SUBCASE("two points give the exact line") {
    std::vector<double> x = {1.0, 10.0};
    std::vector<double> y = {5.0, 0.5};
    const SlopeFit f = loglog_slope(x, y);
    CHECK(f.slope == doctest::Approx(-1.0));
    CHECK(std::exp(f.intercept) == doctest::Approx(5.0));
  }

  SUBCASE("rescaling x or y only moves the intercept") {
    std::vector<double> x = {1.0, 3.0, 9.0, 27.0};
    std::vector<double> y = {8.0, 4.0, 2.0, 1.0};
    const SlopeFit base = loglog_slope(x, y);
    std::vector<double> x2(x), y2(y);
    for (double& v : x2) v *= 13.0;
    for (double& v : y2) v *= 0.031;
    const SlopeFit scaled = loglog_slope(x2, y2);
    CHECK(scaled.slope == doctest::Approx(base.slope));
  }

  SUBCASE("non-positive inputs rejected") {
    std::vector<double> x = {1.0, 0.0, 2.0};
    std::vector<double> y = {1.0, 1.0, 1.0};
    CHECK_THROWS_AS(loglog_slope(x, y), DomainError);
  }
}

TEST_CASE("epsilon proxy") {
  CHECK(epsilon_proxy(10.0) == doctest::Approx(0.1));
  CHECK_THROWS_AS(epsilon_proxy(1.0), DomainError);
  CHECK(epsilon_proxy(20.0) == doctest::Approx(0.5 * epsilon_proxy(10.0)));
}

TEST_CASE("independence ratio") {
  const std::vector<double> edges = {0.0, 10.0, 20.0, 30.0};

  SUBCASE("independent stream has unit ratios") {
    Rng rng(5);
    std::vector<std::pair<int, double>> evs;
    for (int i = 0; i < 100000; ++i) {
      evs.push_back({static_cast<int>(rng.raw() % 3), 30.0 * rng.uniform()});
    }
    const IndependenceTable t = independence_ratio(evs, edges);
    for (const auto& [key, cell] : t.cells) {
      REQUIRE(cell.defined);
      CHECK(cell.ratio == doctest::Approx(1.0).epsilon(0.05));
      CHECK(cell.lo <= 1.0);
      CHECK(cell.hi >= 1.0);
    }
  }

  SUBCASE("constructed dependence shows up") {
    Rng rng(6);
    std::vector<std::pair<int, double>> evs;
    for (int i = 0; i < 50000; ++i) {
      const double v = 30.0 * rng.uniform();
      int e = static_cast<int>(rng.raw() % 2);
      if (v < 10.0 && rng.uniform() < 0.5) e = 2;  // event 2 fires mostly at low v
      evs.push_back({e, v});
    }
    const IndependenceTable t = independence_ratio(evs, edges);
    CHECK(t.cells.at({2, 0}).ratio > 2.0);
    CHECK(t.cells.at({2, 2}).ratio < 0.5);
  }

  SUBCASE("undersampled cells flagged, not zero") {
    std::vector<std::pair<int, double>> evs = {{0, 5.0}, {0, 15.0}, {1, 5.0}};
    const IndependenceTable t = independence_ratio(evs, edges, 25);
    for (const auto& [key, cell] : t.cells) CHECK(!cell.defined);
  }
}

TEST_CASE("autocorrelation") {
  SUBCASE("white noise within the band") {
    Rng rng(9);
    std::vector<double> series;
    for (int i = 0; i < 20000; ++i) series.push_back(rng.uniform());
    const AcfResult a = acf(series, 10);
    int inside = 0;
    for (double v : a.values) {
      if (std::abs(v) < a.band) ++inside;
    }
    CHECK(inside >= 9);
  }

  SUBCASE("AR(1) coefficient recovered") {
    Rng rng(10);
    std::vector<double> series;
    double x = 0.0;
    for (int i = 0; i < 100000; ++i) {
      x = 0.5 * x + (2.0 * rng.uniform() - 1.0);
      series.push_back(x);
    }
    const AcfResult a = acf(series, 3);
    CHECK(std::abs(a.values[0] - 0.5) < 0.05);
    CHECK(std::abs(a.values[1] - 0.25) < 0.05);
  }

  SUBCASE("constant series errors") {
    std::vector<double> series(100, 3.0);
    CHECK_THROWS_AS(acf(series, 5), DomainError);
  }

  SUBCASE("too-short series errors") {
    std::vector<double> series = {1.0, 2.0};
    CHECK_THROWS_AS(acf(series, 5), DomainError);
  }
}

TEST_CASE("market order to best-volume ratio") {
  SUBCASE("exact fills give a point mass at one") {
    std::vector<LogRow> rows;
    rows.push_back(row_at(0.0, EventType::LoAskDeep, 100, 101));
    for (int i = 0; i < 3; ++i) {
      LogRow prev = rows.back();
      LogRow r = row_at(1.0 + i, EventType::MoAsk, 100, 101, prev.q_top_ask);
      rows.push_back(r);
    }
    const MoBestRatio mo = mo_to_best_ratio(rows);
    REQUIRE(mo.ratios.size() == 3);
    CHECK(mo.mean == doctest::Approx(1.0));
  }

  SUBCASE("half fills give a point mass at one half") {
    std::vector<LogRow> rows;
    rows.push_back(row_at(0.0, EventType::LoAskDeep, 100, 101));
    LogRow r = row_at(1.0, EventType::MoBid, 100, 101, 5);  // q_top_bid = 10
    rows.push_back(r);
    const MoBestRatio mo = mo_to_best_ratio(rows);
    REQUIRE(mo.ratios.size() == 1);
    CHECK(mo.ratios[0] == doctest::Approx(0.5));
  }

  SUBCASE("simulated sparse config has mass above one") {
    RunConfig cfg = reference_config();
    cfg.horizon = 1500.0;
    RunOutput out = simulate_to_rows(cfg, 31);
    const MoBestRatio mo = mo_to_best_ratio(out.rows);
    REQUIRE(mo.ratios.size() > 10);
    CHECK(mo.frac_above_one > 0.0);
  }
}

TEST_CASE("full report on a simulated run") {
  RunConfig cfg = reference_config();
  cfg.horizon = 800.0;
  RunOutput out = simulate_to_rows(cfg, 77);
  const MetricReport rep = build_report(out.rows, out.horizon, 0.01, cfg.init.s0);
  CHECK(rep.events == out.rows.size());
  CHECK(rep.mean_spread_ticks > 1.0);
  CHECK(rep.eps_proxy.has_value());
  double pdf_mass = 0.0;
  for (const auto& [s, p] : rep.spread_pdf) pdf_mass += p;
  CHECK(pdf_mass == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(rep.sparsity.wasserstein_mean > 0.0);
  CHECK(rep.sparsity.wasserstein_mean < 2.0);
}

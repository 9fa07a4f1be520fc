#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mqh/experiments.hpp"
#include "mqh/io.hpp"

using namespace mqh;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path temp_dir() {
  static int counter = 0;
  fs::path p = fs::temp_directory_path() / ("mqh_io_test_" + std::to_string(counter++));
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("event log round trip is byte identical") {
  RunConfig cfg = reference_config();
  cfg.horizon = 60.0;
  RunOutput out = simulate_to_rows(cfg, 404);
  REQUIRE(out.rows.size() > 50);

  const fs::path dir = temp_dir();
  const std::string p1 = (dir / "log1.csv").string();
  const std::string p2 = (dir / "log2.csv").string();
  write_event_log(p1, out.rows);
  const std::vector<LogRow> back = read_event_log(p1);
  REQUIRE(back.size() == out.rows.size());
  write_event_log(p2, back);
  CHECK(slurp(p1) == slurp(p2));
}

TEST_CASE("event log parsing errors carry line numbers") {
  const fs::path dir = temp_dir();
  const std::string p = (dir / "bad.csv").string();
  {
    std::ofstream f(p);
    f << kEventLogHeader << "\n";
    f << "1.0,LO_ask_D,5,0,100,101,1,1,1,1,1,1,1,1,0\n";
    f << "2.0,LO_ask_D,5,0,100\n";  // short row
  }
  try {
    read_event_log(p);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("snapshot round trip") {
  RunConfig cfg = reference_config();
  cfg.horizon = 40.0;
  RunOptions opts;
  opts.horizon = cfg.horizon;
  opts.seed = 9;
  opts.snapshot_every = 25;
  SimResult res = run_simulation(cfg.hawkes, cfg.handlers, cfg.init, cfg.m_half_depth, opts);
  REQUIRE(res.snapshots.size() > 2);

  const fs::path dir = temp_dir();
  const std::string p = (dir / "snaps.jsonl").string();
  write_snapshots(p, res.snapshots, cfg.hawkes.tick_size);
  const std::vector<Snapshot> back = read_snapshots(p);
  REQUIRE(back.size() == res.snapshots.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].t == res.snapshots[i].t);
    CHECK(back[i].state.bid.best_half == res.snapshots[i].state.bid.best_half);
    CHECK(back[i].state.ask.q_deep == res.snapshots[i].state.ask.q_deep);
    CHECK(back[i].state.m_half_depth == res.snapshots[i].state.m_half_depth);
  }
}

TEST_CASE("run config serialization") {
  SUBCASE("round trip preserves the spec") {
    const RunConfig cfg = reference_config();
    const fs::path dir = temp_dir();
    const std::string p = (dir / "cfg.json").string();
    save_run_config(p, cfg);
    const RunConfig back = load_run_config(p);
    CHECK(back.m_half_depth == cfg.m_half_depth);
    CHECK(back.horizon == cfg.horizon);
    CHECK(back.hawkes.is_alpha == cfg.hawkes.is_alpha);
    CHECK(back.hawkes.mu == cfg.hawkes.mu);
    for (int j = 0; j < kEventTypeCount; ++j) {
      for (int i = 0; i < kEventTypeCount; ++i) {
        CHECK(back.hawkes.kernels[j][i].a ==
              doctest::Approx(cfg.hawkes.kernels[j][i].a).epsilon(1e-12));
      }
    }
    CHECK(back.handlers.eta_is.p() == cfg.handlers.eta_is.p());
    CHECK(back.handlers.kappa_t.spikes().size() == cfg.handlers.kappa_t.spikes().size());
    CHECK(back.init.s0 == cfg.init.s0);
  }

  SUBCASE("missing mu is a schema error naming the field") {
    nlohmann::json j = run_config_to_json(reference_config());
    j["hawkes"].erase("mu");
    try {
      run_config_from_json(j);
      FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
      CHECK(std::string(e.what()).find("mu") != std::string::npos);
    }
  }

  SUBCASE("bad handler parameters are schema errors with the path") {
    nlohmann::json j = run_config_to_json(reference_config());
    j["handlers"]["eta_is"]["p"] = 1.5;
    try {
      run_config_from_json(j);
      FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
      CHECK(std::string(e.what()).find("handlers.eta_is") != std::string::npos);
    }
  }

  SUBCASE("initial spread must fit the depth budget") {
    nlohmann::json j = run_config_to_json(reference_config());
    j["init"]["s0"] = 10000;
    CHECK_THROWS_AS(run_config_from_json(j), SchemaError);
  }

  SUBCASE("shipped reference file matches the built-in config") {
    const RunConfig disk = load_run_config("configs/reference.json");
    const RunConfig code = reference_config();
    CHECK(disk.m_half_depth == code.m_half_depth);
    CHECK(disk.hawkes.is_alpha == code.hawkes.is_alpha);
    CHECK(disk.hawkes.is_beta == code.hawkes.is_beta);
    CHECK(disk.hawkes.mu == code.hawkes.mu);
    double disk_norm = 0.0, code_norm = 0.0;
    for (int j = 0; j < kEventTypeCount; ++j) {
      for (int i = 0; i < kEventTypeCount; ++i) {
        disk_norm += kernel_norm_matrix(disk.hawkes).abs_norms[j][i];
        code_norm += kernel_norm_matrix(code.hawkes).abs_norms[j][i];
        break;
      }
      break;
    }
    CHECK(disk_norm == doctest::Approx(code_norm));
    CHECK(disk.handlers.kappa_t.p() == code.handlers.kappa_t.p());
  }
}

TEST_CASE("lobster reader") {
  SUBCASE("three-row fixture parses bit-exactly") {
    const fs::path dir = temp_dir();
    {
      std::ofstream m(dir / "m.csv");
      m << "34200.1,1,7,100,999900,1\n";
      m << "34200.2,1,8,50,1000100,-1\n";
      m << "34200.3,4,7,30,999900,1\n";
      std::ofstream b(dir / "b.csv");
      b << "9999999999,0,999900,100\n";
      b << "1000100,50,999900,100\n";
      b << "1000100,50,999900,70\n";
    }
    LobsterReader reader((dir / "m.csv").string(), (dir / "b.csv").string(), 0.01);
    RawLobsterEvent ev;
    BookSnapshotRow book;
    REQUIRE(reader.next(ev, book));
    CHECK(ev.time == doctest::Approx(34200.1));
    CHECK(ev.kind == LobsterKind::Submission);
    CHECK(ev.order_id == 7);
    CHECK(ev.size == 100);
    CHECK(ev.price == 999900);
    CHECK(ev.direction == 1);
    CHECK(book.asks.empty());
    REQUIRE(book.bids.size() == 1);
    CHECK(book.bids[0] == std::pair<std::int64_t, std::int64_t>{999900, 100});
    REQUIRE(reader.next(ev, book));
    CHECK(book.asks.size() == 1);
    REQUIRE(reader.next(ev, book));
    CHECK(ev.kind == LobsterKind::ExecVisible);
    CHECK(book.bids[0].second == 70);
    CHECK(!reader.next(ev, book));
    CHECK(reader.rows_read() == 3);
  }

  SUBCASE("empty files give an empty stream") {
    const fs::path dir = temp_dir();
    std::ofstream(dir / "m.csv");
    std::ofstream(dir / "b.csv");
    LobsterReader reader((dir / "m.csv").string(), (dir / "b.csv").string(), 0.01);
    RawLobsterEvent ev;
    BookSnapshotRow book;
    CHECK(!reader.next(ev, book));
  }

  SUBCASE("misaligned files error at the final row") {
    const fs::path dir = temp_dir();
    {
      std::ofstream m(dir / "m.csv");
      m << "34200.1,1,7,100,999900,1\n";
      m << "34200.2,1,8,50,1000100,-1\n";
      std::ofstream b(dir / "b.csv");
      b << "9999999999,0,999900,100\n";
    }
    LobsterReader reader((dir / "m.csv").string(), (dir / "b.csv").string(), 0.01);
    RawLobsterEvent ev;
    BookSnapshotRow book;
    REQUIRE(reader.next(ev, book));
    try {
      reader.next(ev, book);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("misalignment") != std::string::npos);
    }
  }

  SUBCASE("off-grid price is a hard parse error") {
    const fs::path dir = temp_dir();
    {
      std::ofstream m(dir / "m.csv");
      m << "34200.1,1,7,100,999950,1\n";  // not divisible by 100
      std::ofstream b(dir / "b.csv");
      b << "9999999999,0,999950,100\n";
    }
    LobsterReader reader((dir / "m.csv").string(), (dir / "b.csv").string(), 0.01);
    RawLobsterEvent ev;
    BookSnapshotRow book;
    CHECK_THROWS_AS(reader.next(ev, book), ParseError);
  }

  SUBCASE("non-monotone time is a parse error") {
    const fs::path dir = temp_dir();
    {
      std::ofstream m(dir / "m.csv");
      m << "34200.2,1,7,100,999900,1\n";
      m << "34200.1,1,8,50,1000100,-1\n";
      std::ofstream b(dir / "b.csv");
      b << "9999999999,0,999900,100\n";
      b << "1000100,50,999900,100\n";
    }
    LobsterReader reader((dir / "m.csv").string(), (dir / "b.csv").string(), 0.01);
    RawLobsterEvent ev;
    BookSnapshotRow book;
    REQUIRE(reader.next(ev, book));
    CHECK_THROWS_AS(reader.next(ev, book), ParseError);
  }
}

TEST_CASE("classification on hand fixtures") {
  const fs::path dir = temp_dir();
  {
    std::ofstream m(dir / "m.csv");
    m << "34200.1,1,1,100,999900,1\n";   // seed bid 99.99
    m << "34200.2,1,2,50,1000200,-1\n";  // seed ask 100.02
    m << "34200.3,1,3,40,1000200,-1\n";  // join best ask -> LO_ask_T offset 0
    m << "34200.4,1,4,30,1000000,1\n";   // buy inside spread -> LO_bid_IS
    m << "34200.5,4,2,20,1000200,-1\n";  // execution at best ask -> MO_ask
    std::ofstream b(dir / "b.csv");
    b << "9999999999,0,999900,100\n";
    b << "1000200,50,999900,100\n";
    b << "1000200,90,999900,100\n";
    b << "1000200,90,1000000,30\n";
    b << "1000200,70,1000000,30\n";
  }
  ClassifyOptions opts;
  opts.shape_median_ticks = 30;
  ClassifyStats stats;
  const std::vector<LogRow> rows =
      classify_events((dir / "m.csv").string(), (dir / "b.csv").string(), 0.01, opts, &stats);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].type == EventType::LoAskTop);
  CHECK(rows[0].offset == 0);
  CHECK(rows[1].type == EventType::LoBidIs);
  CHECK(rows[1].offset == -1);  // one tick of improvement, bid side negative
  CHECK(rows[2].type == EventType::MoAsk);
  CHECK(rows[2].offset == 0);
  CHECK(stats.boundary == 1);
  CHECK(stats.skipped_unresolvable == 1);  // second seed row: book one-sided before it
  CHECK(stats.classified == 3);
}

TEST_CASE("shipped fixture classifies cleanly") {
  ClassifyOptions opts;
  opts.shape_median_ticks = 30;
  ClassifyStats stats;
  const std::vector<LogRow> rows =
      classify_events("data/lobster/fixture_message.csv", "data/lobster/fixture_orderbook.csv",
                      0.01, opts, &stats);
  CHECK(stats.dropped_fraction() < 0.01);
  CHECK(stats.classified > 90);
  CHECK(stats.hidden_executions == 1);
  CHECK(stats.crosses == 1);
  CHECK(stats.halts == 1);

  // The classified log round-trips through the toolkit format byte-exactly.
  const fs::path dir = temp_dir();
  const std::string p1 = (dir / "log1.csv").string();
  const std::string p2 = (dir / "log2.csv").string();
  write_event_log(p1, rows);
  write_event_log(p2, read_event_log(p1));
  CHECK(slurp(p1) == slurp(p2));

  // And the analytics pipeline consumes it end to end.
  const double horizon = rows.back().time + 1.0;
  const MetricReport rep = build_report(rows, horizon, 0.01);
  CHECK(rep.events == rows.size());
  CHECK(rep.mean_spread_ticks > 1.0);
}

TEST_CASE("simulate command writes a deterministic tree") {
  RunConfig cfg = reference_config();
  cfg.horizon = 30.0;
  const fs::path d1 = temp_dir();
  const fs::path d2 = temp_dir();
  cmd_simulate(cfg, d1.string());
  cmd_simulate(cfg, d2.string());
  for (const char* name : {"log.csv", "snapshots.jsonl", "config.json", "kernel_norms.csv"}) {
    CAPTURE(name);
    CHECK(slurp((d1 / name).string()) == slurp((d2 / name).string()));
  }
  CHECK(fs::exists(d1 / "report" / "report.json"));
  CHECK(fs::exists(d1 / "report" / "shape_profile.csv"));
  CHECK(fs::exists(d1 / "report" / "leverage_grid.csv"));
}

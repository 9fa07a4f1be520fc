#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mqh/analytics.hpp"
#include "mqh/dynamics.hpp"
#include "mqh/hawkes.hpp"
#include "mqh/lob.hpp"

namespace mqh {

// ---- toolkit event log (CSV, 15 documented columns) ----

extern const char* kEventLogHeader;

std::string format_log_row(const LogRow& row);
LogRow parse_log_row(const std::string& line, std::size_t line_no);

void write_event_log(const std::string& path, const std::vector<LogRow>& rows);
std::vector<LogRow> read_event_log(const std::string& path);

// ---- snapshots (JSON lines) ----

void write_snapshots(const std::string& path, const std::vector<Snapshot>& snaps,
                     double tick_size);
std::vector<Snapshot> read_snapshots(const std::string& path);

// ---- run configuration ----

struct RunConfig {
  HawkesSpec hawkes;
  HandlerConfig handlers;
  InitConfig init;
  std::int64_t m_half_depth = 60;
  double horizon = 1000.0;
  std::uint64_t seed = 1;
  std::int64_t snapshot_every = 100;
};

RunConfig run_config_from_json(const nlohmann::json& j);
nlohmann::ordered_json run_config_to_json(const RunConfig& cfg);
RunConfig load_run_config(const std::string& path);
void save_run_config(const std::string& path, const RunConfig& cfg);

// ---- LOBSTER ingestion ----

enum class LobsterKind : int {
  Submission = 1,
  Cancel = 2,
  Delete = 3,
  ExecVisible = 4,
  ExecHidden = 5,
  Cross = 6,
  Halt = 7,
};

struct RawLobsterEvent {
  double time = 0.0;  // seconds since midnight
  LobsterKind kind = LobsterKind::Submission;
  std::int64_t order_id = 0;
  std::int64_t size = 0;
  std::int64_t price = 0;  // currency x 10^4
  int direction = 0;       // +1 buy, -1 sell
};

struct BookSnapshotRow {
  // Level k (0-based): prices in currency x 10^4; absent levels dropped.
  std::vector<std::pair<std::int64_t, std::int64_t>> asks;  // (price, size), ascending
  std::vector<std::pair<std::int64_t, std::int64_t>> bids;  // (price, size), descending
};

// Streaming row-aligned reader over a LOBSTER message/orderbook file pair.
class LobsterReader {
 public:
  LobsterReader(const std::string& message_path, const std::string& orderbook_path,
                double tick_size);
  ~LobsterReader();
  LobsterReader(const LobsterReader&) = delete;
  LobsterReader& operator=(const LobsterReader&) = delete;

  // False at a clean end of both files; ParseError on misalignment,
  // non-monotone time, or malformed rows (with the line number).
  bool next(RawLobsterEvent& ev, BookSnapshotRow& book);

  std::size_t rows_read() const { return rows_; }

 private:
  struct Impl;
  Impl* impl_;
  std::size_t rows_ = 0;
};

struct ClassifyStats {
  std::uint64_t classified = 0;
  std::uint64_t dropped_deep = 0;          // beyond the depth budget
  std::uint64_t skipped_unresolvable = 0;  // book state could not place the event
  std::uint64_t hidden_executions = 0;
  std::uint64_t crosses = 0;
  std::uint64_t halts = 0;
  std::uint64_t boundary = 0;  // first row, no prior book to classify against

  std::uint64_t total() const {
    return classified + dropped_deep + skipped_unresolvable + hidden_executions + crosses +
           halts + boundary;
  }
  double dropped_fraction() const {
    const std::uint64_t t = total();
    return t == 0 ? 0.0 : static_cast<double>(dropped_deep + skipped_unresolvable) /
                              static_cast<double>(t);
  }
};

struct ClassifyOptions {
  double session_start = 34200.0;  // 09:30
  double session_end = 57600.0;    // 16:00
  std::int64_t shape_median_ticks = 30;  // sets the depth budget M = median - 1
};

// Classify a LOBSTER stream into the 12-type taxonomy with meta-queue state
// columns; times are rebased to the session start. Offsets are signed ticks
// from the same-side top (ask positive, bid negative).
std::vector<LogRow> classify_events(const std::string& message_path,
                                    const std::string& orderbook_path, double tick_size,
                                    const ClassifyOptions& opts, ClassifyStats* stats);

// ---- report / matrix serialization ----

void write_metric_report(const std::string& out_dir, const MetricReport& report);
void write_norm_matrix_csv(const std::string& path, const KernelNormMatrix& nm);

void ensure_dir(const std::string& path);

}  // namespace mqh

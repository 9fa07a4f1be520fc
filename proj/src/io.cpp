#include "mqh/io.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace mqh {

using nlohmann::json;
using nlohmann::ordered_json;

const char* kEventLogHeader =
    "time,type,size,offset,bid,ask,q_top_bid,q_top_ask,m_top_bid,m_top_ask,"
    "q_deep_bid,q_deep_ask,m_deep_bid,m_deep_ask,depleted_levels";

namespace {

std::string format_time(double t) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9f", t);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::int64_t parse_i64(const std::string& s, std::size_t line_no, const char* what) {
  try {
    std::size_t pos = 0;
    std::int64_t v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("line " + std::to_string(line_no) + ": bad integer for " + what + ": '" +
                     s + "'");
  }
}

double parse_f64(const std::string& s, std::size_t line_no, const char* what) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("line " + std::to_string(line_no) + ": bad number for " + what + ": '" + s +
                     "'");
  }
}

}  // namespace

std::string format_log_row(const LogRow& r) {
  std::ostringstream os;
  os << format_time(r.time) << ',' << event_type_name(r.type) << ',' << r.size << ',' << r.offset
     << ',' << r.bid_ticks << ',' << r.ask_ticks << ',' << r.q_top_bid << ',' << r.q_top_ask
     << ',' << r.m_top_bid << ',' << r.m_top_ask << ',' << r.q_deep_bid << ',' << r.q_deep_ask
     << ',' << r.m_deep_bid << ',' << r.m_deep_ask << ',' << r.depleted_levels;
  return os.str();
}

LogRow parse_log_row(const std::string& line, std::size_t line_no) {
  const auto f = split_csv(line);
  if (f.size() != 15) {
    throw ParseError("line " + std::to_string(line_no) + ": expected 15 columns, got " +
                     std::to_string(f.size()));
  }
  LogRow r;
  r.time = parse_f64(f[0], line_no, "time");
  r.type = event_type_from_name(f[1]);
  r.size = parse_i64(f[2], line_no, "size");
  r.offset = parse_i64(f[3], line_no, "offset");
  r.bid_ticks = parse_i64(f[4], line_no, "bid");
  r.ask_ticks = parse_i64(f[5], line_no, "ask");
  r.q_top_bid = parse_i64(f[6], line_no, "q_top_bid");
  r.q_top_ask = parse_i64(f[7], line_no, "q_top_ask");
  r.m_top_bid = parse_i64(f[8], line_no, "m_top_bid");
  r.m_top_ask = parse_i64(f[9], line_no, "m_top_ask");
  r.q_deep_bid = parse_i64(f[10], line_no, "q_deep_bid");
  r.q_deep_ask = parse_i64(f[11], line_no, "q_deep_ask");
  r.m_deep_bid = parse_i64(f[12], line_no, "m_deep_bid");
  r.m_deep_ask = parse_i64(f[13], line_no, "m_deep_ask");
  r.depleted_levels = parse_i64(f[14], line_no, "depleted_levels");
  return r;
}

void write_event_log(const std::string& path, const std::vector<LogRow>& rows) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open for writing: " + path);
  out << kEventLogHeader << '\n';
  for (const LogRow& r : rows) out << format_log_row(r) << '\n';
}

std::vector<LogRow> read_event_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open event log: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty event log: " + path);
  if (line != kEventLogHeader) throw ParseError("bad event log header in " + path);
  std::vector<LogRow> rows;
  std::size_t line_no = 1;
  double prev_t = -1.0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    LogRow r = parse_log_row(line, line_no);
    if (r.time < prev_t) {
      throw ParseError("line " + std::to_string(line_no) + ": non-monotone time");
    }
    prev_t = r.time;
    rows.push_back(r);
  }
  return rows;
}

void write_snapshots(const std::string& path, const std::vector<Snapshot>& snaps,
                     double tick_size) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open for writing: " + path);
  for (const Snapshot& s : snaps) {
    ordered_json j;
    j["t"] = s.t;
    j["bid"] = s.state.bid.best_half / 2;
    j["ask"] = s.state.ask.best_half / 2;
    j["q_top_bid"] = s.state.bid.q_top;
    j["q_top_ask"] = s.state.ask.q_top;
    j["m_top_bid"] = s.state.bid.m_top;
    j["m_top_ask"] = s.state.ask.m_top;
    j["q_deep_bid"] = s.state.bid.q_deep;
    j["q_deep_ask"] = s.state.ask.q_deep;
    j["m_deep_bid"] = s.state.bid.m_deep;
    j["m_deep_ask"] = s.state.ask.m_deep;
    j["m_half_depth"] = s.state.m_half_depth;
    j["tick_size"] = tick_size;
    out << j.dump() << '\n';
  }
}

std::vector<Snapshot> read_snapshots(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open snapshots: " + path);
  std::vector<Snapshot> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError("snapshot line " + std::to_string(line_no) + ": " + e.what());
    }
    Snapshot s;
    s.t = j.at("t").get<double>();
    s.state.bid.best_half = 2 * j.at("bid").get<std::int64_t>();
    s.state.ask.best_half = 2 * j.at("ask").get<std::int64_t>();
    s.state.bid.q_top = j.at("q_top_bid").get<std::int64_t>();
    s.state.ask.q_top = j.at("q_top_ask").get<std::int64_t>();
    s.state.bid.m_top = j.at("m_top_bid").get<std::int64_t>();
    s.state.ask.m_top = j.at("m_top_ask").get<std::int64_t>();
    s.state.bid.q_deep = j.at("q_deep_bid").get<std::int64_t>();
    s.state.ask.q_deep = j.at("q_deep_ask").get<std::int64_t>();
    s.state.bid.m_deep = j.at("m_deep_bid").get<std::int64_t>();
    s.state.ask.m_deep = j.at("m_deep_ask").get<std::int64_t>();
    s.state.m_half_depth = j.at("m_half_depth").get<std::int64_t>();
    s.state.tick_size = j.at("tick_size").get<double>();
    s.state.sim_time = s.t;
    out.push_back(s);
  }
  return out;
}

// ---- run configuration ----

namespace {

const json& require(const json& j, const char* key, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) {
    throw SchemaError("config: missing field '" + (path.empty() ? key : path + "." + key) + "'");
  }
  return j.at(key);
}

double require_num(const json& j, const char* key, const std::string& path) {
  const json& v = require(j, key, path);
  if (!v.is_number()) {
    throw SchemaError("config: field '" + (path.empty() ? key : path + "." + key) +
                      "' must be a number");
  }
  return v.get<double>();
}

GeomWithSpikes parse_dist(const json& j, const std::string& path) {
  if (!j.is_object()) throw SchemaError("config: '" + path + "' must be an object");
  const double p = require_num(j, "p", path);
  std::int64_t support_min = 1;
  if (j.contains("support_min")) support_min = j.at("support_min").get<std::int64_t>();
  std::vector<Spike> spikes;
  if (j.contains("spikes")) {
    if (!j.at("spikes").is_array()) {
      throw SchemaError("config: '" + path + ".spikes' must be an array");
    }
    for (const auto& s : j.at("spikes")) {
      spikes.push_back({s.at("value").get<std::int64_t>(), s.at("extra_mass").get<double>()});
    }
  }
  try {
    return GeomWithSpikes(p, support_min, std::move(spikes));
  } catch (const DomainError& e) {
    throw SchemaError("config: '" + path + "': " + e.what());
  }
}

json dist_to_json(const GeomWithSpikes& d) {
  ordered_json j;
  j["p"] = d.p();
  j["support_min"] = d.support_min();
  if (!d.spikes().empty()) {
    json arr = json::array();
    for (const Spike& s : d.spikes()) {
      arr.push_back({{"value", s.value}, {"extra_mass", s.extra_mass}});
    }
    j["spikes"] = arr;
  }
  return j;
}

}  // namespace

RunConfig run_config_from_json(const json& j) {
  RunConfig cfg;
  cfg.m_half_depth = static_cast<std::int64_t>(require_num(j, "m_half_depth", ""));
  cfg.horizon = require_num(j, "horizon", "");
  cfg.seed = static_cast<std::uint64_t>(require_num(j, "seed", ""));
  if (j.contains("snapshot_every")) cfg.snapshot_every = j.at("snapshot_every").get<std::int64_t>();

  const json& jh = require(j, "hawkes", "");
  const json& jmu = require(jh, "mu", "hawkes");
  if (!jmu.is_array() || jmu.size() != kEventTypeCount) {
    throw SchemaError("config: field 'hawkes.mu' must be an array of 12 rates");
  }
  for (int i = 0; i < kEventTypeCount; ++i) cfg.hawkes.mu[i] = jmu.at(i).get<double>();
  cfg.hawkes.is_alpha = require_num(jh, "is_alpha", "hawkes");
  cfg.hawkes.is_beta = require_num(jh, "is_beta", "hawkes");
  cfg.hawkes.tick_size = require_num(j, "tick_size", "");
  double default_trunc = 1000.0;
  if (jh.contains("kernel_truncation")) default_trunc = jh.at("kernel_truncation").get<double>();
  if (jh.contains("kernels")) {
    const json& jk = jh.at("kernels");
    if (!jk.is_array()) throw SchemaError("config: 'hawkes.kernels' must be an array");
    for (const auto& e : jk) {
      EventType from, to;
      try {
        from = event_type_from_name(e.at("from").get<std::string>());
        to = event_type_from_name(e.at("to").get<std::string>());
      } catch (const ParseError& ex) {
        throw SchemaError(std::string("config: 'hawkes.kernels': ") + ex.what());
      }
      PowerLawKernel k;
      k.a = e.at("a").get<double>();
      k.b = e.at("b").get<double>();
      k.c = e.at("c").get<double>();
      k.truncation = e.contains("truncation") ? e.at("truncation").get<double>() : default_trunc;
      cfg.hawkes.kernels[static_cast<int>(from)][static_cast<int>(to)] = k;
    }
  }
  if (jh.contains("symmetric") && jh.at("symmetric").get<bool>()) {
    cfg.hawkes.reflect_ask_to_bid();
  }
  try {
    cfg.hawkes.validate();
  } catch (const DomainError& e) {
    throw SchemaError(std::string("config: hawkes: ") + e.what());
  }

  const json& jd = require(j, "handlers", "");
  cfg.handlers.eta_is = parse_dist(require(jd, "eta_is", "handlers"), "handlers.eta_is");
  cfg.handlers.eta_t = parse_dist(require(jd, "eta_t", "handlers"), "handlers.eta_t");
  cfg.handlers.eta_t1 = parse_dist(require(jd, "eta_t1", "handlers"), "handlers.eta_t1");
  cfg.handlers.kappa_is = parse_dist(require(jd, "kappa_is", "handlers"), "handlers.kappa_is");
  cfg.handlers.kappa_t = parse_dist(require(jd, "kappa_t", "handlers"), "handlers.kappa_t");
  cfg.handlers.kappa_mo = parse_dist(require(jd, "kappa_mo", "handlers"), "handlers.kappa_mo");
  cfg.handlers.kappa_d = parse_dist(require(jd, "kappa_d", "handlers"), "handlers.kappa_d");
  cfg.handlers.deep_volume.per_level =
      parse_dist(require(jd, "deep_volume", "handlers"), "handlers.deep_volume");
  if (jd.contains("eta_t") && cfg.handlers.eta_t.support_min() != 0) {
    throw SchemaError("config: 'handlers.eta_t' must have support_min 0");
  }

  const json& ji = require(j, "init", "");
  cfg.init.s0 = static_cast<std::int64_t>(require_num(ji, "s0", "init"));
  cfg.init.m0_top = require_num(ji, "m0_top", "init");
  cfg.init.m0_deep = require_num(ji, "m0_deep", "init");
  if (ji.contains("price_anchor_ticks")) {
    cfg.init.price_anchor_ticks = ji.at("price_anchor_ticks").get<std::int64_t>();
  }
  if (cfg.init.s0 < 1 || cfg.init.s0 > 2 * cfg.m_half_depth - 2) {
    throw SchemaError("config: 'init.s0' out of range for m_half_depth");
  }
  return cfg;
}

ordered_json run_config_to_json(const RunConfig& cfg) {
  ordered_json j;
  j["tick_size"] = cfg.hawkes.tick_size;
  j["m_half_depth"] = cfg.m_half_depth;
  j["horizon"] = cfg.horizon;
  j["seed"] = cfg.seed;
  j["snapshot_every"] = cfg.snapshot_every;
  ordered_json jh;
  jh["mu"] = cfg.hawkes.mu;
  jh["is_alpha"] = cfg.hawkes.is_alpha;
  jh["is_beta"] = cfg.hawkes.is_beta;
  jh["symmetric"] = false;  // kernels listed in full below
  ordered_json kernels = ordered_json::array();
  for (int a = 0; a < kEventTypeCount; ++a) {
    for (int b = 0; b < kEventTypeCount; ++b) {
      const PowerLawKernel& k = cfg.hawkes.kernels[a][b];
      if (k.null()) continue;
      ordered_json e;
      e["from"] = std::string(event_type_name(static_cast<EventType>(a)));
      e["to"] = std::string(event_type_name(static_cast<EventType>(b)));
      e["a"] = k.a;
      e["b"] = k.b;
      e["c"] = k.c;
      e["truncation"] = k.truncation;
      kernels.push_back(e);
    }
  }
  jh["kernels"] = kernels;
  j["hawkes"] = jh;
  ordered_json jd;
  jd["eta_is"] = dist_to_json(cfg.handlers.eta_is);
  jd["eta_t"] = dist_to_json(cfg.handlers.eta_t);
  jd["eta_t1"] = dist_to_json(cfg.handlers.eta_t1);
  jd["kappa_is"] = dist_to_json(cfg.handlers.kappa_is);
  jd["kappa_t"] = dist_to_json(cfg.handlers.kappa_t);
  jd["kappa_mo"] = dist_to_json(cfg.handlers.kappa_mo);
  jd["kappa_d"] = dist_to_json(cfg.handlers.kappa_d);
  jd["deep_volume"] = dist_to_json(cfg.handlers.deep_volume.per_level);
  j["handlers"] = jd;
  ordered_json ji;
  ji["s0"] = cfg.init.s0;
  ji["m0_top"] = cfg.init.m0_top;
  ji["m0_deep"] = cfg.init.m0_deep;
  ji["price_anchor_ticks"] = cfg.init.price_anchor_ticks;
  j["init"] = ji;
  return j;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open config: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw SchemaError("config parse error in " + path + ": " + e.what());
  }
  return run_config_from_json(j);
}

void save_run_config(const std::string& path, const RunConfig& cfg) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open for writing: " + path);
  out << run_config_to_json(cfg).dump(2) << '\n';
}

// ---- LOBSTER ----

struct LobsterReader::Impl {
  std::ifstream msg;
  std::ifstream book;
  std::string msg_path, book_path;
  double tick_size;
  std::int64_t tick_units;
  std::size_t line_no = 0;
  double prev_time = -1.0;
};

LobsterReader::LobsterReader(const std::string& message_path, const std::string& orderbook_path,
                             double tick_size)
    : impl_(new Impl) {
  impl_->msg.open(message_path);
  impl_->book.open(orderbook_path);
  impl_->msg_path = message_path;
  impl_->book_path = orderbook_path;
  impl_->tick_size = tick_size;
  impl_->tick_units = static_cast<std::int64_t>(std::llround(tick_size * 1e4));
  if (!impl_->msg) throw ParseError("cannot open message file: " + message_path);
  if (!impl_->book) throw ParseError("cannot open orderbook file: " + orderbook_path);
  if (impl_->tick_units <= 0) throw DomainError("tick size too small for LOBSTER units");
}

LobsterReader::~LobsterReader() { delete impl_; }

bool LobsterReader::next(RawLobsterEvent& ev, BookSnapshotRow& book) {
  std::string mline, bline;
  const bool got_m = static_cast<bool>(std::getline(impl_->msg, mline));
  const bool got_b = static_cast<bool>(std::getline(impl_->book, bline));
  ++impl_->line_no;
  if (!got_m && !got_b) return false;
  if (got_m != got_b) {
    throw ParseError("row misalignment at line " + std::to_string(impl_->line_no) + ": " +
                     (got_m ? impl_->book_path : impl_->msg_path) + " ended early");
  }
  const std::size_t ln = impl_->line_no;

  const auto mf = split_csv(mline);
  if (mf.size() != 6) {
    throw ParseError("line " + std::to_string(ln) + ": message row needs 6 columns");
  }
  ev.time = parse_f64(mf[0], ln, "time");
  const std::int64_t kind = parse_i64(mf[1], ln, "event kind");
  if (kind < 1 || kind > 7) {
    throw ParseError("line " + std::to_string(ln) + ": unknown event kind " +
                     std::to_string(kind));
  }
  ev.kind = static_cast<LobsterKind>(kind);
  ev.order_id = parse_i64(mf[2], ln, "order id");
  ev.size = parse_i64(mf[3], ln, "size");
  ev.price = parse_i64(mf[4], ln, "price");
  const std::int64_t dir = parse_i64(mf[5], ln, "direction");
  ev.direction = static_cast<int>(dir);
  if (ev.time < impl_->prev_time) {
    throw ParseError("line " + std::to_string(ln) + ": non-monotone time");
  }
  impl_->prev_time = ev.time;
  if (ev.kind != LobsterKind::Halt && ev.price % impl_->tick_units != 0) {
    throw ParseError("line " + std::to_string(ln) + ": price " + std::to_string(ev.price) +
                     " not divisible by the tick");
  }

  const auto bf = split_csv(bline);
  if (bf.size() % 4 != 0 || bf.empty()) {
    throw ParseError("line " + std::to_string(ln) + ": orderbook row needs 4K columns");
  }
  book.asks.clear();
  book.bids.clear();
  const std::size_t k = bf.size() / 4;
  for (std::size_t lvl = 0; lvl < k; ++lvl) {
    const std::int64_t ap = parse_i64(bf[4 * lvl + 0], ln, "ask price");
    const std::int64_t av = parse_i64(bf[4 * lvl + 1], ln, "ask size");
    const std::int64_t bp = parse_i64(bf[4 * lvl + 2], ln, "bid price");
    const std::int64_t bv = parse_i64(bf[4 * lvl + 3], ln, "bid size");
    if (av > 0 && ap < 9999999999LL) book.asks.emplace_back(ap, av);
    if (bv > 0 && bp > -9999999999LL) book.bids.emplace_back(bp, bv);
  }
  ++rows_;
  return true;
}

// ---- classification ----

namespace {

struct BookView {
  std::int64_t bid1 = 0, ask1 = 0;  // in tick units (currency x 1e4)
  bool valid = false;
};

}  // namespace

std::vector<LogRow> classify_events(const std::string& message_path,
                                    const std::string& orderbook_path, double tick_size,
                                    const ClassifyOptions& opts, ClassifyStats* stats_out) {
  LobsterReader reader(message_path, orderbook_path, tick_size);
  const std::int64_t tick_units = static_cast<std::int64_t>(std::llround(tick_size * 1e4));
  const std::int64_t m_depth = opts.shape_median_ticks - 1;
  ClassifyStats stats;
  std::vector<LogRow> rows;

  RawLobsterEvent ev;
  BookSnapshotRow book;
  BookSnapshotRow prev_book;
  bool have_prev = false;

  auto meta_state = [&](const BookSnapshotRow& b, LogRow& r) -> bool {
    if (b.asks.empty() || b.bids.empty()) return false;
    const std::int64_t bid1 = b.bids[0].first, ask1 = b.asks[0].first;
    if (ask1 <= bid1) return false;
    r.bid_ticks = bid1 / tick_units;
    r.ask_ticks = ask1 / tick_units;
    const std::int64_t mid2 = r.bid_ticks + r.ask_ticks;  // half-ticks
    auto fill_side = [&](const std::vector<std::pair<std::int64_t, std::int64_t>>& lvls,
                         bool ask, std::int64_t& q_top, std::int64_t& m_top,
                         std::int64_t& q_deep, std::int64_t& m_deep) {
      q_top = lvls[0].second;
      m_top = 1;
      q_deep = 0;
      m_deep = 1;
      std::int64_t deep_first = 0, deep_last = 0;
      for (std::size_t i = 1; i < lvls.size(); ++i) {
        const std::int64_t pt = lvls[i].first / tick_units;
        const std::int64_t dist2 = ask ? (2 * pt - mid2) : (mid2 - 2 * pt);
        if (dist2 > 2 * m_depth) break;  // beyond the depth budget
        if (q_deep == 0) {
          deep_first = pt;
          m_top = ask ? (pt - lvls[0].first / tick_units) : (lvls[0].first / tick_units - pt);
        }
        deep_last = pt;
        q_deep += lvls[i].second;
      }
      if (q_deep > 0) {
        m_deep = std::max<std::int64_t>(1, std::llabs(deep_last - deep_first) + 1);
      }
    };
    fill_side(b.asks, true, r.q_top_ask, r.m_top_ask, r.q_deep_ask, r.m_deep_ask);
    fill_side(b.bids, false, r.q_top_bid, r.m_top_bid, r.q_deep_bid, r.m_deep_bid);
    return true;
  };

  while (reader.next(ev, book)) {
    if (ev.time < opts.session_start || ev.time > opts.session_end) {
      prev_book = book;
      have_prev = true;
      continue;
    }
    if (ev.kind == LobsterKind::ExecHidden) {
      ++stats.hidden_executions;
      prev_book = book;
      have_prev = true;
      continue;
    }
    if (ev.kind == LobsterKind::Cross) {
      ++stats.crosses;
      prev_book = book;
      have_prev = true;
      continue;
    }
    if (ev.kind == LobsterKind::Halt) {
      ++stats.halts;
      prev_book = book;
      have_prev = true;
      continue;
    }
    if (!have_prev) {
      ++stats.boundary;
      prev_book = book;
      have_prev = true;
      continue;
    }
    if (prev_book.asks.empty() || prev_book.bids.empty() ||
        prev_book.asks[0].first <= prev_book.bids[0].first) {
      ++stats.skipped_unresolvable;
      prev_book = book;
      continue;
    }
    const std::int64_t bid1 = prev_book.bids[0].first;
    const std::int64_t ask1 = prev_book.asks[0].first;
    const std::int64_t mid2_units = bid1 + ask1;  // 2 x mid, in price units
    const bool buy = ev.direction == 1;
    const std::int64_t top = buy ? bid1 : ask1;
    const std::int64_t opp = buy ? ask1 : bid1;
    // Signed distance from the same-side top, positive away from the mid.
    const std::int64_t d = buy ? (top - ev.price) / tick_units : (ev.price - top) / tick_units;
    // Distance from the mid in half-ticks.
    const std::int64_t mid_dist2 =
        buy ? (mid2_units - 2 * ev.price) / tick_units : (2 * ev.price - mid2_units) / tick_units;

    std::optional<EventType> type;
    std::int64_t offset = 0;
    // Ticks from the best to the second-best occupied quote on the event side
    // (the empirical top meta-queue span); a one-sided book spans the whole
    // depth budget.
    std::int64_t m_top_span = m_depth;
    if (buy && prev_book.bids.size() > 1) {
      m_top_span = (bid1 - prev_book.bids[1].first) / tick_units;
    } else if (!buy && prev_book.asks.size() > 1) {
      m_top_span = (prev_book.asks[1].first - ask1) / tick_units;
    }

    switch (ev.kind) {
      case LobsterKind::Submission: {
        if (d < 0) {
          // Inside the spread (or crossing).
          const std::int64_t improvement = -d;
          if ((buy && ev.price >= opp) || (!buy && ev.price <= opp)) {
            ++stats.skipped_unresolvable;  // marketable submission
          } else {
            type = buy ? EventType::LoBidIs : EventType::LoAskIs;
            offset = buy ? -improvement : improvement;
          }
        } else if (d < m_top_span) {
          type = buy ? EventType::LoBidTop : EventType::LoAskTop;
          offset = buy ? -d : d;
        } else if (mid_dist2 <= 2 * m_depth) {
          type = buy ? EventType::LoBidDeep : EventType::LoAskDeep;
          offset = buy ? -d : d;
        } else {
          ++stats.dropped_deep;
        }
        break;
      }
      case LobsterKind::Cancel:
      case LobsterKind::Delete: {
        if (d < 0) {
          ++stats.skipped_unresolvable;
        } else if (d < m_top_span) {
          type = buy ? EventType::CoBidTop : EventType::CoAskTop;
          offset = buy ? -d : d;
        } else if (mid_dist2 <= 2 * m_depth) {
          type = buy ? EventType::CoBidDeep : EventType::CoAskDeep;
          offset = buy ? -d : d;
        } else {
          ++stats.dropped_deep;
        }
        break;
      }
      case LobsterKind::ExecVisible: {
        if (d == 0) {
          type = buy ? EventType::MoBid : EventType::MoAsk;
          offset = 0;
        } else {
          ++stats.skipped_unresolvable;
        }
        break;
      }
      default:
        break;
    }

    if (type) {
      LogRow r;
      if (meta_state(book, r)) {
        r.time = ev.time - opts.session_start;
        r.type = *type;
        r.size = ev.size;
        r.offset = offset;
        r.depleted_levels = 0;
        rows.push_back(r);
        ++stats.classified;
      } else {
        ++stats.skipped_unresolvable;
      }
    }
    prev_book = book;
  }
  if (stats_out) *stats_out = stats;
  return rows;
}

void ensure_dir(const std::string& path) { std::filesystem::create_directories(path); }

void write_metric_report(const std::string& out_dir, const MetricReport& rep) {
  ensure_dir(out_dir);
  namespace fs = std::filesystem;
  {
    ordered_json j;
    j["horizon"] = rep.horizon;
    j["tick_size"] = rep.tick_size;
    j["events"] = rep.events;
    ordered_json counts;
    for (int i = 0; i < kEventTypeCount; ++i) {
      counts[std::string(event_type_name(static_cast<EventType>(i)))] = rep.counts[i];
    }
    j["event_counts"] = counts;
    j["mean_spread_ticks"] = rep.mean_spread_ticks;
    j["spread_index_of_dispersion"] = rep.spread_iod;
    if (rep.eps_proxy) {
      j["epsilon_proxy"] = *rep.eps_proxy;
    } else {
      j["epsilon_proxy"] = nullptr;
    }
    j["trade_mid_changes"] = {{"n_trades", rep.trade_mids.n_trades},
                              {"n_moving", rep.trade_mids.n_moving},
                              {"mean_abs_currency", rep.trade_mids.mean_abs_currency}};
    j["shape"] = {{"arg_max_ticks", rep.shape.arg_max_ticks},
                  {"q25", rep.shape.q25},
                  {"q50", rep.shape.q50},
                  {"q75", rep.shape.q75}};
    j["sparsity"] = {{"wasserstein_mean", rep.sparsity.wasserstein_mean},
                     {"wasserstein_variance", rep.sparsity.wasserstein_variance}};
    j["mo_to_best"] = {{"mean", rep.mo_ratio.mean},
                       {"frac_above_one", rep.mo_ratio.frac_above_one},
                       {"n", rep.mo_ratio.ratios.size()}};
    std::ofstream out(fs::path(out_dir) / "report.json");
    out << j.dump(2) << '\n';
  }
  {
    std::ofstream out(fs::path(out_dir) / "spread_pdf.csv");
    out << "spread_ticks,probability\n";
    for (const auto& [s, p] : rep.spread_pdf) out << s << ',' << p << '\n';
  }
  {
    std::ofstream out(fs::path(out_dir) / "shape_profile.csv");
    out << "offset_ticks,mass\n";
    for (const auto& [off, m] : rep.shape.half_tick_mass) {
      out << 0.5 * static_cast<double>(off) << ',' << m << '\n';
    }
  }
  {
    std::ofstream out(fs::path(out_dir) / "empty_levels.csv");
    out << "rank,empty_levels,probability\n";
    for (const auto& [rank, hist] : rep.sparsity.empty_levels) {
      for (const auto& [gap, p] : hist) out << rank << ',' << gap << ',' << p << '\n';
    }
  }
  {
    std::ofstream out(fs::path(out_dir) / "trade_mid_changes.csv");
    out << "abs_move_half_ticks,count\n";
    for (const auto& [d, c] : rep.trade_mids.hist_abs_half_ticks) out << d << ',' << c << '\n';
  }
  {
    std::ofstream out(fs::path(out_dir) / "leverage_grid.csv");
    out << "e1_family,e1_side,e1_bin,e2_family,e2_side,e2_bin,ratio,pair_count,defined\n";
    const char* fam[] = {"LO", "CO", "MO", "IS"};
    for (const auto& [key, cell] : rep.leverage.cells) {
      const auto& [k1, k2] = key;
      out << fam[static_cast<int>(k1.family)] << ',' << side_name(k1.side) << ',' << k1.bin << ','
          << fam[static_cast<int>(k2.family)] << ',' << side_name(k2.side) << ',' << k2.bin << ','
          << (cell.defined ? std::to_string(cell.ratio) : std::string("")) << ','
          << cell.pair_count << ',' << (cell.defined ? 1 : 0) << '\n';
    }
  }
  {
    std::ofstream out(fs::path(out_dir) / "mo_best_ratio.csv");
    out << "ratio\n";
    for (double rr : rep.mo_ratio.ratios) out << rr << '\n';
  }
  {
    std::ofstream out(fs::path(out_dir) / "spread_by_time.csv");
    out << "t_start,mean_spread\n";
    for (const auto& [t, v] : rep.spread_by_time) out << t << ',' << v << '\n';
  }
}

void write_norm_matrix_csv(const std::string& path, const KernelNormMatrix& nm) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open for writing: " + path);
  out << "from";
  for (int i = 0; i < kEventTypeCount; ++i) {
    out << ',' << event_type_name(static_cast<EventType>(i));
  }
  out << '\n';
  for (int j = 0; j < kEventTypeCount; ++j) {
    out << event_type_name(static_cast<EventType>(j));
    for (int i = 0; i < kEventTypeCount; ++i) out << ',' << nm.abs_norms[j][i];
    out << '\n';
  }
}

}  // namespace mqh

#include "mqh/analytics.hpp"

#include <algorithm>
#include <cmath>

namespace mqh {

void WeightedSeries::validate() const {
  if (times.empty() || times.size() != values.size()) {
    throw DomainError("weighted series: empty or mismatched breakpoints");
  }
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (times[i] < times[i - 1]) throw DomainError("weighted series: times must be ordered");
  }
  if (total_duration < times.back()) {
    throw DomainError("weighted series: total_duration before last breakpoint");
  }
}

WeightedSeries spread_series(const std::vector<LogRow>& rows, double horizon,
                             std::optional<std::int64_t> initial_spread) {
  WeightedSeries s;
  s.total_duration = horizon;
  if (rows.empty()) {
    if (!initial_spread) throw DomainError("spread series: no rows and no initial spread");
    s.times.push_back(0.0);
    s.values.push_back(static_cast<double>(*initial_spread));
    return s;
  }
  s.times.push_back(0.0);
  s.values.push_back(static_cast<double>(initial_spread.value_or(rows.front().spread())));
  for (const LogRow& r : rows) {
    s.times.push_back(r.time);
    s.values.push_back(static_cast<double>(r.spread()));
  }
  return s;
}

double time_weighted_mean(const WeightedSeries& s) {
  s.validate();
  if (!(s.total_duration > 0.0)) throw DomainError("time_weighted_mean: zero duration");
  double acc = 0.0;
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    const double hi = (i + 1 < s.times.size()) ? s.times[i + 1] : s.total_duration;
    acc += s.values[i] * (hi - s.times[i]);
  }
  return acc / s.total_duration;
}

double time_weighted_variance(const WeightedSeries& s) {
  const double mean = time_weighted_mean(s);
  double acc = 0.0;
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    const double hi = (i + 1 < s.times.size()) ? s.times[i + 1] : s.total_duration;
    const double d = s.values[i] - mean;
    acc += d * d * (hi - s.times[i]);
  }
  return acc / s.total_duration;
}

double index_of_dispersion(const WeightedSeries& s) {
  const double mean = time_weighted_mean(s);
  if (!(mean > 0.0)) throw DomainError("index_of_dispersion: mean must be > 0");
  return time_weighted_variance(s) / mean;
}

double index_of_dispersion(std::span<const double> samples) {
  if (samples.empty()) throw DomainError("index_of_dispersion: empty sample");
  double mean = 0.0;
  for (double v : samples) mean += v;
  mean /= static_cast<double>(samples.size());
  if (!(mean > 0.0)) throw DomainError("index_of_dispersion: mean must be > 0");
  double var = 0.0;
  for (double v : samples) var += (v - mean) * (v - mean);
  var /= static_cast<double>(samples.size());
  return var / mean;
}

namespace {

ProfileSnapshot profile_from_row(const LogRow& r) {
  ProfileSnapshot p;
  p.t = r.time;
  const std::int64_t s = r.spread();
  // Meta-queue volumes sit at their best level: the top at s half-ticks from
  // the mid, the deep at the second-best quote.
  p.levels = {{s, r.q_top_ask},
              {s + 2 * r.m_top_ask, r.q_deep_ask},
              {-s, r.q_top_bid},
              {-(s + 2 * r.m_top_bid), r.q_deep_bid}};
  return p;
}

ProfileSnapshot profile_from_state(double t, const LobState& st) {
  ProfileSnapshot p;
  p.t = t;
  const std::int64_t mid = st.mid_half();
  p.levels = {{st.ask.best_half - mid, st.ask.q_top},
              {st.ask.best_half + 2 * st.ask.m_top - mid, st.ask.q_deep},
              {st.bid.best_half - mid, st.bid.q_top},
              {st.bid.best_half - 2 * st.bid.m_top - mid, st.bid.q_deep}};
  return p;
}

void set_durations(std::vector<ProfileSnapshot>& out, double horizon) {
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double hi = (i + 1 < out.size()) ? out[i + 1].t : horizon;
    out[i].duration = std::max(0.0, hi - out[i].t);
  }
}

std::int64_t tick_bin_of_half(std::int64_t half_offset) {
  // Offsets in ((k-1), k] ticks map to bin k; the half-tick offset maps to 1.
  return (std::abs(half_offset) + 1) / 2;
}

std::map<std::int64_t, double> tick_distribution(const ProfileSnapshot& snap) {
  std::map<std::int64_t, double> dist;
  double total = 0.0;
  for (const auto& [off, vol] : snap.levels) total += static_cast<double>(vol);
  if (total <= 0.0) return dist;
  for (const auto& [off, vol] : snap.levels) {
    dist[tick_bin_of_half(off)] += static_cast<double>(vol) / total;
  }
  return dist;
}

}  // namespace

std::vector<ProfileSnapshot> profiles_from_rows(const std::vector<LogRow>& rows, double horizon) {
  std::vector<ProfileSnapshot> out;
  out.reserve(rows.size());
  for (const LogRow& r : rows) out.push_back(profile_from_row(r));
  set_durations(out, horizon);
  return out;
}

std::vector<ProfileSnapshot> profiles_from_snapshots(const std::vector<Snapshot>& snaps,
                                                     double horizon) {
  std::vector<ProfileSnapshot> out;
  out.reserve(snaps.size());
  for (const Snapshot& s : snaps) out.push_back(profile_from_state(s.t, s.state));
  set_durations(out, horizon);
  return out;
}

ShapeProfile average_shape(const std::vector<ProfileSnapshot>& snaps) {
  ShapeProfile shape;
  double total_time = 0.0;
  for (const ProfileSnapshot& snap : snaps) {
    if (snap.duration <= 0.0) continue;
    double total = 0.0;
    for (const auto& [off, vol] : snap.levels) total += static_cast<double>(vol);
    if (total <= 0.0) continue;
    for (const auto& [off, vol] : snap.levels) {
      shape.half_tick_mass[std::abs(off)] += snap.duration * static_cast<double>(vol) / total;
    }
    total_time += snap.duration;
  }
  if (total_time <= 0.0 || shape.half_tick_mass.empty()) {
    throw DomainError("average_shape: no volume observed");
  }
  for (auto& [off, m] : shape.half_tick_mass) {
    m /= total_time;
    shape.tick_mass[(off + 1) / 2] += m;
  }

  double best_mass = -1.0;
  double cum = 0.0;
  bool q25_done = false, q50_done = false, q75_done = false;
  for (const auto& [off, m] : shape.half_tick_mass) {
    if (m > best_mass) {
      best_mass = m;
      shape.arg_max_ticks = 0.5 * static_cast<double>(off);
    }
    cum += m;
    if (!q25_done && cum >= 0.25) {
      shape.q25 = 0.5 * static_cast<double>(off);
      q25_done = true;
    }
    if (!q50_done && cum >= 0.50) {
      shape.q50 = 0.5 * static_cast<double>(off);
      q50_done = true;
    }
    if (!q75_done && cum >= 0.75) {
      shape.q75 = 0.5 * static_cast<double>(off);
      q75_done = true;
    }
  }
  return shape;
}

double wasserstein_l1(const std::map<std::int64_t, double>& a,
                      const std::map<std::int64_t, double>& b) {
  double acc = 0.0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() || ib != b.end()) {
    if (ib == b.end() || (ia != a.end() && ia->first < ib->first)) {
      acc += std::abs(ia->second);
      ++ia;
    } else if (ia == a.end() || ib->first < ia->first) {
      acc += std::abs(ib->second);
      ++ib;
    } else {
      acc += std::abs(ia->second - ib->second);
      ++ia;
      ++ib;
    }
  }
  return acc;
}

SparsityMetrics sparsity_metrics(const std::vector<ProfileSnapshot>& snaps) {
  SparsityMetrics out;
  const ShapeProfile shape = average_shape(snaps);
  double total_time = 0.0;
  double wsum = 0.0, wsum2 = 0.0;
  for (const ProfileSnapshot& snap : snaps) {
    if (snap.duration <= 0.0) continue;
    // Empty levels between successive occupied quotes, per side.
    for (Side sd : {Side::Bid, Side::Ask}) {
      std::vector<std::int64_t> offs;
      for (const auto& [off, vol] : snap.levels) {
        const bool ask = off > 0;
        if (vol > 0 && ((sd == Side::Ask) == ask)) offs.push_back(std::abs(off));
      }
      std::sort(offs.begin(), offs.end());
      for (std::size_t i = 0; i + 1 < offs.size(); ++i) {
        const std::int64_t gap = (offs[i + 1] - offs[i]) / 2 - 1;
        out.empty_levels[static_cast<std::int64_t>(i + 1)][gap] += snap.duration;
      }
    }
    const double w = wasserstein_l1(shape.tick_mass, tick_distribution(snap));
    wsum += w * snap.duration;
    wsum2 += w * w * snap.duration;
    total_time += snap.duration;
  }
  if (total_time > 0.0) {
    out.wasserstein_mean = wsum / total_time;
    out.wasserstein_variance =
        std::max(0.0, wsum2 / total_time - out.wasserstein_mean * out.wasserstein_mean);
    for (auto& [rank, hist] : out.empty_levels) {
      double rank_total = 0.0;
      for (auto& [gap, w] : hist) rank_total += w;
      if (rank_total > 0.0) {
        for (auto& [gap, w] : hist) w /= rank_total;
      }
    }
  }
  return out;
}

TradeMidStats trade_mid_changes(const std::vector<LogRow>& rows, double tick_size) {
  TradeMidStats out;
  double acc = 0.0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const LogRow& r = rows[i];
    if (family_of(r.type) != EventFamily::MarketOrder) continue;
    ++out.n_trades;
    const std::int64_t d = std::abs(r.mid_half() - rows[i - 1].mid_half());
    if (d == 0) continue;
    ++out.n_moving;
    out.hist_abs_half_ticks[d] += 1;
    acc += static_cast<double>(d) * 0.5 * tick_size;
  }
  if (out.n_moving > 0) out.mean_abs_currency = acc / static_cast<double>(out.n_moving);
  return out;
}

int LeverageBinning::bin_of(double x) const {
  if (edges.size() < 2 || x < edges.front()) return -1;
  for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
    if (x < edges[k + 1]) return static_cast<int>(k);
  }
  return x == edges.back() ? static_cast<int>(edges.size()) - 2 : -1;
}

LeverageBinning LeverageBinning::make(double shape_q95) {
  LeverageBinning b;
  for (int k = 0; k <= 10; ++k) b.edges.push_back(static_cast<double>(k));
  double upper = std::max(shape_q95, 12.0);
  const int log_bins = 8;
  const double ratio = std::pow(upper / 10.0, 1.0 / log_bins);
  double e = 10.0;
  for (int k = 0; k < log_bins; ++k) {
    e *= ratio;
    b.edges.push_back(e);
  }
  return b;
}

std::vector<LeverageEvent> leverage_events_from_rows(const std::vector<LogRow>& rows) {
  std::vector<LeverageEvent> out;
  out.reserve(rows.size());
  for (const LogRow& r : rows) {
    out.push_back({family_of(r.type), side_of(r.type),
                   std::abs(static_cast<double>(r.offset))});
  }
  return out;
}

LeverageGrid leverage_grid(const std::vector<LeverageEvent>& events, const LeverageBinning& bins) {
  LeverageGrid g;
  g.binning = bins;
  g.total_events = static_cast<std::int64_t>(events.size());
  auto key = [&](const LeverageEvent& e) -> std::optional<LeverageCellKey> {
    const int b = bins.bin_of(e.offset_abs);
    if (b < 0) return std::nullopt;
    return LeverageCellKey{e.family, e.side, b};
  };
  for (const LeverageEvent& e : events) {
    if (auto k = key(e)) g.occurrences[*k] += 1;
  }
  std::map<LeverageCellKey, std::int64_t> predecessor_counts;
  std::map<std::pair<LeverageCellKey, LeverageCellKey>, std::int64_t> pair_counts;
  for (std::size_t i = 0; i + 1 < events.size(); ++i) {
    auto k1 = key(events[i]);
    auto k2 = key(events[i + 1]);
    if (!k1 || !k2) continue;
    predecessor_counts[*k1] += 1;
    pair_counts[{*k1, *k2}] += 1;
  }
  const double n = static_cast<double>(g.total_events);
  for (const auto& [k1, n1] : predecessor_counts) {
    for (const auto& [k2, n2] : g.occurrences) {
      LeverageCell cell;
      auto it = pair_counts.find({k1, k2});
      cell.pair_count = (it == pair_counts.end()) ? 0 : it->second;
      if (n1 > 0 && n2 > 0) {
        const double cond = static_cast<double>(cell.pair_count) / static_cast<double>(n1);
        const double uncond = static_cast<double>(n2) / n;
        cell.ratio = cond / uncond;
        cell.defined = true;
      }
      g.cells[{k1, k2}] = cell;
    }
  }
  return g;
}

SlopeFit loglog_slope(std::span<const double> x, std::span<const double> y,
                      std::span<const double> weights) {
  if (x.size() != y.size()) throw DomainError("loglog_slope: size mismatch");
  if (x.size() < 2) throw DomainError("loglog_slope: need at least 2 points");
  if (!weights.empty() && weights.size() != x.size()) {
    throw DomainError("loglog_slope: weight size mismatch");
  }
  double sw = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
      throw DomainError("loglog_slope: inputs must be positive");
    }
    const double w = weights.empty() ? 1.0 : weights[i];
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sw += w;
    sx += w * lx;
    sy += w * ly;
    sxx += w * lx * lx;
    sxy += w * lx * ly;
    syy += w * ly * ly;
  }
  const double vx = sxx - sx * sx / sw;
  const double vy = syy - sy * sy / sw;
  const double cxy = sxy - sx * sy / sw;
  if (!(vx > 0.0)) throw DomainError("loglog_slope: x values are all equal");
  SlopeFit fit;
  fit.slope = cxy / vx;
  fit.intercept = (sy - fit.slope * sx) / sw;
  fit.r2 = (vy > 0.0) ? (cxy * cxy) / (vx * vy) : 1.0;
  const double dof = static_cast<double>(x.size()) - 2.0;
  if (dof > 0.0 && vy > 0.0) {
    const double resid = std::max(0.0, vy - fit.slope * cxy);
    fit.slope_std_err = std::sqrt(resid / dof / vx);
  }
  return fit;
}

double epsilon_proxy(double mean_spread_ticks) {
  if (!(mean_spread_ticks > 1.0)) {
    throw DomainError("epsilon_proxy: undefined in the large-tick regime (s_bar <= 1)");
  }
  return 1.0 / mean_spread_ticks;
}

IndependenceTable independence_ratio(const std::vector<std::pair<int, double>>& events,
                                     const std::vector<double>& bin_edges,
                                     std::int64_t min_count) {
  if (bin_edges.size() < 2) throw DomainError("independence_ratio: need at least one bin");
  IndependenceTable out;
  out.bin_edges = bin_edges;
  auto bin_of = [&](double v) -> int {
    if (v < bin_edges.front()) return -1;
    for (std::size_t k = 0; k + 1 < bin_edges.size(); ++k) {
      if (v < bin_edges[k + 1]) return static_cast<int>(k);
    }
    return v == bin_edges.back() ? static_cast<int>(bin_edges.size()) - 2 : -1;
  };
  std::map<int, std::int64_t> n_e;
  std::map<int, std::int64_t> n_v;
  std::map<std::pair<int, int>, std::int64_t> n_ev;
  std::int64_t n = 0;
  for (const auto& [e, v] : events) {
    const int b = bin_of(v);
    if (b < 0) continue;
    ++n;
    ++n_e[e];
    ++n_v[b];
    ++n_ev[{e, b}];
  }
  for (const auto& [e, ne] : n_e) {
    for (const auto& [b, nv] : n_v) {
      RatioCell cell;
      auto it = n_ev.find({e, b});
      cell.joint_count = (it == n_ev.end()) ? 0 : it->second;
      if (nv >= min_count && ne > 0) {
        const double p_cond = static_cast<double>(cell.joint_count) / static_cast<double>(nv);
        const double p_e = static_cast<double>(ne) / static_cast<double>(n);
        cell.ratio = p_cond / p_e;
        const double se =
            std::sqrt(std::max(0.0, p_cond * (1.0 - p_cond) / static_cast<double>(nv)));
        cell.lo = (p_cond - 1.96 * se) / p_e;
        cell.hi = (p_cond + 1.96 * se) / p_e;
        cell.defined = true;
      }
      out.cells[{e, b}] = cell;
    }
  }
  return out;
}

AcfResult acf(std::span<const double> series, int max_lag) {
  const std::size_t n = series.size();
  if (max_lag < 1 || n <= static_cast<std::size_t>(max_lag)) {
    throw DomainError("acf: series shorter than max_lag");
  }
  double mean = 0.0;
  for (double v : series) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : series) var += (v - mean) * (v - mean);
  if (!(var > 0.0)) throw DomainError("acf: zero-variance series");
  AcfResult out;
  out.band = 1.96 / std::sqrt(static_cast<double>(n));
  for (int lag = 1; lag <= max_lag; ++lag) {
    double acc = 0.0;
    for (std::size_t i = lag; i < n; ++i) {
      acc += (series[i] - mean) * (series[i - lag] - mean);
    }
    out.values.push_back(acc / var);
  }
  return out;
}

MoBestRatio mo_to_best_ratio(const std::vector<LogRow>& rows) {
  MoBestRatio out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const LogRow& r = rows[i];
    if (family_of(r.type) != EventFamily::MarketOrder) continue;
    const Side sd = side_of(r.type);
    const double q_before = static_cast<double>(rows[i - 1].q_top(sd));
    if (q_before <= 0.0) continue;
    out.ratios.push_back(static_cast<double>(r.size) / q_before);
  }
  if (!out.ratios.empty()) {
    double acc = 0.0;
    std::int64_t above = 0;
    for (double v : out.ratios) {
      acc += v;
      if (v > 1.0) ++above;
    }
    out.mean = acc / static_cast<double>(out.ratios.size());
    out.frac_above_one = static_cast<double>(above) / static_cast<double>(out.ratios.size());
  }
  return out;
}

MetricReport build_report(const std::vector<LogRow>& rows, double horizon, double tick_size,
                          std::optional<std::int64_t> initial_spread) {
  MetricReport rep;
  rep.horizon = horizon;
  rep.tick_size = tick_size;
  rep.events = rows.size();
  for (const LogRow& r : rows) ++rep.counts[static_cast<int>(r.type)];

  const WeightedSeries s = spread_series(rows, horizon, initial_spread);
  rep.mean_spread_ticks = time_weighted_mean(s);
  rep.spread_iod = index_of_dispersion(s);
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    const double hi = (i + 1 < s.times.size()) ? s.times[i + 1] : s.total_duration;
    rep.spread_pdf[static_cast<std::int64_t>(s.values[i])] += (hi - s.times[i]) / horizon;
  }
  if (rep.mean_spread_ticks > 1.0) rep.eps_proxy = epsilon_proxy(rep.mean_spread_ticks);

  rep.trade_mids = trade_mid_changes(rows, tick_size);
  const auto profiles = profiles_from_rows(rows, horizon);
  rep.shape = average_shape(profiles);
  rep.sparsity = sparsity_metrics(profiles);

  // 95% quantile of the shape sets the outer leverage bin edge.
  double cum = 0.0;
  double q95 = 10.0;
  for (const auto& [off, m] : rep.shape.half_tick_mass) {
    cum += m;
    if (cum >= 0.95) {
      q95 = 0.5 * static_cast<double>(off);
      break;
    }
  }
  rep.leverage = leverage_grid(leverage_events_from_rows(rows), LeverageBinning::make(q95));
  rep.mo_ratio = mo_to_best_ratio(rows);

  const int time_bins = 24;
  const double w = horizon / time_bins;
  std::vector<double> tsum(time_bins, 0.0);
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    const double lo = s.times[i];
    const double hi = (i + 1 < s.times.size()) ? s.times[i + 1] : s.total_duration;
    const int b0 = std::clamp(static_cast<int>(lo / w), 0, time_bins - 1);
    const int b1 = std::clamp(static_cast<int>(hi / w), 0, time_bins - 1);
    for (int b = b0; b <= b1; ++b) {
      const double ov = std::min(hi, (b + 1) * w) - std::max(lo, b * w);
      if (ov > 0.0) tsum[b] += s.values[i] * ov;
    }
  }
  for (int b = 0; b < time_bins; ++b) {
    rep.spread_by_time.emplace_back(b * w, tsum[b] / w);
  }
  return rep;
}

}  // namespace mqh

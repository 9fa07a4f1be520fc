#include "mqh/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include <nlohmann/json.hpp>

#include "mqh/stats.hpp"

namespace mqh {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& task) {
  if (jobs < 1) jobs = static_cast<int>(std::thread::hardware_concurrency());
  if (jobs < 1) jobs = 1;
  if (jobs == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  std::exception_ptr first_error;
  std::mutex err_mu;
  const int n_workers = std::min<int>(jobs, static_cast<int>(count));
  for (int w = 0; w < n_workers; ++w) {
    workers.emplace_back([&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) break;
        try {
          task(i);
        } catch (...) {
          std::lock_guard<std::mutex> lk(err_mu);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

RunOutput simulate_to_rows(const RunConfig& cfg, std::optional<std::uint64_t> seed,
                           std::optional<double> horizon, std::uint64_t max_events) {
  RunOptions opts;
  opts.horizon = horizon.value_or(cfg.horizon);
  opts.seed = seed.value_or(cfg.seed);
  opts.snapshot_every = cfg.snapshot_every;
  opts.max_events = max_events;
  opts.keep_log = false;
  opts.keep_snapshots = true;
  RunOutput out;
  opts.on_event = [&](const EventRecord& rec, const LobState& st) {
    out.rows.push_back(make_log_row(rec, st));
  };
  SimResult res = run_simulation(cfg.hawkes, cfg.handlers, cfg.init, cfg.m_half_depth, opts);
  out.snapshots = std::move(res.snapshots);
  out.initial_state = res.initial_state;
  out.final_state = res.final_state;
  out.diag = res.diag;
  out.horizon = res.diag.end_time;
  return out;
}

namespace {

// Restrict rows to [t0, horizon] and rebase times so time-weighted metrics
// cover the stationary window only.
std::vector<LogRow> window_rows(const std::vector<LogRow>& rows, double t0, double horizon,
                                std::int64_t* spread_at_t0) {
  std::vector<LogRow> out;
  std::int64_t spread = rows.empty() ? 1 : rows.front().spread();
  for (const LogRow& r : rows) {
    if (r.time < t0) {
      spread = r.spread();
      continue;
    }
    if (r.time > horizon) break;
    LogRow shifted = r;
    shifted.time -= t0;
    out.push_back(shifted);
  }
  if (spread_at_t0) *spread_at_t0 = spread;
  return out;
}

double median(std::vector<double> v) {
  if (v.empty()) throw DomainError("median of empty set");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

PointMetrics run_point_metrics(const RunConfig& cfg, std::uint64_t seed, double burn_in_frac) {
  PointMetrics m;
  try {
    RunOutput out = simulate_to_rows(cfg, seed);
    const double t0 = burn_in_frac * out.horizon;
    std::int64_t s_at = 0;
    const std::vector<LogRow> rows = window_rows(out.rows, t0, out.horizon, &s_at);
    const double window = out.horizon - t0;
    if (rows.empty() || !(window > 0.0)) {
      m.error = "no events in the stationary window";
      return m;
    }
    const WeightedSeries s = spread_series(rows, window, s_at);
    m.mean_spread = time_weighted_mean(s);
    m.iod = index_of_dispersion(s);
    const TradeMidStats tm = trade_mid_changes(rows, cfg.hawkes.tick_size);
    m.r_mid = tm.has_data() ? tm.mean_abs_currency : 0.0;
    const auto profiles = profiles_from_rows(rows, window);
    const ShapeProfile shape = average_shape(profiles);
    m.arg_max = shape.arg_max_ticks;
    const SparsityMetrics sp = sparsity_metrics(profiles);
    m.wasserstein = sp.wasserstein_mean;
    m.events = rows.size();
    m.ok = true;
  } catch (const Error& e) {
    m.error = e.what();
  }
  return m;
}

RunConfig with_critical(const RunConfig& base, double alpha, double beta,
                        std::optional<double> eta) {
  RunConfig cfg = base;
  cfg.hawkes.is_alpha = alpha;
  cfg.hawkes.is_beta = beta;
  if (eta) {
    cfg.handlers.eta_is = GeomWithSpikes(*eta, 1);
    cfg.handlers.eta_t = GeomWithSpikes(*eta, 0);
    cfg.handlers.eta_t1 = GeomWithSpikes(*eta, 1);
  }
  return cfg;
}

const std::vector<ReferenceAsset>& reference_assets() {
  static const std::vector<ReferenceAsset> table = {
      {"SIRI", 0.0102, 0.98, 0.99, "large"}, {"BAC", 0.0103, 0.49, 0.98, "large"},
      {"INTC", 0.0130, 0.94, 0.98, "large"}, {"CSCO", 0.0250, 0.60, 0.99, "large"},
      {"ORCL", 0.0190, 0.18, 0.97, "large"}, {"ABBV", 0.0440, 0.46, 0.79, "medium"},
      {"PM", 0.2750, 0.35, 0.77, "medium"},  {"MSFT", 0.0230, 0.19, 0.98, "medium"},
      {"IBM", 0.2350, 0.59, 0.71, "medium"}, {"AAPL", 0.1350, 0.59, 0.92, "medium"},
      {"TSLA", 1.3610, 0.48, 0.19, "small"}, {"CHTR", 1.4100, 0.41, 0.15, "small"},
      {"GOOG", 3.2670, 0.50, 0.09, "small"}, {"AMZN", 1.9630, 0.41, 0.09, "small"},
      {"BKNG", 3.7410, 0.46, 0.03, "small"},
  };
  return table;
}

ReferenceSlopes reference_simulated_slopes() { return {-1.43, -1.05, -1.57}; }
ReferenceSlopes reference_empirical_slopes() { return {-1.36, -0.95, -1.50}; }

RunConfig reference_config() {
  RunConfig cfg;
  cfg.m_half_depth = 80;
  cfg.horizon = 10000.0;
  cfg.seed = 42;
  cfg.snapshot_every = 100;

  HawkesSpec& h = cfg.hawkes;
  h.tick_size = 0.01;
  h.is_alpha = 0.95;
  h.is_beta = 0.6;
  h.mu = {0.86, 0.32, 0.33, 0.48, 0.02, 0.47, 0.47, 0.33, 0.48, 0.02, 0.86, 0.32};

  // Power-law kernels phi(t) = a (1+ct)^(-b), shared decay, amplitudes set by
  // target norms; ask side listed, bid side reflected. Cancel bursts at the
  // top (the large CO_T norms) drive the queue depletions that keep the
  // spread wide against the in-spread flow.
  const double b = 1.5, c = 5.0, trunc = 200.0;
  const double mass = 1.0 - std::pow(1.0 + c * trunc, 1.0 - b);
  auto set_norm = [&](EventType from, EventType to, double norm) {
    PowerLawKernel k;
    k.b = b;
    k.c = c;
    k.truncation = trunc;
    k.a = norm * c * (b - 1.0) / mass;
    h.kernels[static_cast<int>(from)][static_cast<int>(to)] = k;
  };
  using E = EventType;
  set_norm(E::LoAskDeep, E::LoAskDeep, 0.20);
  set_norm(E::LoAskDeep, E::CoAskDeep, 0.15);
  set_norm(E::CoAskDeep, E::CoAskDeep, 0.20);
  set_norm(E::CoAskDeep, E::LoAskDeep, 0.15);
  set_norm(E::LoAskTop, E::LoAskTop, 0.20);
  set_norm(E::LoAskTop, E::CoAskTop, 0.35);
  set_norm(E::LoAskTop, E::LoAskDeep, 0.05);
  set_norm(E::CoAskTop, E::CoAskTop, 0.55);
  set_norm(E::CoAskTop, E::LoAskTop, 0.15);
  set_norm(E::MoAsk, E::MoAsk, 0.20);
  set_norm(E::MoAsk, E::LoAskTop, 0.10);
  set_norm(E::MoAsk, E::CoAskTop, 0.15);
  set_norm(E::MoAsk, E::MoBid, 0.05);
  // In-spread activity arrives in avalanches and triggers cancel bursts on
  // the stepped-ahead tops.
  set_norm(E::LoAskIs, E::LoAskIs, 0.30);
  set_norm(E::LoAskIs, E::LoBidIs, 0.25);
  set_norm(E::LoAskIs, E::LoAskTop, 0.08);
  set_norm(E::LoAskIs, E::CoAskTop, 0.30);
  h.reflect_ask_to_bid();

  HandlerConfig& d = cfg.handlers;
  const std::vector<Spike> kappa_spikes = {{1, 0.05}, {10, 0.05}, {100, 0.05}};
  const std::vector<Spike> deep_spikes = {{1, 0.002}, {10, 0.002}, {100, 0.002}};
  d.eta_is = GeomWithSpikes(0.25, 1);
  d.eta_t = GeomWithSpikes(0.25, 0);
  d.eta_t1 = GeomWithSpikes(0.25, 1);
  d.kappa_is = GeomWithSpikes(0.8, 1);
  d.kappa_t = GeomWithSpikes(0.015, 1, kappa_spikes);
  d.kappa_mo = GeomWithSpikes(0.05, 1, kappa_spikes);
  d.kappa_d = GeomWithSpikes(0.7, 1, {{1, 0.05}, {10, 0.02}});
  d.deep_volume.per_level = GeomWithSpikes(0.5, 1, deep_spikes);

  cfg.init.s0 = 15;
  cfg.init.m0_top = 0.25;
  cfg.init.m0_deep = 0.04;
  cfg.init.price_anchor_ticks = 10000;
  return cfg;
}

RunConfig calibration_study_config() {
  RunConfig cfg = reference_config();
  const double b = 1.5, c = 5.0, trunc = 200.0;
  const double mass = 1.0 - std::pow(1.0 + c * trunc, 1.0 - b);
  auto set_norm = [&](EventType from, EventType to, double norm) {
    PowerLawKernel k;
    k.b = b;
    k.c = c;
    k.truncation = trunc;
    k.a = norm * c * (b - 1.0) / mass;
    cfg.hawkes.kernels[static_cast<int>(from)][static_cast<int>(to)] = k;
  };
  using E = EventType;
  set_norm(E::LoAskIs, E::LoAskIs, 0.07);
  set_norm(E::LoAskIs, E::LoBidIs, 0.06);
  set_norm(E::LoAskIs, E::CoAskTop, 0.08);
  cfg.hawkes.symmetric = false;
  cfg.hawkes.reflect_ask_to_bid();
  return cfg;
}

std::vector<double> sample_m_deep(const std::vector<LogRow>& rows, double burn_in, double horizon,
                                  double step, Side side) {
  std::vector<double> out;
  if (rows.empty() || !(step > 0.0)) return out;
  std::size_t i = 0;
  std::int64_t current = rows.front().m_deep(side);
  for (double t = burn_in; t <= horizon; t += step) {
    while (i < rows.size() && rows[i].time <= t) {
      current = rows[i].m_deep(side);
      ++i;
    }
    out.push_back(static_cast<double>(current));
  }
  return out;
}

SimulateSummary cmd_simulate(const RunConfig& cfg, const std::string& out_dir) {
  ensure_dir(out_dir);
  RunOutput out = simulate_to_rows(cfg);
  write_event_log((fs::path(out_dir) / "log.csv").string(), out.rows);
  write_snapshots((fs::path(out_dir) / "snapshots.jsonl").string(), out.snapshots,
                  cfg.hawkes.tick_size);
  save_run_config((fs::path(out_dir) / "config.json").string(), cfg);
  write_norm_matrix_csv((fs::path(out_dir) / "kernel_norms.csv").string(),
                        kernel_norm_matrix(cfg.hawkes));
  const MetricReport rep =
      build_report(out.rows, out.horizon, cfg.hawkes.tick_size, cfg.init.s0);
  write_metric_report((fs::path(out_dir) / "report").string(), rep);

  SimulateSummary s;
  s.mean_spread = rep.mean_spread_ticks;
  s.events = out.diag.events;
  s.counts = out.diag.counts;
  s.stability_warning = out.diag.stability_warning;
  return s;
}

ErgodicityResult cmd_ergodicity(const RunConfig& cfg, const std::vector<std::int64_t>& s0_list,
                                const std::vector<double>& m0_list, const std::string& out_dir,
                                int jobs, int seeds_per_init) {
  if (s0_list.size() + m0_list.size() < 2) {
    throw DomainError("ergodicity study needs at least two initializations");
  }
  ensure_dir(out_dir);
  ErgodicityResult res;
  res.spread_means.resize(s0_list.size());
  std::vector<std::vector<std::pair<double, double>>> trajectories(s0_list.size());
  std::vector<std::vector<double>> m_deep_samples(m0_list.size());
  std::vector<double> spread_acc(s0_list.size() * seeds_per_init, 0.0);
  std::vector<std::vector<double>> md_acc(m0_list.size() * seeds_per_init);
  const double burn_frac = 0.3;
  // m_deep decorrelates over hundreds of seconds; sample sparsely and pool
  // independent seeds so the KS comparison sees roughly independent draws.
  const double md_step = 1000.0;

  const std::size_t n_tasks = (s0_list.size() + m0_list.size()) *
                              static_cast<std::size_t>(seeds_per_init);
  parallel_for(n_tasks, jobs, [&](std::size_t task) {
    const std::size_t idx = task / seeds_per_init;
    const int seed_idx = static_cast<int>(task % seeds_per_init);
    if (idx < s0_list.size()) {
      RunConfig c = cfg;
      c.init.s0 = s0_list[idx];
      const std::uint64_t seed = cfg.seed + 101 * idx + seed_idx;
      RunOutput out = simulate_to_rows(c, seed);
      const double t0 = burn_frac * out.horizon;
      std::int64_t s_at = 0;
      const auto rows = window_rows(out.rows, t0, out.horizon, &s_at);
      const WeightedSeries s = spread_series(rows, out.horizon - t0, s_at);
      spread_acc[idx * seeds_per_init + seed_idx] = time_weighted_mean(s);
      if (seed_idx == 0) {
        auto& traj = trajectories[idx];
        double next_t = 0.0;
        for (const LogRow& r : out.rows) {
          if (r.time >= next_t) {
            traj.emplace_back(r.time, static_cast<double>(r.spread()));
            next_t += out.horizon / 2000.0;
          }
        }
      }
    } else {
      const std::size_t k = idx - s0_list.size();
      RunConfig c = cfg;
      c.init.m0_top = m0_list[k];
      c.init.m0_deep = m0_list[k];
      const std::uint64_t seed = cfg.seed + 7001 * (k + 1) + seed_idx;
      RunOutput out = simulate_to_rows(c, seed);
      md_acc[k * seeds_per_init + seed_idx] =
          sample_m_deep(out.rows, burn_frac * out.horizon, out.horizon, md_step, Side::Ask);
    }
  });

  for (std::size_t i = 0; i < s0_list.size(); ++i) {
    double acc = 0.0;
    for (int s = 0; s < seeds_per_init; ++s) acc += spread_acc[i * seeds_per_init + s];
    res.spread_means[i] = {s0_list[i], acc / seeds_per_init};
  }
  for (std::size_t k = 0; k < m0_list.size(); ++k) {
    for (int s = 0; s < seeds_per_init; ++s) {
      const auto& v = md_acc[k * seeds_per_init + s];
      m_deep_samples[k].insert(m_deep_samples[k].end(), v.begin(), v.end());
    }
  }

  for (std::size_t a = 0; a < m0_list.size(); ++a) {
    for (std::size_t b = a + 1; b < m0_list.size(); ++b) {
      const double stat = ks_two_sample(m_deep_samples[a], m_deep_samples[b]);
      const double crit =
          ks_two_sample_critical(0.01, m_deep_samples[a].size(), m_deep_samples[b].size());
      res.ks_pairs.push_back({m0_list[a], m0_list[b], stat, crit, stat < crit});
    }
  }

  {
    std::ofstream out(fs::path(out_dir) / "ergodicity_spread.csv");
    out << "s0,long_run_mean_spread\n";
    for (const auto& [s0, m] : res.spread_means) out << s0 << ',' << m << '\n';
  }
  {
    std::ofstream out(fs::path(out_dir) / "spread_trajectories.csv");
    out << "s0,time,spread\n";
    for (std::size_t i = 0; i < trajectories.size(); ++i) {
      for (const auto& [t, s] : trajectories[i]) {
        out << s0_list[i] << ',' << t << ',' << s << '\n';
      }
    }
  }
  {
    std::ofstream out(fs::path(out_dir) / "ergodicity_ks.csv");
    out << "m0_a,m0_b,ks_stat,ks_critical_1pct,pass\n";
    for (const auto& e : res.ks_pairs) {
      out << e.m0_a << ',' << e.m0_b << ',' << e.stat << ',' << e.critical << ','
          << (e.pass ? 1 : 0) << '\n';
    }
  }
  return res;
}

namespace {

std::string regime_label(double mean_spread) {
  if (mean_spread < 2.0) return "large";
  if (mean_spread < 10.0) return "medium";
  return "small";
}

}  // namespace

PhaseDiagramResult cmd_phase_diagram(const RunConfig& cfg, const std::vector<double>& alpha_grid,
                                     const std::vector<double>& beta_grid,
                                     const std::string& out_dir, int jobs, int seeds_per_cell) {
  if (alpha_grid.empty() || beta_grid.empty()) throw DomainError("phase diagram: empty grid");
  ensure_dir(out_dir);
  PhaseDiagramResult res;
  res.alpha_grid = alpha_grid;
  res.beta_grid = beta_grid;
  const std::size_t n_cells = alpha_grid.size() * beta_grid.size();
  res.cells.resize(n_cells);
  std::vector<double> per_seed(n_cells * seeds_per_cell, -1.0);

  parallel_for(per_seed.size(), jobs, [&](std::size_t task) {
    const std::size_t cell = task / seeds_per_cell;
    const int seed_idx = static_cast<int>(task % seeds_per_cell);
    const double alpha = alpha_grid[cell / beta_grid.size()];
    const double beta = beta_grid[cell % beta_grid.size()];
    const PointMetrics m =
        run_point_metrics(with_critical(cfg, alpha, beta), cfg.seed + 13 * cell + seed_idx);
    per_seed[task] = m.ok ? m.mean_spread : -1.0;
  });

  for (std::size_t cell = 0; cell < n_cells; ++cell) {
    PhaseCell& pc = res.cells[cell];
    pc.alpha = alpha_grid[cell / beta_grid.size()];
    pc.beta = beta_grid[cell % beta_grid.size()];
    std::vector<double> seeds;
    for (int s = 0; s < seeds_per_cell; ++s) {
      const double v = per_seed[cell * seeds_per_cell + s];
      if (v >= 0.0) seeds.push_back(v);
    }
    if (seeds.empty()) {
      pc.regime = "failed";
    } else {
      pc.mean_spread = median(seeds);
      pc.regime = regime_label(pc.mean_spread);
    }
  }

  {
    std::ofstream out(fs::path(out_dir) / "phase_diagram.csv");
    out << "alpha,beta,mean_spread,regime\n";
    for (const PhaseCell& pc : res.cells) {
      out << pc.alpha << ',' << pc.beta << ',' << pc.mean_spread << ',' << pc.regime << '\n';
    }
  }
  {
    std::ofstream out(fs::path(out_dir) / "overlay_points.csv");
    out << "ticker,alpha,beta,eta,category\n";
    for (const ReferenceAsset& a : reference_assets()) {
      out << a.ticker << ',' << a.alpha << ',' << a.beta << ',' << a.eta << ',' << a.category
          << '\n';
    }
  }
  return res;
}

std::vector<ScalingPoint> default_scaling_grid() {
  // Co-varying (alpha up, eta down) path through the medium and small
  // regimes, following the shape of the reference asset calibrations.
  std::vector<ScalingPoint> grid;
  const int n = 12;
  const double a_lo = 0.05, a_hi = 1.6;
  const double e_hi = 0.65, e_lo = 0.04;
  for (int k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) / (n - 1);
    const double alpha = a_lo * std::pow(a_hi / a_lo, t);
    const double eta = e_hi * std::pow(e_lo / e_hi, t);
    grid.push_back({alpha, 0.45, eta});
  }
  return grid;
}

ScalingResult cmd_scaling(const RunConfig& cfg, const std::vector<ScalingPoint>& grid,
                          const std::string& out_dir, int jobs, int seeds_per_point) {
  if (grid.empty()) throw DomainError("scaling study: empty grid");
  ensure_dir(out_dir);
  ScalingResult res;
  res.grid = grid;
  res.metrics.resize(grid.size());
  std::vector<PointMetrics> per_seed(grid.size() * seeds_per_point);

  parallel_for(per_seed.size(), jobs, [&](std::size_t task) {
    const std::size_t point = task / seeds_per_point;
    const int seed_idx = static_cast<int>(task % seeds_per_point);
    const ScalingPoint& p = grid[point];
    per_seed[task] = run_point_metrics(with_critical(cfg, p.alpha, p.beta, p.eta),
                                       cfg.seed + 977 * point + seed_idx);
  });

  for (std::size_t point = 0; point < grid.size(); ++point) {
    std::vector<double> spread, iod, r_mid, arg_max, wass;
    for (int s = 0; s < seeds_per_point; ++s) {
      const PointMetrics& m = per_seed[point * seeds_per_point + s];
      if (!m.ok) continue;
      spread.push_back(m.mean_spread);
      iod.push_back(m.iod);
      if (m.r_mid > 0.0) r_mid.push_back(m.r_mid);
      arg_max.push_back(m.arg_max);
      wass.push_back(m.wasserstein);
    }
    PointMetrics& agg = res.metrics[point];
    if (spread.empty()) continue;
    agg.ok = true;
    agg.mean_spread = median(spread);
    agg.iod = median(iod);
    agg.r_mid = r_mid.empty() ? 0.0 : median(r_mid);
    agg.arg_max = median(arg_max);
    agg.wasserstein = median(wass);
  }

  // Small/medium-regime points only (the proxy is undefined at s_bar <= 1,
  // and sub-2-tick books classify large).
  std::vector<double> eps, iod, r_mid, arg_max, wass;
  for (std::size_t i = 0; i < res.metrics.size(); ++i) {
    const PointMetrics& m = res.metrics[i];
    if (!m.ok || m.mean_spread < 2.0) continue;
    if (!(m.iod > 0.0) || !(m.r_mid > 0.0) || !(m.arg_max > 0.0)) continue;
    res.used.push_back(i);
    eps.push_back(epsilon_proxy(m.mean_spread));
    iod.push_back(m.iod);
    r_mid.push_back(m.r_mid);
    arg_max.push_back(m.arg_max);
    wass.push_back(m.wasserstein);
  }
  res.usable_points = static_cast<int>(eps.size());
  if (res.usable_points < 3) {
    throw DomainError("scaling study: fewer than 3 grid points in the small/medium regime");
  }
  res.iod_fit = loglog_slope(eps, iod);
  res.r_mid_fit = loglog_slope(eps, r_mid);
  res.arg_max_fit = loglog_slope(eps, arg_max);
  res.wasserstein_spearman = spearman_rho(eps, wass);

  {
    std::ofstream out(fs::path(out_dir) / "scaling_points.csv");
    out << "alpha,beta,eta,mean_spread,eps_proxy,iod,r_mid,arg_max_ticks,wasserstein,used\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const PointMetrics& m = res.metrics[i];
      const bool used = std::find(res.used.begin(), res.used.end(), i) != res.used.end();
      out << grid[i].alpha << ',' << grid[i].beta << ',' << grid[i].eta << ',' << m.mean_spread
          << ',' << (m.mean_spread > 1.0 ? 1.0 / m.mean_spread : 0.0) << ',' << m.iod << ','
          << m.r_mid << ',' << m.arg_max << ',' << m.wasserstein << ',' << (used ? 1 : 0)
          << '\n';
    }
  }
  {
    const ReferenceSlopes sim = reference_simulated_slopes();
    const ReferenceSlopes emp = reference_empirical_slopes();
    ordered_json j;
    j["usable_points"] = res.usable_points;
    j["slopes"] = {{"iod", res.iod_fit.slope},
                   {"r_mid", res.r_mid_fit.slope},
                   {"arg_max", res.arg_max_fit.slope}};
    j["r2"] = {{"iod", res.iod_fit.r2},
               {"r_mid", res.r_mid_fit.r2},
               {"arg_max", res.arg_max_fit.r2}};
    j["wasserstein_spearman_vs_eps"] = res.wasserstein_spearman;
    j["reference_slopes_model"] = {{"iod", sim.iod}, {"r_mid", sim.r_mid}, {"arg_max", sim.arg_max}};
    j["reference_slopes_empirical"] = {
        {"iod", emp.iod}, {"r_mid", emp.r_mid}, {"arg_max", emp.arg_max}};
    std::ofstream out(fs::path(out_dir) / "scaling_slopes.json");
    out << j.dump(2) << '\n';
  }
  return res;
}

MetricReport cmd_report(const std::vector<LogRow>& rows, double horizon, double tick_size,
                        const std::string& out_dir) {
  const MetricReport rep = build_report(rows, horizon, tick_size);
  write_metric_report(out_dir, rep);
  return rep;
}

CalibrationResult cmd_calibrate(const std::vector<LogRow>& rows, double horizon, double tick_size,
                                const std::string& out_dir, bool with_kernels,
                                const HawkesSpec* known_hawkes) {
  ensure_dir(out_dir);
  std::optional<double> baseline;
  if (known_hawkes) baseline = implied_is_baseline(*known_hawkes, rows, horizon);
  const CalibrationResult r = calibrate_all(rows, horizon, tick_size, with_kernels, baseline);
  {
    std::ofstream out(fs::path(out_dir) / "calibration.json");
    out << calibration_to_json(r).dump(2) << '\n';
  }
  {
    std::ofstream out(fs::path(out_dir) / "config_fragment.json");
    out << calibration_config_fragment(r).dump(2) << '\n';
  }
  return r;
}

}  // namespace mqh

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mqh/experiments.hpp"
#include "mqh/io.hpp"

namespace {

using namespace mqh;

std::string resolve_out(const std::string& out) {
  if (!out.empty()) return out;
  const char* root = std::getenv("MQH_OUT_ROOT");
  return root ? std::string(root) : std::string("out");
}

RunConfig load_or_reference(const std::string& config_path) {
  return config_path.empty() ? reference_config() : load_run_config(config_path);
}

void apply_overrides(RunConfig& cfg, std::uint64_t seed, bool seed_set, double horizon,
                     bool horizon_set) {
  if (seed_set) cfg.seed = seed;
  if (horizon_set) cfg.horizon = horizon;
}

std::vector<double> parse_grid(const std::string& spec) {
  // "lo:hi:n" (log-spaced when lo > 0) or a comma list.
  std::vector<double> out;
  if (spec.find(':') != std::string::npos) {
    double lo, hi;
    int n;
    if (std::sscanf(spec.c_str(), "%lf:%lf:%d", &lo, &hi, &n) != 3 || n < 1) {
      throw SchemaError("bad grid spec: " + spec);
    }
    for (int k = 0; k < n; ++k) {
      const double t = n == 1 ? 0.0 : static_cast<double>(k) / (n - 1);
      out.push_back(lo > 0.0 && hi > 0.0 ? lo * std::pow(hi / lo, t) : lo + (hi - lo) * t);
    }
    return out;
  }
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) out.push_back(std::stod(tok));
  }
  if (out.empty()) throw SchemaError("bad grid spec: " + spec);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Meta-queue Hawkes limit order book simulator and analytics toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  double horizon = 0.0;
  int jobs = 0;
  app.add_option("--config", config_path, "run-config JSON (defaults to the built-in reference)")
      ->configurable(false);
  app.add_option("--out", out_dir, "output directory (default $MQH_OUT_ROOT or ./out)");
  auto* seed_opt = app.add_option("--seed", seed, "override the config seed");
  auto* horizon_opt = app.add_option("--horizon", horizon, "override the config horizon (s)");
  app.add_option("--jobs", jobs, "worker threads for sweeps (default: hardware)");

  auto* sim = app.add_subcommand("simulate", "one simulation run with full artifacts");

  auto* erg = app.add_subcommand("ergodicity", "long-run invariance across initializations");
  std::string s0_spec = "5,55,105";
  std::string m0_spec = "0.05,0.5,0.95";
  erg->add_option("--s0", s0_spec, "initial spreads, comma list");
  erg->add_option("--m0", m0_spec, "initial width parameters, comma list");

  auto* phase = app.add_subcommand("phase-diagram", "regime classification over (alpha, beta)");
  std::string alpha_spec = "0.01:3.75:5";
  std::string beta_spec = "0.2:1.0:5";
  int seeds_per_cell = 3;
  phase->add_option("--alpha-grid", alpha_spec, "alpha grid, lo:hi:n or comma list");
  phase->add_option("--beta-grid", beta_spec, "beta grid, lo:hi:n or comma list");
  phase->add_option("--seeds-per-cell", seeds_per_cell, "replications per cell");

  auto* scaling = app.add_subcommand("scaling", "scaling exponents over the default sweep");
  int seeds_per_point = 3;
  scaling->add_option("--seeds-per-point", seeds_per_point, "replications per point");

  auto* report = app.add_subcommand("report", "stylized-fact report for a log");
  std::string log_path, lobster_messages, lobster_book;
  double tick_size = 0.01;
  double report_horizon = 0.0;
  std::int64_t shape_median = 30;
  report->add_option("--log", log_path, "toolkit event-log CSV");
  report->add_option("--lobster-messages", lobster_messages, "LOBSTER message file");
  report->add_option("--lobster-book", lobster_book, "LOBSTER orderbook file");
  report->add_option("--tick", tick_size, "tick size in currency");
  report->add_option("--report-horizon", report_horizon, "duration covered by the log (s)");
  report->add_option("--shape-median", shape_median, "median LOB shape in ticks (depth budget)");

  auto* calib = app.add_subcommand("calibrate", "critical-parameter calibration for a log");
  calib->add_option("--log", log_path, "toolkit event-log CSV");
  calib->add_option("--lobster-messages", lobster_messages, "LOBSTER message file");
  calib->add_option("--lobster-book", lobster_book, "LOBSTER orderbook file");
  calib->add_option("--tick", tick_size, "tick size in currency");
  calib->add_option("--report-horizon", report_horizon, "duration covered by the log (s)");
  calib->add_option("--shape-median", shape_median, "median LOB shape in ticks (depth budget)");

  auto* dump = app.add_subcommand("dump-config", "write the built-in reference config");

  CLI11_PARSE(app, argc, argv);

  try {
    const std::string out = resolve_out(out_dir);

    auto load_rows = [&](double& horizon_out) {
      std::vector<LogRow> rows;
      if (!log_path.empty()) {
        rows = read_event_log(log_path);
      } else if (!lobster_messages.empty() && !lobster_book.empty()) {
        ClassifyOptions opts;
        opts.shape_median_ticks = shape_median;
        ClassifyStats stats;
        rows = classify_events(lobster_messages, lobster_book, tick_size, opts, &stats);
        std::cout << "classified " << stats.classified << " events, dropped fraction "
                  << stats.dropped_fraction() << "\n";
        ensure_dir(out);
        write_event_log((std::filesystem::path(out) / "classified_log.csv").string(), rows);
      } else {
        throw SchemaError("need --log or --lobster-messages/--lobster-book");
      }
      if (rows.empty()) throw SchemaError("input log is empty");
      horizon_out = report_horizon > 0.0 ? report_horizon : rows.back().time;
      return rows;
    };

    if (sim->parsed()) {
      RunConfig cfg = load_or_reference(config_path);
      apply_overrides(cfg, seed, seed_opt->count() > 0, horizon, horizon_opt->count() > 0);
      const SimulateSummary s = cmd_simulate(cfg, out);
      std::cout << "events " << s.events << ", mean spread " << s.mean_spread << " ticks\n";
      for (int i = 0; i < kEventTypeCount; ++i) {
        std::cout << "  " << event_type_name(static_cast<EventType>(i)) << ": " << s.counts[i]
                  << "\n";
      }
      if (s.stability_warning) std::cout << "warning: kernel norms near instability\n";
    } else if (erg->parsed()) {
      RunConfig cfg = load_or_reference(config_path);
      apply_overrides(cfg, seed, seed_opt->count() > 0, horizon, horizon_opt->count() > 0);
      std::vector<std::int64_t> s0s;
      for (double v : parse_grid(s0_spec)) s0s.push_back(static_cast<std::int64_t>(v));
      const auto res = cmd_ergodicity(cfg, s0s, parse_grid(m0_spec), out, jobs);
      for (const auto& [s0, m] : res.spread_means) {
        std::cout << "s0=" << s0 << " -> long-run mean spread " << m << "\n";
      }
      for (const auto& e : res.ks_pairs) {
        std::cout << "m0 " << e.m0_a << " vs " << e.m0_b << ": KS " << e.stat << " (crit "
                  << e.critical << ") " << (e.pass ? "pass" : "FAIL") << "\n";
      }
    } else if (phase->parsed()) {
      RunConfig cfg = load_or_reference(config_path);
      apply_overrides(cfg, seed, seed_opt->count() > 0, horizon, horizon_opt->count() > 0);
      const auto res = cmd_phase_diagram(cfg, parse_grid(alpha_spec), parse_grid(beta_spec), out,
                                         jobs, seeds_per_cell);
      for (const PhaseCell& c : res.cells) {
        std::cout << "alpha=" << c.alpha << " beta=" << c.beta << " s_bar=" << c.mean_spread
                  << " -> " << c.regime << "\n";
      }
    } else if (scaling->parsed()) {
      RunConfig cfg = load_or_reference(config_path);
      apply_overrides(cfg, seed, seed_opt->count() > 0, horizon, horizon_opt->count() > 0);
      const auto res = cmd_scaling(cfg, default_scaling_grid(), out, jobs, seeds_per_point);
      std::cout << "usable points " << res.usable_points << "\n"
                << "slope iod " << res.iod_fit.slope << ", r_mid " << res.r_mid_fit.slope
                << ", arg_max " << res.arg_max_fit.slope << "\n"
                << "wasserstein spearman " << res.wasserstein_spearman << "\n";
    } else if (report->parsed()) {
      double h = 0.0;
      const auto rows = load_rows(h);
      const MetricReport rep = cmd_report(rows, h, tick_size, out);
      std::cout << "mean spread " << rep.mean_spread_ticks << " ticks over " << rep.events
                << " events\n";
    } else if (calib->parsed()) {
      double h = 0.0;
      const auto rows = load_rows(h);
      // A config supplies the separately estimated Hawkes stage, which pins
      // the in-spread baseline used to split alpha out of the intercept.
      std::optional<RunConfig> known;
      if (!config_path.empty()) known = load_run_config(config_path);
      const CalibrationResult r =
          cmd_calibrate(rows, h, tick_size, out, true, known ? &known->hawkes : nullptr);
      std::cout << "alpha " << r.is_fit.alpha << ", beta " << r.is_fit.beta;
      if (r.eta.pooled) std::cout << ", eta " << *r.eta.pooled;
      std::cout << "\n";
    } else if (dump->parsed()) {
      ensure_dir(out);
      const std::string path = (std::filesystem::path(out) / "reference.json").string();
      save_run_config(path, reference_config());
      std::cout << "wrote " << path << "\n";
    }
    return 0;
  } catch (const mqh::SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const mqh::DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const mqh::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

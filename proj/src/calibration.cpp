#include "mqh/calibration.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "mqh/analytics.hpp"

namespace mqh {

using nlohmann::ordered_json;

IsPowerLawFit calibrate_is_power_law(const std::vector<LogRow>& rows, double horizon,
                                     double tick_size, double bin_width,
                                     std::optional<double> baseline_rate) {
  if (!(bin_width > 0.0)) throw DomainError("bin width must be positive");
  if (rows.empty()) throw DomainError("calibrate_is_power_law: empty log");

  // Occupancy time and in-spread arrival count per spread value, accumulated
  // over fixed-width bins tagged with the spread prevailing at the bin start.
  const std::size_t n_bins = static_cast<std::size_t>(std::ceil(horizon / bin_width));
  std::map<std::int64_t, double> time_by_spread;
  std::map<std::int64_t, double> count_by_spread;
  std::vector<std::uint32_t> is_counts(n_bins, 0);
  std::vector<std::uint32_t> all_counts(n_bins, 0);

  std::size_t row_idx = 0;
  // Spread at t=0 is unobserved from the log alone; use the first row's.
  std::int64_t spread = rows.front().spread();
  for (const LogRow& r : rows) {
    const std::size_t b =
        std::min<std::size_t>(n_bins - 1, static_cast<std::size_t>(r.time / bin_width));
    ++all_counts[b];
    if (is_in_spread(r.type)) ++is_counts[b];
  }
  for (std::size_t b = 0; b < n_bins; ++b) {
    const double t0 = static_cast<double>(b) * bin_width;
    while (row_idx < rows.size() && rows[row_idx].time <= t0) {
      spread = rows[row_idx].spread();
      ++row_idx;
    }
    time_by_spread[spread] += bin_width;
    count_by_spread[spread] += static_cast<double>(is_counts[b]);
  }

  IsPowerLawFit fit;
  std::vector<double> xs, ys, ws;
  for (const auto& [s, t] : time_by_spread) {
    if (s <= 1) continue;  // no in-spread orders can exist at a one-tick spread
    const double c = count_by_spread[s];
    fit.rate_by_spread[s] = {t, c / t};
    if (c <= 0.0) continue;
    xs.push_back(static_cast<double>(s - 1));
    ys.push_back(c / t);
    ws.push_back(t);
  }
  fit.spread_levels = xs.size();
  if (xs.size() < 3) {
    throw DomainError("calibrate_is_power_law: need in-spread arrivals at >= 3 spread levels");
  }
  const SlopeFit sf = loglog_slope(xs, ys, ws);
  fit.beta = sf.slope;
  fit.intercept = sf.intercept;
  fit.r2 = sf.r2;
  fit.beta_std_err = sf.slope_std_err;

  // Baseline in-spread rate: the mean arrival rate over bins whose trailing
  // one-second activity sits near the median, a proxy for typical Hawkes
  // excitation.
  {
    const int trail = std::max(1, static_cast<int>(std::llround(1.0 / bin_width)));
    std::vector<std::uint32_t> activity(n_bins, 0);
    std::uint64_t acc = 0;
    for (std::size_t b = 0; b < n_bins; ++b) {
      acc += all_counts[b];
      if (b >= static_cast<std::size_t>(trail)) acc -= all_counts[b - trail];
      activity[b] = static_cast<std::uint32_t>(acc);
    }
    std::vector<std::uint32_t> sorted(activity);
    std::sort(sorted.begin(), sorted.end());
    const std::uint32_t lo = sorted[static_cast<std::size_t>(0.40 * (sorted.size() - 1))];
    const std::uint32_t hi = sorted[static_cast<std::size_t>(0.60 * (sorted.size() - 1))];
    double t_sel = 0.0, c_sel = 0.0;
    for (std::size_t b = 0; b < n_bins; ++b) {
      if (activity[b] >= lo && activity[b] <= hi) {
        t_sel += bin_width;
        c_sel += static_cast<double>(is_counts[b]);
      }
    }
    fit.lambda0_activity = (t_sel > 0.0) ? c_sel / t_sel : 0.0;
  }
  fit.lambda0 = baseline_rate.value_or(fit.lambda0_activity);
  if (fit.lambda0 <= 0.0 || fit.beta <= 0.0) {
    fit.alpha = 0.0;
    return fit;
  }
  fit.alpha = tick_size * std::exp(-(fit.intercept - std::log(fit.lambda0)) / fit.beta);
  return fit;
}

double implied_is_baseline(const HawkesSpec& spec, const std::vector<LogRow>& rows,
                           double horizon) {
  if (!(horizon > 0.0)) throw DomainError("implied_is_baseline: bad horizon");
  std::array<double, kEventTypeCount> rates{};
  for (const LogRow& r : rows) rates[static_cast<int>(r.type)] += 1.0;
  for (double& v : rates) v /= horizon;
  // Total over both in-spread types, matching the both-sides bin counts the
  // power-law regression uses.
  double lam = 0.0;
  for (EventType is_type : {EventType::LoAskIs, EventType::LoBidIs}) {
    const int i = static_cast<int>(is_type);
    lam += spec.mu[i];
    for (int j = 0; j < kEventTypeCount; ++j) {
      const PowerLawKernel& k = spec.kernels[j][i];
      if (!k.null()) lam += k.norm() * rates[j];
    }
  }
  return lam;
}

namespace {

EtaFamilyFit fit_family(std::vector<std::int64_t>& samples, std::int64_t support_min,
                        std::size_t min_obs) {
  EtaFamilyFit out;
  out.observations = samples.size();
  if (samples.size() >= min_obs) out.fit = fit_geometric_mle(samples, support_min);
  return out;
}

}  // namespace

EtaCalibration calibrate_eta(const std::vector<LogRow>& rows, std::size_t min_observations) {
  std::vector<std::int64_t> is_samples, t_samples, t1_samples;
  for (const LogRow& r : rows) {
    switch (r.type) {
      case EventType::LoAskIs:
      case EventType::LoBidIs:
        is_samples.push_back(std::llabs(r.offset));
        break;
      case EventType::LoAskTop:
      case EventType::LoBidTop:
        t_samples.push_back(std::llabs(r.offset));
        break;
      default:
        break;
    }
    if (r.depleted_levels >= 1) {
      // The post-event top width on the event side realizes eta_{T+1}.
      t1_samples.push_back(r.m_top(side_of(r.type)));
    }
  }
  EtaCalibration out;
  out.eta_is = fit_family(is_samples, 1, min_observations);
  out.eta_t = fit_family(t_samples, 0, min_observations);
  out.eta_t1 = fit_family(t1_samples, 1, min_observations);
  if (out.eta_is.fit || out.eta_t1.fit) {
    std::vector<std::int64_t> pooled;
    if (out.eta_is.fit) pooled.insert(pooled.end(), is_samples.begin(), is_samples.end());
    if (out.eta_t1.fit) pooled.insert(pooled.end(), t1_samples.begin(), t1_samples.end());
    out.pooled = fit_geometric_mle(pooled, 1).p_hat;
  }
  return out;
}

KappaCalibration calibrate_kappa(const std::vector<LogRow>& rows, std::size_t min_observations) {
  std::map<std::string, std::vector<std::int64_t>> samples;
  for (const LogRow& r : rows) {
    switch (family_of(r.type)) {
      case EventFamily::InSpread:
        samples["is"].push_back(r.size);
        break;
      case EventFamily::MarketOrder:
        samples["mo"].push_back(r.size);
        break;
      case EventFamily::LimitOrder:
      case EventFamily::CancelOrder: {
        const bool top = r.type == EventType::LoAskTop || r.type == EventType::LoBidTop ||
                         r.type == EventType::CoAskTop || r.type == EventType::CoBidTop;
        samples[top ? "top" : "deep"].push_back(r.size);
        break;
      }
    }
  }
  KappaCalibration out;
  for (auto& [k, v] : samples) {
    if (v.size() >= min_observations) out.by_family[k] = fit_geometric_mle(v, 1);
  }
  return out;
}

std::optional<double> calibrate_deep_volume(const std::vector<LogRow>& rows) {
  if (rows.empty()) return std::nullopt;
  double acc = 0.0;
  std::size_t n = 0;
  for (const LogRow& r : rows) {
    for (Side sd : {Side::Bid, Side::Ask}) {
      if (r.m_deep(sd) >= 1 && r.q_deep(sd) >= 1) {
        acc += static_cast<double>(r.q_deep(sd)) / static_cast<double>(r.m_deep(sd));
        ++n;
      }
    }
  }
  if (n == 0) return std::nullopt;
  const double per_level_mean = acc / static_cast<double>(n);
  return std::min(1.0, 1.0 / std::max(1.0, per_level_mean));
}

BinnedKernelEstimate estimate_kernels_binned(const std::vector<LogRow>& rows, double horizon,
                                             double bin_width, int lag_count) {
  if (!(bin_width > 0.0) || lag_count < 1) throw DomainError("bad binning parameters");
  const std::size_t n_bins = static_cast<std::size_t>(std::floor(horizon / bin_width));
  if (n_bins <= static_cast<std::size_t>(lag_count) + 8) {
    throw DomainError("estimate_kernels_binned: log too short for the requested lags");
  }
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_bins),
                                                 kEventTypeCount);
  for (const LogRow& r : rows) {
    const auto b = static_cast<Eigen::Index>(r.time / bin_width);
    if (b >= 0 && b < counts.rows()) counts(b, static_cast<int>(r.type)) += 1.0;
  }

  const Eigen::Index rows_n = counts.rows() - lag_count;
  const Eigen::Index p = 1 + kEventTypeCount * lag_count;
  Eigen::MatrixXd design(rows_n, p);
  Eigen::MatrixXd target(rows_n, kEventTypeCount);
  for (Eigen::Index t = 0; t < rows_n; ++t) {
    design(t, 0) = 1.0;
    for (int l = 1; l <= lag_count; ++l) {
      design.block(t, 1 + (l - 1) * kEventTypeCount, 1, kEventTypeCount) =
          counts.row(t + lag_count - l);
    }
    target.row(t) = counts.row(t + lag_count);
  }

  BinnedKernelEstimate out;
  Eigen::MatrixXd gram = design.transpose() * design;
  Eigen::MatrixXd rhs = design.transpose() * target;
  Eigen::MatrixXd coef;
  {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
    if (lu.isInvertible()) coef = lu.solve(rhs);
  }
  if (coef.size() == 0 || !coef.allFinite()) {
    // Ridge fallback for a singular design.
    out.regularized = true;
    gram += 1e-6 * static_cast<double>(rows_n) * Eigen::MatrixXd::Identity(p, p);
    coef = gram.ldlt().solve(rhs);
  }

  Eigen::MatrixXd norm(kEventTypeCount, kEventTypeCount);
  for (int src = 0; src < kEventTypeCount; ++src) {
    for (int dst = 0; dst < kEventTypeCount; ++dst) {
      double acc = 0.0;
      for (int l = 1; l <= lag_count; ++l) {
        acc += coef(1 + (l - 1) * kEventTypeCount + src, dst);
      }
      acc = std::max(0.0, acc);
      out.norms[src][dst] = acc;
      norm(src, dst) = acc;
    }
  }
  for (int dst = 0; dst < kEventTypeCount; ++dst) {
    out.mu_hat[dst] = std::max(0.0, coef(0, dst) / bin_width);
  }
  Eigen::EigenSolver<Eigen::MatrixXd> es(norm, false);
  for (int i = 0; i < norm.rows(); ++i) {
    out.spectral_radius = std::max(out.spectral_radius, std::abs(es.eigenvalues()[i]));
  }
  return out;
}

CalibrationResult calibrate_all(const std::vector<LogRow>& rows, double horizon,
                                double tick_size, bool with_kernels,
                                std::optional<double> is_baseline) {
  CalibrationResult r;
  r.is_fit = calibrate_is_power_law(rows, horizon, tick_size, 0.01, is_baseline);
  r.eta = calibrate_eta(rows);
  r.kappa = calibrate_kappa(rows);
  r.q_hat_deep = calibrate_deep_volume(rows);
  if (with_kernels) r.kernels = estimate_kernels_binned(rows, horizon, 0.5, 20);
  return r;
}

namespace {

ordered_json eta_family_json(const EtaFamilyFit& f) {
  ordered_json j;
  j["observations"] = f.observations;
  if (f.fit) {
    j["p_hat"] = f.fit->p_hat;
    j["std_err"] = f.fit->std_err;
  } else {
    j["flag"] = "undersampled";
  }
  return j;
}

}  // namespace

ordered_json calibration_to_json(const CalibrationResult& r) {
  ordered_json j;
  j["alpha"] = r.is_fit.alpha;
  j["beta"] = r.is_fit.beta;
  j["is_fit"] = {{"intercept", r.is_fit.intercept},
                 {"lambda0", r.is_fit.lambda0},
                 {"r2", r.is_fit.r2},
                 {"beta_std_err", r.is_fit.beta_std_err},
                 {"spread_levels", r.is_fit.spread_levels}};
  j["eta"] = {{"is", eta_family_json(r.eta.eta_is)},
              {"t", eta_family_json(r.eta.eta_t)},
              {"t1", eta_family_json(r.eta.eta_t1)}};
  if (r.eta.pooled) j["eta"]["pooled"] = *r.eta.pooled;
  ordered_json jk;
  for (const auto& [fam, fit] : r.kappa.by_family) {
    jk[fam] = {{"p_hat", fit.p_hat}, {"std_err", fit.std_err}, {"n", fit.n}};
  }
  j["kappa"] = jk;
  if (r.q_hat_deep) j["q_hat_deep"] = *r.q_hat_deep;
  if (r.kernels) {
    j["kernel_norms"] = {{"spectral_radius", r.kernels->spectral_radius},
                         {"regularized", r.kernels->regularized}};
  }
  return j;
}

ordered_json calibration_config_fragment(const CalibrationResult& r) {
  ordered_json j;
  ordered_json jh;
  jh["is_alpha"] = r.is_fit.alpha;
  jh["is_beta"] = r.is_fit.beta;
  j["hawkes"] = jh;
  ordered_json jd;
  auto put_eta = [&](const char* key, const EtaFamilyFit& f, std::int64_t support_min) {
    if (f.fit) {
      jd[key] = {{"p", f.fit->p_hat}, {"support_min", support_min}};
    }
  };
  put_eta("eta_is", r.eta.eta_is, 1);
  put_eta("eta_t", r.eta.eta_t, 0);
  put_eta("eta_t1", r.eta.eta_t1, 1);
  auto put_kappa = [&](const char* key, const char* fam) {
    auto it = r.kappa.by_family.find(fam);
    if (it != r.kappa.by_family.end()) {
      jd[key] = {{"p", it->second.p_hat}, {"support_min", 1}};
    }
  };
  put_kappa("kappa_is", "is");
  put_kappa("kappa_t", "top");
  put_kappa("kappa_mo", "mo");
  put_kappa("kappa_d", "deep");
  if (r.q_hat_deep) jd["deep_volume"] = {{"p", *r.q_hat_deep}, {"support_min", 1}};
  j["handlers"] = jd;
  return j;
}

}  // namespace mqh

#include "mqh/hawkes.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

namespace mqh {

namespace {

// (1+x)^(-b) with fast paths for the half-integer exponents the shipped
// configs use; x >= 0.
inline double pow_neg(double one_plus_x, double b) {
  if (b == 1.5) return 1.0 / (one_plus_x * std::sqrt(one_plus_x));
  if (b == 2.0) return 1.0 / (one_plus_x * one_plus_x);
  if (b == 2.5) {
    double r = one_plus_x * one_plus_x;
    return 1.0 / (r * std::sqrt(one_plus_x));
  }
  if (b == 3.0) return 1.0 / (one_plus_x * one_plus_x * one_plus_x);
  return std::pow(one_plus_x, -b);
}

}  // namespace

double PowerLawKernel::value(double tau) const {
  if (a == 0.0 || tau < 0.0 || tau > truncation) return 0.0;
  return a * pow_neg(1.0 + c * tau, b);
}

double PowerLawKernel::integral(double tau) const {
  if (a == 0.0 || tau <= 0.0) return 0.0;
  if (b <= 1.0) throw DomainError("power-law kernel with b <= 1 has infinite norm");
  const double upto = std::min(tau, truncation);
  // a/(c(b-1)) (1 - (1+c tau)^(1-b))
  return a / (c * (b - 1.0)) * (1.0 - std::pow(1.0 + c * upto, 1.0 - b));
}

double PowerLawKernel::norm() const { return std::abs(integral(truncation)); }

double PowerLawKernel::truncated_mass_fraction() const {
  if (a == 0.0) return 0.0;
  if (b <= 1.0) throw DomainError("power-law kernel with b <= 1 has infinite norm");
  return std::pow(1.0 + c * truncation, 1.0 - b);
}

void HawkesSpec::validate() const {
  for (int i = 0; i < kEventTypeCount; ++i) {
    if (mu[i] < 0.0) throw DomainError("mu must be non-negative");
  }
  if (!(is_alpha > 0.0)) throw DomainError("is_alpha must be > 0");
  if (!(is_beta > 0.0)) throw DomainError("is_beta must be > 0");
  if (!(tick_size > 0.0)) throw DomainError("tick_size must be > 0");
  for (int j = 0; j < kEventTypeCount; ++j) {
    for (int i = 0; i < kEventTypeCount; ++i) {
      const PowerLawKernel& k = kernels[j][i];
      if (k.null()) continue;
      if (!(k.c > 0.0)) throw DomainError("kernel c must be > 0");
      if (!(k.truncation > 0.0)) throw DomainError("kernel truncation must be > 0");
      if (!(k.b > 1.0)) {
        std::ostringstream os;
        os << "kernel " << event_type_name(static_cast<EventType>(j)) << " -> "
           << event_type_name(static_cast<EventType>(i)) << " has b <= 1 (infinite norm)";
        throw DomainError(os.str());
      }
    }
  }
  if (symmetric) {
    for (int i = 0; i < kEventTypeCount; ++i) {
      int m = static_cast<int>(mirror_type(static_cast<EventType>(i)));
      if (mu[i] != mu[m]) throw DomainError("symmetric flag set but mu is not mirror-symmetric");
    }
  }
}

void HawkesSpec::reflect_ask_to_bid() {
  for (int i = 0; i < kEventTypeCount; ++i) {
    EventType t = static_cast<EventType>(i);
    if (side_of(t) == Side::Ask) {
      mu[static_cast<int>(mirror_type(t))] = mu[i];
    }
  }
  for (int j = 0; j < kEventTypeCount; ++j) {
    for (int i = 0; i < kEventTypeCount; ++i) {
      EventType js = static_cast<EventType>(j);
      EventType is = static_cast<EventType>(i);
      int mj = static_cast<int>(mirror_type(js));
      int mi = static_cast<int>(mirror_type(is));
      if (mj == j && mi == i) continue;
      // Take the pair whose source is an ask-side type as canonical; ties
      // (ask source on both) cannot happen since mirror flips the side.
      if (side_of(js) == Side::Ask) {
        kernels[mj][mi] = kernels[j][i];
      }
    }
  }
  symmetric = true;
}

double HawkesSpec::is_multiplier(std::int64_t spread_ticks) const {
  if (spread_ticks <= 1) return 0.0;
  return std::pow(tick_size * static_cast<double>(spread_ticks - 1) / is_alpha, is_beta);
}

void EventHistory::push(double t, EventType type) {
  auto& v = times[static_cast<int>(type)];
  if (!v.empty() && t <= v.back()) {
    throw DomainError("event history timestamps must be strictly increasing per type");
  }
  v.push_back(t);
}

std::size_t EventHistory::total() const {
  std::size_t n = 0;
  for (const auto& v : times) n += v.size();
  return n;
}

std::array<double, kEventTypeCount> intensity(const HawkesSpec& spec, const EventHistory& history,
                                              std::int64_t spread_ticks, double t) {
  for (const auto& v : history.times) {
    if (!v.empty() && v.back() > t) throw DomainError("intensity query earlier than last event");
  }
  if (spread_ticks < 1) throw DomainError("spread must be >= 1");
  std::array<double, kEventTypeCount> lam{};
  for (int i = 0; i < kEventTypeCount; ++i) lam[i] = spec.mu[i];
  for (int j = 0; j < kEventTypeCount; ++j) {
    for (int i = 0; i < kEventTypeCount; ++i) {
      const PowerLawKernel& k = spec.kernels[j][i];
      if (k.null()) continue;
      double acc = 0.0;
      for (double tk : history.times[j]) {
        if (tk < t) acc += k.value(t - tk);
      }
      lam[i] += acc;
    }
  }
  const double mult = spec.is_multiplier(spread_ticks);
  for (int i = 0; i < kEventTypeCount; ++i) {
    if (is_in_spread(static_cast<EventType>(i))) lam[i] *= mult;
    lam[i] = std::max(0.0, lam[i]);
  }
  return lam;
}

KernelNormMatrix kernel_norm_matrix(const HawkesSpec& spec) {
  KernelNormMatrix out;
  Eigen::MatrixXd m(kEventTypeCount, kEventTypeCount);
  for (int j = 0; j < kEventTypeCount; ++j) {
    for (int i = 0; i < kEventTypeCount; ++i) {
      const PowerLawKernel& k = spec.kernels[j][i];
      double signed_norm = 0.0;
      if (!k.null()) {
        if (k.b <= 1.0) {
          std::ostringstream os;
          os << "kernel " << event_type_name(static_cast<EventType>(j)) << " -> "
             << event_type_name(static_cast<EventType>(i)) << " has b <= 1 (infinite norm)";
          throw DomainError(os.str());
        }
        signed_norm = k.integral(k.truncation);
      }
      out.signed_norms[j][i] = signed_norm;
      out.abs_norms[j][i] = std::abs(signed_norm);
      m(j, i) = signed_norm;
    }
  }
  Eigen::EigenSolver<Eigen::MatrixXd> es(m, /*computeEigenvectors=*/false);
  double radius = 0.0;
  for (int i = 0; i < m.rows(); ++i) radius = std::max(radius, std::abs(es.eigenvalues()[i]));
  out.spectral_radius = radius;
  out.stable = radius < 1.0;
  return out;
}

double compensator(const HawkesSpec& spec, const EventHistory& history, EventType type, double t1,
                   double t2, std::int64_t spread_ticks) {
  if (t2 < t1) throw DomainError("compensator interval reversed");
  const int i = static_cast<int>(type);
  double lam = spec.mu[i] * (t2 - t1);
  for (int j = 0; j < kEventTypeCount; ++j) {
    const PowerLawKernel& k = spec.kernels[j][i];
    if (k.null()) continue;
    const auto& v = history.times[j];
    // Events already past the truncation at t1 contribute nothing.
    auto it = std::lower_bound(v.begin(), v.end(), t1 - k.truncation);
    for (; it != v.end(); ++it) {
      const double tk = *it;
      if (tk >= t2) break;
      const double hi = t2 - tk;
      const double lo = std::max(0.0, t1 - tk);
      lam += k.integral(hi) - k.integral(lo);
    }
  }
  if (is_in_spread(type)) lam *= spec.is_multiplier(spread_ticks);
  return lam;
}

HawkesSimulator::HawkesSimulator(const HawkesSpec& spec) : spec_(spec) {
  spec_.validate();
  // One group per source and distinct (b, c, truncation); amplitudes toward
  // all 12 targets share the per-event power evaluation.
  for (int j = 0; j < kEventTypeCount; ++j) {
    for (int i = 0; i < kEventTypeCount; ++i) {
      const PowerLawKernel& k = spec_.kernels[j][i];
      if (k.null()) continue;
      max_truncation_per_src_[j] = std::max(max_truncation_per_src_[j], k.truncation);
      bool placed = false;
      for (int gi : groups_of_src_[j]) {
        Group& g = groups_[gi];
        if (g.b == k.b && g.c == k.c && g.truncation == k.truncation) {
          g.amp[i] += k.a;
          placed = true;
          break;
        }
      }
      if (!placed) {
        Group g;
        g.src = j;
        g.b = k.b;
        g.c = k.c;
        g.truncation = k.truncation;
        g.amp[i] = k.a;
        groups_of_src_[j].push_back(static_cast<int>(groups_.size()));
        groups_.push_back(g);
      }
    }
  }
  sums_.assign(groups_.size(), 0.0);
}

double HawkesSimulator::group_sum(const Group& g, double t) const {
  const auto& v = history_.times[g.src];
  double acc = 0.0;
  for (std::size_t k = live_begin_[g.src]; k < v.size(); ++k) {
    const double tau = t - v[k];
    if (tau > g.truncation) continue;
    acc += pow_neg(1.0 + g.c * tau, g.b);
  }
  return acc;
}

void HawkesSimulator::rebuild_excitations() {
  pos_excite_.fill(0.0);
  neg_excite_.fill(0.0);
  for (std::size_t gi = 0; gi < groups_.size(); ++gi) {
    const Group& g = groups_[gi];
    const double s = sums_[gi];
    for (int i = 0; i < kEventTypeCount; ++i) {
      const double a = g.amp[i];
      if (a > 0.0) {
        pos_excite_[i] += a * s;
      } else if (a < 0.0) {
        neg_excite_[i] += a * s;
      }
    }
  }
}

void HawkesSimulator::refresh_at(double t) {
  // Advance the live windows, then recompute every group sum exactly.
  for (int j = 0; j < kEventTypeCount; ++j) {
    auto& v = history_.times[j];
    std::size_t b = live_begin_[j];
    const double cutoff = t - max_truncation_per_src_[j];
    while (b < v.size() && v[b] < cutoff) ++b;
    live_begin_[j] = b;
    // Reclaim memory once the dead prefix dominates.
    if (b > 1 << 16 && b > v.size() / 2) {
      v.erase(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(b));
      live_begin_[j] = 0;
    }
  }
  for (std::size_t gi = 0; gi < groups_.size(); ++gi) sums_[gi] = group_sum(groups_[gi], t);
  anchor_ = t;
  rebuild_excitations();
}

std::array<double, kEventTypeCount> HawkesSimulator::current_intensity(
    std::int64_t spread_ticks) const {
  std::array<double, kEventTypeCount> lam{};
  const double mult = spec_.is_multiplier(spread_ticks);
  for (int i = 0; i < kEventTypeCount; ++i) {
    double v = spec_.mu[i] + pos_excite_[i] + neg_excite_[i];
    if (is_in_spread(static_cast<EventType>(i))) v *= mult;
    lam[i] = std::max(0.0, v);
  }
  return lam;
}

std::optional<std::pair<double, EventType>> HawkesSimulator::next(Rng& rng, double horizon,
                                                                  std::int64_t spread_ticks) {
  if (spread_ticks < 1) throw DomainError("spread must be >= 1");
  const double mult = spec_.is_multiplier(spread_ticks);

  // Dominating rate: exogenous plus positive contributions at the anchor,
  // with the (piecewise-constant) in-spread multiplier folded in. Negative
  // kernels only lower the true intensity and are left out of the bound.
  auto bound_total = [&]() {
    double b = 0.0;
    for (int i = 0; i < kEventTypeCount; ++i) {
      double v = spec_.mu[i] + pos_excite_[i];
      if (is_in_spread(static_cast<EventType>(i))) v *= mult;
      b += v;
    }
    return b;
  };

  double bound = bound_total();
  double t = anchor_;

  while (true) {
    if (bound > kRateOverflowLimit) throw SimulationError("dominating rate overflow");
    if (bound <= 0.0) return std::nullopt;
    t += rng.exponential(bound);
    if (t > horizon) return std::nullopt;
    const double r = rng.uniform() * bound;

    // Exact evaluation at the candidate time.
    refresh_at(t);
    const std::array<double, kEventTypeCount> lam = current_intensity(spread_ticks);
    double total = 0.0;
    for (double v : lam) total += v;
    if (r <= total) {
      double acc = 0.0;
      int pick = kEventTypeCount - 1;
      for (int i = 0; i < kEventTypeCount; ++i) {
        acc += lam[i];
        if (r <= acc) {
          pick = i;
          break;
        }
      }
      const EventType type = static_cast<EventType>(pick);
      history_.push(t, type);
      // The new event contributes from now on; fold it into the anchor sums
      // so the refreshed bound dominates the post-jump intensity.
      for (int gi : groups_of_src_[pick]) sums_[gi] += 1.0;
      rebuild_excitations();
      return std::make_pair(t, type);
    }
    // Rejected, and the sums are now exact at t: the bound tightens for free.
    bound = bound_total();
  }
}

bool HawkesSimulator::stability_warning(const HawkesSpec& spec, std::int64_t spread0) {
  KernelNormMatrix nm = kernel_norm_matrix(spec);
  const double mult = spec.is_multiplier(spread0);
  Eigen::MatrixXd m(kEventTypeCount, kEventTypeCount);
  for (int j = 0; j < kEventTypeCount; ++j) {
    for (int i = 0; i < kEventTypeCount; ++i) {
      double v = nm.signed_norms[j][i];
      if (is_in_spread(static_cast<EventType>(i))) v *= mult;
      m(j, i) = v;
    }
  }
  Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
  double radius = 0.0;
  for (int i = 0; i < m.rows(); ++i) radius = std::max(radius, std::abs(es.eigenvalues()[i]));
  return radius >= 1.0;
}

}  // namespace mqh

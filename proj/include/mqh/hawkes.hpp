#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "mqh/common.hpp"
#include "mqh/lob.hpp"

namespace mqh {

// phi(t) = a (1 + c t)^(-b) on [0, truncation], 0 beyond.
struct PowerLawKernel {
  double a = 0.0;
  double b = 2.0;
  double c = 1.0;
  double truncation = 1000.0;

  bool null() const { return a == 0.0; }
  double value(double tau) const;
  // Signed integral over [0, min(tau, truncation)]; requires b > 1.
  double integral(double tau) const;
  double norm() const;  // |integral(truncation)|
  // Fraction of the b>1 infinite-support mass cut off by the truncation.
  double truncated_mass_fraction() const;
};

struct HawkesSpec {
  std::array<double, kEventTypeCount> mu{};
  // kernels[j][i] = phi^{j -> i}: impact of past type-j events on type i.
  std::array<std::array<PowerLawKernel, kEventTypeCount>, kEventTypeCount> kernels{};
  double is_alpha = 1.0;
  double is_beta = 1.0;
  double tick_size = 0.01;
  bool symmetric = false;

  void validate() const;
  // Copy every parameter involving an ask-side type onto its bid mirror.
  void reflect_ask_to_bid();
  // (delta (s-1) / alpha)^beta; zero at s = 1.
  double is_multiplier(std::int64_t spread_ticks) const;
};

struct EventHistory {
  std::array<std::vector<double>, kEventTypeCount> times;

  void push(double t, EventType type);
  std::size_t total() const;
};

// Direct O(total history) intensity evaluation at time t; the reference
// implementation the simulator's cached sums are checked against.
std::array<double, kEventTypeCount> intensity(const HawkesSpec& spec, const EventHistory& history,
                                              std::int64_t spread_ticks, double t);

struct KernelNormMatrix {
  std::array<std::array<double, kEventTypeCount>, kEventTypeCount> abs_norms{};     // [j][i]
  std::array<std::array<double, kEventTypeCount>, kEventTypeCount> signed_norms{};  // [j][i]
  double spectral_radius = 0.0;
  bool stable = false;
};

// Truncation-adjusted kernel norms plus the spectral radius of the signed
// norm matrix. Throws DomainError naming the kernel when some b <= 1.
KernelNormMatrix kernel_norm_matrix(const HawkesSpec& spec);

// Exact compensator of type i over [t1, t2] at a constant spread. Valid while
// the zero-clip never binds (e.g. non-negative kernels); used by the
// time-rescaling diagnostics.
double compensator(const HawkesSpec& spec, const EventHistory& history, EventType type, double t1,
                   double t2, std::int64_t spread_ticks);

// Exact Ogata thinning for the 12-type process. The caller supplies the
// current spread before each draw; between events the in-spread multiplier is
// constant, so the dominating rate built from the cached non-increasing
// positive contributions stays valid.
class HawkesSimulator {
 public:
  explicit HawkesSimulator(const HawkesSpec& spec);

  // Next event strictly after the current internal time, or nullopt when it
  // would land beyond `horizon`. Accepted events are recorded internally.
  std::optional<std::pair<double, EventType>> next(Rng& rng, double horizon,
                                                   std::int64_t spread_ticks);

  const EventHistory& history() const { return history_; }
  double current_time() const { return anchor_; }

  // Intensities at the current anchor time (diagnostics).
  std::array<double, kEventTypeCount> current_intensity(std::int64_t spread_ticks) const;

  // Spectral radius with the in-spread multiplier folded in at `spread0`.
  static bool stability_warning(const HawkesSpec& spec, std::int64_t spread0);

 private:
  struct Group {
    int src = 0;
    double b = 2.0;
    double c = 1.0;
    double truncation = 0.0;
    std::array<double, kEventTypeCount> amp{};  // amplitude toward each target
  };

  void refresh_at(double t);          // exact sums + per-target excitations at t
  double group_sum(const Group& g, double t) const;
  void rebuild_excitations();

  HawkesSpec spec_;
  std::vector<Group> groups_;
  std::array<std::vector<int>, kEventTypeCount> groups_of_src_;
  std::array<double, kEventTypeCount> max_truncation_per_src_{};

  EventHistory history_;
  std::array<std::size_t, kEventTypeCount> live_begin_{};

  double anchor_ = 0.0;
  std::vector<double> sums_;                          // per group, at anchor
  std::array<double, kEventTypeCount> pos_excite_{};  // positive-amplitude part
  std::array<double, kEventTypeCount> neg_excite_{};  // negative-amplitude part (<= 0)
};

inline constexpr double kRateOverflowLimit = 1e12;

}  // namespace mqh

#include "mqh/sampling.hpp"

#include <algorithm>
#include <cmath>

namespace mqh {

GeomWithSpikes::GeomWithSpikes(double p, std::int64_t support_min, std::vector<Spike> spikes)
    : p_(p), support_min_(support_min), spikes_(std::move(spikes)) {
  if (!(p_ > 0.0 && p_ <= 1.0)) throw DomainError("geometric p must be in (0,1]");
  for (const Spike& s : spikes_) {
    if (s.value < support_min_) throw DomainError("spike value below support_min");
    if (s.extra_mass < 0.0) throw DomainError("negative spike mass");
    spike_mass_ += s.extra_mass;
  }
  if (spike_mass_ >= 1.0) throw DomainError("total spike mass must be < 1");
}

double GeomWithSpikes::base_pmf(std::int64_t k) const {
  if (k < support_min_) return 0.0;
  if (p_ == 1.0) return k == support_min_ ? 1.0 : 0.0;
  return p_ * std::pow(1.0 - p_, static_cast<double>(k - support_min_));
}

double GeomWithSpikes::pmf(std::int64_t k) const {
  double m = (1.0 - spike_mass_) * base_pmf(k);
  for (const Spike& s : spikes_) {
    if (s.value == k) m += s.extra_mass;
  }
  return m;
}

double GeomWithSpikes::mean() const {
  double base = static_cast<double>(support_min_) + (1.0 - p_) / p_;
  double m = (1.0 - spike_mass_) * base;
  for (const Spike& s : spikes_) m += s.extra_mass * static_cast<double>(s.value);
  return m;
}

std::int64_t GeomWithSpikes::sample(Rng& rng) const {
  if (spike_mass_ > 0.0) {
    double u = rng.uniform();
    if (u < spike_mass_) {
      double acc = 0.0;
      for (const Spike& s : spikes_) {
        acc += s.extra_mass;
        if (u < acc) return s.value;
      }
      return spikes_.back().value;
    }
  }
  if (p_ == 1.0) return support_min_;
  double u = rng.uniform();
  double g = std::floor(std::log(u) / std::log1p(-p_));
  if (g < 0.0) g = 0.0;
  if (g > 4e18) throw SamplingError("geometric draw overflow");
  return support_min_ + static_cast<std::int64_t>(g);
}

bool GeomWithSpikes::range_has_mass(std::int64_t lo, std::int64_t hi) const {
  for (const Spike& s : spikes_) {
    if (s.value >= lo && s.value <= hi && s.extra_mass > 0.0) return true;
  }
  if (p_ == 1.0) return support_min_ >= lo && support_min_ <= hi && spike_mass_ < 1.0;
  return hi >= support_min_ && hi >= lo;
}

std::int64_t GeomWithSpikes::sample_bounded(Rng& rng, std::int64_t lo, std::int64_t hi) const {
  if (lo > hi) throw DomainError("sample_bounded: lo > hi");
  if (!range_has_mass(lo, hi)) throw SamplingError("sample_bounded: zero mass in range");
  if (lo == hi) return lo;
  for (int i = 0; i < kRejectionBudget; ++i) {
    std::int64_t k = sample(rng);
    if (k >= lo && k <= hi) return k;
  }
  throw SamplingError("sample_bounded: rejection budget exhausted");
}

std::int64_t DeepVolumeDist::sample(Rng& rng, std::int64_t m_deep) const {
  if (m_deep < 1) throw DomainError("sample_deep_volume requires m_deep >= 1");
  std::int64_t total = 0;
  for (std::int64_t i = 0; i < m_deep; ++i) total += per_level.sample(rng);
  return total;
}

GeomFit fit_geometric_mle(const std::vector<std::int64_t>& samples, std::int64_t support_min) {
  if (samples.empty()) throw DomainError("fit_geometric_mle: empty sample");
  double sum = 0.0;
  for (std::int64_t x : samples) {
    if (x < support_min) throw DomainError("fit_geometric_mle: sample below support");
    sum += static_cast<double>(x - support_min + 1);
  }
  const double n = static_cast<double>(samples.size());
  const double mean = sum / n;  // mean of the shifted samples, >= 1
  const double p = 1.0 / mean;
  // Observed information for the shifted law: n/p^2 + sum(y-1)/(1-p)^2.
  double info = n / (p * p);
  if (p < 1.0) info += (sum - n) / ((1.0 - p) * (1.0 - p));
  return GeomFit{p, 1.0 / std::sqrt(info), samples.size()};
}

}  // namespace mqh

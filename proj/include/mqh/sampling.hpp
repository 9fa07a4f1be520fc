#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "mqh/common.hpp"

namespace mqh {

inline constexpr int kRejectionBudget = 10000;
inline constexpr std::int64_t kNoUpperBound = std::numeric_limits<std::int64_t>::max();

struct Spike {
  std::int64_t value = 1;
  double extra_mass = 0.0;
};

// Geometric law on {support_min, support_min+1, ...} mixed with point spikes
// at round numbers: with probability sum(extra_mass) pick a spike value
// proportionally, otherwise draw the base geometric.
class GeomWithSpikes {
 public:
  GeomWithSpikes() = default;
  GeomWithSpikes(double p, std::int64_t support_min, std::vector<Spike> spikes = {});

  double p() const { return p_; }
  std::int64_t support_min() const { return support_min_; }
  const std::vector<Spike>& spikes() const { return spikes_; }
  double spike_mass() const { return spike_mass_; }

  double pmf(std::int64_t k) const;
  double mean() const;

  std::int64_t sample(Rng& rng) const;

  // Truncated-by-rejection draw in [lo, hi]. Throws SamplingError when the
  // range carries no mass or the rejection budget runs out.
  std::int64_t sample_bounded(Rng& rng, std::int64_t lo, std::int64_t hi) const;

 private:
  double base_pmf(std::int64_t k) const;
  bool range_has_mass(std::int64_t lo, std::int64_t hi) const;

  double p_ = 0.5;
  std::int64_t support_min_ = 1;
  std::vector<Spike> spikes_;
  double spike_mass_ = 0.0;
};

// Unseen deep volume: the sum of one per-level draw for each of the m_deep
// ticks, so wider meta-queues carry more expected volume.
struct DeepVolumeDist {
  GeomWithSpikes per_level{0.5, 1};

  std::int64_t sample(Rng& rng, std::int64_t m_deep) const;
  double mean(std::int64_t m_deep) const { return per_level.mean() * static_cast<double>(m_deep); }
};

struct GeomFit {
  double p_hat = 0.0;
  double std_err = 0.0;
  std::size_t n = 0;
};

// Closed-form geometric MLE, p_hat = 1/mean for support {1,2,...}; the
// support_min argument shifts the law (offsets start at 0). Standard error
// via observed Fisher information.
GeomFit fit_geometric_mle(const std::vector<std::int64_t>& samples, std::int64_t support_min = 1);

}  // namespace mqh

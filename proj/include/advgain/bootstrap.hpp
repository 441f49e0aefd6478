#pragma once

// "Real" gain between disjoint batches of clean data, and a percentile
// bootstrap bound on its mean.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "advgain/corpus.hpp"
#include "advgain/error.hpp"
#include "advgain/gain.hpp"
#include "advgain/random.hpp"
#include "advgain/stats.hpp"

namespace advgain {

inline constexpr std::size_t kDefaultResamples = 10000;
inline constexpr double kDefaultConfidence = 0.95;

struct RealGainSampleSet {
  std::vector<double> gains;
  std::vector<std::pair<std::string, std::string>> pairing;  // (M1 id, M2 id) per kept gain
  std::uint64_t pairing_seed = 0;
  std::string input_metric;
  std::string output_metric;
  std::size_t excluded_infinite = 0;
  std::size_t skipped_errors = 0;
};

struct BootstrapEstimate {
  double mean = 0.0;  // mean of the resample means
  double ci_low = 0.0;
  double ci_high = 0.0;
  double confidence = kDefaultConfidence;
  std::size_t n_resamples = kDefaultResamples;
  std::uint64_t seed = 0;
  std::size_t n_samples = 0;
  double sample_mean = 0.0;

  bool operator==(const BootstrapEstimate&) const = default;
};

/// Gains between aligned elements of two disjoint seeded batches M1, M2.
/// Pairs whose metrics fail are skipped and counted; infinite gains are
/// excluded and counted.
inline RealGainSampleSet real_gain_samples(const Dataset& dataset, const GainConfig& config,
                                           const FeatureSources& sources, std::size_t batch_size,
                                           std::uint64_t seed) {
  config.validate();
  const auto [m1, m2] = split_disjoint_batches(dataset, batch_size, seed);
  RealGainSampleSet set;
  set.pairing_seed = seed;
  set.input_metric = config.input_metric.name();
  set.output_metric = config.output_metric.name();
  for (std::size_t i = 0; i < batch_size; ++i) {
    GainRecord r;
    try {
      r = sample_gain(m1[i].id + "|" + m2[i].id, m1[i], m2[i], config, sources);
    } catch (const Error& e) {
      if (!is_skippable(e.kind())) throw;
      ++set.skipped_errors;
      continue;
    }
    if (!std::isfinite(r.gain)) {
      ++set.excluded_infinite;
      continue;
    }
    set.gains.push_back(r.gain);
    set.pairing.emplace_back(m1[i].id, m2[i].id);
  }
  return set;
}

/// Percentile bootstrap of the mean. Resample r draws from Rng(seed ^ r), so
/// any resample can be recomputed on its own.
inline BootstrapEstimate bootstrap_mean_ci(std::span<const double> samples,
                                           std::size_t n_resamples = kDefaultResamples,
                                           double confidence = kDefaultConfidence,
                                           std::uint64_t seed = 0) {
  if (samples.empty()) throw Error(ErrorKind::EmptyInput, "no samples to bootstrap");
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw Error(ErrorKind::InvalidConfidence, "confidence must lie in (0, 1), got " +
                                                  std::to_string(confidence));
  }
  if (n_resamples == 0) throw Error(ErrorKind::Validation, "n_resamples must be positive");
  for (double x : samples) {
    if (!std::isfinite(x)) throw Error(ErrorKind::Validation, "bootstrap samples must be finite");
  }

  const std::size_t n = samples.size();
  std::vector<double> means(n_resamples);
  for (std::size_t r = 0; r < n_resamples; ++r) {
    Rng rng(seed ^ static_cast<std::uint64_t>(r));
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += samples[uniform_below(rng, n)];
    means[r] = sum / static_cast<double>(n);
  }

  // resample means always lie in [min, max]; clamp away rounding drift
  const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
  const auto clamp = [lo = *lo_it, hi = *hi_it](double x) { return std::clamp(x, lo, hi); };

  BootstrapEstimate est;
  est.mean = clamp(mean_of(means));
  std::sort(means.begin(), means.end());
  const double tail = (1.0 - confidence) / 2.0;
  est.ci_low = clamp(quantile_sorted(means, tail));
  est.ci_high = clamp(quantile_sorted(means, 1.0 - tail));
  est.confidence = confidence;
  est.n_resamples = n_resamples;
  est.seed = seed;
  est.n_samples = n;
  est.sample_mean = clamp(mean_of(samples));
  return est;
}

/// Marks each record whose gain is strictly above the real-gain upper bound.
inline std::vector<GainRecord> flag_exceeding(std::vector<GainRecord> records,
                                              const BootstrapEstimate& estimate) {
  for (auto& r : records) r.exceeds_real = r.gain > estimate.ci_high;
  return records;
}

}  // namespace advgain

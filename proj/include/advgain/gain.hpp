#pragma once

// Adversarial gain: output displacement over input displacement, measured
// through configurable feature transforms and distances.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "advgain/corpus.hpp"
#include "advgain/embedding.hpp"
#include "advgain/error.hpp"
#include "advgain/metrics.hpp"
#include "advgain/stats.hpp"

namespace advgain {

inline constexpr double kDefaultEpsilon = 1e-4;
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class InfinitePolicy { ReportInfinity, EpsilonSmooth };

inline const char* to_string(InfinitePolicy p) {
  return p == InfinitePolicy::ReportInfinity ? "report_infinity" : "epsilon_smooth";
}

struct GainConfig {
  MetricSpec input_metric;
  MetricSpec output_metric;
  double epsilon = kDefaultEpsilon;
  InfinitePolicy infinite_policy = InfinitePolicy::EpsilonSmooth;

  void validate() const {
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
      throw Error(ErrorKind::Config, "epsilon must be a finite non-negative number");
    }
    if (infinite_policy == InfinitePolicy::EpsilonSmooth && epsilon <= 0.0) {
      throw Error(ErrorKind::Config, "epsilon_smooth needs epsilon > 0");
    }
    if (input_metric.side != Side::Input || output_metric.side != Side::Output) {
      throw Error(ErrorKind::Config, "metric specs are bound to the wrong side");
    }
  }
};

/// Non-owning handles to the vector sources a metric may need.
struct FeatureSources {
  const WordVectorTable* word_vectors = nullptr;
  const EmbeddingStore* embeddings = nullptr;
};

struct GainRecord {
  std::string pair_id;
  double d_in = 0.0;
  double d_out = 0.0;
  double gain = 0.0;
  std::optional<bool> exceeds_real;
  std::optional<std::size_t> output_overlap;  // distinct shared tokens of text outputs
  std::optional<std::string> reference_id;    // nearest reference for generated samples
  std::optional<double> target_delta;         // D(f(x), t) - D(f(x_adv), t)

  bool operator==(const GainRecord&) const = default;
};

/// One side of a distance computation. `key` addresses precomputed embeddings.
struct Operand {
  std::string key;
  std::variant<std::string_view, const Distribution*> value;

  bool is_text() const { return std::holds_alternative<std::string_view>(value); }
};

/// Data-level failures that skip a single pair instead of aborting a run.
inline bool is_skippable(ErrorKind kind) {
  return kind == ErrorKind::EmptyEncoding || kind == ErrorKind::ZeroVector ||
         kind == ErrorKind::InvalidDistribution || kind == ErrorKind::MissingEmbedding;
}

/// Key suffixes for precomputed output and target embeddings.
inline constexpr std::string_view kOutputKeySuffix = "#out";
inline constexpr std::string_view kTargetKeySuffix = "#target";

inline Operand input_operand(const Sample& s) { return {s.id, std::string_view(s.input_text)}; }

inline Operand output_operand(std::string key, const OutputValue& out) {
  if (out.is_text()) return {std::move(key), std::string_view(out.text())};
  return {std::move(key), &out.distribution()};
}

inline Operand output_operand(const Sample& s) {
  return output_operand(s.id + std::string(kOutputKeySuffix), s.output);
}

inline Operand target_operand(const AdversarialPair& p) {
  return output_operand(p.id + std::string(kTargetKeySuffix), *p.target);
}

/// phi: maps an operand to a dense vector for cosine-type metrics.
inline FeatureVector featurize(Feature feature, const Operand& op, const FeatureSources& sources) {
  switch (feature) {
    case Feature::AveragedWordVectors:
      if (!op.is_text()) throw Error(ErrorKind::Validation, "word-vector features need text");
      if (!sources.word_vectors) throw Error(ErrorKind::Config, "no word-vector table configured");
      return encode_sentence(std::get<std::string_view>(op.value), *sources.word_vectors);
    case Feature::Precomputed:
      if (!sources.embeddings) throw Error(ErrorKind::Config, "no embedding store configured");
      return lookup_embedding(op.key, *sources.embeddings);
    default:
      throw Error(ErrorKind::Config, std::string("feature ") + to_string(feature) + " is not a vector");
  }
}

namespace detail {

inline std::string class_label(const Operand& op) {
  if (op.is_text()) return std::string(std::get<std::string_view>(op.value));
  return std::get<const Distribution*>(op.value)->argmax_class();
}

inline std::vector<std::string> raw_tokens(const Operand& op) {
  if (!op.is_text()) throw Error(ErrorKind::Validation, "token metrics need text, got a distribution");
  return tokenize(std::get<std::string_view>(op.value));
}

}  // namespace detail

/// D(phi(a), phi(b)) for the configured metric.
inline double distance(const MetricSpec& spec, const Operand& a, const Operand& b,
                       const FeatureSources& sources) {
  switch (spec.kind) {
    case MetricKind::CosineEmbedding:
      return cosine_distance(featurize(spec.feature, a, sources), featurize(spec.feature, b, sources));
    case MetricKind::JsDivergence: {
      if (a.is_text() || b.is_text()) {
        throw Error(ErrorKind::Validation, "js_divergence needs class distributions");
      }
      return js_divergence(std::get<const Distribution*>(a.value)->probs,
                           std::get<const Distribution*>(b.value)->probs);
    }
    case MetricKind::StepLabel:
      return step_distance(detail::class_label(a), detail::class_label(b));
    case MetricKind::WordDistance:
      return static_cast<double>(word_distance(detail::raw_tokens(a), detail::raw_tokens(b)));
    case MetricKind::WordOverlap:
      return static_cast<double>(word_overlap(detail::raw_tokens(a), detail::raw_tokens(b)));
  }
  throw Error(ErrorKind::Config, "unknown metric");
}

/// numerator / d_in under the configured policy. Under report_infinity a zero
/// input distance gives +/-infinity for a nonzero numerator and 0 for 0/0.
inline double gain_ratio(double numerator, double d_in, const GainConfig& config) {
  if (config.infinite_policy == InfinitePolicy::EpsilonSmooth) {
    return numerator / (d_in + config.epsilon);
  }
  if (d_in > 0.0) return numerator / d_in;
  if (numerator == 0.0) return 0.0;
  return numerator > 0.0 ? kInfinity : -kInfinity;
}

/// Gain between two samples: a stands for x, b for x_adv.
inline GainRecord sample_gain(std::string record_id, const Sample& a, const Sample& b,
                              const GainConfig& config, const FeatureSources& sources) {
  GainRecord r;
  r.pair_id = std::move(record_id);
  try {
    r.d_in = distance(config.input_metric, input_operand(a), input_operand(b), sources);
    r.d_out = distance(config.output_metric, output_operand(a), output_operand(b), sources);
  } catch (const PairError&) {
    throw;
  } catch (const Error& e) {
    throw PairError(r.pair_id, e);
  }
  r.gain = gain_ratio(r.d_out, r.d_in, config);
  if (a.output.is_text() && b.output.is_text()) {
    r.output_overlap = word_overlap(tokenize(a.output.text()), tokenize(b.output.text()));
  }
  return r;
}

inline GainRecord pair_gain(const AdversarialPair& pair, const GainConfig& config,
                            const FeatureSources& sources) {
  return sample_gain(pair.id, pair.original, pair.adversarial, config, sources);
}

/// Progress toward pair.target: (D(f(x), t) - D(f(x_adv), t)) / d_in, which may
/// be negative. d_out keeps the plain output displacement; the raw difference
/// is kept in target_delta.
inline GainRecord targeted_gain(const AdversarialPair& pair, const GainConfig& config,
                                const FeatureSources& sources) {
  if (!pair.target) throw Error(ErrorKind::MissingTarget, "pair '" + pair.id + "' has no target");
  GainRecord r = pair_gain(pair, config, sources);
  double delta = 0.0;
  try {
    const auto t = target_operand(pair);
    delta = distance(config.output_metric, output_operand(pair.original), t, sources) -
            distance(config.output_metric, output_operand(pair.adversarial), t, sources);
  } catch (const Error& e) {
    throw PairError(pair.id, e);
  }
  r.target_delta = delta;
  r.gain = gain_ratio(delta, r.d_in, config);
  return r;
}

struct GainSummary {
  std::size_t count = 0;
  std::size_t finite_count = 0;
  std::size_t infinity_count = 0;
  double max = 0.0;                  // includes infinite gains
  std::optional<double> finite_mean;
  // quantiles over finite gains
  std::optional<double> min, q25, median, q75, q95, finite_max;
};

inline GainSummary aggregate_gain(std::span<const GainRecord> records) {
  if (records.empty()) throw Error(ErrorKind::EmptyInput, "no gain records to aggregate");
  GainSummary s;
  s.count = records.size();
  s.max = -kInfinity;
  std::vector<double> finite;
  for (const auto& r : records) {
    s.max = std::max(s.max, r.gain);
    if (std::isfinite(r.gain)) {
      finite.push_back(r.gain);
    } else {
      ++s.infinity_count;
    }
  }
  s.finite_count = finite.size();
  if (!finite.empty()) {
    std::sort(finite.begin(), finite.end());
    s.finite_mean = mean_of(finite);
    s.min = finite.front();
    s.q25 = quantile_sorted(finite, 0.25);
    s.median = quantile_sorted(finite, 0.5);
    s.q75 = quantile_sorted(finite, 0.75);
    s.q95 = quantile_sorted(finite, 0.95);
    s.finite_max = finite.back();
  }
  return s;
}

struct Neighbor {
  std::string id;
  double distance;

  bool operator==(const Neighbor&) const = default;
};

/// Exact cosine-distance index over labelled reference vectors.
class NeighborIndex {
 public:
  std::size_t size() const { return entries_.size(); }
  std::size_t dimension() const { return dimension_; }
  const std::vector<std::pair<std::string, FeatureVector>>& entries() const { return entries_; }

 private:
  friend NeighborIndex build_index(std::vector<std::pair<std::string, FeatureVector>>);
  std::size_t dimension_ = 0;
  std::vector<std::pair<std::string, FeatureVector>> entries_;
};

inline NeighborIndex build_index(std::vector<std::pair<std::string, FeatureVector>> references) {
  if (references.empty()) throw Error(ErrorKind::EmptyInput, "cannot index an empty reference set");
  NeighborIndex index;
  index.dimension_ = references.front().second.size();
  for (const auto& [id, vec] : references) {
    if (vec.size() != index.dimension_) throw DimensionMismatch(index.dimension_, vec.size());
    if (std::all_of(vec.values.begin(), vec.values.end(), [](double x) { return x == 0.0; })) {
      throw Error(ErrorKind::ZeroVector, "reference '" + id + "' has a zero vector");
    }
  }
  index.entries_ = std::move(references);
  return index;
}

/// The k nearest references by cosine distance, ascending; ties go to the smaller id.
inline std::vector<Neighbor> nearest_reference(const FeatureVector& query, const NeighborIndex& index,
                                               std::size_t k) {
  if (k == 0) throw Error(ErrorKind::Validation, "k must be positive");
  if (k > index.size()) {
    throw Error(ErrorKind::KTooLarge, "k = " + std::to_string(k) + " exceeds index size " +
                                          std::to_string(index.size()));
  }
  if (query.size() != index.dimension()) throw DimensionMismatch(index.dimension(), query.size());
  std::vector<Neighbor> all;
  all.reserve(index.size());
  for (const auto& [id, vec] : index.entries()) {
    all.push_back({id, cosine_distance(query, vec)});
  }
  const auto closer = [](const Neighbor& a, const Neighbor& b) {
    return a.distance != b.distance ? a.distance < b.distance : a.id < b.id;
  };
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(), closer);
  all.resize(k);
  return all;
}

/// Indexes the input features of reference samples. Needs a vector input feature.
inline NeighborIndex index_inputs(std::span<const Sample> references, const GainConfig& config,
                                  const FeatureSources& sources) {
  if (!is_vector_feature(config.input_metric.feature)) {
    throw Error(ErrorKind::Config, "nearest-reference search needs a vector input feature, got " +
                                       std::string(to_string(config.input_metric.feature)));
  }
  std::vector<std::pair<std::string, FeatureVector>> refs;
  refs.reserve(references.size());
  for (const auto& s : references) {
    try {
      refs.emplace_back(s.id, featurize(config.input_metric.feature, input_operand(s), sources));
    } catch (const Error& e) {
      throw PairError(s.id, e);
    }
  }
  return build_index(std::move(refs));
}

struct GeneratedGain {
  GainRecord record;                 // reference_id holds the nearest reference
  std::vector<Neighbor> neighbors;   // the k nearest, ascending
};

/// Gain of a from-scratch sample, with its nearest reference standing in for x.
inline GeneratedGain generated_gain(const Sample& generated, const NeighborIndex& index,
                                    std::span<const Sample> references, const GainConfig& config,
                                    const FeatureSources& sources, std::size_t k = 1) {
  FeatureVector query;
  try {
    query = featurize(config.input_metric.feature, input_operand(generated), sources);
  } catch (const Error& e) {
    throw PairError(generated.id, e);
  }
  GeneratedGain out;
  out.neighbors = nearest_reference(query, index, k);
  const auto& nearest_id = out.neighbors.front().id;
  const auto it = std::find_if(references.begin(), references.end(),
                               [&](const Sample& s) { return s.id == nearest_id; });
  if (it == references.end()) {
    throw Error(ErrorKind::Validation, "indexed reference '" + nearest_id + "' missing from dataset");
  }
  out.record = sample_gain(generated.id, *it, generated, config, sources);
  out.record.reference_id = nearest_id;
  return out;
}

}  // namespace advgain

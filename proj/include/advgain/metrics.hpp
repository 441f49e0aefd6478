#pragma once

// Distances for the input and output sides of the gain ratio.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "advgain/corpus.hpp"
#include "advgain/embedding.hpp"
#include "advgain/error.hpp"

namespace advgain {

enum class MetricKind { CosineEmbedding, JsDivergence, StepLabel, WordDistance, WordOverlap };
enum class Side { Input, Output };
enum class Feature { AveragedWordVectors, Precomputed, RawTokens, ClassDistribution, ClassLabel };

inline const char* to_string(MetricKind k) {
  switch (k) {
    case MetricKind::CosineEmbedding: return "cosine_embedding";
    case MetricKind::JsDivergence: return "js_divergence";
    case MetricKind::StepLabel: return "step_label";
    case MetricKind::WordDistance: return "word_distance";
    case MetricKind::WordOverlap: return "word_overlap";
  }
  return "?";
}

inline const char* to_string(Feature f) {
  switch (f) {
    case Feature::AveragedWordVectors: return "averaged_word_vectors";
    case Feature::Precomputed: return "precomputed";
    case Feature::RawTokens: return "raw_tokens";
    case Feature::ClassDistribution: return "class_distribution";
    case Feature::ClassLabel: return "class_label";
  }
  return "?";
}

inline const char* to_string(Side s) { return s == Side::Input ? "input" : "output"; }

/// Accepts the canonical names plus the short forms cosine/is, js, step, wd, overlap.
inline std::optional<MetricKind> parse_metric_kind(std::string_view name) {
  if (name == "cosine_embedding" || name == "cosine" || name == "is") return MetricKind::CosineEmbedding;
  if (name == "js_divergence" || name == "js" || name == "jsd") return MetricKind::JsDivergence;
  if (name == "step_label" || name == "step") return MetricKind::StepLabel;
  if (name == "word_distance" || name == "wd") return MetricKind::WordDistance;
  if (name == "word_overlap" || name == "overlap") return MetricKind::WordOverlap;
  return std::nullopt;
}

inline bool is_vector_feature(Feature f) {
  return f == Feature::AveragedWordVectors || f == Feature::Precomputed;
}

struct MetricSpec {
  MetricKind kind;
  Side side;
  Feature feature;

  std::string name() const {
    return std::string(to_string(kind)) + "[" + to_string(feature) + "]";
  }
  bool operator==(const MetricSpec&) const = default;
};

/// Builds a spec after checking kind/feature/side compatibility.
inline MetricSpec make_metric_spec(MetricKind kind, Side side, Feature feature) {
  bool ok = false;
  switch (kind) {
    case MetricKind::CosineEmbedding: ok = is_vector_feature(feature); break;
    case MetricKind::JsDivergence: ok = feature == Feature::ClassDistribution; break;
    case MetricKind::StepLabel: ok = feature == Feature::ClassLabel; break;
    case MetricKind::WordDistance:
    case MetricKind::WordOverlap: ok = feature == Feature::RawTokens; break;
  }
  if (!ok) {
    throw Error(ErrorKind::Config, std::string(to_string(kind)) + " cannot use feature " +
                                       to_string(feature));
  }
  if (side == Side::Input &&
      (feature == Feature::ClassDistribution || feature == Feature::ClassLabel)) {
    throw Error(ErrorKind::Config, std::string(to_string(kind)) +
                                       " needs a class output and cannot measure inputs");
  }
  return MetricSpec{kind, side, feature};
}

/// 1 - |u.v| / (|u| |v|), clamped to [0, 1].
inline double cosine_distance(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw DimensionMismatch(u.size(), v.size());
  double dot = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  if (uu == 0.0 || vv == 0.0) throw Error(ErrorKind::ZeroVector, "cosine distance of a zero vector");
  // sqrt(uu * vv) rather than sqrt(uu) * sqrt(vv): identical vectors give exactly 0
  const double sim = std::abs(dot) / std::sqrt(uu * vv);
  return std::clamp(1.0 - sim, 0.0, 1.0);
}

inline double cosine_distance(const FeatureVector& u, const FeatureVector& v) {
  return cosine_distance(std::span<const double>(u.values), std::span<const double>(v.values));
}

inline void check_probability_vector(std::span<const double> p) {
  double sum = 0.0;
  for (double x : p) {
    if (!std::isfinite(x) || x < 0.0) {
      throw Error(ErrorKind::InvalidDistribution, "probabilities must be finite and >= 0");
    }
    sum += x;
  }
  if (std::abs(sum - 1.0) > kDistributionTolerance) {
    throw Error(ErrorKind::InvalidDistribution, "probabilities must sum to 1");
  }
}

/// Jensen-Shannon divergence in nats, in [0, ln 2]. 0 * log(0 / x) is taken as 0.
inline double js_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) {
    throw Error(ErrorKind::InvalidDistribution, "distributions differ in length");
  }
  if (p.empty()) throw Error(ErrorKind::InvalidDistribution, "empty distribution");
  check_probability_vector(p);
  check_probability_vector(q);
  double kl_p = 0.0, kl_q = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double m = 0.5 * (p[i] + q[i]);
    if (p[i] > 0.0) kl_p += p[i] * std::log(p[i] / m);
    if (q[i] > 0.0) kl_q += q[i] * std::log(q[i] / m);
  }
  return std::clamp(0.5 * kl_p + 0.5 * kl_q, 0.0, std::numbers::ln2);
}

/// 1 if the labels differ, else 0.
inline double step_distance(std::string_view a, std::string_view b) { return a == b ? 0.0 : 1.0; }

/// Token-level Levenshtein distance (unit-cost insert, delete, substitute).
inline std::size_t word_distance(std::span<const std::string> a, std::span<const std::string> b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = a[i - 1] == b[j - 1] ? diag : 1 + std::min({diag, up, row[j - 1]});
      diag = up;
    }
  }
  return row[b.size()];
}

/// Number of distinct token types present in both lists.
inline std::size_t word_overlap(std::span<const std::string> a, std::span<const std::string> b) {
  const std::set<std::string_view> left(a.begin(), a.end());
  const std::set<std::string_view> right(b.begin(), b.end());
  std::size_t shared = 0;
  for (const auto& tok : left) shared += right.count(tok);
  return shared;
}

}  // namespace advgain

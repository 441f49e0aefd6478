#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "advgain/embedding.hpp"
#include "advgain/metrics.hpp"
#include "oracle.hpp"

using namespace advgain;

namespace {

using Vec = std::vector<double>;
using Tokens = std::vector<std::string>;

Vec random_distribution(std::mt19937_64& rng, std::size_t n, bool sparse) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vec p(n);
  double sum = 0;
  for (auto& x : p) {
    x = (sparse && u(rng) < 0.3) ? 0.0 : u(rng);
    sum += x;
  }
  if (sum == 0) {
    p[0] = sum = 1.0;
  }
  for (auto& x : p) x /= sum;
  return p;
}

Tokens random_tokens(std::mt19937_64& rng) {
  static const Tokens vocab = {"a", "b", "c", "d"};
  Tokens t(rng() % 7);
  for (auto& w : t) w = vocab[rng() % vocab.size()];
  return t;
}

}  // namespace

TEST(Cosine, Examples) {
  EXPECT_EQ(cosine_distance(Vec{3, 4}, Vec{3, 4}), 0.0);
  EXPECT_DOUBLE_EQ(cosine_distance(Vec{1, 0}, Vec{0, 1}), 1.0);
  // 1 - cos(45 deg)
  EXPECT_NEAR(cosine_distance(Vec{1, 0}, Vec{1, 1}), 0.29289321881345254, 1e-12);
  EXPECT_NEAR(cosine_distance(Vec{1, 0}, Vec{1, 1}), 0.29289, 1e-5);
}

TEST(Cosine, AbsoluteValueTreatsAntiparallelAsIdentical) {
  EXPECT_NEAR(cosine_distance(Vec{1, 2}, Vec{-1, -2}), 0.0, 1e-15);
}

TEST(Cosine, Errors) {
  try {
    cosine_distance(Vec{0, 0}, Vec{1, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ZeroVector);
  }
  EXPECT_THROW(cosine_distance(Vec{1, 0}, Vec{1, 0, 0}), DimensionMismatch);
}

TEST(Cosine, ScaleInvariantSymmetricProperty) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> scale(0.1, 10);
  for (int i = 0; i < 500; ++i) {
    Vec u(5), v(5);
    for (auto& x : u) x = g(rng);
    for (auto& x : v) x = g(rng);
    const double d = cosine_distance(u, v);
    EXPECT_GE(d, 0.0);
    EXPECT_LE(d, 1.0);
    EXPECT_EQ(d, cosine_distance(v, u));
    EXPECT_NEAR(d, oracle::cosine_distance(u, v), 1e-12);
    Vec su = u, sv = v;
    const double a = scale(rng) * (rng() % 2 ? 1 : -1), b = scale(rng);
    for (auto& x : su) x *= a;
    for (auto& x : sv) x *= b;
    EXPECT_NEAR(cosine_distance(su, sv), d, 1e-12);
  }
}

TEST(Jsd, SentimentFlipValues) {
  EXPECT_NEAR(js_divergence(Vec{0.01, 0.99}, Vec{0.99, 0.01}), 0.637, 0.005);
  EXPECT_NEAR(js_divergence(Vec{0.00, 1.00}, Vec{0.66, 0.34}), 0.314, 0.005);
  EXPECT_NEAR(js_divergence(Vec{0.98, 0.02}, Vec{0.02, 0.98}), 0.595, 0.005);
  EXPECT_EQ(js_divergence(Vec{0.5, 0.5}, Vec{0.5, 0.5}), 0.0);
}

TEST(Jsd, DisjointSupportIsLn2) {
  EXPECT_DOUBLE_EQ(js_divergence(Vec{1, 0}, Vec{0, 1}), std::numbers::ln2);
  EXPECT_DOUBLE_EQ(js_divergence(Vec{0.5, 0.5, 0, 0}, Vec{0, 0, 0.25, 0.75}), std::numbers::ln2);
}

TEST(Jsd, InvalidInputs) {
  for (const auto& [p, q] : std::vector<std::pair<Vec, Vec>>{
           {{0.7, 0.2}, {0.5, 0.5}}, {{0.5, 0.5}, {0.5, 0.5, 0.0}}, {{1.2, -0.2}, {0.5, 0.5}}, {{}, {}}}) {
    try {
      js_divergence(p, q);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::InvalidDistribution);
    }
  }
}

TEST(Jsd, BoundedSymmetricProperty) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 500; ++i) {
    const std::size_t n = 2 + rng() % 5;
    const auto p = random_distribution(rng, n, true), q = random_distribution(rng, n, true);
    const double d = js_divergence(p, q);
    EXPECT_GE(d, 0.0);
    EXPECT_LE(d, std::numbers::ln2 + 1e-12);
    EXPECT_EQ(d, js_divergence(q, p));
    EXPECT_NEAR(d, oracle::jsd(p, q), 1e-12);
    EXPECT_EQ(js_divergence(p, p), 0.0);
  }
}

TEST(Step, Examples) {
  EXPECT_EQ(step_distance("positive", "positive"), 0.0);
  EXPECT_EQ(step_distance("positive", "negative"), 1.0);
  EXPECT_EQ(step_distance("neg", "neg"), 0.0);
}

TEST(WordDistance, Examples) {
  // expected values from the full-matrix oracle
  EXPECT_EQ(oracle::levenshtein({"a", "b", "c"}, {"a", "x", "c"}), 1u);
  EXPECT_EQ(oracle::levenshtein({"a", "b"}, {"a", "b", "c"}), 1u);
  EXPECT_EQ(word_distance(Tokens{"a", "b", "c"}, Tokens{"a", "x", "c"}), 1u);
  EXPECT_EQ(word_distance(Tokens{"a", "b"}, Tokens{"a", "b", "c"}), 1u);
  EXPECT_EQ(word_distance(Tokens{"a", "b"}, Tokens{"a", "b"}), 0u);
  EXPECT_EQ(word_distance(Tokens{}, Tokens{"a", "b"}), 2u);
  EXPECT_EQ(word_distance(Tokens{"k", "i", "t", "t", "e", "n"}, Tokens{"s", "i", "t", "t", "i", "n", "g"}), 3u);
}

TEST(WordDistance, MetricProperty) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 500; ++i) {
    const auto a = random_tokens(rng), b = random_tokens(rng), c = random_tokens(rng);
    const auto ab = word_distance(a, b);
    EXPECT_EQ(ab, oracle::levenshtein(a, b));
    EXPECT_EQ(ab, word_distance(b, a));
    EXPECT_EQ(ab == 0, a == b);
    EXPECT_LE(word_distance(a, c), ab + word_distance(b, c));
    EXPECT_LE(ab, std::max(a.size(), b.size()));
    EXPECT_GE(ab, a.size() > b.size() ? a.size() - b.size() : b.size() - a.size());
  }
}

TEST(WordOverlap, SummaryOutputs) {
  EXPECT_EQ(word_overlap(tokenize("games standings"), tokenize("Scorers after third-round period")), 0u);
  EXPECT_EQ(word_overlap(tokenize("hamas pm insists on release of soldier"),
                         tokenize("haniya insists gaza truce efforts continue")),
            1u);
  EXPECT_EQ(word_overlap(Tokens{"a", "b", "a"}, Tokens{"a", "b", "a"}), 2u);
  EXPECT_EQ(word_overlap(Tokens{}, Tokens{"a"}), 0u);
}

TEST(MetricSpec, Compatibility) {
  EXPECT_NO_THROW(make_metric_spec(MetricKind::CosineEmbedding, Side::Input, Feature::Precomputed));
  EXPECT_NO_THROW(make_metric_spec(MetricKind::StepLabel, Side::Output, Feature::ClassLabel));
  EXPECT_THROW(make_metric_spec(MetricKind::CosineEmbedding, Side::Input, Feature::RawTokens), Error);
  EXPECT_THROW(make_metric_spec(MetricKind::JsDivergence, Side::Output, Feature::ClassLabel), Error);
  EXPECT_THROW(make_metric_spec(MetricKind::JsDivergence, Side::Input, Feature::ClassDistribution), Error);
  EXPECT_THROW(make_metric_spec(MetricKind::WordDistance, Side::Input, Feature::Precomputed), Error);
  EXPECT_EQ(parse_metric_kind("wd"), MetricKind::WordDistance);
  EXPECT_EQ(parse_metric_kind("is"), MetricKind::CosineEmbedding);
  EXPECT_FALSE(parse_metric_kind("bleu").has_value());
}

// Library walk-through: gains for the sentiment rows of a small hand-made
// set, then a bootstrap bound from synthetic real gains.

#include <iostream>
#include <vector>

#include "advgain/advgain.hpp"

int main() {
  using namespace advgain;

  const std::vector<std::string> classes = {"negative", "positive"};
  const auto sample = [&](std::string id, std::string text, double neg) {
    return Sample{std::move(id), std::move(text), OutputValue{Distribution{{neg, 1.0 - neg}, classes}},
                  std::nullopt};
  };
  AdversarialPair pair{"p1", sample("x", "the transporter is lively and fun", 0.01),
                       sample("x_adv", "the transporter is lively and ineffective", 0.99),
                       "word_flip", std::nullopt};

  GainConfig config;
  config.input_metric = make_metric_spec(MetricKind::WordDistance, Side::Input, Feature::RawTokens);
  config.output_metric =
      make_metric_spec(MetricKind::JsDivergence, Side::Output, Feature::ClassDistribution);

  const auto rec = pair_gain(pair, config, FeatureSources{});
  std::cout << "d_in=" << rec.d_in << " d_out=" << format_number(rec.d_out)
            << " gain=" << format_number(rec.gain) << "\n";

  std::vector<double> real;
  Rng rng(7);
  for (int i = 0; i < 200; ++i) real.push_back(static_cast<double>(uniform_below(rng, 1000)) / 1000.0);
  const auto est = bootstrap_mean_ci(real, kDefaultResamples, kDefaultConfidence, 7);
  std::cout << "real gain " << format_fixed(est.mean, 3) << " (" << format_fixed(est.ci_low, 3)
            << ", " << format_fixed(est.ci_high, 3) << ")\n";

  const auto flagged = flag_exceeding({rec}, est);
  std::cout << "exceeds real bound: " << std::boolalpha << *flagged.front().exceeds_real << "\n";
}

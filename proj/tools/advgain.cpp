// advgain: adversarial gain reports from the command line.
//
//   advgain eval      --pairs P [--real R] --in-metric M --out-metric M --seed S --out DIR
//   advgain bootstrap --real R --in-metric M --out-metric M --seed S --out DIR
//   advgain scatter   --pairs P --in-metric M --out-metric M --out DIR
//   advgain knn       --real R --generated G --k K --in-metric M --out-metric M --out DIR
//
// Every flag may also come from a key = value file given with --config;
// flags on the command line override the file.

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "advgain/cli.hpp"

namespace {

using advgain::cli::RunConfig;

template <typename T>
void copy_if_set(CLI::Option* opt, const T& value, std::optional<T>& dest) {
  if (opt->count() > 0) dest = value;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adversarial gain evaluation"};
  app.require_subcommand(1, 1);
  app.set_config("--config", "", "key = value file with default flag values");

  RunConfig cfg;
  std::string pairs, real, generated, word_vectors, embeddings;
  std::uint64_t seed = 0;
  std::size_t batch_size = 0;

  auto* pairs_opt = app.add_option("--pairs", pairs, "adversarial pairs (jsonl)");
  auto* real_opt = app.add_option("--real", real, "real, non-adversarial samples (jsonl or csv)");
  auto* gen_opt = app.add_option("--generated", generated, "generated samples for knn (jsonl or csv)");
  auto* wv_opt = app.add_option("--word-vectors", word_vectors, "GloVe-style word-vector text file");
  auto* emb_opt = app.add_option("--embeddings", embeddings, "precomputed embeddings (jsonl)");
  app.add_option("--in-metric", cfg.in_metric, "cosine | wd | overlap");
  app.add_option("--out-metric", cfg.out_metric, "cosine | js | step | wd | overlap");
  app.add_option("--epsilon", cfg.epsilon, "added to the input distance")->capture_default_str();
  app.add_option("--infinite-policy", cfg.infinite_policy, "epsilon_smooth | report_infinity")
      ->capture_default_str();
  app.add_option("--resamples", cfg.resamples, "bootstrap resamples")->capture_default_str();
  app.add_option("--confidence", cfg.confidence, "bootstrap confidence level")->capture_default_str();
  auto* seed_opt = app.add_option("--seed", seed, "master seed for all randomness");
  auto* batch_opt = app.add_option("--batch-size", batch_size, "real-gain batch size (default: half the real samples)");
  app.add_option("--k", cfg.k, "neighbours considered by knn")->capture_default_str();
  app.add_option("--out", cfg.out, "output directory")->capture_default_str();
  app.add_option("--format", cfg.formats, "csv | jsonl | markdown (repeatable)")
      ->delimiter(',')
      ->capture_default_str();

  auto* eval = app.add_subcommand("eval", "per-pair gains, summary and real-gain flags");
  auto* boot = app.add_subcommand("bootstrap", "real-gain bootstrap estimate");
  auto* scatter = app.add_subcommand("scatter", "plot-ready (d_in, d_out, gain) rows");
  auto* knn = app.add_subcommand("knn", "gain of generated samples against nearest references");
  for (auto* sub : {eval, boot, scatter, knn}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : advgain::cli::kValidationFailure;
  }

  const auto path_if = [](CLI::Option* opt, const std::string& value, auto& dest) {
    if (opt->count() > 0) dest = value;
  };
  path_if(pairs_opt, pairs, cfg.pairs);
  path_if(real_opt, real, cfg.real);
  path_if(gen_opt, generated, cfg.generated);
  path_if(wv_opt, word_vectors, cfg.word_vectors);
  path_if(emb_opt, embeddings, cfg.embeddings);
  copy_if_set(seed_opt, seed, cfg.seed);
  std::optional<std::size_t> batch;
  copy_if_set(batch_opt, batch_size, batch);
  cfg.batch_size = batch;

  using namespace advgain::cli;
  if (eval->parsed()) return run_guarded(cmd_eval, cfg);
  if (boot->parsed()) return run_guarded(cmd_bootstrap, cfg);
  if (scatter->parsed()) return run_guarded(cmd_scatter, cfg);
  return run_guarded(cmd_knn, cfg);
}

#pragma once

// Command implementations behind the advgain executable. Each command loads
// its inputs, computes every report in memory, then writes them; a failed
// write removes whatever was already written.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "advgain/bootstrap.hpp"
#include "advgain/corpus.hpp"
#include "advgain/embedding.hpp"
#include "advgain/error.hpp"
#include "advgain/gain.hpp"
#include "advgain/metrics.hpp"
#include "advgain/report.hpp"

namespace advgain::cli {

namespace fs = std::filesystem;

enum ExitCode : int { kSuccess = 0, kRuntimeFailure = 1, kValidationFailure = 2 };

struct RunConfig {
  std::optional<fs::path> pairs;
  std::optional<fs::path> real;
  std::optional<fs::path> generated;
  std::optional<fs::path> word_vectors;
  std::optional<fs::path> embeddings;
  std::string in_metric;
  std::string out_metric;
  double epsilon = kDefaultEpsilon;
  std::string infinite_policy = "epsilon_smooth";
  std::size_t resamples = kDefaultResamples;
  double confidence = kDefaultConfidence;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> batch_size;  // default: half the real samples
  std::size_t k = 1;
  fs::path out = ".";
  std::vector<std::string> formats = {"csv"};
};

/// Loaded vector sources; FeatureSources points into this.
struct Resources {
  std::optional<WordVectorTable> word_vectors;
  std::optional<EmbeddingStore> embeddings;

  FeatureSources sources() const {
    return {word_vectors ? &*word_vectors : nullptr, embeddings ? &*embeddings : nullptr};
  }
};

inline int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config:
    case ErrorKind::Validation:
    case ErrorKind::Parse:
    case ErrorKind::DimensionMismatch:
    case ErrorKind::KTooLarge:
    case ErrorKind::InvalidConfidence:
    case ErrorKind::InsufficientData:
      return kValidationFailure;
    default:
      return kRuntimeFailure;
  }
}

namespace detail {

inline void require_file(const std::optional<fs::path>& path, const char* flag) {
  if (!path) throw Error(ErrorKind::Config, std::string(flag) + " is required");
  if (!fs::is_regular_file(*path)) {
    throw Error(ErrorKind::Config, std::string(flag) + ": no such file '" + path->string() + "'");
  }
}

inline void check_optional_file(const std::optional<fs::path>& path, const char* flag) {
  if (path) require_file(path, flag);
}

inline std::uint64_t require_seed(const RunConfig& cfg) {
  if (!cfg.seed) throw Error(ErrorKind::Config, "--seed is required; runs are never time-seeded");
  return *cfg.seed;
}

inline Feature feature_for(MetricKind kind, const RunConfig& cfg) {
  switch (kind) {
    case MetricKind::CosineEmbedding:
      if (cfg.word_vectors && cfg.embeddings) {
        throw Error(ErrorKind::Config, "give exactly one of --word-vectors and --embeddings");
      }
      if (cfg.word_vectors) return Feature::AveragedWordVectors;
      if (cfg.embeddings) return Feature::Precomputed;
      throw Error(ErrorKind::Config, "cosine metric needs --word-vectors or --embeddings");
    case MetricKind::JsDivergence: return Feature::ClassDistribution;
    case MetricKind::StepLabel: return Feature::ClassLabel;
    case MetricKind::WordDistance:
    case MetricKind::WordOverlap: return Feature::RawTokens;
  }
  throw Error(ErrorKind::Config, "unknown metric");
}

inline MetricSpec metric_from_name(const std::string& name, Side side, const RunConfig& cfg) {
  const char* flag = side == Side::Input ? "--in-metric" : "--out-metric";
  if (name.empty()) throw Error(ErrorKind::Config, std::string(flag) + " is required");
  const auto kind = parse_metric_kind(name);
  if (!kind) throw Error(ErrorKind::Config, std::string(flag) + ": unknown metric '" + name + "'");
  return make_metric_spec(*kind, side, feature_for(*kind, cfg));
}

inline std::vector<ReportFormat> formats_of(const RunConfig& cfg) {
  std::vector<ReportFormat> out;
  for (const auto& name : cfg.formats) {
    const auto f = parse_report_format(name);
    if (!f) throw Error(ErrorKind::Config, "--format: unknown format '" + name + "'");
    if (std::find(out.begin(), out.end(), *f) == out.end()) out.push_back(*f);
  }
  if (out.empty()) throw Error(ErrorKind::Config, "--format needs at least one format");
  return out;
}

inline Resources load_resources(const RunConfig& cfg) {
  Resources res;
  if (cfg.word_vectors) res.word_vectors = load_word_vectors(*cfg.word_vectors);
  if (cfg.embeddings) res.embeddings = load_embedding_store(*cfg.embeddings);
  return res;
}

using OutputFile = std::pair<std::string, std::string>;  // file name, contents

inline void write_outputs(const fs::path& dir, const std::vector<OutputFile>& files) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create '" + dir.string() + "': " + ec.message());
  std::vector<fs::path> written;
  for (const auto& [name, contents] : files) {
    const auto path = dir / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (out) out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (out) out.close();
    if (!out) {
      for (const auto& p : written) fs::remove(p, ec);
      fs::remove(path, ec);
      throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
    }
    written.push_back(path);
  }
}

inline void emit(std::vector<OutputFile>& files, const std::string& stem, const Table& table,
                 const std::vector<ReportFormat>& formats) {
  for (auto f : formats) files.emplace_back(stem + extension(f), render(table, f));
}

inline std::string interval_cell(const BootstrapEstimate& est) {
  return format_fixed(est.mean, 3) + " (" + format_fixed(est.ci_low, 3) + ", " +
         format_fixed(est.ci_high, 3) + ")";
}

}  // namespace detail

/// Validated pieces shared by every command.
struct Prepared {
  GainConfig gain;
  std::vector<ReportFormat> formats;
};

inline Prepared prepare(const RunConfig& cfg) {
  detail::check_optional_file(cfg.word_vectors, "--word-vectors");
  detail::check_optional_file(cfg.embeddings, "--embeddings");
  Prepared p;
  p.gain.input_metric = detail::metric_from_name(cfg.in_metric, Side::Input, cfg);
  p.gain.output_metric = detail::metric_from_name(cfg.out_metric, Side::Output, cfg);
  p.gain.epsilon = cfg.epsilon;
  if (cfg.infinite_policy == "epsilon_smooth") {
    p.gain.infinite_policy = InfinitePolicy::EpsilonSmooth;
  } else if (cfg.infinite_policy == "report_infinity") {
    p.gain.infinite_policy = InfinitePolicy::ReportInfinity;
  } else {
    throw Error(ErrorKind::Config, "--infinite-policy: unknown policy '" + cfg.infinite_policy + "'");
  }
  p.gain.validate();
  if (!(cfg.confidence > 0.0 && cfg.confidence < 1.0)) {
    throw Error(ErrorKind::InvalidConfidence, "--confidence must lie in (0, 1)");
  }
  if (cfg.resamples == 0) throw Error(ErrorKind::Config, "--resamples must be positive");
  p.formats = detail::formats_of(cfg);
  return p;
}

struct RealGainRun {
  RealGainSampleSet samples;
  BootstrapEstimate estimate;
  std::size_t batch_size = 0;
};

inline RealGainRun run_real_gain(const RunConfig& cfg, const Prepared& prep, const Resources& res) {
  const auto seed = detail::require_seed(cfg);
  const auto real = load_dataset(*cfg.real);
  RealGainRun run;
  run.batch_size = cfg.batch_size.value_or(real.samples.size() / 2);
  if (run.batch_size == 0) {
    throw Error(ErrorKind::InsufficientData, "real dataset needs at least 2 samples");
  }
  run.samples = real_gain_samples(real, prep.gain, res.sources(), run.batch_size, seed);
  if (run.samples.gains.empty()) {
    throw Error(ErrorKind::EmptyInput, "no finite real gains (all " +
                                           std::to_string(run.batch_size) +
                                           " pairs skipped or infinite)");
  }
  run.estimate = bootstrap_mean_ci(run.samples.gains, cfg.resamples, cfg.confidence, seed);
  return run;
}

inline Table bootstrap_table(const RealGainRun& run) {
  Table t;
  t.columns = {"input_metric", "output_metric", "beta_real", "mean", "ci_low", "ci_high",
               "confidence", "n_resamples", "seed", "n_samples", "sample_mean", "batch_size",
               "excluded_infinite", "skipped"};
  const auto& e = run.estimate;
  t.add_row({run.samples.input_metric, run.samples.output_metric, detail::interval_cell(e), e.mean,
             e.ci_low, e.ci_high, e.confidence, static_cast<long long>(e.n_resamples),
             std::to_string(e.seed), static_cast<long long>(e.n_samples), e.sample_mean,
             static_cast<long long>(run.batch_size),
             static_cast<long long>(run.samples.excluded_infinite),
             static_cast<long long>(run.samples.skipped_errors)});
  return t;
}

inline Table real_gains_table(const RealGainRun& run) {
  Table t;
  t.columns = {"m1_id", "m2_id", "gain"};
  for (std::size_t i = 0; i < run.samples.gains.size(); ++i) {
    t.add_row({run.samples.pairing[i].first, run.samples.pairing[i].second, run.samples.gains[i]});
  }
  return t;
}

struct PairEvaluation {
  std::vector<GainRecord> records;
  std::vector<std::string> attacks;                               // parallel to records
  std::vector<std::pair<std::string, std::string>> skipped;       // pair id, reason
  std::vector<std::optional<double>> targeted;                    // parallel to records
};

/// Gains for every pair; failing pairs are skipped and reported.
inline PairEvaluation evaluate_pairs(const Dataset& ds, const GainConfig& config,
                                     const FeatureSources& sources) {
  PairEvaluation ev;
  for (const auto& pair : ds.pairs) {
    try {
      if (pair.target) {
        auto rec = targeted_gain(pair, config, sources);
        const double targeted = rec.gain;
        rec.gain = gain_ratio(rec.d_out, rec.d_in, config);
        ev.targeted.push_back(targeted);
        ev.records.push_back(std::move(rec));
      } else {
        ev.records.push_back(pair_gain(pair, config, sources));
        ev.targeted.push_back(std::nullopt);
      }
      ev.attacks.push_back(pair.attack_name);
    } catch (const PairError& e) {
      if (!is_skippable(e.kind())) throw;
      ev.skipped.emplace_back(pair.id, e.what());
    }
  }
  return ev;
}

inline Table gains_table(const PairEvaluation& ev) {
  const bool any_target = std::any_of(ev.targeted.begin(), ev.targeted.end(),
                                      [](const auto& t) { return t.has_value(); });
  Table t;
  t.columns = {"pair_id", "attack", "d_in", "d_out", "gain", "word_overlap", "exceeds_real"};
  if (any_target) {
    t.columns.push_back("target_delta");
    t.columns.push_back("targeted_gain");
  }
  for (std::size_t i = 0; i < ev.records.size(); ++i) {
    const auto& r = ev.records[i];
    std::vector<Cell> row = {r.pair_id, ev.attacks[i], r.d_in, r.d_out, r.gain,
                             optional_cell(r.output_overlap), optional_cell(r.exceeds_real)};
    if (any_target) {
      row.push_back(optional_cell(r.target_delta));
      row.push_back(optional_cell(ev.targeted[i]));
    }
    t.add_row(std::move(row));
  }
  return t;
}

inline Table summary_table(const GainSummary& s, const GainConfig& cfg, std::size_t skipped,
                           std::optional<std::size_t> flagged) {
  Table t;
  t.columns = {"input_metric", "output_metric", "epsilon", "infinite_policy", "count",
               "finite_count", "infinity_count", "skipped", "max", "finite_mean", "min", "q25",
               "median", "q75", "q95", "finite_max", "exceeds_real_count"};
  t.add_row({cfg.input_metric.name(), cfg.output_metric.name(), cfg.epsilon,
             std::string(to_string(cfg.infinite_policy)), static_cast<long long>(s.count),
             static_cast<long long>(s.finite_count), static_cast<long long>(s.infinity_count),
             static_cast<long long>(skipped), s.max, optional_cell(s.finite_mean),
             optional_cell(s.min), optional_cell(s.q25), optional_cell(s.median),
             optional_cell(s.q75), optional_cell(s.q95), optional_cell(s.finite_max),
             optional_cell(flagged)});
  return t;
}

inline Table skipped_table(const PairEvaluation& ev) {
  Table t;
  t.columns = {"pair_id", "error"};
  for (const auto& [id, why] : ev.skipped) t.add_row({id, why});
  return t;
}

/// eval: per-pair gains, their summary and, given --real, the real-gain bound
/// with exceeds_real flags.
inline int cmd_eval(const RunConfig& cfg) {
  detail::require_file(cfg.pairs, "--pairs");
  detail::check_optional_file(cfg.real, "--real");
  const auto prep = prepare(cfg);
  if (cfg.real) detail::require_seed(cfg);
  const auto res = detail::load_resources(cfg);
  const auto ds = load_dataset(*cfg.pairs);
  if (ds.pairs.empty()) throw Error(ErrorKind::Validation, "'" + cfg.pairs->string() + "' has no pairs");

  auto ev = evaluate_pairs(ds, prep.gain, res.sources());
  for (const auto& [id, why] : ev.skipped) std::cerr << "skipped " << why << "\n";
  if (ev.records.empty()) throw Error(ErrorKind::EmptyInput, "every pair was skipped");

  std::vector<detail::OutputFile> files;
  std::optional<std::size_t> flagged;
  if (cfg.real) {
    const auto run = run_real_gain(cfg, prep, res);
    ev.records = flag_exceeding(std::move(ev.records), run.estimate);
    flagged = static_cast<std::size_t>(std::count_if(
        ev.records.begin(), ev.records.end(), [](const GainRecord& r) { return *r.exceeds_real; }));
    detail::emit(files, "bootstrap", bootstrap_table(run), prep.formats);
  }
  detail::emit(files, "gains", gains_table(ev), prep.formats);
  detail::emit(files, "summary",
               summary_table(aggregate_gain(ev.records), prep.gain, ev.skipped.size(), flagged),
               prep.formats);
  if (!ev.skipped.empty()) detail::emit(files, "skipped", skipped_table(ev), prep.formats);
  detail::write_outputs(cfg.out, files);
  return kSuccess;
}

/// bootstrap: the real-gain estimate as "mean (low, high)" plus the gains behind it.
inline int cmd_bootstrap(const RunConfig& cfg) {
  detail::require_file(cfg.real, "--real");
  const auto prep = prepare(cfg);
  detail::require_seed(cfg);
  const auto res = detail::load_resources(cfg);
  const auto run = run_real_gain(cfg, prep, res);
  std::vector<detail::OutputFile> files;
  detail::emit(files, "bootstrap", bootstrap_table(run), prep.formats);
  detail::emit(files, "real_gains", real_gains_table(run), prep.formats);
  detail::write_outputs(cfg.out, files);
  return kSuccess;
}

/// scatter: plot-ready csv of finite-gain pairs sorted by pair id, with the
/// infinite-gain pairs listed in a sidecar file.
inline int cmd_scatter(const RunConfig& cfg) {
  detail::require_file(cfg.pairs, "--pairs");
  const auto prep = prepare(cfg);
  const auto res = detail::load_resources(cfg);
  const auto ds = load_dataset(*cfg.pairs);
  if (ds.pairs.empty()) throw Error(ErrorKind::Validation, "'" + cfg.pairs->string() + "' has no pairs");
  auto ev = evaluate_pairs(ds, prep.gain, res.sources());
  for (const auto& [id, why] : ev.skipped) std::cerr << "skipped " << why << "\n";

  auto records = ev.records;
  std::stable_sort(records.begin(), records.end(),
                   [](const GainRecord& a, const GainRecord& b) { return a.pair_id < b.pair_id; });
  Table finite, infinite;
  finite.columns = {"pair_id", "d_in", "d_out", "gain"};
  infinite.columns = {"pair_id", "d_in", "d_out", "gain"};
  for (const auto& r : records) {
    (std::isfinite(r.gain) ? finite : infinite).add_row({r.pair_id, r.d_in, r.d_out, r.gain});
  }
  std::vector<detail::OutputFile> files = {{"scatter.csv", render(finite, ReportFormat::Csv)},
                                           {"scatter_infinite.csv", render(infinite, ReportFormat::Csv)}};
  if (!ev.skipped.empty()) files.emplace_back("skipped.csv", render(skipped_table(ev), ReportFormat::Csv));
  detail::write_outputs(cfg.out, files);
  return kSuccess;
}

/// knn: gain of each generated sample against its nearest reference input.
inline int cmd_knn(const RunConfig& cfg) {
  detail::require_file(cfg.real, "--real");
  detail::require_file(cfg.generated, "--generated");
  const auto prep = prepare(cfg);
  const auto res = detail::load_resources(cfg);
  const auto refs = load_dataset(*cfg.real);
  const auto gen = load_dataset(*cfg.generated);
  if (refs.samples.empty()) throw Error(ErrorKind::Validation, "reference dataset has no samples");
  if (cfg.k == 0 || cfg.k > refs.samples.size()) {
    throw Error(ErrorKind::KTooLarge, "--k " + std::to_string(cfg.k) + " must be in [1, " +
                                          std::to_string(refs.samples.size()) + "]");
  }
  const auto index = index_inputs(refs.samples, prep.gain, res.sources());

  Table t;
  t.columns = {"generated_id", "reference_id", "d_in", "d_out", "gain", "neighbors"};
  Table skipped;
  skipped.columns = {"pair_id", "error"};
  for (const auto& s : gen.samples) {
    try {
      const auto g = generated_gain(s, index, refs.samples, prep.gain, res.sources(), cfg.k);
      std::string ids;
      for (const auto& n : g.neighbors) ids += (ids.empty() ? "" : ";") + n.id;
      t.add_row({g.record.pair_id, *g.record.reference_id, g.record.d_in, g.record.d_out,
                 g.record.gain, ids});
    } catch (const PairError& e) {
      if (!is_skippable(e.kind())) throw;
      std::cerr << "skipped " << e.what() << "\n";
      skipped.add_row({s.id, std::string(e.what())});
    }
  }
  std::vector<detail::OutputFile> files;
  detail::emit(files, "knn", t, prep.formats);
  if (!skipped.rows.empty()) detail::emit(files, "skipped", skipped, prep.formats);
  detail::write_outputs(cfg.out, files);
  return kSuccess;
}

/// Runs a command, reporting errors on stderr and mapping them to exit codes.
template <typename Command>
int run_guarded(Command&& command, const RunConfig& cfg, std::ostream& err = std::cerr) {
  try {
    return command(cfg);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntimeFailure;
  }
}

}  // namespace advgain::cli

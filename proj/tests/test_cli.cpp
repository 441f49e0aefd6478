#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "advgain/cli.hpp"
#include "cli_support.hpp"
#include "oracle.hpp"

using namespace advgain;
using namespace cli_support;

namespace {

// Frozen from tests/oracles/gain_oracle.py over data/toy: id, d_in, d_out, gain, overlap.
struct EvalRow {
  const char* id;
  double d_in, d_out, gain;
  std::size_t overlap;
};
const EvalRow kToyEval[] = {
    {"p01", 0.03722419418989187, 0.5725368665127009, 15.339564026482188, 0},
    {"p02", 0.0, 0.9119834756420516, 9119.834756420516, 1},
    {"p03", 0.24564334773688945, 0.8488111966989105, 3.4540556418548873, 0},
    {"p04", 0.031548087626542265, 0.0, 0.0, 4},
    {"p05", 0.02469650028458703, 0.4815324551467697, 19.419371670206214, 1},
    {"p06", 0.23346516861246502, 0.38030781627738997, 1.6282728222563128, 1},
    {"p07", 0.10762919498481482, 0.9740737837849838, 9.041873782889459, 1},
    {"p08", 0.04174493403117441, 0.38860505176339843, 9.286788490905215, 2},
};

struct KnnRow {
  const char* gen;
  const char* ref;
  double d_in, d_out, gain;
  const char* neighbors;
};
const KnnRow kToyKnn[] = {
    {"g01", "r01", 0, 0, 0, "r01;r11;r09"},
    {"g02", "r04", 0.581135545725439, 0.8168756696810408, 1.405412445416599, "r04;r06;r01"},
    {"g03", "r10", 0.2387546751726204, 0.6132211392387359, 2.56733990572117, "r10;r04;r03"},
    {"g04", "r10", 0.19661343677413357, 0.996326544268502, 5.064862678457926, "r10;r08;r03"},
};

void expect_rel(double got, double want) {
  EXPECT_NEAR(got, want, 1e-12 * std::max(1.0, std::abs(want)));
}

cli::RunConfig toy_config() {
  cli::RunConfig cfg;
  cfg.pairs = kToy / "pairs.jsonl";
  cfg.word_vectors = kToy / "word_vectors.txt";
  cfg.in_metric = "cosine";
  cfg.out_metric = "cosine";
  return cfg;
}

}  // namespace

TEST(ToyCorpus, EvalMatchesFrozenOracle) {
  const auto cfg = toy_config();
  const auto prep = cli::prepare(cfg);
  const auto table = load_word_vectors(*cfg.word_vectors);
  const auto ds = load_dataset(*cfg.pairs);
  const auto ev = cli::evaluate_pairs(ds, prep.gain, {&table, nullptr});
  ASSERT_EQ(ev.records.size(), std::size(kToyEval));
  EXPECT_TRUE(ev.skipped.empty());
  for (std::size_t i = 0; i < ev.records.size(); ++i) {
    const auto& r = ev.records[i];
    SCOPED_TRACE(r.pair_id);
    EXPECT_EQ(r.pair_id, kToyEval[i].id);
    expect_rel(r.d_in, kToyEval[i].d_in);
    expect_rel(r.d_out, kToyEval[i].d_out);
    expect_rel(r.gain, kToyEval[i].gain);
    EXPECT_EQ(r.output_overlap, kToyEval[i].overlap);
  }
}

TEST(ToyCorpus, KnnMatchesFrozenOracle) {
  const auto dir = fresh_dir("knn");
  const auto res = run("knn --real " + toy("real.jsonl") + " --generated " + toy("generated.jsonl") +
                           " --word-vectors " + toy("word_vectors.txt") +
                           " --in-metric cosine --out-metric cosine --k 3 --out '" + dir.string() + "'",
                       dir);
  ASSERT_EQ(res.exit_code, 0) << res.err;
  const auto rows = read_csv(dir / "knn.csv");
  ASSERT_EQ(rows.size(), std::size(kToyKnn));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    SCOPED_TRACE(kToyKnn[i].gen);
    EXPECT_EQ(rows[i].at("generated_id"), kToyKnn[i].gen);
    EXPECT_EQ(rows[i].at("reference_id"), kToyKnn[i].ref);
    EXPECT_EQ(rows[i].at("neighbors"), kToyKnn[i].neighbors);
    expect_rel(std::stod(rows[i].at("d_in")), kToyKnn[i].d_in);
    expect_rel(std::stod(rows[i].at("d_out")), kToyKnn[i].d_out);
    expect_rel(std::stod(rows[i].at("gain")), kToyKnn[i].gain);
  }
}

TEST(Cli, EvalWritesEveryFormat) {
  const auto dir = fresh_dir("eval");
  const auto res = run(toy_eval_args(dir), dir);
  ASSERT_EQ(res.exit_code, 0) << res.err;
  for (const char* stem : {"gains", "summary", "bootstrap"}) {
    for (const char* ext : {".csv", ".jsonl", ".md"}) {
      EXPECT_TRUE(fs::exists(dir / (std::string(stem) + ext))) << stem << ext;
    }
  }
  const auto gains = read_csv(dir / "gains.csv");
  ASSERT_EQ(gains.size(), 8u);
  const auto boot = read_csv(dir / "bootstrap.csv");
  ASSERT_EQ(boot.size(), 1u);
  const double ci_high = std::stod(boot[0].at("ci_high"));
  for (const auto& row : gains) {
    const bool flag = row.at("exceeds_real") == "true";
    EXPECT_EQ(flag, std::stod(row.at("gain")) > ci_high) << row.at("pair_id");
  }
}

TEST(Cli, ReportsAreByteIdenticalAcrossRuns) {
  const auto a = fresh_dir("det_a"), b = fresh_dir("det_b");
  ASSERT_EQ(run(toy_eval_args(a), a).exit_code, 0);
  ASSERT_EQ(run(toy_eval_args(b), b).exit_code, 0);
  std::size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    if (entry.path().filename() == "stderr.txt") continue;
    EXPECT_EQ(read_file(entry.path()), read_file(b / entry.path().filename())) << entry.path();
    ++compared;
  }
  EXPECT_EQ(compared, 9u);
}

TEST(Cli, ExitCodes) {
  const auto dir = fresh_dir("codes");
  // missing word-vector file: validation failure naming the path
  auto res = run("eval --pairs " + toy("pairs.jsonl") +
                     " --word-vectors /nonexistent/vectors.txt --in-metric cosine --out-metric cosine --out '" +
                     dir.string() + "'",
                 dir);
  EXPECT_EQ(res.exit_code, 2);
  EXPECT_NE(res.err.find("/nonexistent/vectors.txt"), std::string::npos) << res.err;

  // unknown metric, bad confidence, k too large, missing seed
  EXPECT_EQ(run("eval --pairs " + toy("pairs.jsonl") + " --in-metric bleu --out-metric wd --out '" +
                    dir.string() + "'",
                dir)
                .exit_code,
            2);
  EXPECT_EQ(run("bootstrap --real " + toy("real.jsonl") +
                    " --in-metric wd --out-metric wd --seed 1 --confidence 1.5 --out '" + dir.string() + "'",
                dir)
                .exit_code,
            2);
  EXPECT_EQ(run("knn --real " + toy("real.jsonl") + " --generated " + toy("generated.jsonl") +
                    " --word-vectors " + toy("word_vectors.txt") +
                    " --in-metric cosine --out-metric cosine --k 13 --out '" + dir.string() + "'",
                dir)
                .exit_code,
            2);
  EXPECT_EQ(run("bootstrap --real " + toy("real.jsonl") + " --in-metric wd --out-metric wd --out '" +
                    dir.string() + "'",
                dir)
                .exit_code,
            2);
  EXPECT_EQ(run("frobnicate", dir).exit_code, 2);

  // every pair skipped: a runtime failure, not a validation one
  const auto oov = dir / "oov.jsonl";
  std::ofstream(oov) << R"({"attack": "a", "original": {"id": "o", "input": "qqqq", "output_text": "qqqq"}, "adversarial": {"id": "v", "input": "wwww", "output_text": "wwww"}})"
                     << "\n";
  res = run("eval --pairs '" + oov.string() + "' --word-vectors " + toy("word_vectors.txt") +
                " --in-metric cosine --out-metric cosine --out '" + dir.string() + "'",
            dir);
  EXPECT_EQ(res.exit_code, 1);
  EXPECT_NE(res.err.find("skipped"), std::string::npos);

  // success
  EXPECT_EQ(run("eval --pairs " + toy("sentiment_pairs.jsonl") + " --in-metric wd --out-metric js --out '" +
                    dir.string() + "'",
                dir)
                .exit_code,
            0);
}

TEST(Cli, ScatterSortedWithInfiniteSidecar) {
  const auto dir = fresh_dir("scatter");
  const auto res = run("scatter --pairs " + toy("pairs.jsonl") + " --word-vectors " + toy("word_vectors.txt") +
                           " --in-metric cosine --out-metric cosine --infinite-policy report_infinity" +
                           " --epsilon 0 --out '" + dir.string() + "'",
                       dir);
  ASSERT_EQ(res.exit_code, 0) << res.err;
  const auto finite = read_csv(dir / "scatter.csv");
  const auto infinite = read_csv(dir / "scatter_infinite.csv");
  ASSERT_EQ(finite.size(), 7u);
  ASSERT_EQ(infinite.size(), 1u);
  EXPECT_EQ(infinite[0].at("pair_id"), "p02");
  EXPECT_EQ(infinite[0].at("gain"), "inf");
  EXPECT_TRUE(std::is_sorted(finite.begin(), finite.end(),
                             [](const auto& a, const auto& b) { return a.at("pair_id") < b.at("pair_id"); }));
}

TEST(Cli, ConfigFileWithFlagOverride) {
  const auto dir = fresh_dir("config");
  const auto conf = dir / "run.ini";
  std::ofstream(conf) << "pairs = \"" << (kToy / "sentiment_pairs.jsonl").string() << "\"\n"
                      << "in-metric = wd\nout-metric = step\nout = \"" << (dir / "out").string() << "\"\n";
  auto res = run("eval --config '" + conf.string() + "' --out-metric js", dir);
  ASSERT_EQ(res.exit_code, 0) << res.err;
  const auto summary = read_csv(dir / "out" / "summary.csv");
  ASSERT_EQ(summary.size(), 1u);
  EXPECT_NE(summary[0].at("output_metric").find("js"), std::string::npos) << summary[0].at("output_metric");
  EXPECT_NE(summary[0].at("input_metric").find("word"), std::string::npos) << summary[0].at("input_metric");
}

TEST(Cli, SixSampleBootstrapMatchesOracle) {
  const auto dir = fresh_dir("boot6");
  const auto real = dir / "real.jsonl";
  const std::vector<std::tuple<std::string, std::string, double>> samples = {
      {"a", "good film", 0.1}, {"b", "good bad film", 0.8}, {"c", "a dull film indeed", 0.4},
      {"d", "film", 0.95},     {"e", "a good one", 0.3},    {"f", "bad", 0.5}};
  {
    std::ofstream out(real);
    for (const auto& [id, input, neg] : samples) {
      out << R"({"id": ")" << id << R"(", "input": ")" << input << R"(", "output_dist": [)" << neg << ", "
          << 1 - neg << R"(], "classes": ["neg", "pos"]})" << "\n";
    }
  }
  const auto res = run("bootstrap --real '" + real.string() +
                           "' --in-metric wd --out-metric js --resamples 700 --confidence 0.9 --seed 5" +
                           " --out '" + (dir / "out").string() + "'",
                       dir);
  ASSERT_EQ(res.exit_code, 0) << res.err;

  std::map<std::string, std::pair<std::vector<std::string>, double>> by_id;
  for (const auto& [id, input, neg] : samples) {
    std::istringstream in(input);
    std::vector<std::string> words;
    for (std::string w; in >> w;) words.push_back(w);
    by_id[id] = {words, neg};
  }
  const auto gains = read_csv(dir / "out" / "real_gains.csv");
  ASSERT_EQ(gains.size(), 3u);
  std::set<std::string> used;
  std::vector<double> xs;
  for (const auto& row : gains) {
    const auto& [wx, px] = by_id.at(row.at("m1_id"));
    const auto& [wy, py] = by_id.at(row.at("m2_id"));
    used.insert(row.at("m1_id"));
    used.insert(row.at("m2_id"));
    const double d_in = static_cast<double>(oracle::levenshtein(wx, wy));
    const double g = oracle::jsd({px, 1 - px}, {py, 1 - py}) / (d_in + 1e-4);
    EXPECT_NEAR(std::stod(row.at("gain")), g, 1e-12);
    xs.push_back(std::stod(row.at("gain")));
  }
  EXPECT_EQ(used.size(), 6u);
  const auto want = oracle::bootstrap(xs, 700, 0.9, 5);
  const auto boot = read_csv(dir / "out" / "bootstrap.csv");
  ASSERT_EQ(boot.size(), 1u);
  EXPECT_NEAR(std::stod(boot[0].at("mean")), want.mean, 1e-12);
  EXPECT_NEAR(std::stod(boot[0].at("ci_low")), want.low, 1e-12);
  EXPECT_NEAR(std::stod(boot[0].at("ci_high")), want.high, 1e-12);
  EXPECT_EQ(boot[0].at("batch_size"), "3");
}

TEST(Cli, InProcessGuardMapsErrors) {
  std::ostringstream err;
  cli::RunConfig cfg;
  EXPECT_EQ(cli::run_guarded(cli::cmd_eval, cfg, err), 2);
  EXPECT_NE(err.str().find("--pairs"), std::string::npos);
  const auto thrower = [](const cli::RunConfig&) -> int { throw Error(ErrorKind::Io, "disk"); };
  EXPECT_EQ(cli::run_guarded(thrower, cfg, err), 1);
}

TEST(Report, Rendering) {
  Table t;
  t.columns = {"id", "x", "note"};
  t.add_row({std::string("a,b"), 0.1, std::monostate{}});
  t.add_row({std::string("c"), kInfinity, true});
  EXPECT_EQ(render(t, ReportFormat::Csv), "id,x,note\n\"a,b\",0.1,\nc,inf,true\n");
  EXPECT_EQ(render(t, ReportFormat::Jsonl),
            "{\"id\":\"a,b\",\"x\":0.1,\"note\":null}\n{\"id\":\"c\",\"x\":\"inf\",\"note\":true}\n");
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(-kInfinity), "-inf");
  EXPECT_EQ(format_fixed(0.4826, 3), "0.483");
}

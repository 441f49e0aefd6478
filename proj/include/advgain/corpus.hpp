#pragma once

// Datasets of samples and adversarial pairs, loaded from jsonl or csv.
//
// jsonl sample record:
//   {"id": str, "input": str, "output_text": str, "label": str?}
//   {"id": str, "input": str, "output_dist": [float...], "classes": [str...], "label": str?}
// jsonl pair record:
//   {"id": str?, "attack": str, "original": <sample>, "adversarial": <sample>,
//    "target": {"output_text": ...} | {"output_dist": [...], "classes": [...]}?}
// csv: header "id,input,output_text[,label]", RFC-4180 quoting.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "advgain/error.hpp"
#include "advgain/random.hpp"

namespace advgain {

inline constexpr double kDistributionTolerance = 1e-6;

struct Distribution {
  std::vector<double> probs;
  std::vector<std::string> classes;

  /// Name of the most probable class; the first one wins ties.
  const std::string& argmax_class() const {
    const auto it = std::max_element(probs.begin(), probs.end());
    return classes[static_cast<std::size_t>(it - probs.begin())];
  }

  bool operator==(const Distribution&) const = default;
};

/// A system output: generated text or a class distribution.
struct OutputValue {
  std::variant<std::string, Distribution> value;

  bool is_text() const { return std::holds_alternative<std::string>(value); }
  bool is_distribution() const { return std::holds_alternative<Distribution>(value); }
  const std::string& text() const { return std::get<std::string>(value); }
  const Distribution& distribution() const { return std::get<Distribution>(value); }

  bool operator==(const OutputValue&) const = default;
};

struct Sample {
  std::string id;
  std::string input_text;
  OutputValue output;
  std::optional<std::string> label;

  bool operator==(const Sample&) const = default;
};

struct AdversarialPair {
  std::string id;  // explicit "id", else the adversarial sample's id
  Sample original;
  Sample adversarial;
  std::string attack_name;
  std::optional<OutputValue> target;

  bool operator==(const AdversarialPair&) const = default;
};

struct Dataset {
  std::vector<Sample> samples;
  std::vector<AdversarialPair> pairs;
  std::map<std::string, std::string> metadata;

  bool operator==(const Dataset&) const = default;
};

enum class DataFormat { Jsonl, Csv };

inline void validate_distribution(const Distribution& d, const std::string& id) {
  if (d.probs.size() < 2) {
    throw ValidationError("distribution needs at least 2 classes", id);
  }
  if (d.probs.size() != d.classes.size()) {
    throw ValidationError("distribution length differs from class-name list length", id);
  }
  double sum = 0.0;
  for (double p : d.probs) {
    if (!std::isfinite(p) || p < 0.0) {
      throw ValidationError("distribution entries must be finite and >= 0", id);
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kDistributionTolerance) {
    throw ValidationError("distribution must sum to 1", id);
  }
}

inline void validate_output(const OutputValue& out, const std::string& id) {
  if (out.is_distribution()) validate_distribution(out.distribution(), id);
}

inline void validate_sample(const Sample& s) {
  if (s.id.empty()) throw ValidationError("sample id must be non-empty");
  validate_output(s.output, s.id);
}

inline void validate_pair(const AdversarialPair& p) {
  validate_sample(p.original);
  validate_sample(p.adversarial);
  if (p.original.id == p.adversarial.id) {
    throw ValidationError("original and adversarial sample share an id", p.id);
  }
  const auto same_shape = [](const OutputValue& a, const OutputValue& b) {
    if (a.is_text() != b.is_text()) return false;
    return a.is_text() || a.distribution().classes == b.distribution().classes;
  };
  if (!same_shape(p.original.output, p.adversarial.output)) {
    throw ValidationError("original and adversarial outputs differ in kind or class list", p.id);
  }
  if (p.target) {
    validate_output(*p.target, p.id);
    if (!same_shape(p.original.output, *p.target)) {
      throw ValidationError("target output differs in kind or class list", p.id);
    }
  }
}

/// Checks every record invariant plus id uniqueness among samples and among pairs.
inline void validate_dataset(const Dataset& ds) {
  std::unordered_set<std::string> seen;
  for (const auto& s : ds.samples) {
    validate_sample(s);
    if (!seen.insert(s.id).second) throw ValidationError("duplicate sample id", s.id);
  }
  seen.clear();
  for (const auto& p : ds.pairs) {
    validate_pair(p);
    if (!seen.insert(p.id).second) throw ValidationError("duplicate pair id", p.id);
  }
}

namespace detail {

using nlohmann::json;

inline const json& require(const json& obj, const char* key, std::size_t line) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(std::string("missing field '") + key + "'", line);
  return *it;
}

inline std::string require_string(const json& obj, const char* key, std::size_t line) {
  const auto& v = require(obj, key, line);
  if (!v.is_string()) throw ParseError(std::string("field '") + key + "' must be a string", line);
  return v.get<std::string>();
}

inline std::optional<OutputValue> output_from_json(const json& obj, std::size_t line,
                                                   const std::string& id) {
  const bool has_text = obj.contains("output_text");
  const bool has_dist = obj.contains("output_dist");
  if (has_text && has_dist) {
    throw ValidationError("record carries both output_text and output_dist", id);
  }
  if (has_text) {
    return OutputValue{require_string(obj, "output_text", line)};
  }
  if (!has_dist) return std::nullopt;
  const auto& probs = obj.at("output_dist");
  const auto& classes = require(obj, "classes", line);
  if (!probs.is_array() || !classes.is_array()) {
    throw ParseError("output_dist and classes must be arrays", line);
  }
  Distribution d;
  for (const auto& p : probs) {
    if (!p.is_number()) throw ParseError("output_dist entries must be numbers", line);
    d.probs.push_back(p.get<double>());
  }
  for (const auto& c : classes) {
    if (!c.is_string()) throw ParseError("classes entries must be strings", line);
    d.classes.push_back(c.get<std::string>());
  }
  return OutputValue{std::move(d)};
}

inline Sample sample_from_json(const json& obj, std::size_t line) {
  if (!obj.is_object()) throw ParseError("sample record must be an object", line);
  Sample s;
  s.id = require_string(obj, "id", line);
  s.input_text = require_string(obj, "input", line);
  auto out = output_from_json(obj, line, s.id);
  if (!out) throw ValidationError("record has no output_text or output_dist", s.id);
  s.output = std::move(*out);
  if (const auto it = obj.find("label"); it != obj.end() && !it->is_null()) {
    if (!it->is_string()) throw ParseError("field 'label' must be a string", line);
    s.label = it->get<std::string>();
  }
  return s;
}

inline AdversarialPair pair_from_json(const json& obj, std::size_t line) {
  AdversarialPair p;
  p.attack_name = require_string(obj, "attack", line);
  p.original = sample_from_json(require(obj, "original", line), line);
  p.adversarial = sample_from_json(require(obj, "adversarial", line), line);
  p.id = obj.contains("id") ? require_string(obj, "id", line) : p.adversarial.id;
  if (const auto it = obj.find("target"); it != obj.end() && !it->is_null()) {
    if (!it->is_object()) throw ParseError("target must be an object", line);
    p.target = output_from_json(*it, line, p.id);
    if (!p.target) throw ParseError("target has no output_text or output_dist", line);
  }
  return p;
}

inline json output_to_json(const OutputValue& out) {
  json j = json::object();
  if (out.is_text()) {
    j["output_text"] = out.text();
  } else {
    j["output_dist"] = out.distribution().probs;
    j["classes"] = out.distribution().classes;
  }
  return j;
}

inline json sample_to_json(const Sample& s) {
  json j = {{"id", s.id}, {"input", s.input_text}};
  j.update(output_to_json(s.output));
  if (s.label) j["label"] = *s.label;
  return j;
}

inline json pair_to_json(const AdversarialPair& p) {
  json j = {{"id", p.id},
            {"attack", p.attack_name},
            {"original", sample_to_json(p.original)},
            {"adversarial", sample_to_json(p.adversarial)}};
  if (p.target) j["target"] = output_to_json(*p.target);
  return j;
}

/// Splits RFC-4180 csv into records. Each record keeps the line it started on.
inline std::vector<std::pair<std::size_t, std::vector<std::string>>> read_csv_records(
    std::istream& in) {
  std::vector<std::pair<std::size_t, std::vector<std::string>>> records;
  std::vector<std::string> fields;
  std::string field;
  std::size_t line = 1;
  std::size_t record_line = 1;
  bool quoted = false;
  bool after_quote = false;
  bool any = false;
  const auto end_record = [&] {
    fields.push_back(std::move(field));
    field.clear();
    records.emplace_back(record_line, std::move(fields));
    fields.clear();
    any = false;
    after_quote = false;
  };
  char c;
  while (in.get(c)) {
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          quoted = false;
          after_quote = true;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      if (!field.empty() || after_quote) throw ParseError("stray quote in csv field", line);
      quoted = true;
      any = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      after_quote = false;
      any = true;
    } else if (c == '\r' && in.peek() == '\n') {
      // CRLF: the '\n' ends the record
    } else if (c == '\n') {
      if (any || !field.empty()) end_record();
      ++line;
      record_line = line;
    } else {
      if (after_quote) throw ParseError("text after closing quote in csv field", line);
      field.push_back(c);
      any = true;
    }
  }
  if (quoted) throw ParseError("unterminated quoted csv field", record_line);
  if (any || !field.empty()) end_record();
  return records;
}

inline std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace detail

/// Parses jsonl records. A record with an "original" key is a pair, otherwise a sample.
inline Dataset parse_jsonl(std::istream& in, const std::string& source = "<stream>") {
  Dataset ds;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.find_first_not_of(" \t") == std::string::npos) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("malformed json: ") + e.what(), line);
    }
    if (!obj.is_object()) throw ParseError("record must be a json object", line);
    try {
      if (obj.contains("original")) {
        ds.pairs.push_back(detail::pair_from_json(obj, line));
      } else {
        ds.samples.push_back(detail::sample_from_json(obj, line));
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(e.what(), line);
    }
  }
  ds.metadata["source"] = source;
  ds.metadata["format"] = "jsonl";
  validate_dataset(ds);
  return ds;
}

/// Parses csv samples (text outputs only).
inline Dataset parse_csv(std::istream& in, const std::string& source = "<stream>") {
  const auto records = detail::read_csv_records(in);
  if (records.empty()) throw ParseError("csv has no header row", 1);
  const auto& header = records.front().second;
  const bool with_label = header.size() == 4;
  const std::vector<std::string> expected = {"id", "input", "output_text", "label"};
  if (header.size() < 3 || header.size() > 4 ||
      !std::equal(header.begin(), header.end(), expected.begin())) {
    throw ParseError("csv header must be id,input,output_text[,label]", 1);
  }
  Dataset ds;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& [line, fields] = records[r];
    if (fields.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " csv fields, got " +
                           std::to_string(fields.size()),
                       line);
    }
    Sample s{fields[0], fields[1], OutputValue{fields[2]}, std::nullopt};
    if (with_label && !fields[3].empty()) s.label = fields[3];
    ds.samples.push_back(std::move(s));
  }
  ds.metadata["source"] = source;
  ds.metadata["format"] = "csv";
  validate_dataset(ds);
  return ds;
}

inline Dataset load_dataset(const std::filesystem::path& path, DataFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  try {
    return format == DataFormat::Jsonl ? parse_jsonl(in, path.string())
                                       : parse_csv(in, path.string());
  } catch (const ParseError& e) {
    throw e.with_source(path.string());
  }
}

/// Format by extension: ".csv" is csv, everything else jsonl.
inline Dataset load_dataset(const std::filesystem::path& path) {
  return load_dataset(path, path.extension() == ".csv" ? DataFormat::Csv : DataFormat::Jsonl);
}

/// Canonical jsonl: samples first, then pairs, one record per line.
inline std::string serialize_jsonl(const Dataset& ds) {
  std::string out;
  for (const auto& s : ds.samples) out += detail::sample_to_json(s).dump() + "\n";
  for (const auto& p : ds.pairs) out += detail::pair_to_json(p).dump() + "\n";
  return out;
}

/// Seeded uniform shuffle of the samples; M1 is the first block, M2 the second.
inline std::pair<std::vector<Sample>, std::vector<Sample>> split_disjoint_batches(
    const Dataset& ds, std::size_t batch_size, std::uint64_t seed) {
  if (batch_size == 0) throw Error(ErrorKind::Validation, "batch_size must be positive");
  if (ds.samples.size() / 2 < batch_size) {
    throw Error(ErrorKind::InsufficientData,
                "need " + std::to_string(2 * batch_size) + " samples, dataset has " +
                    std::to_string(ds.samples.size()));
  }
  std::vector<std::size_t> order(ds.samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  seeded_shuffle(std::span<std::size_t>(order), rng);

  std::pair<std::vector<Sample>, std::vector<Sample>> batches;
  batches.first.reserve(batch_size);
  batches.second.reserve(batch_size);
  for (std::size_t i = 0; i < batch_size; ++i) {
    batches.first.push_back(ds.samples[order[i]]);
    batches.second.push_back(ds.samples[order[batch_size + i]]);
  }
  return batches;
}

}  // namespace advgain

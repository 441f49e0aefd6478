#pragma once

// Feature transforms from text to dense vectors: a mean-of-word-vectors
// sentence encoder and a lookup over externally computed sentence embeddings.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "advgain/error.hpp"

namespace advgain {

struct FeatureVector {
  std::vector<double> values;
  std::optional<std::string> source_id;

  std::size_t size() const { return values.size(); }
  bool operator==(const FeatureVector&) const = default;
};

inline bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

class WordVectorTable {
 public:
  explicit WordVectorTable(std::size_t dimension) : dimension_(dimension) {}

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  /// Adds a token. Returns false (and keeps the old vector) if the token is already present.
  bool insert(std::string token, std::vector<double> vec) {
    if (token.empty()) throw Error(ErrorKind::Validation, "word-vector token must be non-empty");
    if (vec.size() != dimension_) throw DimensionMismatch(dimension_, vec.size());
    if (!all_finite(vec)) throw Error(ErrorKind::Validation, "non-finite entry for '" + token + "'");
    return entries_.emplace(std::move(token), std::move(vec)).second;
  }

  const std::vector<double>* find(const std::string& token) const {
    const auto it = entries_.find(token);
    return it == entries_.end() ? nullptr : &it->second;
  }

 private:
  std::size_t dimension_;
  std::unordered_map<std::string, std::vector<double>> entries_;
};

/// Sentence vectors keyed by sample id.
class EmbeddingStore {
 public:
  explicit EmbeddingStore(std::size_t dimension) : dimension_(dimension) {}

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return vectors_.size(); }

  void insert(const std::string& id, std::vector<double> values) {
    if (values.size() != dimension_) throw DimensionMismatch(dimension_, values.size());
    if (!all_finite(values)) throw ValidationError("embedding has non-finite entries", id);
    if (!vectors_.emplace(id, FeatureVector{std::move(values), id}).second) {
      throw ValidationError("duplicate embedding id", id);
    }
  }

  const FeatureVector* find(const std::string& id) const {
    const auto it = vectors_.find(id);
    return it == vectors_.end() ? nullptr : &it->second;
  }

 private:
  std::size_t dimension_;
  std::unordered_map<std::string, FeatureVector> vectors_;
};

namespace detail {

inline bool parse_double(std::string_view text, double& out) {
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc{} && ptr == end && std::isfinite(out);
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (pos < line.size()) {
    const auto start = line.find_first_not_of(" \t", pos);
    if (start == std::string_view::npos) break;
    auto stop = line.find_first_of(" \t", start);
    if (stop == std::string_view::npos) stop = line.size();
    fields.push_back(line.substr(start, stop - start));
    pos = stop;
  }
  return fields;
}

// Byte length of a Unicode whitespace code point starting at s[i], or 0.
inline std::size_t whitespace_length(std::string_view s, std::size_t i) {
  const auto b = static_cast<unsigned char>(s[i]);
  if (b == ' ' || (b >= 0x09 && b <= 0x0d)) return 1;
  const auto at = [&](std::size_t k) {
    return i + k < s.size() ? static_cast<unsigned char>(s[i + k]) : 0u;
  };
  if (b == 0xc2 && (at(1) == 0x85 || at(1) == 0xa0)) return 2;  // NEL, NBSP
  if (b == 0xe1 && at(1) == 0x9a && at(2) == 0x80) return 3;   // U+1680
  if (b == 0xe2 && at(1) == 0x80) {
    const auto c = at(2);
    if ((c >= 0x80 && c <= 0x8a) || c == 0xa8 || c == 0xa9 || c == 0xaf) return 3;
  }
  if (b == 0xe2 && at(1) == 0x81 && at(2) == 0x9f) return 3;  // U+205F
  if (b == 0xe3 && at(1) == 0x80 && at(2) == 0x80) return 3;  // U+3000
  return 0;
}

inline constexpr std::string_view kStripChars = ".,!?;:'\"()[]";

}  // namespace detail

/// Lowercases (ASCII), splits on Unicode whitespace and strips the characters
/// .,!?;:'"()[] from both ends of each token. A token made only of those
/// characters is kept unstripped.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  const auto flush = [&] {
    if (current.empty()) return;
    const auto first = current.find_first_not_of(detail::kStripChars);
    if (first != std::string::npos) {
      const auto last = current.find_last_not_of(detail::kStripChars);
      current = current.substr(first, last - first + 1);
    }
    tokens.push_back(std::move(current));
    current.clear();
  };
  for (std::size_t i = 0; i < text.size();) {
    if (const auto ws = detail::whitespace_length(text, i)) {
      flush();
      i += ws;
      continue;
    }
    char c = text[i++];
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    current.push_back(c);
  }
  flush();
  return tokens;
}

/// Reads a GloVe-style text file: "<token> <f1> ... <fd>" per line.
/// The first entry fixes the dimension. Repeated tokens keep their first vector.
inline WordVectorTable parse_word_vectors(std::istream& in) {
  std::optional<WordVectorTable> table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto fields = detail::split_fields(line);
    if (fields.empty()) continue;
    if (fields.size() < 2) {
      throw ParseError("wrong field count: expected a token followed by floats", line_no);
    }
    if (!table) table.emplace(fields.size() - 1);
    if (fields.size() - 1 != table->dimension()) {
      throw DimensionMismatch(table->dimension(), fields.size() - 1, line_no);
    }
    std::vector<double> vec(fields.size() - 1);
    for (std::size_t k = 1; k < fields.size(); ++k) {
      if (!detail::parse_double(fields[k], vec[k - 1])) {
        throw ParseError("bad float '" + std::string(fields[k]) + "'", line_no);
      }
    }
    table->insert(std::string(fields[0]), std::move(vec));
  }
  if (!table) throw ParseError("no entries");
  return std::move(*table);
}

inline WordVectorTable load_word_vectors(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  try {
    return parse_word_vectors(in);
  } catch (const ParseError& e) {
    throw e.with_source(path.string());
  }
}

/// Mean of the in-vocabulary token vectors. Out-of-vocabulary tokens are skipped;
/// a text with no known token raises EmptyEncoding rather than yielding zeros.
inline FeatureVector encode_sentence(std::string_view text, const WordVectorTable& table) {
  if (table.empty()) throw Error(ErrorKind::EmptyEncoding, "word-vector table is empty");
  auto tokens = tokenize(text);
  // summing in sorted order makes the result independent of word order, bit for bit
  std::sort(tokens.begin(), tokens.end());
  std::vector<double> sum(table.dimension(), 0.0);
  std::size_t known = 0;
  for (const auto& tok : tokens) {
    const auto* vec = table.find(tok);
    if (!vec) continue;
    for (std::size_t d = 0; d < sum.size(); ++d) sum[d] += (*vec)[d];
    ++known;
  }
  if (known == 0) {
    throw Error(ErrorKind::EmptyEncoding,
                "no in-vocabulary token in \"" + std::string(text.substr(0, 80)) + "\"");
  }
  for (auto& x : sum) x /= static_cast<double>(known);
  return FeatureVector{std::move(sum), std::nullopt};
}

inline FeatureVector lookup_embedding(const std::string& id, const EmbeddingStore& store) {
  const auto* v = store.find(id);
  if (!v) throw Error(ErrorKind::MissingEmbedding, "no embedding for id '" + id + "'");
  return *v;
}

/// Reads precomputed embeddings, jsonl {"id": str, "vector": [float...]}.
inline EmbeddingStore parse_embedding_store(std::istream& in) {
  std::optional<EmbeddingStore> store;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::string id;
    std::vector<double> values;
    try {
      const auto obj = nlohmann::json::parse(line);
      if (!obj.is_object() || !obj.contains("id") || !obj.contains("vector") ||
          !obj["id"].is_string() || !obj["vector"].is_array()) {
        throw ParseError("expected {\"id\": str, \"vector\": [float...]}", line_no);
      }
      id = obj["id"].get<std::string>();
      for (const auto& x : obj["vector"]) {
        if (!x.is_number()) throw ParseError("vector entries must be numbers", line_no);
        values.push_back(x.get<double>());
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("malformed json: ") + e.what(), line_no);
    }
    if (values.empty()) throw ParseError("empty vector", line_no);
    if (!store) store.emplace(values.size());
    if (values.size() != store->dimension()) {
      throw DimensionMismatch(store->dimension(), values.size(), line_no);
    }
    store->insert(id, std::move(values));
  }
  if (!store) throw ParseError("no entries");
  return std::move(*store);
}

inline EmbeddingStore load_embedding_store(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  try {
    return parse_embedding_store(in);
  } catch (const ParseError& e) {
    throw e.with_source(path.string());
  }
}

}  // namespace advgain

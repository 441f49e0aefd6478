#pragma once

// Tabular reports rendered as csv (RFC-4180, LF), jsonl or markdown.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "advgain/corpus.hpp"
#include "advgain/error.hpp"

namespace advgain {

enum class ReportFormat { Csv, Jsonl, Markdown };

inline std::optional<ReportFormat> parse_report_format(std::string_view name) {
  if (name == "csv") return ReportFormat::Csv;
  if (name == "jsonl") return ReportFormat::Jsonl;
  if (name == "markdown" || name == "md") return ReportFormat::Markdown;
  return std::nullopt;
}

inline const char* extension(ReportFormat f) {
  switch (f) {
    case ReportFormat::Csv: return ".csv";
    case ReportFormat::Jsonl: return ".jsonl";
    case ReportFormat::Markdown: return ".md";
  }
  return "";
}

/// Shortest decimal that round-trips; infinities print as inf / -inf.
inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

inline std::string format_fixed(double x, int decimals) {
  if (!std::isfinite(x)) return format_number(x);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, x);
  return buf;
}

/// A cell: empty, text, integer, real or boolean.
using Cell = std::variant<std::monostate, std::string, long long, double, bool>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add_row(std::vector<Cell> row) {
    if (row.size() != columns.size()) {
      throw Error(ErrorKind::Validation, "report row has " + std::to_string(row.size()) +
                                             " cells for " + std::to_string(columns.size()) +
                                             " columns");
    }
    rows.push_back(std::move(row));
  }
};

template <typename T>
Cell optional_cell(const std::optional<T>& v) {
  if (!v) return std::monostate{};
  if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
    return static_cast<long long>(*v);
  } else {
    return *v;
  }
}

namespace detail {

inline std::string cell_text(const Cell& c) {
  struct {
    std::string operator()(std::monostate) const { return {}; }
    std::string operator()(const std::string& s) const { return s; }
    std::string operator()(long long v) const { return std::to_string(v); }
    std::string operator()(double v) const { return format_number(v); }
    std::string operator()(bool v) const { return v ? "true" : "false"; }
  } visit;
  return std::visit(visit, c);
}

inline nlohmann::ordered_json cell_json(const Cell& c) {
  struct {
    nlohmann::ordered_json operator()(std::monostate) const { return nullptr; }
    nlohmann::ordered_json operator()(const std::string& s) const { return s; }
    nlohmann::ordered_json operator()(long long v) const { return v; }
    nlohmann::ordered_json operator()(double v) const {
      if (!std::isfinite(v)) return format_number(v);
      return v;
    }
    nlohmann::ordered_json operator()(bool v) const { return v; }
  } visit;
  return std::visit(visit, c);
}

inline std::string markdown_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '|') out += "\\|";
    else if (c == '\n') out += ' ';
    else out.push_back(c);
  }
  return out;
}

}  // namespace detail

inline std::string render(const Table& table, ReportFormat format) {
  std::string out;
  switch (format) {
    case ReportFormat::Csv: {
      const auto line = [&](const auto& cells, auto&& text) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
          if (i) out.push_back(',');
          out += detail::csv_escape(text(cells[i]));
        }
        out.push_back('\n');
      };
      line(table.columns, [](const std::string& s) { return s; });
      for (const auto& row : table.rows) line(row, detail::cell_text);
      break;
    }
    case ReportFormat::Jsonl:
      for (const auto& row : table.rows) {
        nlohmann::ordered_json obj = nlohmann::ordered_json::object();
        for (std::size_t i = 0; i < row.size(); ++i) obj[table.columns[i]] = detail::cell_json(row[i]);
        out += obj.dump() + "\n";
      }
      break;
    case ReportFormat::Markdown: {
      out += "|";
      for (const auto& c : table.columns) out += " " + detail::markdown_escape(c) + " |";
      out += "\n|";
      for (std::size_t i = 0; i < table.columns.size(); ++i) out += " --- |";
      out += "\n";
      for (const auto& row : table.rows) {
        out += "|";
        for (const auto& c : row) out += " " + detail::markdown_escape(detail::cell_text(c)) + " |";
        out += "\n";
      }
      break;
    }
  }
  return out;
}

}  // namespace advgain

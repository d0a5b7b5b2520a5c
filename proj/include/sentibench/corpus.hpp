#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "sentibench/error.hpp"
#include "sentibench/preprocess.hpp"
#include "sentibench/prng.hpp"

namespace sentibench {

// One labeled review as loaded from disk. 0 = Negative, 1 = Positive.
// The text may be empty; downstream stages handle that.
struct RawReview {
  std::string text;
  int label = 0;

  bool operator==(const RawReview&) const = default;
};

struct SplitDataset {
  std::vector<RawReview> train;
  std::vector<RawReview> test;
  std::uint64_t seed = 0;
  double train_fraction = 0.0;
};

enum class CorpusFormat { kCsv, kJsonl };

namespace detail {

// RFC 4180 reader: quoted fields may contain commas, newlines and doubled
// quotes; rows end at LF or CRLF outside quotes.
inline std::vector<std::vector<std::string>> parse_csv(std::istream& in) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool row_started = false;
  char c;
  while (in.get(c)) {
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        row_started = true;
        break;
      case ',':
        row.push_back(std::move(field));
        field.clear();
        row_started = true;
        break;
      case '\r':
        break;
      case '\n':
        if (row_started || !field.empty()) {
          row.push_back(std::move(field));
          field.clear();
          rows.push_back(std::move(row));
          row.clear();
          row_started = false;
        }
        break;
      default:
        field.push_back(c);
        row_started = true;
        break;
    }
  }
  if (row_started || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline int parse_label(std::string_view raw, std::size_t row_no) {
  std::string s = lowercase_ascii(raw);
  // trim surrounding whitespace
  std::size_t b = s.find_first_not_of(" \t");
  std::size_t e = s.find_last_not_of(" \t");
  s = (b == std::string::npos) ? "" : s.substr(b, e - b + 1);
  if (s == "0" || s == "negative") return 0;
  if (s == "1" || s == "positive") return 1;
  throw InputError("row " + std::to_string(row_no) + ": label '" + std::string(raw) +
                   "' is not 0/1 or negative/positive");
}

}  // namespace detail

// Loads a labeled corpus from CSV (header required) or JSONL (one object
// per line). Records come back in file order. Labels must be 0/1 or the
// aliases "negative"/"positive" (case-insensitive).
inline std::vector<RawReview> load_corpus(const std::string& path, CorpusFormat format,
                                          const std::string& text_field = "text",
                                          const std::string& label_field = "label") {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open corpus file: " + path);
  std::vector<RawReview> out;

  if (format == CorpusFormat::kCsv) {
    auto rows = detail::parse_csv(in);
    if (rows.empty()) throw InputError(path + ": missing CSV header row");
    const auto& header = rows.front();
    auto col_of = [&](const std::string& name) {
      auto it = std::find(header.begin(), header.end(), name);
      if (it == header.end())
        throw InputError(path + ": header has no column '" + name + "'");
      return static_cast<std::size_t>(it - header.begin());
    };
    std::size_t text_col = col_of(text_field);
    std::size_t label_col = col_of(label_field);
    for (std::size_t r = 1; r < rows.size(); ++r) {
      const auto& row = rows[r];
      if (text_col >= row.size() || label_col >= row.size()) {
        throw InputError("row " + std::to_string(r) + ": expected " +
                         std::to_string(header.size()) + " fields, got " +
                         std::to_string(row.size()));
      }
      out.push_back({row[text_col], detail::parse_label(row[label_col], r)});
    }
    return out;
  }

  std::string line;
  std::size_t row_no = 0;
  while (std::getline(in, line)) {
    ++row_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw InputError("row " + std::to_string(row_no) + ": invalid JSON: " + e.what());
    }
    if (!obj.contains(text_field))
      throw InputError("row " + std::to_string(row_no) + ": missing field '" + text_field + "'");
    if (!obj.contains(label_field))
      throw InputError("row " + std::to_string(row_no) + ": missing field '" + label_field + "'");
    const auto& lab = obj[label_field];
    int label;
    if (lab.is_number_integer()) {
      long v = lab.get<long>();
      if (v != 0 && v != 1)
        throw InputError("row " + std::to_string(row_no) + ": label " + std::to_string(v) +
                         " is not in {0,1}");
      label = static_cast<int>(v);
    } else if (lab.is_string()) {
      label = detail::parse_label(lab.get<std::string>(), row_no);
    } else {
      throw InputError("row " + std::to_string(row_no) + ": label must be an integer or string");
    }
    if (!obj[text_field].is_string())
      throw InputError("row " + std::to_string(row_no) + ": field '" + text_field +
                       "' must be a string");
    out.push_back({obj[text_field].get<std::string>(), label});
  }
  return out;
}

inline std::map<int, std::size_t> class_histogram(std::span<const RawReview> data) {
  std::map<int, std::size_t> hist;
  for (const auto& r : data) ++hist[r.label];
  return hist;
}

// Preprocessed corpora are exchanged as JSONL of {"tokens": [...], "label": n}.
inline void save_token_docs(std::ostream& out, std::span<const TokenDoc> docs) {
  for (const auto& d : docs) {
    nlohmann::json obj;
    obj["tokens"] = d.tokens;
    obj["label"] = d.label;
    out << obj.dump() << '\n';
  }
}

inline std::vector<TokenDoc> load_token_docs(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open preprocessed corpus: " + path);
  std::vector<TokenDoc> out;
  std::string line;
  std::size_t row_no = 0;
  while (std::getline(in, line)) {
    ++row_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw InputError("row " + std::to_string(row_no) + ": invalid JSON: " + e.what());
    }
    if (!obj.contains("tokens") || !obj.contains("label") || !obj["tokens"].is_array()) {
      throw InputError("row " + std::to_string(row_no) +
                       ": expected {\"tokens\": [...], \"label\": 0|1}");
    }
    long v = obj["label"].get<long>();
    if (v != 0 && v != 1)
      throw InputError("row " + std::to_string(row_no) + ": label must be 0 or 1");
    out.push_back({obj["tokens"].get<std::vector<std::string>>(), static_cast<int>(v)});
  }
  return out;
}

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Deterministic stratified train/test assignment. Per class the train
// count is floor(train_fraction * class_size); remainders against the
// rounded total are distributed in label order. Which indices land in
// which part is decided by a SplitMix64 shuffle of each class; the
// returned lists are then sorted so both parts preserve corpus order.
inline SplitIndices stratified_split_indices(std::span<const int> labels,
                                             double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw InputError("train_fraction must be in (0,1)");
  }
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  if (by_class.size() < 2) {
    throw InputError("stratified split requires both classes to be present");
  }

  const auto total_train = static_cast<std::size_t>(
      std::llround(train_fraction * static_cast<double>(labels.size())));
  std::map<int, std::size_t> take;
  std::size_t assigned = 0;
  for (const auto& [label, idx] : by_class) {
    take[label] = static_cast<std::size_t>(
        std::floor(train_fraction * static_cast<double>(idx.size())));
    assigned += take[label];
  }
  for (auto& [label, cnt] : take) {
    if (assigned >= total_train) break;
    if (cnt < by_class[label].size()) {
      ++cnt;
      ++assigned;
    }
  }

  SplitMix64 rng(seed);
  SplitIndices out;
  for (auto& [label, idx] : by_class) {
    rng.shuffle(idx);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      (k < take[label] ? out.train : out.test).push_back(idx[k]);
    }
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

inline SplitDataset stratified_split(std::span<const RawReview> data, double train_fraction,
                                     std::uint64_t seed) {
  std::vector<int> labels;
  labels.reserve(data.size());
  for (const auto& r : data) labels.push_back(r.label);
  SplitIndices idx = stratified_split_indices(labels, train_fraction, seed);

  SplitDataset out;
  out.seed = seed;
  out.train_fraction = train_fraction;
  out.train.reserve(idx.train.size());
  out.test.reserve(idx.test.size());
  for (std::size_t i : idx.train) out.train.push_back(data[i]);
  for (std::size_t i : idx.test) out.test.push_back(data[i]);
  return out;
}

}  // namespace sentibench

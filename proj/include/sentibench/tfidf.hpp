#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "sentibench/csr.hpp"
#include "sentibench/error.hpp"
#include "sentibench/preprocess.hpp"

namespace sentibench {

struct TfidfConfig {
  std::size_t max_features = 5000;
  int ngram_lo = 1;
  int ngram_hi = 2;
  std::size_t min_df = 3;       // absolute document count
  double max_df = 0.90;         // fraction of documents, inclusive
  bool sublinear_tf = true;
};

// Fitted vectorizer: term -> column index (dense, 0-based, lexicographic
// over the retained terms) plus the smoothed idf vector
// idf = ln((1+N)/(1+df)) + 1.
struct TfidfModel {
  TfidfConfig config;
  std::unordered_map<std::string, std::uint32_t> vocabulary;
  std::vector<double> idf;

  std::size_t n_features() const { return idf.size(); }
};

namespace detail {

// Calls fn(term) for every n-gram of the document in the configured range.
// Bigrams join adjacent tokens with a single space.
template <typename Fn>
void for_each_ngram(const std::vector<std::string>& tokens, const TfidfConfig& cfg, Fn&& fn) {
  for (int n = cfg.ngram_lo; n <= cfg.ngram_hi; ++n) {
    if (n <= 0 || tokens.size() < static_cast<std::size_t>(n)) continue;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
      std::string term = tokens[i];
      for (int k = 1; k < n; ++k) {
        term += ' ';
        term += tokens[i + k];
      }
      fn(term);
    }
  }
}

}  // namespace detail

// Builds the vocabulary and idf vector. Candidate terms are all n-grams in
// the configured range; terms with document frequency below min_df or above
// max_df * N (inclusive bound) are dropped; the top max_features terms by
// document frequency survive, ties broken lexicographically ascending.
inline TfidfModel tfidf_fit(std::span<const TokenDoc> corpus, TfidfConfig config = {}) {
  if (corpus.empty()) throw Error("tfidf: cannot fit on an empty corpus");
  const double n_docs = static_cast<double>(corpus.size());

  std::unordered_map<std::string, std::size_t> df;
  std::vector<std::string> doc_terms;
  for (const auto& doc : corpus) {
    doc_terms.clear();
    detail::for_each_ngram(doc.tokens, config, [&](const std::string& t) {
      doc_terms.push_back(t);
    });
    std::sort(doc_terms.begin(), doc_terms.end());
    doc_terms.erase(std::unique(doc_terms.begin(), doc_terms.end()), doc_terms.end());
    for (const auto& t : doc_terms) ++df[t];
  }

  std::vector<std::pair<std::string, std::size_t>> kept;
  for (auto& [term, count] : df) {
    if (count < config.min_df) continue;
    if (static_cast<double>(count) > config.max_df * n_docs) continue;
    kept.emplace_back(term, count);
  }
  if (kept.size() > config.max_features) {
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    kept.resize(config.max_features);
  }
  std::sort(kept.begin(), kept.end());  // column order is lexicographic

  TfidfModel model;
  model.config = config;
  model.vocabulary.reserve(kept.size());
  model.idf.reserve(kept.size());
  for (std::size_t j = 0; j < kept.size(); ++j) {
    model.vocabulary.emplace(kept[j].first, static_cast<std::uint32_t>(j));
    model.idf.push_back(std::log((1.0 + n_docs) / (1.0 + static_cast<double>(kept[j].second))) +
                        1.0);
  }
  return model;
}

// Applies the fitted model. Cell value is tf * idf with sublinear
// tf = 1 + ln(count); each row is L2-normalized unless it is all zero.
// Out-of-vocabulary terms are ignored; zero-token documents produce an
// all-zero row.
inline CsrMatrix tfidf_transform(const TfidfModel& model, std::span<const TokenDoc> docs) {
  CsrMatrix out(model.n_features());
  std::unordered_map<std::uint32_t, std::size_t> counts;
  std::vector<std::pair<std::uint32_t, double>> row;
  for (const auto& doc : docs) {
    counts.clear();
    detail::for_each_ngram(doc.tokens, model.config, [&](const std::string& t) {
      auto it = model.vocabulary.find(t);
      if (it != model.vocabulary.end()) ++counts[it->second];
    });
    row.clear();
    for (const auto& [col, count] : counts) {
      double tf = model.config.sublinear_tf ? 1.0 + std::log(static_cast<double>(count))
                                            : static_cast<double>(count);
      row.emplace_back(col, tf * model.idf[col]);
    }
    std::sort(row.begin(), row.end());
    double sq = 0.0;
    for (const auto& [col, v] : row) sq += v * v;
    if (sq > 0.0) {
      double inv = 1.0 / std::sqrt(sq);
      for (auto& [col, v] : row) v *= inv;
    }
    out.append_row(row);
  }
  return out;
}

// Column-wise MinMax scaling for non-negative sparse features. Column
// minima are zero (every column has implicit zeros), so scaling reduces to
// division by the fitted column max. Columns that were all-zero at fit
// time pass through unchanged; values above the fitted max are allowed to
// scale past 1 (no clipping).
struct MinMaxScaler {
  std::vector<double> col_max;
};

inline MinMaxScaler fit_minmax(const CsrMatrix& x) {
  MinMaxScaler scaler;
  scaler.col_max.assign(x.cols, 0.0);
  for (std::size_t k = 0; k < x.nnz(); ++k) {
    scaler.col_max[x.col_indices[k]] = std::max(scaler.col_max[x.col_indices[k]], x.values[k]);
  }
  return scaler;
}

inline CsrMatrix apply_minmax(const MinMaxScaler& scaler, const CsrMatrix& x) {
  if (scaler.col_max.size() != x.cols) throw Error("minmax: column count mismatch");
  CsrMatrix out = x;
  for (std::size_t k = 0; k < out.nnz(); ++k) {
    double cmax = scaler.col_max[out.col_indices[k]];
    if (cmax > 0.0) out.values[k] /= cmax;
  }
  return out;
}

// --- persistence ------------------------------------------------------

inline nlohmann::json tfidf_to_json(const TfidfModel& model,
                                    const MinMaxScaler* scaler = nullptr) {
  nlohmann::json j;
  j["version"] = 1;
  j["config"] = {{"max_features", model.config.max_features},
                 {"ngram_lo", model.config.ngram_lo},
                 {"ngram_hi", model.config.ngram_hi},
                 {"min_df", model.config.min_df},
                 {"max_df", model.config.max_df},
                 {"sublinear_tf", model.config.sublinear_tf}};
  std::map<std::string, std::uint32_t> sorted_vocab(model.vocabulary.begin(),
                                                    model.vocabulary.end());
  j["vocabulary"] = sorted_vocab;
  j["idf"] = model.idf;
  if (scaler) j["col_max"] = scaler->col_max;
  return j;
}

inline TfidfModel tfidf_from_json(const nlohmann::json& j, MinMaxScaler* scaler = nullptr) {
  if (!j.contains("version") || j["version"].get<int>() != 1) {
    throw InputError("tfidf model: unsupported or missing version");
  }
  TfidfModel model;
  const auto& c = j.at("config");
  model.config.max_features = c.at("max_features").get<std::size_t>();
  model.config.ngram_lo = c.at("ngram_lo").get<int>();
  model.config.ngram_hi = c.at("ngram_hi").get<int>();
  model.config.min_df = c.at("min_df").get<std::size_t>();
  model.config.max_df = c.at("max_df").get<double>();
  model.config.sublinear_tf = c.at("sublinear_tf").get<bool>();
  for (const auto& [term, col] : j.at("vocabulary").items()) {
    model.vocabulary.emplace(term, col.get<std::uint32_t>());
  }
  model.idf = j.at("idf").get<std::vector<double>>();
  if (scaler && j.contains("col_max")) {
    scaler->col_max = j.at("col_max").get<std::vector<double>>();
  }
  return model;
}

}  // namespace sentibench

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sentibench/corpus.hpp"
#include "sentibench/error.hpp"
#include "sentibench/prng.hpp"

namespace sentibench {

// Keyword-sentiment corpus: the positive and negative pools are disjoint,
// a noise pool is shared by both classes, and a few tokens appear as slang
// spellings that the builtin dictionary maps back to pool words. Classes
// are exactly balanced (even index → label 0).
struct SyntheticConfig {
  std::size_t n_docs = 2000;
  std::size_t min_tokens = 6;
  std::size_t max_tokens = 14;
  double noise_fraction = 0.2;
  std::uint64_t seed = 42;
};

namespace detail {

inline constexpr std::array<std::string_view, 20> kPositivePool = {
    "bagus",    "mantap",      "keren",      "puas",   "suka",     "senang",  "cepat",
    "ramah",    "murah",       "awet",       "lancar", "rapi",     "amanah",  "original",
    "terbaik",  "nyaman",      "sempurna",   "rekomendasi", "memuaskan", "berkualitas"};

inline constexpr std::array<std::string_view, 20> kNegativePool = {
    "jelek",  "buruk",  "kecewa", "lambat", "rusak",        "mahal",  "palsu",
    "bohong", "parah",  "kasar",  "telat",  "cacat",        "hancur", "robek",
    "penipu", "lecet",  "busuk",  "gagal",  "menyesal",     "mengecewakan"};

inline constexpr std::array<std::string_view, 20> kNoisePool = {
    "barang",  "produk",  "toko",     "pengiriman", "paket",  "pesanan", "sampai",
    "harga",   "warna",   "ukuran",   "sesuai",     "banget", "sekali",  "sangat",
    "sekarang", "kemarin", "belanja", "bayar",      "stok",   "penjual"};

// Slang spellings the builtin dictionary normalizes back to pool words.
inline constexpr std::array<std::array<std::string_view, 2>, 5> kSlangForms = {{
    {"bagus", "bgs"},
    {"mantap", "mantul"},
    {"murah", "murmer"},
    {"rekomendasi", "recomended"},
    {"banget", "bgt"},
}};

}  // namespace detail

inline std::vector<RawReview> generate_synthetic_reviews(const SyntheticConfig& config = {}) {
  if (config.min_tokens == 0 || config.max_tokens < config.min_tokens) {
    throw InputError("synthetic corpus: bad token count range");
  }
  SplitMix64 rng(config.seed);
  std::vector<RawReview> reviews;
  reviews.reserve(config.n_docs);
  for (std::size_t i = 0; i < config.n_docs; ++i) {
    const int label = static_cast<int>(i % 2);
    const auto& pool = label == 1 ? detail::kPositivePool : detail::kNegativePool;
    const std::size_t n_tokens =
        config.min_tokens + rng.next_below(config.max_tokens - config.min_tokens + 1);
    std::string text;
    for (std::size_t t = 0; t < n_tokens; ++t) {
      std::string token;
      if (rng.next_double() < config.noise_fraction) {
        token = detail::kNoisePool[rng.next_below(detail::kNoisePool.size())];
      } else {
        token = pool[rng.next_below(pool.size())];
      }
      if (rng.next_double() < 0.15) {
        for (const auto& [canonical, slang] : detail::kSlangForms) {
          if (token == canonical) {
            token = slang;
            break;
          }
        }
      }
      if (t == 0 && rng.next_double() < 0.3) token[0] = static_cast<char>(token[0] - 'a' + 'A');
      if (!text.empty()) text += ' ';
      text += token;
      if (rng.next_double() < 0.1) text += ',';
    }
    if (rng.next_double() < 0.2) text += rng.next_double() < 0.5 ? "!" : "!!";
    reviews.push_back({std::move(text), label});
  }
  return reviews;
}

inline std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    out += c;
    if (c == '"') out += '"';
  }
  out += '"';
  return out;
}

inline void save_reviews_csv(const std::filesystem::path& path,
                             std::span<const RawReview> reviews) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw InputError("cannot open for writing: " + path.string());
  file << "text,label\n";
  for (const auto& review : reviews) {
    file << csv_escape(review.text) << ',' << review.label << '\n';
  }
  if (!file) throw Error("write failed: " + path.string());
}

}  // namespace sentibench

#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "sentibench/error.hpp"
#include "sentibench/preprocess.hpp"

namespace sentibench {

// Token ids for the network. Ids 0 and 1 are reserved; real tokens start
// at 2 and are dense. Angle brackets cannot survive preprocessing, so the
// reserved surface forms cannot collide with corpus tokens.
struct Vocabulary {
  static constexpr std::int32_t kPad = 0;
  static constexpr std::int32_t kUnk = 1;

  std::unordered_map<std::string, std::int32_t> token_to_id;
  std::vector<std::string> id_to_token;

  std::size_t size() const { return id_to_token.size(); }

  std::int32_t lookup(const std::string& token) const {
    const auto it = token_to_id.find(token);
    return it == token_to_id.end() ? kUnk : it->second;
  }
};

// Top cap−2 tokens by frequency (ties broken lexicographically) plus the
// two reserved ids. Must be built from the training split only.
inline Vocabulary build_vocab(std::span<const TokenDoc> train_docs, std::size_t cap = 13600) {
  if (train_docs.empty()) throw InputError("build_vocab: empty corpus");
  if (cap < 3) throw InputError("build_vocab: cap leaves no room for tokens");
  std::unordered_map<std::string, std::uint64_t> freq;
  for (const auto& doc : train_docs) {
    for (const auto& tok : doc.tokens) ++freq[tok];
  }
  std::vector<std::pair<std::string, std::uint64_t>> ranked(freq.begin(), freq.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (ranked.size() > cap - 2) ranked.resize(cap - 2);

  Vocabulary vocab;
  vocab.id_to_token = {"<pad>", "<unk>"};
  vocab.id_to_token.reserve(ranked.size() + 2);
  vocab.token_to_id.reserve(ranked.size());
  for (const auto& [token, count] : ranked) {
    vocab.token_to_id.emplace(token, static_cast<std::int32_t>(vocab.id_to_token.size()));
    vocab.id_to_token.push_back(token);
  }
  return vocab;
}

// First max_len tokens mapped to ids (tail truncated). Zero-token docs
// become the length-1 sequence [UNK] so every row has at least one
// attendable position.
inline std::pair<std::vector<std::int32_t>, std::size_t> encode(const TokenDoc& doc,
                                                                const Vocabulary& vocab,
                                                                std::size_t max_len) {
  if (max_len == 0) throw InputError("encode: max_len must be positive");
  std::vector<std::int32_t> ids;
  const std::size_t n = std::min(doc.tokens.size(), max_len);
  ids.reserve(std::max<std::size_t>(n, 1));
  for (std::size_t i = 0; i < n; ++i) ids.push_back(vocab.lookup(doc.tokens[i]));
  if (ids.empty()) ids.push_back(Vocabulary::kUnk);
  const std::size_t length = ids.size();
  return {std::move(ids), length};
}

// FNV-1a over the id-ordered token list; checkpoints embed this so a model
// cannot be silently applied with a different vocabulary.
inline std::uint64_t vocab_hash(const Vocabulary& vocab) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](unsigned char c) {
    h ^= c;
    h *= 0x100000001b3ULL;
  };
  for (const auto& token : vocab.id_to_token) {
    for (unsigned char c : token) mix(c);
    mix('\n');
  }
  return h;
}

inline nlohmann::json vocab_to_json(const Vocabulary& vocab) {
  return nlohmann::json{{"format_version", 1}, {"tokens", vocab.id_to_token}};
}

inline Vocabulary vocab_from_json(const nlohmann::json& j) {
  if (!j.contains("tokens")) throw InputError("vocabulary JSON missing tokens");
  Vocabulary vocab;
  vocab.id_to_token = j.at("tokens").get<std::vector<std::string>>();
  if (vocab.id_to_token.size() < 2 || vocab.id_to_token[0] != "<pad>" ||
      vocab.id_to_token[1] != "<unk>") {
    throw InputError("vocabulary JSON lacks reserved <pad>/<unk> entries");
  }
  for (std::size_t i = 2; i < vocab.id_to_token.size(); ++i) {
    vocab.token_to_id.emplace(vocab.id_to_token[i], static_cast<std::int32_t>(i));
  }
  return vocab;
}

}  // namespace sentibench

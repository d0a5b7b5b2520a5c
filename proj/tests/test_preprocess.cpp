#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "sentibench/preprocess.hpp"
#include "sentibench/slang_builtin.hpp"

namespace sb = sentibench;

namespace {

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

TEST(CaseFold, LowercasesAsciiAndKeepsDigits) {
  EXPECT_EQ(sb::case_fold("MANTAP Banget"), "mantap banget");
  EXPECT_EQ(sb::case_fold(""), "");
  EXPECT_EQ(sb::case_fold("Bagus123"), "bagus123");
}

TEST(CaseFold, MapsLatin1Supplement) {
  EXPECT_EQ(sb::case_fold("ÉÀ"), "éà");  // É À → é à
  EXPECT_EQ(sb::case_fold("×"), "×");              // multiplication sign unchanged
}

TEST(CaseFold, Idempotent) {
  const std::vector<std::string> samples = {"MANTAP Banget", "Bagus123", "École",
                                            "oK, MANTAP!! 99"};
  for (const auto& s : samples) {
    const std::string once = sb::case_fold(s);
    EXPECT_EQ(sb::case_fold(once), once) << s;
  }
}

TEST(Cleanse, RemovesUrlsMentionsHashtagsDigits) {
  const std::string in = "bagus bgt! cek https://toko.id @seller #promo 123";
  const auto tokens = sb::tokenize_filter(sb::cleanse(in));
  EXPECT_EQ(tokens, (std::vector<std::string>{"bagus", "bgt", "cek"}));
}

TEST(Cleanse, RemovesHtmlTags) {
  EXPECT_EQ(sb::tokenize_filter(sb::cleanse("<b>ok</b>")), std::vector<std::string>{"ok"});
  // Unclosed bracket is treated as punctuation, not as a tag.
  EXPECT_EQ(sb::tokenize_filter(sb::cleanse("a < b bagus")), std::vector<std::string>{"bagus"});
}

TEST(Cleanse, NoRuleMatches) { EXPECT_EQ(sb::cleanse("mantap"), "mantap"); }

TEST(Cleanse, PunctuationBecomesSpaceNotEmpty) {
  // Words joined by punctuation must not fuse into one token.
  const auto tokens = sb::tokenize_filter(sb::cleanse("bagus!jelek"));
  EXPECT_EQ(tokens, (std::vector<std::string>{"bagus", "jelek"}));
}

TEST(Cleanse, BareWwwUrl) {
  const auto tokens = sb::tokenize_filter(sb::cleanse("cek www.toko.id murah"));
  EXPECT_EQ(tokens, (std::vector<std::string>{"cek", "murah"}));
}

TEST(TokenizeFilter, DropsShortTokensAndNormalizesWhitespace) {
  EXPECT_EQ(sb::tokenize_filter("a ok banget"), (std::vector<std::string>{"ok", "banget"}));
  EXPECT_EQ(sb::tokenize_filter("  mantap   sekali "),
            (std::vector<std::string>{"mantap", "sekali"}));
  EXPECT_EQ(sb::tokenize_filter(""), std::vector<std::string>{});
}

TEST(TokenizeFilter, LengthIsCountedInCodepoints) {
  // Two-byte UTF-8 letter is one codepoint; a pair of them passes the filter.
  EXPECT_EQ(sb::tokenize_filter("é éé"), std::vector<std::string>{"éé"});
}

TEST(NormalizeSlang, ReplacesKeysOnly) {
  const sb::SlangDict dict = sb::SlangDict::from_pairs({{"bgt", "banget"}});
  EXPECT_EQ(sb::normalize_slang({"bagus", "bgt"}, dict),
            (std::vector<std::string>{"bagus", "banget"}));
  EXPECT_EQ(sb::normalize_slang({}, dict), std::vector<std::string>{});
  EXPECT_EQ(sb::normalize_slang({"banget"}, dict), std::vector<std::string>{"banget"});
}

TEST(RunPipeline, ComposesAllStages) {
  const sb::SlangDict dict = sb::SlangDict::from_pairs({{"bgt", "banget"}});
  const sb::TokenDoc doc = sb::run_pipeline("Bagus BGT!!! https://x.co", dict, 1);
  EXPECT_EQ(doc.tokens, (std::vector<std::string>{"bagus", "banget"}));
  EXPECT_EQ(doc.label, 1);

  const sb::TokenDoc empty = sb::run_pipeline("", dict, 0);
  EXPECT_TRUE(empty.tokens.empty());
  EXPECT_EQ(empty.label, 0);

  const sb::TokenDoc dups = sb::run_pipeline("ok ok ok", sb::SlangDict{}, 1);
  EXPECT_EQ(dups.tokens, (std::vector<std::string>{"ok", "ok", "ok"}));
}

TEST(RunPipeline, SlangRunsBeforeLengthFilter) {
  // A one-character slang key must expand rather than be dropped: the stage
  // order is fixed as fold, cleanse, split, slang, filter. Filtering first
  // would yield [] here.
  const sb::SlangDict dict = sb::SlangDict::from_pairs({{"y", "ya"}});
  EXPECT_EQ(sb::run_pipeline("y", dict, 0).tokens, std::vector<std::string>{"ya"});
}

TEST(RunPipeline, IdempotentOnOwnOutput) {
  const sb::SlangDict& dict = sb::builtin_slang_dict();
  const std::vector<std::string> samples = {
      "Barang BAGUS bgt!! recomended seller https://toko.id @cs #murah 100%",
      "kecewa, produk JELEK & gk sesuai deskripsi <br> pengiriman lama",
      "mantul!! harga murmer, kualitas ok bgt deh",
  };
  for (const auto& s : samples) {
    const sb::TokenDoc once = sb::run_pipeline(s, dict, 1);
    const sb::TokenDoc twice = sb::run_pipeline(join_tokens(once.tokens), dict, 1);
    EXPECT_EQ(twice.tokens, once.tokens) << s;
  }
}

TEST(RunPipeline, OutputTokensAreClean) {
  const sb::SlangDict& dict = sb::builtin_slang_dict();
  const sb::TokenDoc doc = sb::run_pipeline(
      "Paket2 dtg CEPAT bgt!!! seller @toko #recommended www.ok.id <b>100</b> a", dict, 1);
  for (const auto& t : doc.tokens) {
    EXPECT_GE(t.size(), 2u) << t;
    for (char c : t) {
      const auto u = static_cast<unsigned char>(c);
      if (u < 0x80) {
        EXPECT_FALSE(std::isspace(u)) << t;
        EXPECT_FALSE(std::ispunct(u)) << t;
        EXPECT_FALSE(std::isdigit(u)) << t;
        EXPECT_FALSE(std::isupper(u)) << t;
      }
    }
  }
}

TEST(SlangDict, ParsesTsvWithCommentsAndOverrides) {
  std::istringstream in(
      "# comment line\n"
      "bgt\tbanget\n"
      "\n"
      "BGT\tBanget\n"
      "gk\tgak\n");
  const sb::SlangDict dict = sb::parse_slang_dict(in, "test");
  EXPECT_EQ(dict.size(), 2u);
  ASSERT_NE(dict.lookup("bgt"), nullptr);
  EXPECT_EQ(*dict.lookup("bgt"), "banget");
  ASSERT_NE(dict.lookup("gk"), nullptr);
  EXPECT_EQ(dict.lookup("banget"), nullptr);
}

TEST(SlangDict, MalformedLineNamesLineNumber) {
  std::istringstream in("bgt\tbanget\nbroken-line\n");
  try {
    sb::parse_slang_dict(in, "dict.tsv");
    FAIL() << "expected InputError";
  } catch (const sb::InputError& e) {
    EXPECT_NE(std::string(e.what()).find("dict.tsv:2"), std::string::npos) << e.what();
  }
}

TEST(SlangDict, EmptyFileYieldsEmptyDict) {
  std::istringstream in("");
  EXPECT_EQ(sb::parse_slang_dict(in, "empty").size(), 0u);
}

TEST(SlangDict, BuiltinMatchesBundledTsvFile) {
  // The compiled-in dictionary and the data file must never drift apart.
  const char* data_dir = std::getenv("SENTIBENCH_DATA");
  const std::string path = std::string(data_dir ? data_dir : "data") + "/slang_id.tsv";
  std::ifstream in(path);
  if (!in) GTEST_SKIP() << "bundled dictionary not found at " << path;
  const sb::SlangDict from_file = sb::parse_slang_dict(in, path);
  const sb::SlangDict& builtin = sb::builtin_slang_dict();
  EXPECT_EQ(builtin.entries(), from_file.entries());
}

TEST(SlangDict, CanonicalFormsAreFixedPoints) {
  // Values must not themselves be keys, otherwise the pipeline would not be
  // idempotent.
  const sb::SlangDict& dict = sb::builtin_slang_dict();
  for (const auto& [key, value] : dict.entries()) {
    EXPECT_EQ(dict.lookup(value), nullptr) << key << " -> " << value;
    EXPECT_GE(value.size(), 2u) << value;
  }
}

}  // namespace

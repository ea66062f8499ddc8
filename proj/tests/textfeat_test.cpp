#include "tdscan/textfeat.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>

#include "tdscan/rng.hpp"

using namespace tdscan;

TEST(Tokenize, Empty) { EXPECT_TRUE(tokenize("").empty()); }

TEST(Tokenize, CaseAndPunctuation) {
  auto t = tokenize("Vignette, vignette!");
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t[0], "vignette");
  EXPECT_EQ(t[1], "vignette");
}

TEST(Tokenize, StopwordsAndShortTokens) {
  auto t = tokenize("install via CRAN which I reported");
  ASSERT_EQ(t.size(), 4u);
  EXPECT_EQ(t[0], "install");
  EXPECT_EQ(t[1], "via");
  EXPECT_EQ(t[2], "cran");
  EXPECT_EQ(t[3], "reported");
}

TEST(Tokenize, InternalApostropheAndUnderscore) {
  auto t = tokenize("don't touch snake_case 'quoted'");
  ASSERT_EQ(t.size(), 4u);
  EXPECT_EQ(t[0], "don't");
  EXPECT_EQ(t[1], "touch");
  EXPECT_EQ(t[2], "snake_case");
  EXPECT_EQ(t[3], "quoted");
}

TEST(Tokenize, StopwordsCanBeDisabled) {
  TokenizerConfig config;
  config.use_stopwords = false;
  auto t = tokenize("which is which", config);
  EXPECT_EQ(t.size(), 3u);
}

TEST(Vocabulary, SingleDoc) {
  VocabularyConfig config;
  config.tokenizer.use_stopwords = false;
  config.tokenizer.min_token_length = 1;
  auto v = build_vocabulary({{"a", "b", "b"}}, config);
  ASSERT_EQ(v.size(), 2u);
  EXPECT_EQ(*v.index_of("a"), 0u);
  EXPECT_EQ(*v.index_of("b"), 1u);
  EXPECT_EQ(v.doc_freq()[*v.index_of("b")], 1u);  // document frequency, not term count
}

TEST(Vocabulary, MinDfThreshold) {
  VocabularyConfig config;
  config.min_df = 2;
  auto v = build_vocabulary({{"common", "rare"}, {"common"}, {"common"}}, config);
  EXPECT_EQ(v.size(), 1u);
  EXPECT_FALSE(v.index_of("rare").has_value());
}

TEST(Vocabulary, MaxFeaturesTieBreak) {
  VocabularyConfig config;
  config.max_features = 2;
  // df: aa=2, zz=2, mm=1 -> keep aa, zz
  auto v = build_vocabulary({{"aa", "zz"}, {"zz", "aa", "mm"}}, config);
  ASSERT_EQ(v.size(), 2u);
  EXPECT_TRUE(v.index_of("aa").has_value());
  EXPECT_TRUE(v.index_of("zz").has_value());
}

TEST(Vocabulary, EmptyVocabularyError) {
  VocabularyConfig config;
  config.min_df = 5;
  try {
    build_vocabulary({{"only"}, {"once"}}, config);
    FAIL() << "expected EmptyVocabulary";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyVocabulary);
  }
}

// df counts must equal brute-force per-token set membership over documents
TEST(Vocabulary, DfBruteForceOracle) {
  Rng rng(11);
  const std::vector<std::string> pool = {"alpha", "beta", "gamma", "delta", "epsilon"};
  std::vector<std::vector<std::string>> docs;
  for (int d = 0; d < 5; ++d) {
    std::vector<std::string> doc;
    const std::size_t len = 1 + rng.uniform(8);
    for (std::size_t i = 0; i < len; ++i) doc.push_back(pool[rng.uniform(pool.size())]);
    docs.push_back(std::move(doc));
  }
  auto v = build_vocabulary(docs, {});

  std::map<std::string, std::uint64_t> expected;
  for (const auto& doc : docs) {
    std::set<std::string> unique(doc.begin(), doc.end());
    for (const auto& tok : unique) ++expected[tok];
  }
  ASSERT_EQ(v.size(), expected.size());
  for (const auto& [tok, df] : expected) {
    auto idx = v.index_of(tok);
    ASSERT_TRUE(idx.has_value()) << tok;
    EXPECT_EQ(v.doc_freq()[*idx], df) << tok;
  }
}

TEST(Vectorize, OutOfVocabularyIgnored) {
  auto v = build_vocabulary({{"known"}}, {});
  auto vec = vectorize({"unknown", "tokens"}, v, WeightScheme::Counts);
  EXPECT_TRUE(vec.entries.empty());
}

TEST(Vectorize, RawCounts) {
  VocabularyConfig config;
  config.tokenizer.min_token_length = 1;
  auto v = build_vocabulary({{"a", "b"}}, config);
  auto vec = vectorize({"b", "b"}, v, WeightScheme::Counts);
  ASSERT_EQ(vec.entries.size(), 1u);
  EXPECT_EQ(vec.entries[0].first, 1u);
  EXPECT_DOUBLE_EQ(vec.entries[0].second, 2.0);
}

TEST(Vectorize, TfidfUnitNorm) {
  auto v = build_vocabulary({{"aa", "bb"}, {"bb", "cc"}, {"cc", "dd", "aa"}}, {});
  auto vec = vectorize({"aa", "bb", "bb", "dd"}, v, WeightScheme::Tfidf);
  ASSERT_FALSE(vec.entries.empty());
  EXPECT_NEAR(vec.l2_norm(), 1.0, 1e-12);

  // independently recompute one weight pre-normalization
  const double n = 3.0;
  auto idx_bb = *v.index_of("bb");
  const double idf_bb = std::log((1.0 + n) / (1.0 + 2.0)) + 1.0;
  const double idf_aa = std::log((1.0 + n) / (1.0 + 2.0)) + 1.0;
  const double idf_dd = std::log((1.0 + n) / (1.0 + 1.0)) + 1.0;
  const double raw_bb = 2.0 * idf_bb;
  const double norm = std::sqrt(1.0 * idf_aa * idf_aa + raw_bb * raw_bb + idf_dd * idf_dd);
  for (const auto& [idx, w] : vec.entries) {
    if (idx == idx_bb) {
      EXPECT_NEAR(w, raw_bb / norm, 1e-12);
    }
  }
}

TEST(Vectorize, PermutationInvariance) {
  auto v = build_vocabulary({{"aa", "bb", "cc"}, {"bb", "dd"}}, {});
  std::vector<std::string> tokens = {"aa", "bb", "cc", "bb", "dd", "aa"};
  auto base = vectorize(tokens, v, WeightScheme::Tfidf);
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    rng.shuffle(tokens);
    EXPECT_EQ(vectorize(tokens, v, WeightScheme::Tfidf), base);
  }
}

TEST(Vectorize, WellFormedInvariant) {
  auto v = build_vocabulary({{"aa", "bb", "cc", "dd"}}, {});
  auto vec = vectorize({"dd", "aa", "cc", "aa"}, v, WeightScheme::Counts);
  EXPECT_TRUE(vec.well_formed(v.size()));
}

TEST(Vocabulary, Determinism) {
  std::vector<std::vector<std::string>> docs = {{"xx", "yy"}, {"yy", "zz"}, {"zz"}};
  auto a = build_vocabulary(docs, {});
  auto b = build_vocabulary(docs, {});
  EXPECT_EQ(a, b);
  EXPECT_EQ(vectorize(docs[0], a, WeightScheme::Tfidf), vectorize(docs[0], b, WeightScheme::Tfidf));
}

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "tdscan/error.hpp"
#include "tdscan/types.hpp"

namespace tdscan {

// Short embedded English stop-word list; toggleable via TokenizerConfig.
inline const std::unordered_set<std::string>& default_stopwords() {
  static const std::unordered_set<std::string> words = {
      "a",       "about",   "above",  "after",   "again",    "against", "all",    "am",
      "an",      "and",     "any",    "are",     "as",       "at",      "be",     "because",
      "been",    "before",  "being",  "below",   "between",  "both",    "but",    "by",
      "can",     "could",   "did",    "do",      "does",     "doing",   "down",   "during",
      "each",    "few",     "for",    "from",    "further",  "had",     "has",    "have",
      "having",  "he",      "her",    "here",    "hers",     "him",     "his",    "how",
      "i",       "if",      "in",     "into",    "is",       "it",      "its",    "itself",
      "just",    "me",      "more",   "most",    "my",       "myself",  "no",     "nor",
      "not",     "now",     "of",     "off",     "on",       "once",    "only",   "or",
      "other",   "our",     "ours",   "out",     "over",     "own",     "same",   "she",
      "should",  "so",      "some",   "such",    "than",     "that",    "the",    "their",
      "theirs",  "them",    "then",   "there",   "these",    "they",    "this",   "those",
      "through", "to",      "too",    "under",   "until",    "up",      "very",   "was",
      "we",      "were",    "what",   "when",    "where",    "which",   "while",  "who",
      "whom",    "why",     "will",   "with",    "would",    "you",     "your",   "yours",
  };
  return words;
}

struct TokenizerConfig {
  bool lowercase = true;
  bool use_stopwords = true;
  std::size_t min_token_length = 2;

  friend bool operator==(const TokenizerConfig&, const TokenizerConfig&) = default;
};

// Splits on non-alphanumerics, keeping apostrophes and underscores that sit
// between alphanumerics ("don't", "snake_case").
inline std::vector<std::string> tokenize(std::string_view text, const TokenizerConfig& config = {}) {
  auto is_alnum = [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
  };
  std::vector<std::string> tokens;
  std::string current;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (is_alnum(c)) {
      current.push_back(c);
      continue;
    }
    bool joiner = (c == '\'' || c == '_') && !current.empty() && i + 1 < text.size() && is_alnum(text[i + 1]);
    if (joiner) {
      current.push_back(c);
      continue;
    }
    if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));

  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (auto& tok : tokens) {
    if (config.lowercase) tok = ascii_lower(tok);
    if (tok.size() < config.min_token_length) continue;
    if (config.use_stopwords && default_stopwords().count(ascii_lower(tok))) continue;
    out.push_back(std::move(tok));
  }
  return out;
}

// Sorted (index, weight) pairs; indices strictly increasing, weights > 0.
struct SparseVector {
  std::vector<std::pair<std::uint32_t, double>> entries;

  bool well_formed(std::size_t dim) const {
    std::uint32_t prev = 0;
    bool first = true;
    for (const auto& [idx, w] : entries) {
      if (w <= 0.0) return false;
      if (idx >= dim) return false;
      if (!first && idx <= prev) return false;
      prev = idx;
      first = false;
    }
    return true;
  }

  double l2_norm() const {
    double s = 0.0;
    for (const auto& [idx, w] : entries) s += w * w;
    return std::sqrt(s);
  }

  friend bool operator==(const SparseVector&, const SparseVector&) = default;
};

struct VocabularyConfig {
  TokenizerConfig tokenizer;
  std::size_t min_df = 1;
  std::optional<std::size_t> max_features;

  friend bool operator==(const VocabularyConfig&, const VocabularyConfig&) = default;
};

enum class WeightScheme { Counts, Tfidf };

inline std::string to_string(WeightScheme s) { return s == WeightScheme::Counts ? "counts" : "tfidf"; }

inline WeightScheme scheme_from_string(std::string_view s) {
  if (s == "counts") return WeightScheme::Counts;
  if (s == "tfidf") return WeightScheme::Tfidf;
  throw Error(ErrorKind::SerializationError, "unknown weight scheme '" + std::string(s) + "'");
}

class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(std::vector<std::string> tokens, std::vector<std::uint64_t> doc_freq,
             std::uint64_t total_docs, VocabularyConfig config)
      : tokens_(std::move(tokens)),
        doc_freq_(std::move(doc_freq)),
        total_docs_(total_docs),
        config_(std::move(config)) {
    if (tokens_.size() != doc_freq_.size()) {
      throw Error(ErrorKind::DimensionMismatch, "token/df length mismatch");
    }
    for (std::size_t i = 0; i < tokens_.size(); ++i) index_.emplace(tokens_[i], i);
  }

  std::size_t size() const { return tokens_.size(); }
  std::uint64_t total_docs() const { return total_docs_; }
  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::vector<std::uint64_t>& doc_freq() const { return doc_freq_; }
  const VocabularyConfig& config() const { return config_; }

  std::optional<std::uint32_t> index_of(const std::string& token) const {
    auto it = index_.find(token);
    if (it == index_.end()) return std::nullopt;
    return static_cast<std::uint32_t>(it->second);
  }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.tokens_ == b.tokens_ && a.doc_freq_ == b.doc_freq_ && a.total_docs_ == b.total_docs_ &&
           a.config_ == b.config_;
  }

 private:
  std::vector<std::string> tokens_;
  std::vector<std::uint64_t> doc_freq_;
  std::uint64_t total_docs_ = 0;
  VocabularyConfig config_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Retains tokens with df >= min_df; with max_features, keeps the top-df
// tokens (lexicographic tie-break). Indices follow lexicographic token
// order so identical inputs always produce identical vocabularies.
inline Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& docs,
                                   const VocabularyConfig& config = {}) {
  if (docs.empty()) throw Error(ErrorKind::EmptyTrainingSet, "no documents to build vocabulary from");

  std::map<std::string, std::uint64_t> df;
  for (const auto& doc : docs) {
    std::set<std::string_view> seen;
    for (const auto& tok : doc) seen.insert(tok);
    for (auto tok : seen) ++df[std::string(tok)];
  }

  std::vector<std::pair<std::string, std::uint64_t>> kept;
  for (auto& [tok, count] : df) {
    if (count >= config.min_df) kept.emplace_back(tok, count);
  }
  if (config.max_features && kept.size() > *config.max_features) {
    std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    kept.resize(*config.max_features);
    std::sort(kept.begin(), kept.end());  // back to lexicographic for index assignment
  }
  if (kept.empty()) throw Error(ErrorKind::EmptyVocabulary, "no tokens survived vocabulary thresholds");

  std::vector<std::string> tokens;
  std::vector<std::uint64_t> freqs;
  tokens.reserve(kept.size());
  freqs.reserve(kept.size());
  for (auto& [tok, count] : kept) {
    tokens.push_back(tok);
    freqs.push_back(count);
  }
  return Vocabulary(std::move(tokens), std::move(freqs), docs.size(), config);
}

// counts: raw term counts. tfidf: count * (ln((1+N)/(1+df)) + 1), then
// L2-normalized. Out-of-vocabulary tokens are ignored.
inline SparseVector vectorize(const std::vector<std::string>& tokens, const Vocabulary& vocab,
                              WeightScheme scheme) {
  std::map<std::uint32_t, double> acc;
  for (const auto& tok : tokens) {
    if (auto idx = vocab.index_of(tok)) acc[*idx] += 1.0;
  }
  SparseVector v;
  v.entries.reserve(acc.size());
  if (scheme == WeightScheme::Counts) {
    for (auto& [idx, count] : acc) v.entries.emplace_back(idx, count);
    return v;
  }
  const double n = static_cast<double>(vocab.total_docs());
  double sq = 0.0;
  for (auto& [idx, count] : acc) {
    double idf = std::log((1.0 + n) / (1.0 + static_cast<double>(vocab.doc_freq()[idx]))) + 1.0;
    double w = count * idf;
    sq += w * w;
    v.entries.emplace_back(idx, w);
  }
  if (sq > 0.0) {
    double inv = 1.0 / std::sqrt(sq);
    for (auto& [idx, w] : v.entries) w *= inv;
  }
  return v;
}

inline double dot(const SparseVector& v, const std::vector<double>& dense) {
  double s = 0.0;
  for (const auto& [idx, w] : v.entries) s += w * dense[idx];
  return s;
}

}  // namespace tdscan

#pragma once

// Shared test fixtures: a keyword-planted synthetic corpus where every label
// is separable by construction, and block-structured confusion matrices with
// a known optimal partition.

#include <map>
#include <set>
#include <string>
#include <vector>

#include "tdscan/learn.hpp"
#include "tdscan/rng.hpp"
#include "tdscan/types.hpp"

namespace fixtures {

using tdscan::LabeledSentence;
using tdscan::TdType;

inline const std::map<std::string, std::vector<std::string>>& label_keywords() {
  static const std::map<std::string, std::vector<std::string>> keywords = {
      {"non_td", {"thanks", "welcome", "merged", "congrats", "approved"}},
      {"documentation", {"vignette", "readme", "docstring", "manual", "tutorial"}},
      {"code", {"refactor", "naming", "snake", "lint", "indentation"}},
      {"design", {"coupling", "interface", "modular", "abstraction", "pattern"}},
      {"defect", {"crash", "segfault", "incorrect", "overflow", "regression"}},
      {"requirement", {"usecase", "scope", "stakeholder", "feature", "specification"}},
      {"test", {"coverage", "testthat", "assertion", "mocking", "fixture"}},
      {"architecture", {"layering", "monolith", "subsystem", "decompose", "boundary"}},
      {"build", {"makefile", "compile", "toolchain", "linker", "cmake"}},
      {"usability", {"confusing", "ergonomic", "discoverable", "friendly", "onboarding"}},
      {"versioning", {"semver", "tagging", "release", "deprecate", "changelog"}},
  };
  return keywords;
}

inline const std::vector<std::string>& filler_words() {
  static const std::vector<std::string> words = {
      "package", "function", "comment", "review", "issue", "line",
      "file",    "maybe",    "really",  "small", "point", "note",
  };
  return words;
}

// `count` sentences per label (10 TD types + non_td), each carrying two
// tokens unique to its label plus shared filler.
inline std::vector<LabeledSentence> synthetic_corpus(std::size_t count_per_label,
                                                     std::uint64_t seed) {
  std::vector<LabeledSentence> out;
  tdscan::Rng rng(seed);
  int comment_counter = 0;
  for (const auto& [label, keywords] : label_keywords()) {
    for (std::size_t i = 0; i < count_per_label; ++i) {
      const std::string& kw1 = keywords[rng.uniform(keywords.size())];
      const std::string& kw2 = keywords[rng.uniform(keywords.size())];
      const std::string& f1 = filler_words()[rng.uniform(filler_words().size())];
      const std::string& f2 = filler_words()[rng.uniform(filler_words().size())];
      LabeledSentence s;
      s.text = "The " + f1 + " " + kw1 + " needs " + kw2 + " in this " + f2 + ".";
      s.label = tdscan::label_from_string(label);
      s.comment_id = "c" + std::to_string(comment_counter++);
      s.package = "pkg" + std::to_string(i % 7);
      s.platform = i % 2 == 0 ? "ropensci" : "bioconductor";
      s.created_at = std::to_string(2016 + i % 5) + "-06-01T00:00:00Z";
      s.augmented = false;
      out.push_back(std::move(s));
    }
  }
  return out;
}

// Confusion counts with uniform within-block confusion and zero cross-block
// mass; the Laplacian then has eigenvalue 0 once per block, so the eigengap
// sits exactly at the number of blocks and spectral clustering recovers them.
inline tdscan::ConfusionMatrix block_confusion(
    const std::vector<std::vector<std::string>>& blocks, std::int64_t within = 20) {
  tdscan::ConfusionMatrix m;
  std::vector<int> block_of;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    for (const auto& label : blocks[b]) {
      m.labels.push_back(label);
      block_of.push_back(static_cast<int>(b));
    }
  }
  const std::size_t n = m.labels.size();
  m.counts.assign(n, std::vector<std::int64_t>(n, 0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (block_of[i] == block_of[j]) m.counts[i][j] = within;
    }
  }
  return m;
}

// the published three-cluster grouping of the ten TD types
inline std::vector<std::vector<std::string>> reference_blocks() {
  return {{"documentation", "code", "defect", "test", "design"},
          {"build", "architecture", "versioning"},
          {"usability", "requirement"}};
}

inline std::set<std::set<std::string>> as_partition(const std::vector<std::vector<std::string>>& groups) {
  std::set<std::set<std::string>> p;
  for (const auto& g : groups) p.insert(std::set<std::string>(g.begin(), g.end()));
  return p;
}

}  // namespace fixtures

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tdscan/error.hpp"

namespace tdscan {

// The ten technical-debt categories tracked by the toolkit.
enum class TdType : int {
  Documentation = 0,
  Code,
  Design,
  Defect,
  Requirement,
  Test,
  Architecture,
  Build,
  Usability,
  Versioning,
};

inline constexpr int kTdTypeCount = 10;

inline constexpr std::array<std::string_view, kTdTypeCount> kTdTypeNames = {
    "documentation", "code",  "design", "defect",    "requirement",
    "test",          "architecture", "build",  "usability", "versioning",
};

inline const std::array<TdType, kTdTypeCount>& all_td_types() {
  static const std::array<TdType, kTdTypeCount> types = {
      TdType::Documentation, TdType::Code,         TdType::Design, TdType::Defect,
      TdType::Requirement,   TdType::Test,         TdType::Architecture,
      TdType::Build,         TdType::Usability,    TdType::Versioning,
  };
  return types;
}

inline std::string to_string(TdType t) { return std::string(kTdTypeNames[static_cast<int>(t)]); }

inline std::optional<TdType> td_type_from_string(std::string_view name) {
  for (int i = 0; i < kTdTypeCount; ++i) {
    if (kTdTypeNames[i] == name) return static_cast<TdType>(i);
  }
  return std::nullopt;
}

// nullopt means the sentence carries no technical debt ("non_td").
using SentenceLabel = std::optional<TdType>;

inline constexpr std::string_view kNonTdLabel = "non_td";

inline std::string label_to_string(const SentenceLabel& label) {
  return label ? to_string(*label) : std::string(kNonTdLabel);
}

inline SentenceLabel label_from_string(std::string_view s) {
  if (s == kNonTdLabel) return std::nullopt;
  auto t = td_type_from_string(s);
  if (!t) throw Error(ErrorKind::SerializationError, "unknown sentence label '" + std::string(s) + "'");
  return *t;
}

// One review-thread comment as pulled from an issue tracker.
struct RawComment {
  std::string platform;
  std::string package;
  std::int64_t issue_number = 0;
  std::string comment_id;
  std::string created_at;  // ISO-8601 UTC
  std::string body;
  std::string url;

  friend bool operator==(const RawComment&, const RawComment&) = default;
};

struct LabeledSentence {
  std::string text;
  SentenceLabel label;
  std::string comment_id;
  std::string package;
  std::string platform;
  std::string created_at;
  bool augmented = false;

  friend bool operator==(const LabeledSentence&, const LabeledSentence&) = default;
};

// Accepts "YYYY-MM-DD..." shapes; full ISO-8601 validation is out of scope,
// the corpus only needs the date prefix to be sane and the year extractable.
inline bool valid_timestamp(std::string_view ts) {
  if (ts.size() < 10) return false;
  for (int i : {0, 1, 2, 3, 5, 6, 8, 9}) {
    if (ts[static_cast<std::size_t>(i)] < '0' || ts[static_cast<std::size_t>(i)] > '9') return false;
  }
  return ts[4] == '-' && ts[7] == '-';
}

inline int year_of(std::string_view ts) {
  if (!valid_timestamp(ts)) {
    throw Error(ErrorKind::SerializationError, "bad timestamp '" + std::string(ts) + "'");
  }
  return (ts[0] - '0') * 1000 + (ts[1] - '0') * 100 + (ts[2] - '0') * 10 + (ts[3] - '0');
}

enum class PartOfSpeech { Adjective, Verb };

inline std::string to_string(PartOfSpeech p) {
  return p == PartOfSpeech::Adjective ? "adjective" : "verb";
}

inline PartOfSpeech pos_from_string(std::string_view s) {
  if (s == "adjective") return PartOfSpeech::Adjective;
  if (s == "verb") return PartOfSpeech::Verb;
  throw Error(ErrorKind::SerializationError, "unknown part of speech '" + std::string(s) + "'");
}

// (word, pos) -> ordered synonyms. Entries are lowercased on insert and the
// head word is never its own synonym.
class SynonymLexicon {
 public:
  void add(std::string word, PartOfSpeech pos, std::vector<std::string> synonyms);

  const std::vector<std::string>* lookup(const std::string& lower_word, PartOfSpeech pos) const {
    auto it = entries_.find({lower_word, pos});
    return it == entries_.end() ? nullptr : &it->second;
  }

  // synonyms under either tracked part of speech, adjective entries first
  std::vector<std::string> lookup_any(const std::string& lower_word) const {
    std::vector<std::string> out;
    for (auto pos : {PartOfSpeech::Adjective, PartOfSpeech::Verb}) {
      if (const auto* syns = lookup(lower_word, pos)) out.insert(out.end(), syns->begin(), syns->end());
    }
    return out;
  }

  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }

  const std::map<std::pair<std::string, PartOfSpeech>, std::vector<std::string>>& entries() const {
    return entries_;
  }

 private:
  std::map<std::pair<std::string, PartOfSpeech>, std::vector<std::string>> entries_;
};

inline std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

inline void SynonymLexicon::add(std::string word, PartOfSpeech pos, std::vector<std::string> synonyms) {
  word = ascii_lower(word);
  std::vector<std::string> kept;
  kept.reserve(synonyms.size());
  for (auto& s : synonyms) {
    std::string low = ascii_lower(s);
    if (!low.empty() && low != word) kept.push_back(std::move(low));
  }
  auto& slot = entries_[{std::move(word), pos}];
  for (auto& s : kept) slot.push_back(std::move(s));
}

}  // namespace tdscan

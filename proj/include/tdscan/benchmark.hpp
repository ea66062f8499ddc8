#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "tdscan/sentences.hpp"
#include "tdscan/types.hpp"

namespace tdscan {

// One manually labeled phrase from the source dataset.
struct LabeledPhrase {
  std::string comment_id;
  std::string phrase;
  TdType type;
};

struct DeriveResult {
  std::vector<LabeledSentence> sentences;
  std::vector<std::string> unresolved_comment_ids;
  // sentences that matched phrases of more than one type; all labels kept
  std::vector<std::string> multi_label_texts;
};

// lowercase + collapse whitespace runs + trim, for robust phrase containment
inline std::string normalize_for_match(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    if (detail::is_ascii_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    out.push_back(c);
  }
  return out;
}

// Expands labeled phrases into a sentence-level dataset: every sentence of a
// referenced comment is labeled with the type of any phrase it contains
// (normalized substring match); the rest become non-TD sentences.
inline DeriveResult derive_benchmark(const std::vector<LabeledPhrase>& phrases,
                                     const std::vector<RawComment>& comments) {
  std::map<std::string, const RawComment*> by_id;
  for (const auto& c : comments) by_id.emplace(c.comment_id, &c);

  // group phrases per comment, keeping first-appearance order of comments
  std::vector<std::string> comment_order;
  std::map<std::string, std::vector<const LabeledPhrase*>> grouped;
  for (const auto& p : phrases) {
    auto [it, inserted] = grouped.try_emplace(p.comment_id);
    if (inserted) comment_order.push_back(p.comment_id);
    it->second.push_back(&p);
  }

  DeriveResult result;
  std::set<std::tuple<std::string, std::string, std::string>> seen;  // (text, label, comment_id)

  for (const auto& cid : comment_order) {
    auto found = by_id.find(cid);
    if (found == by_id.end()) {
      result.unresolved_comment_ids.push_back(cid);
      continue;
    }
    const RawComment& comment = *found->second;
    const auto& comment_phrases = grouped[cid];

    for (const auto& sentence : split_sentences(comment.body)) {
      const std::string norm = normalize_for_match(sentence);
      std::set<TdType> matched;
      for (const auto* p : comment_phrases) {
        std::string pn = normalize_for_match(p->phrase);
        if (!pn.empty() && norm.find(pn) != std::string::npos) matched.insert(p->type);
      }
      if (matched.size() > 1) result.multi_label_texts.push_back(sentence);

      auto emit = [&](SentenceLabel label) {
        if (!seen.insert({sentence, label_to_string(label), cid}).second) return;
        LabeledSentence s;
        s.text = sentence;
        s.label = label;
        s.comment_id = cid;
        s.package = comment.package;
        s.platform = comment.platform;
        s.created_at = comment.created_at;
        s.augmented = false;
        result.sentences.push_back(std::move(s));
      };

      if (matched.empty()) {
        emit(std::nullopt);
      } else {
        for (TdType t : matched) emit(t);
      }
    }
  }
  return result;
}

}  // namespace tdscan

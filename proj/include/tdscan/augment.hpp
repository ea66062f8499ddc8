#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "tdscan/error.hpp"
#include "tdscan/rng.hpp"
#include "tdscan/types.hpp"

namespace tdscan {

namespace detail {

// word tokens with their [begin, end) spans, so replacements can be spliced
// back into the original sentence
struct WordSpan {
  std::size_t begin;
  std::size_t end;
  std::string lower;
  bool capitalized;
};

inline std::vector<WordSpan> word_spans(const std::string& text) {
  auto is_word_char = [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '\'' || c == '-';
  };
  std::vector<WordSpan> spans;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!is_word_char(text[i])) {
      ++i;
      continue;
    }
    std::size_t b = i;
    while (i < text.size() && is_word_char(text[i])) ++i;
    WordSpan w;
    w.begin = b;
    w.end = i;
    w.lower = ascii_lower(std::string_view(text).substr(b, i - b));
    w.capitalized = text[b] >= 'A' && text[b] <= 'Z';
    spans.push_back(std::move(w));
  }
  return spans;
}

inline std::string apply_replacements(const std::string& text, const std::vector<WordSpan>& spans,
                                      const std::map<std::size_t, std::string>& replacement_by_span) {
  std::string out;
  out.reserve(text.size());
  std::size_t cursor = 0;
  for (std::size_t si = 0; si < spans.size(); ++si) {
    auto it = replacement_by_span.find(si);
    if (it == replacement_by_span.end()) continue;
    out.append(text, cursor, spans[si].begin - cursor);
    std::string word = it->second;
    if (spans[si].capitalized && !word.empty() && word[0] >= 'a' && word[0] <= 'z') {
      word[0] = static_cast<char>(word[0] - 'a' + 'A');
    }
    out.append(word);
    cursor = spans[si].end;
  }
  out.append(text, cursor, text.size() - cursor);
  return out;
}

}  // namespace detail

// Upsamples underfilled TD classes by replacing lexicon-tagged adjectives and
// verbs with synonyms. Originals pass through untouched; generated sentences
// are appended with augmented=true and per-class counts equal to targets.
inline std::vector<LabeledSentence> augment(const std::vector<LabeledSentence>& sentences,
                                            const SynonymLexicon& lexicon,
                                            const std::map<TdType, std::size_t>& targets,
                                            std::uint64_t seed) {
  std::map<TdType, std::vector<std::size_t>> by_type;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    if (sentences[i].label) by_type[*sentences[i].label].push_back(i);
  }
  for (const auto& [type, target] : targets) {
    std::size_t current = by_type.count(type) ? by_type[type].size() : 0;
    if (target < current) {
      throw Error(ErrorKind::InvalidArgument,
                  "target for " + to_string(type) + " is below current count");
    }
  }

  std::vector<LabeledSentence> out = sentences;

  for (TdType type : all_td_types()) {
    auto t_it = targets.find(type);
    if (t_it == targets.end()) continue;
    const auto& source_indices = by_type[type];
    std::size_t need = t_it->second - source_indices.size();
    if (need == 0) continue;

    // sources that actually have at least one replaceable token
    std::vector<std::size_t> usable;
    for (std::size_t idx : source_indices) {
      for (const auto& w : detail::word_spans(sentences[idx].text)) {
        if (!lexicon.lookup_any(w.lower).empty()) {
          usable.push_back(idx);
          break;
        }
      }
    }
    if (usable.empty()) {
      throw Error(ErrorKind::InsufficientLexicon,
                  "no source sentence of type " + to_string(type) + " has a replaceable token");
    }

    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(type)));
    for (std::size_t n = 0; n < need; ++n) {
      const LabeledSentence& source = sentences[rng.choice(usable)];
      auto spans = detail::word_spans(source.text);

      std::vector<std::size_t> replaceable;
      for (std::size_t si = 0; si < spans.size(); ++si) {
        if (!lexicon.lookup_any(spans[si].lower).empty()) replaceable.push_back(si);
      }
      // one or more substitutions
      std::size_t count = 1 + rng.uniform(replaceable.size());
      rng.shuffle(replaceable);
      replaceable.resize(count);
      std::sort(replaceable.begin(), replaceable.end());

      std::map<std::size_t, std::string> chosen;
      for (std::size_t si : replaceable) {
        auto syns = lexicon.lookup_any(spans[si].lower);
        chosen[si] = syns[rng.uniform(syns.size())];
      }

      LabeledSentence generated = source;
      generated.text = detail::apply_replacements(source.text, spans, chosen);
      generated.augmented = true;  // comment_id keeps pointing at the source comment
      out.push_back(std::move(generated));
    }
  }
  return out;
}

// Default CLI policy: raise every TD class to min(2 * median count, max
// count), never below its current count.
inline std::map<TdType, std::size_t> default_augment_targets(
    const std::vector<LabeledSentence>& sentences) {
  std::map<TdType, std::size_t> counts;
  for (const auto& s : sentences) {
    if (s.label) ++counts[*s.label];
  }
  if (counts.empty()) return {};
  std::vector<std::size_t> values;
  for (const auto& [t, c] : counts) values.push_back(c);
  std::sort(values.begin(), values.end());
  std::size_t median = values[values.size() / 2];
  std::size_t cap = values.back();
  std::size_t goal = std::min(2 * median, cap);

  std::map<TdType, std::size_t> targets;
  for (const auto& [t, c] : counts) targets[t] = std::max(c, goal);
  return targets;
}

}  // namespace tdscan

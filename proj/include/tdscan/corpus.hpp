#pragma once

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tdscan/error.hpp"
#include "tdscan/sentences.hpp"
#include "tdscan/types.hpp"

namespace tdscan {

using json = nlohmann::json;

// Shortest decimal form that parses back to the identical double.
inline std::string double_to_string(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw Error(ErrorKind::SerializationError, "double formatting failed");
  return std::string(buf, ptr);
}

inline double double_from_string(const std::string& s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorKind::SerializationError, "bad double literal '" + s + "'");
  }
  return v;
}

inline json comment_to_json(const RawComment& c) {
  return json{{"platform", c.platform},     {"package", c.package},
              {"issue_number", c.issue_number}, {"comment_id", c.comment_id},
              {"created_at", c.created_at}, {"body", c.body},
              {"url", c.url}};
}

inline RawComment comment_from_json(const json& j) {
  RawComment c;
  try {
    c.platform = j.at("platform").get<std::string>();
    c.package = j.at("package").get<std::string>();
    c.issue_number = j.at("issue_number").get<std::int64_t>();
    c.comment_id = j.at("comment_id").get<std::string>();
    c.created_at = j.at("created_at").get<std::string>();
    c.body = j.at("body").get<std::string>();
    c.url = j.at("url").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::SerializationError, std::string("bad comment record: ") + e.what());
  }
  if (!valid_timestamp(c.created_at)) {
    throw Error(ErrorKind::SerializationError, "comment " + c.comment_id + " has bad created_at");
  }
  return c;
}

inline json sentence_to_json(const LabeledSentence& s) {
  return json{{"text", s.text},           {"label", label_to_string(s.label)},
              {"comment_id", s.comment_id}, {"package", s.package},
              {"platform", s.platform},   {"created_at", s.created_at},
              {"augmented", s.augmented}};
}

inline LabeledSentence sentence_from_json(const json& j) {
  LabeledSentence s;
  try {
    s.text = j.at("text").get<std::string>();
    s.label = label_from_string(j.at("label").get<std::string>());
    s.comment_id = j.at("comment_id").get<std::string>();
    s.package = j.at("package").get<std::string>();
    s.platform = j.at("platform").get<std::string>();
    s.created_at = j.at("created_at").get<std::string>();
    s.augmented = j.at("augmented").get<bool>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::SerializationError, std::string("bad sentence record: ") + e.what());
  }
  return s;
}

namespace detail {

template <typename T, typename ToJson>
std::size_t write_jsonl(const std::vector<T>& records, const std::string& path, ToJson to_json_fn,
                        bool append) {
  std::ofstream out(path, append ? (std::ios::app | std::ios::binary) : std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot open '" + path + "' for writing");
  for (const auto& rec : records) {
    std::string line = to_json_fn(rec).dump();
    line.push_back('\n');
    out.write(line.data(), static_cast<std::streamsize>(line.size()));  // one line per write
    if (!out) throw Error(ErrorKind::IoError, "write failed for '" + path + "'");
  }
  out.flush();
  if (!out) throw Error(ErrorKind::IoError, "flush failed for '" + path + "'");
  return records.size();
}

template <typename FromJson>
auto read_jsonl(const std::string& path, FromJson from_json_fn)
    -> std::vector<decltype(from_json_fn(json{}))> {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open '" + path + "' for reading");
  std::vector<decltype(from_json_fn(json{}))> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw Error(ErrorKind::SerializationError,
                  path + ":" + std::to_string(lineno) + ": invalid JSON");
    }
    records.push_back(from_json_fn(j));
  }
  return records;
}

}  // namespace detail

inline std::size_t persist_corpus(const std::vector<RawComment>& comments, const std::string& path,
                                  bool append = false) {
  return detail::write_jsonl(comments, path, comment_to_json, append);
}

inline std::vector<RawComment> load_corpus(const std::string& path) {
  auto comments = detail::read_jsonl(path, comment_from_json);
  std::map<std::string, int> seen;
  for (const auto& c : comments) {
    if (++seen[c.comment_id] == 2) {
      throw Error(ErrorKind::SerializationError, "duplicate comment_id '" + c.comment_id + "'");
    }
  }
  return comments;
}

// Streaming JSONL writer for the crawler; appends are serialized by the
// single owning instance.
class CorpusWriter {
 public:
  explicit CorpusWriter(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw Error(ErrorKind::IoError, "cannot open '" + path + "' for writing");
  }

  void write(const RawComment& c) {
    std::string line = comment_to_json(c).dump();
    line.push_back('\n');
    out_.write(line.data(), static_cast<std::streamsize>(line.size()));
    if (!out_) throw Error(ErrorKind::IoError, "corpus write failed");
    ++count_;
  }

  std::size_t count() const { return count_; }

 private:
  std::ofstream out_;
  std::size_t count_ = 0;
};

inline std::size_t save_dataset(const std::vector<LabeledSentence>& sentences,
                                const std::string& path) {
  return detail::write_jsonl(sentences, path, sentence_to_json, false);
}

inline std::vector<LabeledSentence> load_dataset(const std::string& path) {
  return detail::read_jsonl(path, sentence_from_json);
}

inline SynonymLexicon load_lexicon(const std::string& path) {
  SynonymLexicon lex;
  detail::read_jsonl(path, [&](const json& j) {
    try {
      lex.add(j.at("word").get<std::string>(), pos_from_string(j.at("pos").get<std::string>()),
              j.at("synonyms").get<std::vector<std::string>>());
    } catch (const json::exception& e) {
      throw Error(ErrorKind::SerializationError, std::string("bad lexicon record: ") + e.what());
    }
    return 0;
  });
  return lex;
}

}  // namespace tdscan

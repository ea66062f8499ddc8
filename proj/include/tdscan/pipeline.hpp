#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "tdscan/corpus.hpp"
#include "tdscan/hierarchy.hpp"
#include "tdscan/learn.hpp"
#include "tdscan/sentences.hpp"
#include "tdscan/textfeat.hpp"
#include "tdscan/types.hpp"

namespace tdscan {

inline constexpr std::string_view kGateTd = "td";
inline constexpr int kModelSchemaVersion = 1;

struct PipelineMetadata {
  std::uint64_t seed = 0;
  // left empty unless the caller supplies a timestamp, so retraining with
  // the same seed stays byte-identical
  std::string created_at;

  friend bool operator==(const PipelineMetadata&, const PipelineMetadata&) = default;
};

// Gate + cluster router + per-cluster leaf classifiers over one shared
// vocabulary. Immutable once trained; safe to share across readers.
struct PipelineModel {
  Vocabulary vocabulary;
  ClassifierSpec spec;
  TrainedClassifier stage1;  // labels: non_td, td
  TypeHierarchy hierarchy;
  TrainedClassifier router;  // labels: cluster names
  std::map<std::string, TrainedClassifier> leaf_models;  // multi-type clusters only
  PipelineMetadata metadata;
  // optional operating point for the gate: pass a sentence to stage-2 only
  // when score(td) - score(non_td) >= threshold; unset means plain argmax
  std::optional<double> gate_threshold;

  void validate() const {
    if (stage1.labels() != std::vector<std::string>{std::string(kNonTdLabel), "td"}) {
      throw Error(ErrorKind::CorruptModel, "stage-1 labels must be [non_td, td]");
    }
    if (router.labels() != hierarchy.cluster_names()) {
      throw Error(ErrorKind::CorruptModel, "router labels do not match hierarchy clusters");
    }
    for (const auto& cluster : hierarchy.clusters) {
      if (cluster.types.size() < 2) continue;
      auto it = leaf_models.find(cluster.name);
      if (it == leaf_models.end()) {
        throw Error(ErrorKind::CorruptModel, "missing leaf model for " + cluster.name);
      }
      if (it->second.labels() != cluster.types) {
        throw Error(ErrorKind::CorruptModel, "leaf labels mismatch for " + cluster.name);
      }
    }
    for (const auto* clf : {&stage1, &router}) {
      if (clf->vocab_size() != vocabulary.size()) {
        throw Error(ErrorKind::CorruptModel, "classifier/vocabulary size mismatch");
      }
    }
    for (const auto& [name, clf] : leaf_models) {
      if (clf.vocab_size() != vocabulary.size()) {
        throw Error(ErrorKind::CorruptModel, "classifier/vocabulary size mismatch");
      }
    }
  }
};

struct InduceHierarchy {
  int k_max = 0;  // 0 selects n-1
  std::uint32_t folds = 5;
};

using HierarchySource = std::variant<InduceHierarchy, TypeHierarchy>;

// One detected TD sentence with provenance and the scores of every stage
// that was consulted.
struct TdInstance {
  std::string text;
  TdType type = TdType::Documentation;
  std::string cluster;
  std::map<std::string, double> gate_scores;
  std::map<std::string, double> router_scores;
  std::optional<std::map<std::string, double>> leaf_scores;  // absent for singleton clusters
  std::string comment_id;
  std::string url;
  std::string package;
  std::string platform;
  std::string created_at;
  int sentence_index = 0;
};

namespace detail {

inline std::map<std::string, double> score_map(const TrainedClassifier& model,
                                               const std::vector<double>& scores) {
  std::map<std::string, double> m;
  for (std::size_t i = 0; i < model.labels().size(); ++i) m[model.labels()[i]] = scores[i];
  return m;
}

}  // namespace detail

inline PipelineModel train_pipeline(const std::vector<LabeledSentence>& dataset,
                                    const ClassifierSpec& spec, const HierarchySource& source,
                                    std::uint64_t seed, const VocabularyConfig& vocab_config = {},
                                    const std::string& created_at = "") {
  spec.validate();
  if (dataset.empty()) throw Error(ErrorKind::EmptyTrainingSet, "empty dataset");

  std::set<TdType> td_types_present;
  bool has_non_td = false;
  for (const auto& s : dataset) {
    if (s.label) {
      td_types_present.insert(*s.label);
    } else {
      has_non_td = true;
    }
  }
  if (!has_non_td || td_types_present.size() < 2) {
    throw Error(ErrorKind::InvalidArgument, "dataset needs non-TD sentences and >= 2 TD types");
  }

  PipelineModel model;
  model.spec = spec;
  model.metadata.seed = seed;
  model.metadata.created_at = created_at;

  std::vector<std::vector<std::string>> docs;
  docs.reserve(dataset.size());
  for (const auto& s : dataset) docs.push_back(tokenize(s.text, vocab_config.tokenizer));
  model.vocabulary = build_vocabulary(docs, vocab_config);

  std::vector<SparseVector> vectors;
  vectors.reserve(dataset.size());
  for (const auto& doc : docs) vectors.push_back(vectorize(doc, model.vocabulary, spec.scheme));

  // stage-1 gate on the td / non_td relabeling
  {
    std::vector<TrainingExample> gate_examples;
    gate_examples.reserve(dataset.size());
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      gate_examples.push_back(
          {vectors[i], dataset[i].label ? std::string(kGateTd) : std::string(kNonTdLabel)});
    }
    ClassifierSpec gate_spec = spec;
    gate_spec.seed = mix_seed(seed, 1);
    model.stage1 = train(gate_examples, gate_spec,
                         {std::string(kNonTdLabel), std::string(kGateTd)},
                         model.vocabulary.size());
  }

  // TD-only view for everything below
  std::vector<TrainingExample> td_examples;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (dataset[i].label) td_examples.push_back({vectors[i], to_string(*dataset[i].label)});
  }

  if (const auto* preset = std::get_if<TypeHierarchy>(&source)) {
    model.hierarchy = *preset;
  } else {
    const auto& induce = std::get<InduceHierarchy>(source);
    std::vector<std::string> type_labels;
    for (TdType t : all_td_types()) {
      if (td_types_present.count(t)) type_labels.push_back(to_string(t));
    }
    ConfusionMatrix confusion = cv_confusion(td_examples, spec, type_labels, induce.folds,
                                             mix_seed(seed, 2), model.vocabulary.size());
    const int k_max =
        induce.k_max > 0 ? induce.k_max : static_cast<int>(type_labels.size()) - 1;
    model.hierarchy = induce_hierarchy(confusion, k_max, mix_seed(seed, 3));
  }
  if (model.hierarchy.clusters.size() < 2) {
    throw Error(ErrorKind::InvalidArgument, "hierarchy needs >= 2 clusters to route");
  }

  // every hierarchy type must be backed by sentences, and every sentence
  // type must be routable
  std::map<std::string, std::size_t> type_counts;
  for (const auto& ex : td_examples) ++type_counts[ex.label];
  for (const auto& cluster : model.hierarchy.clusters) {
    for (const auto& type : cluster.types) {
      if (!type_counts.count(type)) {
        throw Error(ErrorKind::MissingClusterData,
                    cluster.name + " type '" + type + "' has zero sentences");
      }
    }
  }
  for (const auto& [type, count] : type_counts) {
    if (!model.hierarchy.cluster_of(type)) {
      throw Error(ErrorKind::InvalidArgument, "dataset type '" + type + "' missing from hierarchy");
    }
  }

  // cluster router
  {
    std::vector<TrainingExample> router_examples;
    router_examples.reserve(td_examples.size());
    for (const auto& ex : td_examples) {
      router_examples.push_back({ex.features, model.hierarchy.cluster_of(ex.label)->name});
    }
    ClassifierSpec router_spec = spec;
    router_spec.seed = mix_seed(seed, 4);
    model.router = train(router_examples, router_spec, model.hierarchy.cluster_names(),
                         model.vocabulary.size());
  }

  // per-cluster leaf classifiers; singleton clusters need none
  for (std::size_t c = 0; c < model.hierarchy.clusters.size(); ++c) {
    const auto& cluster = model.hierarchy.clusters[c];
    if (cluster.types.size() < 2) continue;
    std::vector<TrainingExample> leaf_examples;
    for (const auto& ex : td_examples) {
      if (std::find(cluster.types.begin(), cluster.types.end(), ex.label) != cluster.types.end()) {
        leaf_examples.push_back(ex);
      }
    }
    ClassifierSpec leaf_spec = spec;
    leaf_spec.seed = mix_seed(seed, 16 + c);
    model.leaf_models.emplace(
        cluster.name, train(leaf_examples, leaf_spec, cluster.types, model.vocabulary.size()));
  }
  return model;
}

// Per-stage record of one sentence's trip through the pipeline. Stage-2
// fields stay empty when the gate discards the sentence.
struct SentenceTrace {
  std::map<std::string, double> gate_scores;
  std::optional<std::map<std::string, double>> router_scores;
  std::optional<std::map<std::string, double>> leaf_scores;
  std::optional<TdInstance> instance;
};

inline SentenceTrace classify_sentence_trace(const PipelineModel& model, const std::string& text) {
  SentenceTrace trace;
  const auto tokens = tokenize(text, model.vocabulary.config().tokenizer);
  const SparseVector v = vectorize(tokens, model.vocabulary, model.spec.scheme);

  const Prediction gate = predict(model.stage1, v);
  trace.gate_scores = detail::score_map(model.stage1, gate.scores);
  const bool is_td = model.gate_threshold
                         ? (gate.scores[1] - gate.scores[0] >= *model.gate_threshold)
                         : gate.label == kGateTd;
  if (!is_td) return trace;

  const Prediction routed = predict(model.router, v);
  trace.router_scores = detail::score_map(model.router, routed.scores);

  const TypeCluster* cluster = nullptr;
  for (const auto& c : model.hierarchy.clusters) {
    if (c.name == routed.label) cluster = &c;
  }
  if (cluster == nullptr) throw Error(ErrorKind::CorruptModel, "router label has no cluster");

  std::string type_name;
  if (cluster->types.size() == 1) {
    type_name = cluster->types.front();
  } else {
    const Prediction leaf = predict(model.leaf_models.at(cluster->name), v);
    trace.leaf_scores = detail::score_map(model.leaf_models.at(cluster->name), leaf.scores);
    type_name = leaf.label;
  }
  auto type = td_type_from_string(type_name);
  if (!type) throw Error(ErrorKind::CorruptModel, "leaf label '" + type_name + "' is not a TD type");

  TdInstance instance;
  instance.text = text;
  instance.type = *type;
  instance.cluster = cluster->name;
  instance.gate_scores = trace.gate_scores;
  instance.router_scores = *trace.router_scores;
  instance.leaf_scores = trace.leaf_scores;
  trace.instance = std::move(instance);
  return trace;
}

inline std::optional<TdInstance> classify_sentence(const PipelineModel& model,
                                                   const std::string& text) {
  return classify_sentence_trace(model, text).instance;
}

inline std::vector<TdInstance> classify_comment(const PipelineModel& model,
                                                const RawComment& comment) {
  std::vector<TdInstance> out;
  const auto sentences = split_sentences(comment.body);
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    auto instance = classify_sentence(model, sentences[i]);
    if (!instance) continue;
    instance->comment_id = comment.comment_id;
    instance->url = comment.url;
    instance->package = comment.package;
    instance->platform = comment.platform;
    instance->created_at = comment.created_at;
    instance->sentence_index = static_cast<int>(i);
    out.push_back(std::move(*instance));
  }
  return out;
}

// --- serialization ---------------------------------------------------------

namespace detail {

inline json spec_to_json(const ClassifierSpec& s) {
  return {{"kind", to_string(s.kind)},
          {"alpha", double_to_string(s.alpha)},
          {"epochs", s.epochs},
          {"learning_rate", double_to_string(s.learning_rate)},
          {"lambda", double_to_string(s.lambda)},
          {"seed", s.seed},
          {"scheme", to_string(s.scheme)}};
}

inline ClassifierSpec spec_from_json(const json& j) {
  ClassifierSpec s;
  s.kind = classifier_kind_from_string(j.at("kind").get<std::string>());
  s.alpha = double_from_string(j.at("alpha").get<std::string>());
  s.epochs = j.at("epochs").get<std::uint32_t>();
  s.learning_rate = double_from_string(j.at("learning_rate").get<std::string>());
  s.lambda = double_from_string(j.at("lambda").get<std::string>());
  s.seed = j.at("seed").get<std::uint64_t>();
  s.scheme = scheme_from_string(j.at("scheme").get<std::string>());
  return s;
}

inline json classifier_to_json(const TrainedClassifier& c) {
  json weights = json::array();
  for (const auto& row : c.weights()) {
    json r = json::array();
    for (double w : row) r.push_back(double_to_string(w));
    weights.push_back(std::move(r));
  }
  json bias = json::array();
  for (double b : c.bias()) bias.push_back(double_to_string(b));
  return {{"labels", c.labels()},
          {"weights", std::move(weights)},
          {"bias", std::move(bias)},
          {"spec", spec_to_json(c.spec())},
          {"vocab_size", c.vocab_size()}};
}

inline TrainedClassifier classifier_from_json(const json& j) {
  std::vector<std::vector<double>> weights;
  for (const auto& row : j.at("weights")) {
    std::vector<double> r;
    r.reserve(row.size());
    for (const auto& w : row) r.push_back(double_from_string(w.get<std::string>()));
    weights.push_back(std::move(r));
  }
  std::vector<double> bias;
  for (const auto& b : j.at("bias")) bias.push_back(double_from_string(b.get<std::string>()));
  return TrainedClassifier(j.at("labels").get<std::vector<std::string>>(), std::move(weights),
                           std::move(bias), spec_from_json(j.at("spec")),
                           j.at("vocab_size").get<std::size_t>());
}

inline json vocabulary_to_json(const Vocabulary& v) {
  json max_features;
  if (v.config().max_features) max_features = *v.config().max_features;
  return {{"tokens", v.tokens()},
          {"doc_freq", v.doc_freq()},
          {"total_docs", v.total_docs()},
          {"config",
           {{"lowercase", v.config().tokenizer.lowercase},
            {"use_stopwords", v.config().tokenizer.use_stopwords},
            {"min_token_length", v.config().tokenizer.min_token_length},
            {"min_df", v.config().min_df},
            {"max_features", max_features}}}};
}

inline Vocabulary vocabulary_from_json(const json& j) {
  VocabularyConfig config;
  const auto& c = j.at("config");
  config.tokenizer.lowercase = c.at("lowercase").get<bool>();
  config.tokenizer.use_stopwords = c.at("use_stopwords").get<bool>();
  config.tokenizer.min_token_length = c.at("min_token_length").get<std::size_t>();
  config.min_df = c.at("min_df").get<std::size_t>();
  if (!c.at("max_features").is_null()) {
    config.max_features = c.at("max_features").get<std::size_t>();
  }
  return Vocabulary(j.at("tokens").get<std::vector<std::string>>(),
                    j.at("doc_freq").get<std::vector<std::uint64_t>>(),
                    j.at("total_docs").get<std::uint64_t>(), config);
}

}  // namespace detail

inline json model_to_json(const PipelineModel& m) {
  json leaves = json::object();
  for (const auto& [name, clf] : m.leaf_models) leaves[name] = detail::classifier_to_json(clf);
  json gate_threshold;
  if (m.gate_threshold) gate_threshold = double_to_string(*m.gate_threshold);
  return {{"schema_version", kModelSchemaVersion},
          {"metadata", {{"seed", m.metadata.seed}, {"created_at", m.metadata.created_at}}},
          {"spec", detail::spec_to_json(m.spec)},
          {"gate_threshold", std::move(gate_threshold)},
          {"vocabulary", detail::vocabulary_to_json(m.vocabulary)},
          {"hierarchy", hierarchy_to_json(m.hierarchy)},
          {"stage1", detail::classifier_to_json(m.stage1)},
          {"router", detail::classifier_to_json(m.router)},
          {"leaf_models", std::move(leaves)}};
}

inline void save_model(const PipelineModel& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot open '" + path + "' for writing");
  out << model_to_json(m).dump(1) << '\n';
  if (!out) throw Error(ErrorKind::IoError, "model write failed");
}

inline PipelineModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open model '" + path + "'");
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorKind::CorruptModel, "model file is not valid JSON");
  if (!j.is_object() || !j.contains("schema_version") ||
      !j.at("schema_version").is_number_integer()) {
    throw Error(ErrorKind::CorruptModel, "model file lacks schema_version");
  }
  if (j.at("schema_version").get<int>() != kModelSchemaVersion) {
    throw Error(ErrorKind::SchemaMismatch,
                "unsupported model schema_version " + j.at("schema_version").dump());
  }
  try {
    PipelineModel m;
    m.metadata.seed = j.at("metadata").at("seed").get<std::uint64_t>();
    m.metadata.created_at = j.at("metadata").at("created_at").get<std::string>();
    m.spec = detail::spec_from_json(j.at("spec"));
    m.vocabulary = detail::vocabulary_from_json(j.at("vocabulary"));
    m.hierarchy = hierarchy_from_json(j.at("hierarchy"));
    m.stage1 = detail::classifier_from_json(j.at("stage1"));
    m.router = detail::classifier_from_json(j.at("router"));
    for (const auto& [name, clf] : j.at("leaf_models").items()) {
      m.leaf_models.emplace(name, detail::classifier_from_json(clf));
    }
    if (j.contains("gate_threshold") && !j.at("gate_threshold").is_null()) {
      m.gate_threshold = double_from_string(j.at("gate_threshold").get<std::string>());
    }
    m.validate();
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::CorruptModel, std::string("model file malformed: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::CorruptModel || e.kind() == ErrorKind::SchemaMismatch) throw;
    throw Error(ErrorKind::CorruptModel, e.message());
  }
}

// --- TdInstance JSONL ------------------------------------------------------

inline json instance_to_json(const TdInstance& i) {
  json leaf;
  if (i.leaf_scores) leaf = *i.leaf_scores;
  return {{"text", i.text},
          {"type", to_string(i.type)},
          {"cluster", i.cluster},
          {"gate_scores", i.gate_scores},
          {"router_scores", i.router_scores},
          {"leaf_scores", std::move(leaf)},
          {"comment_id", i.comment_id},
          {"url", i.url},
          {"package", i.package},
          {"platform", i.platform},
          {"created_at", i.created_at},
          {"sentence_index", i.sentence_index}};
}

inline TdInstance instance_from_json(const json& j) {
  try {
    TdInstance i;
    i.text = j.at("text").get<std::string>();
    auto type = td_type_from_string(j.at("type").get<std::string>());
    if (!type) throw Error(ErrorKind::SerializationError, "unknown TD type in instance");
    i.type = *type;
    i.cluster = j.at("cluster").get<std::string>();
    i.gate_scores = j.at("gate_scores").get<std::map<std::string, double>>();
    i.router_scores = j.at("router_scores").get<std::map<std::string, double>>();
    if (!j.at("leaf_scores").is_null()) {
      i.leaf_scores = j.at("leaf_scores").get<std::map<std::string, double>>();
    }
    i.comment_id = j.at("comment_id").get<std::string>();
    i.url = j.at("url").get<std::string>();
    i.package = j.at("package").get<std::string>();
    i.platform = j.at("platform").get<std::string>();
    i.created_at = j.at("created_at").get<std::string>();
    i.sentence_index = j.at("sentence_index").get<int>();
    return i;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::SerializationError, std::string("bad instance record: ") + e.what());
  }
}

inline std::size_t save_instances(const std::vector<TdInstance>& instances,
                                  const std::string& path) {
  return detail::write_jsonl(instances, path, instance_to_json, false);
}

inline std::vector<TdInstance> load_instances(const std::string& path) {
  return detail::read_jsonl(path, instance_from_json);
}

}  // namespace tdscan

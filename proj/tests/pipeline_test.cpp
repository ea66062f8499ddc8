#include "tdscan/pipeline.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "support/fixtures.hpp"
#include "tdscan/eval.hpp"

using namespace tdscan;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ClassifierSpec default_spec(std::uint64_t seed = 7) {
  ClassifierSpec spec;
  spec.kind = ClassifierKind::Linear;
  spec.seed = seed;
  return spec;
}

TypeHierarchy reference_hierarchy() {
  TypeHierarchy h;
  for (std::size_t i = 0; i < fixtures::reference_blocks().size(); ++i) {
    h.clusters.push_back(
        {"Cluster-" + std::to_string(i + 1), fixtures::reference_blocks()[i]});
  }
  return h;
}

}  // namespace

TEST(TrainPipeline, PresetHierarchyShape) {
  auto data = fixtures::synthetic_corpus(20, 3);
  auto model = train_pipeline(data, default_spec(), reference_hierarchy(), 7);
  // 1 gate + 1 router + 3 leaf models for clusters of 5/3/2 types
  EXPECT_EQ(model.stage1.labels(), (std::vector<std::string>{"non_td", "td"}));
  EXPECT_EQ(model.router.labels().size(), 3u);
  EXPECT_EQ(model.leaf_models.size(), 3u);
  EXPECT_EQ(model.leaf_models.at("Cluster-1").labels().size(), 5u);
  EXPECT_EQ(model.leaf_models.at("Cluster-2").labels().size(), 3u);
  EXPECT_EQ(model.leaf_models.at("Cluster-3").labels().size(), 2u);
}

TEST(TrainPipeline, SeparableCorpusPerfectTrainingAccuracy) {
  auto data = fixtures::synthetic_corpus(15, 11);
  auto model = train_pipeline(data, default_spec(), InduceHierarchy{}, 11);
  std::size_t correct = 0;
  for (const auto& s : data) {
    auto instance = classify_sentence(model, s.text);
    const std::string predicted = instance ? to_string(instance->type) : std::string(kNonTdLabel);
    if (predicted == label_to_string(s.label)) ++correct;
  }
  EXPECT_EQ(correct, data.size());
}

TEST(TrainPipeline, DeterministicModelFiles) {
  auto data = fixtures::synthetic_corpus(10, 5);
  const auto path_a = temp_path("tdscan_model_a.json");
  const auto path_b = temp_path("tdscan_model_b.json");
  save_model(train_pipeline(data, default_spec(), InduceHierarchy{}, 99), path_a);
  save_model(train_pipeline(data, default_spec(), InduceHierarchy{}, 99), path_b);
  EXPECT_EQ(slurp(path_a), slurp(path_b));
  std::filesystem::remove(path_a);
  std::filesystem::remove(path_b);
}

TEST(TrainPipeline, MissingClusterData) {
  auto data = fixtures::synthetic_corpus(8, 2);
  // drop every versioning sentence; the preset hierarchy still names it
  std::erase_if(data, [](const LabeledSentence& s) {
    return s.label == SentenceLabel(TdType::Versioning);
  });
  try {
    train_pipeline(data, default_spec(), reference_hierarchy(), 3);
    FAIL() << "expected MissingClusterData";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MissingClusterData);
  }
}

TEST(TrainPipeline, RequiresNonTdAndTwoTypes) {
  std::vector<LabeledSentence> only_td;
  for (const auto& s : fixtures::synthetic_corpus(6, 2)) {
    if (s.label) only_td.push_back(s);
  }
  EXPECT_THROW(train_pipeline(only_td, default_spec(), InduceHierarchy{}, 1), Error);
}

TEST(ClassifySentence, RoutingConsistency) {
  auto data = fixtures::synthetic_corpus(15, 9);
  auto model = train_pipeline(data, default_spec(), InduceHierarchy{}, 9);
  for (const auto& s : data) {
    auto instance = classify_sentence(model, s.text);
    if (!instance) continue;
    const auto* cluster = model.hierarchy.cluster_of(to_string(instance->type));
    ASSERT_NE(cluster, nullptr);
    EXPECT_EQ(cluster->name, instance->cluster);
  }
}

TEST(ClassifySentence, DiscardContractSkipsStageTwo) {
  auto data = fixtures::synthetic_corpus(15, 13);
  auto model = train_pipeline(data, default_spec(), reference_hierarchy(), 13);
  bool saw_discard = false, saw_td = false;
  for (const auto& s : data) {
    auto trace = classify_sentence_trace(model, s.text);
    if (!trace.instance) {
      saw_discard = true;
      EXPECT_FALSE(trace.router_scores.has_value());
      EXPECT_FALSE(trace.leaf_scores.has_value());
    } else {
      saw_td = true;
      EXPECT_TRUE(trace.router_scores.has_value());
    }
    EXPECT_FALSE(trace.gate_scores.empty());
  }
  EXPECT_TRUE(saw_discard);
  EXPECT_TRUE(saw_td);
}

TEST(ClassifySentence, OutOfVocabularyFallsBackToPrior) {
  // non_td dominates, so the prior-only path discards the sentence
  auto data = fixtures::synthetic_corpus(5, 17);
  for (int i = 0; i < 60; ++i) {
    LabeledSentence filler;
    filler.text = "Thanks so much for the thorough and kind review number " + std::to_string(i) + ".";
    filler.label = std::nullopt;
    filler.comment_id = "fill" + std::to_string(i);
    filler.created_at = "2020-01-01T00:00:00Z";
    data.push_back(filler);
  }
  ClassifierSpec spec;
  spec.kind = ClassifierKind::Probabilistic;
  spec.scheme = WeightScheme::Counts;
  auto model = train_pipeline(data, spec, reference_hierarchy(), 17);
  EXPECT_FALSE(classify_sentence(model, "zzzqqq xxyyzz").has_value());
}

TEST(ClassifyComment, SplitsAndKeepsOrder) {
  auto data = fixtures::synthetic_corpus(15, 19);
  auto model = train_pipeline(data, default_spec(), reference_hierarchy(), 19);

  RawComment comment;
  comment.platform = "ropensci";
  comment.package = "pkg";
  comment.issue_number = 7;
  comment.comment_id = "c77";
  comment.created_at = "2019-05-01T00:00:00Z";
  comment.url = "https://example.org/7#c77";
  comment.body =
      "Thanks, merged and approved! The vignette readme needs docstring work here. Congrats "
      "welcome thanks.";

  auto instances = classify_comment(model, comment);
  ASSERT_EQ(instances.size(), 1u);
  EXPECT_EQ(instances[0].type, TdType::Documentation);
  EXPECT_EQ(instances[0].comment_id, "c77");
  EXPECT_EQ(instances[0].url, comment.url);
  EXPECT_EQ(instances[0].sentence_index, 1);

  comment.body = "";
  EXPECT_TRUE(classify_comment(model, comment).empty());
  comment.body = "```\ncode only\n```";
  EXPECT_TRUE(classify_comment(model, comment).empty());
}

TEST(ModelIo, RoundTripPreservesPredictions) {
  auto data = fixtures::synthetic_corpus(12, 23);
  auto model = train_pipeline(data, default_spec(), InduceHierarchy{}, 23);
  const auto path = temp_path("tdscan_model_rt.json");
  save_model(model, path);
  auto loaded = load_model(path);

  auto probe = fixtures::synthetic_corpus(10, 555);  // 110 sentences, fresh draws
  for (const auto& s : probe) {
    auto a = classify_sentence(model, s.text);
    auto b = classify_sentence(loaded, s.text);
    ASSERT_EQ(a.has_value(), b.has_value());
    if (a) {
      EXPECT_EQ(a->type, b->type);
      EXPECT_EQ(a->cluster, b->cluster);
      EXPECT_EQ(a->gate_scores, b->gate_scores);
      EXPECT_EQ(a->router_scores, b->router_scores);
    }
  }
  // serialized form is stable across save(load(save(m)))
  const auto path2 = temp_path("tdscan_model_rt2.json");
  save_model(loaded, path2);
  EXPECT_EQ(slurp(path), slurp(path2));
  std::filesystem::remove(path);
  std::filesystem::remove(path2);
}

TEST(ClassifySentence, GateThresholdHook) {
  auto data = fixtures::synthetic_corpus(15, 37);
  auto model = train_pipeline(data, default_spec(), reference_hierarchy(), 37);

  std::size_t plain_hits = 0;
  for (const auto& s : data) {
    if (classify_sentence(model, s.text)) ++plain_hits;
  }
  EXPECT_GT(plain_hits, 0u);

  // an unreachable margin discards everything; threshold round-trips too
  model.gate_threshold = 1e9;
  for (const auto& s : data) EXPECT_FALSE(classify_sentence(model, s.text).has_value());
  const auto path = temp_path("tdscan_model_gate.json");
  save_model(model, path);
  auto loaded = load_model(path);
  ASSERT_TRUE(loaded.gate_threshold.has_value());
  EXPECT_EQ(*loaded.gate_threshold, 1e9);
  std::filesystem::remove(path);

  // a margin below every observed gap changes nothing vs argmax
  model.gate_threshold = 0.0;
  std::size_t thresholded_hits = 0;
  for (const auto& s : data) {
    if (classify_sentence(model, s.text)) ++thresholded_hits;
  }
  EXPECT_EQ(thresholded_hits, plain_hits);
}

TEST(ModelIo, TamperedRouterLabelsRejected) {
  auto data = fixtures::synthetic_corpus(10, 41);
  auto model = train_pipeline(data, default_spec(), reference_hierarchy(), 41);
  const auto path = temp_path("tdscan_model_tamper.json");
  save_model(model, path);
  auto j = json::parse(slurp(path));
  j["hierarchy"]["clusters"][0]["name"] = "Renamed";  // router labels now disagree
  {
    std::ofstream out(path);
    out << j.dump();
  }
  try {
    load_model(path);
    FAIL() << "expected CorruptModel";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::CorruptModel);
  }
  std::filesystem::remove(path);
}

TEST(ModelIo, SchemaMismatch) {
  const auto path = temp_path("tdscan_model_schema.json");
  {
    std::ofstream out(path);
    out << R"({"schema_version": 0, "metadata": {}})";
  }
  try {
    load_model(path);
    FAIL() << "expected SchemaMismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SchemaMismatch);
  }
  std::filesystem::remove(path);
}

TEST(ModelIo, BadNumericLiteralIsCorrupt) {
  auto data = fixtures::synthetic_corpus(8, 43);
  auto model = train_pipeline(data, default_spec(), reference_hierarchy(), 43);
  const auto path = temp_path("tdscan_model_badnum.json");
  save_model(model, path);
  auto j = json::parse(slurp(path));
  j["stage1"]["bias"][0] = "not-a-number";
  {
    std::ofstream out(path);
    out << j.dump();
  }
  try {
    load_model(path);
    FAIL() << "expected CorruptModel";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::CorruptModel);
  }
  std::filesystem::remove(path);
}

TEST(ModelIo, TruncatedFileIsCorrupt) {
  auto data = fixtures::synthetic_corpus(8, 29);
  auto model = train_pipeline(data, default_spec(), reference_hierarchy(), 29);
  const auto path = temp_path("tdscan_model_trunc.json");
  save_model(model, path);
  auto full = slurp(path);
  {
    std::ofstream out(path, std::ios::binary);
    out << full.substr(0, full.size() / 2);
  }
  try {
    load_model(path);
    FAIL() << "expected CorruptModel";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::CorruptModel);
  }
  std::filesystem::remove(path);
}

TEST(InstanceIo, JsonlRoundTrip) {
  auto data = fixtures::synthetic_corpus(12, 31);
  auto model = train_pipeline(data, default_spec(), reference_hierarchy(), 31);
  std::vector<TdInstance> instances;
  for (const auto& s : data) {
    RawComment c;
    c.platform = s.platform;
    c.package = s.package;
    c.issue_number = 1;
    c.comment_id = s.comment_id;
    c.created_at = s.created_at;
    c.url = "https://example.org/x";
    c.body = s.text;
    for (auto& i : classify_comment(model, c)) instances.push_back(std::move(i));
  }
  ASSERT_FALSE(instances.empty());
  const auto path = temp_path("tdscan_instances.jsonl");
  save_instances(instances, path);
  auto loaded = load_instances(path);
  ASSERT_EQ(loaded.size(), instances.size());
  for (std::size_t i = 0; i < instances.size(); ++i) {
    EXPECT_EQ(loaded[i].text, instances[i].text);
    EXPECT_EQ(loaded[i].type, instances[i].type);
    EXPECT_EQ(loaded[i].cluster, instances[i].cluster);
    EXPECT_EQ(loaded[i].comment_id, instances[i].comment_id);
  }
  std::filesystem::remove(path);
}

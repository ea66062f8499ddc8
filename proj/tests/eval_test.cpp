#include "tdscan/eval.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>

#include "support/fixtures.hpp"
#include "tdscan/rng.hpp"

using namespace tdscan;

TEST(Split8020, ClassOfTenGivesEightTwo) {
  std::vector<LabeledSentence> data;
  for (int i = 0; i < 10; ++i) {
    LabeledSentence s;
    s.text = "sentence " + std::to_string(i);
    s.label = i % 2 == 0 ? SentenceLabel(TdType::Code) : SentenceLabel(TdType::Test);
    data.push_back(s);
  }
  // two classes of 5 each -> 1 test item per class
  auto [train_set, test_set] = split_80_20(data, 3);
  EXPECT_EQ(train_set.size(), 8u);
  EXPECT_EQ(test_set.size(), 2u);

  std::vector<LabeledSentence> ten_of_one;
  for (int i = 0; i < 10; ++i) {
    LabeledSentence s;
    s.text = "a " + std::to_string(i);
    s.label = TdType::Code;
    ten_of_one.push_back(s);
  }
  for (int i = 0; i < 5; ++i) {
    LabeledSentence s;
    s.text = "b " + std::to_string(i);
    s.label = std::nullopt;
    ten_of_one.push_back(s);
  }
  auto [tr, te] = split_80_20(ten_of_one, 3);
  std::size_t code_test = 0;
  for (const auto& s : te) {
    if (s.label == SentenceLabel(TdType::Code)) ++code_test;
  }
  EXPECT_EQ(code_test, 2u);  // round(0.2 * 10)
}

TEST(Split8020, DisjointAndComplete) {
  auto data = fixtures::synthetic_corpus(9, 41);
  auto [train_set, test_set] = split_80_20(data, 8);
  EXPECT_EQ(train_set.size() + test_set.size(), data.size());
  std::set<std::string> train_texts, test_texts;
  for (const auto& s : train_set) train_texts.insert(s.text + "|" + s.comment_id);
  for (const auto& s : test_set) test_texts.insert(s.text + "|" + s.comment_id);
  for (const auto& t : test_texts) EXPECT_FALSE(train_texts.count(t)) << t;
}

TEST(Split8020, ProportionsWithinOneItem) {
  std::vector<LabeledSentence> data;
  auto push = [&](TdType t, int n) {
    for (int i = 0; i < n; ++i) {
      LabeledSentence s;
      s.text = to_string(t) + std::to_string(i);
      s.label = t;
      data.push_back(s);
    }
  };
  push(TdType::Code, 23);
  push(TdType::Test, 40);
  push(TdType::Defect, 7);
  auto [train_set, test_set] = split_80_20(data, 5);
  std::map<std::string, int> test_counts;
  for (const auto& s : test_set) ++test_counts[label_to_string(s.label)];
  EXPECT_LE(std::abs(test_counts["code"] - static_cast<int>(std::lround(0.2 * 23))), 1);
  EXPECT_LE(std::abs(test_counts["test"] - static_cast<int>(std::lround(0.2 * 40))), 1);
  EXPECT_LE(std::abs(test_counts["defect"] - static_cast<int>(std::lround(0.2 * 7))), 1);
}

TEST(Split8020, TooFewExamples) {
  std::vector<LabeledSentence> data;
  for (int i = 0; i < 4; ++i) {
    LabeledSentence s;
    s.text = std::to_string(i);
    s.label = TdType::Code;
    data.push_back(s);
  }
  for (int i = 0; i < 6; ++i) {
    LabeledSentence s;
    s.text = "x" + std::to_string(i);
    s.label = std::nullopt;
    data.push_back(s);
  }
  EXPECT_THROW(split_80_20(data, 1), Error);
}

TEST(Metrics, AllCorrect) {
  std::vector<std::string> y = {"a", "b", "a", "c"};
  auto r = compute_metrics(y, y, {"a", "b", "c"});
  EXPECT_DOUBLE_EQ(r.overall_accuracy, 1.0);
  EXPECT_DOUBLE_EQ(r.macro_f1, 1.0);
  for (const auto& [label, m] : r.per_class) {
    EXPECT_DOUBLE_EQ(m.precision, 1.0);
    EXPECT_DOUBLE_EQ(m.recall, 1.0);
    EXPECT_DOUBLE_EQ(m.f1, 1.0);
  }
}

TEST(Metrics, HalfPrecisionFullRecall) {
  // class a: P = 0.5 (1 TP, 1 FP), R = 1.0 -> F1 = 2/3
  std::vector<std::string> truths = {"a", "b", "b"};
  std::vector<std::string> preds = {"a", "a", "b"};
  auto r = compute_metrics(truths, preds, {"a", "b"});
  const auto& m = r.per_class.at("a");
  EXPECT_NEAR(m.precision, 0.5, 1e-12);
  EXPECT_NEAR(m.recall, 1.0, 1e-12);
  EXPECT_NEAR(m.f1, 2.0 * (0.5 * 1.0) / 1.5, 1e-9);
}

TEST(Metrics, ZeroDenominators) {
  // class c never true and never predicted -> P = R = F1 = 0
  std::vector<std::string> truths = {"a", "b"};
  std::vector<std::string> preds = {"a", "b"};
  auto r = compute_metrics(truths, preds, {"a", "b", "c"});
  const auto& m = r.per_class.at("c");
  EXPECT_DOUBLE_EQ(m.precision, 0.0);
  EXPECT_DOUBLE_EQ(m.recall, 0.0);
  EXPECT_DOUBLE_EQ(m.f1, 0.0);
}

namespace {

// independent brute-force counter over all (class, example) pairs
struct BruteCounts {
  long tp = 0, fp = 0, tn = 0, fn = 0;
};

std::map<std::string, BruteCounts> brute_force_counts(const std::vector<std::string>& truths,
                                                      const std::vector<std::string>& preds,
                                                      const std::vector<std::string>& labels) {
  std::map<std::string, BruteCounts> out;
  for (const auto& label : labels) {
    BruteCounts c;
    for (std::size_t i = 0; i < truths.size(); ++i) {
      const bool t = truths[i] == label, p = preds[i] == label;
      if (t && p) {
        ++c.tp;
      } else if (!t && p) {
        ++c.fp;
      } else if (t && !p) {
        ++c.fn;
      } else {
        ++c.tn;
      }
    }
    out[label] = c;
  }
  return out;
}

}  // namespace

TEST(Metrics, BruteForceOracleOnRandomFixtures) {
  Rng rng(104);
  const std::vector<std::string> labels = {"a", "b", "c", "d"};
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::string> truths, preds;
    for (int i = 0; i < 200; ++i) {
      truths.push_back(labels[rng.uniform(labels.size())]);
      preds.push_back(labels[rng.uniform(labels.size())]);
    }
    auto report = compute_metrics(truths, preds, labels);
    auto brute = brute_force_counts(truths, preds, labels);
    for (const auto& label : labels) {
      const auto& m = report.per_class.at(label);
      const auto& b = brute.at(label);
      ASSERT_EQ(m.counts.tp, b.tp);
      ASSERT_EQ(m.counts.fp, b.fp);
      ASSERT_EQ(m.counts.tn, b.tn);
      ASSERT_EQ(m.counts.fn, b.fn);
      const double p = b.tp + b.fp > 0 ? double(b.tp) / (b.tp + b.fp) : 0.0;
      const double r = b.tp + b.fn > 0 ? double(b.tp) / (b.tp + b.fn) : 0.0;
      ASSERT_NEAR(m.precision, p, 1e-12);
      ASSERT_NEAR(m.recall, r, 1e-12);
      if (p + r > 0) {
        ASSERT_NEAR(m.f1, 2 * p * r / (p + r), 1e-12);
      }
      // counts partition every example
      ASSERT_EQ(m.counts.total(), 200);
    }
  }
}

TEST(Metrics, OrderPermutationInvariance) {
  Rng rng(7);
  const std::vector<std::string> labels = {"x", "y", "z"};
  std::vector<std::string> truths, preds;
  for (int i = 0; i < 60; ++i) {
    truths.push_back(labels[rng.uniform(3)]);
    preds.push_back(labels[rng.uniform(3)]);
  }
  auto base = compute_metrics(truths, preds, labels);
  std::vector<std::size_t> perm(truths.size());
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(perm);
  std::vector<std::string> t2, p2;
  for (auto i : perm) {
    t2.push_back(truths[i]);
    p2.push_back(preds[i]);
  }
  auto permuted = compute_metrics(t2, p2, labels);
  EXPECT_DOUBLE_EQ(base.overall_accuracy, permuted.overall_accuracy);
  EXPECT_DOUBLE_EQ(base.macro_f1, permuted.macro_f1);
  for (const auto& label : labels) {
    EXPECT_DOUBLE_EQ(base.per_class.at(label).f1, permuted.per_class.at(label).f1);
  }
}

TEST(Metrics, MacroF1Bounds) {
  Rng rng(55);
  const std::vector<std::string> labels = {"a", "b", "c"};
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::string> truths, preds;
    for (int i = 0; i < 50; ++i) {
      truths.push_back(labels[rng.uniform(3)]);
      preds.push_back(labels[rng.uniform(3)]);
    }
    auto r = compute_metrics(truths, preds, labels);
    double lo = 1.0, hi = 0.0;
    for (const auto& [label, m] : r.per_class) {
      lo = std::min(lo, m.f1);
      hi = std::max(hi, m.f1);
    }
    EXPECT_GE(r.macro_f1, lo - 1e-12);
    EXPECT_LE(r.macro_f1, hi + 1e-12);
  }
}

TEST(Metrics, BinaryAccuracyCrossCheck) {
  Rng rng(31);
  std::vector<std::string> truths, preds;
  for (int i = 0; i < 100; ++i) {
    truths.push_back(rng.uniform(2) ? "td" : "non_td");
    preds.push_back(rng.uniform(2) ? "td" : "non_td");
  }
  auto r = compute_metrics(truths, preds, {"non_td", "td"});
  // per-class one-vs-rest accuracy equals exact-match accuracy on binary tasks
  EXPECT_NEAR(r.per_class.at("td").accuracy, r.overall_accuracy, 1e-12);
  EXPECT_NEAR(r.per_class.at("non_td").accuracy, r.overall_accuracy, 1e-12);
}

TEST(Metrics, LengthMismatch) {
  EXPECT_THROW(compute_metrics({"a"}, {"a", "b"}, {"a", "b"}), Error);
}

TEST(EvaluatePipeline, SeparableFixtureIsPerfect) {
  auto data = fixtures::synthetic_corpus(15, 61);
  auto [train_set, test_set] = split_80_20(data, 61);
  ClassifierSpec spec;
  spec.kind = ClassifierKind::Linear;
  spec.seed = 61;
  auto model = train_pipeline(train_set, spec, InduceHierarchy{}, 61);
  auto report = evaluate_pipeline(model, test_set);
  EXPECT_DOUBLE_EQ(report.stage1.macro_f1, 1.0);
  EXPECT_DOUBLE_EQ(report.router.macro_f1, 1.0);
  EXPECT_DOUBLE_EQ(report.end_to_end.macro_f1, 1.0);
  for (const auto& [name, metrics] : report.per_cluster) {
    EXPECT_DOUBLE_EQ(metrics.macro_f1, 1.0) << name;
  }
  // report renders in both shapes
  auto j = pipeline_report_to_json(report);
  EXPECT_TRUE(j.contains("reference_encoder_f1"));
  EXPECT_DOUBLE_EQ(j["reference_encoder_f1"]["stage1"].get<double>(), 0.90);
  EXPECT_DOUBLE_EQ(j["reference_encoder_f1"]["cluster_router"].get<double>(), 0.82);
  EXPECT_DOUBLE_EQ(j["reference_encoder_f1"]["cluster1"].get<double>(), 0.71);
  EXPECT_DOUBLE_EQ(j["reference_encoder_f1"]["cluster2"].get<double>(), 0.77);
  EXPECT_DOUBLE_EQ(j["reference_encoder_f1"]["cluster3"].get<double>(), 0.91);
  auto text = pipeline_report_to_text(report);
  EXPECT_NE(text.find("stage-1 gate"), std::string::npos);
  EXPECT_NE(text.find("end-to-end 11-class"), std::string::npos);
}

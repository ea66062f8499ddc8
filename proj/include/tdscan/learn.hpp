#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "tdscan/error.hpp"
#include "tdscan/rng.hpp"
#include "tdscan/textfeat.hpp"

namespace tdscan {

enum class ClassifierKind { Probabilistic, Linear };

inline std::string to_string(ClassifierKind k) {
  return k == ClassifierKind::Probabilistic ? "probabilistic" : "linear";
}

inline ClassifierKind classifier_kind_from_string(std::string_view s) {
  if (s == "probabilistic") return ClassifierKind::Probabilistic;
  if (s == "linear") return ClassifierKind::Linear;
  throw Error(ErrorKind::SerializationError, "unknown classifier kind '" + std::string(s) + "'");
}

struct ClassifierSpec {
  ClassifierKind kind = ClassifierKind::Linear;
  double alpha = 1.0;         // additive smoothing (probabilistic)
  std::uint32_t epochs = 30;  // linear
  double learning_rate = 0.1;
  double lambda = 1e-4;
  std::uint64_t seed = 1;
  WeightScheme scheme = WeightScheme::Tfidf;

  void validate() const {
    if (alpha <= 0.0) throw Error(ErrorKind::InvalidArgument, "alpha must be > 0");
    if (epochs < 1) throw Error(ErrorKind::InvalidArgument, "epochs must be >= 1");
    if (learning_rate <= 0.0) throw Error(ErrorKind::InvalidArgument, "learning rate must be > 0");
    if (lambda < 0.0) throw Error(ErrorKind::InvalidArgument, "lambda must be >= 0");
  }

  friend bool operator==(const ClassifierSpec&, const ClassifierSpec&) = default;
};

struct Prediction {
  std::string label;
  std::vector<double> scores;  // ordered as the model's label list
};

struct TrainingExample {
  SparseVector features;
  std::string label;
};

// Per-class score = bias + w . x for both kinds; the probabilistic kind
// stores log priors in bias and smoothed log likelihoods in the weights.
class TrainedClassifier {
 public:
  TrainedClassifier() = default;
  TrainedClassifier(std::vector<std::string> labels, std::vector<std::vector<double>> weights,
                    std::vector<double> bias, ClassifierSpec spec, std::size_t vocab_size)
      : labels_(std::move(labels)),
        weights_(std::move(weights)),
        bias_(std::move(bias)),
        spec_(spec),
        vocab_size_(vocab_size) {
    if (labels_.empty() || weights_.size() != labels_.size() || bias_.size() != labels_.size()) {
      throw Error(ErrorKind::DimensionMismatch, "label/parameter shape mismatch");
    }
    for (const auto& w : weights_) {
      if (w.size() != vocab_size_) {
        throw Error(ErrorKind::DimensionMismatch, "weight vector length != vocabulary size");
      }
    }
  }

  const std::vector<std::string>& labels() const { return labels_; }
  const std::vector<std::vector<double>>& weights() const { return weights_; }
  const std::vector<double>& bias() const { return bias_; }
  const ClassifierSpec& spec() const { return spec_; }
  std::size_t vocab_size() const { return vocab_size_; }

  friend bool operator==(const TrainedClassifier&, const TrainedClassifier&) = default;

 private:
  std::vector<std::string> labels_;
  std::vector<std::vector<double>> weights_;  // one dense vector per class
  std::vector<double> bias_;
  ClassifierSpec spec_;
  std::size_t vocab_size_ = 0;
};

inline Prediction predict(const TrainedClassifier& model, const SparseVector& v) {
  for (const auto& [idx, w] : v.entries) {
    if (idx >= model.vocab_size()) {
      throw Error(ErrorKind::DimensionMismatch, "feature index exceeds vocabulary size");
    }
  }
  Prediction p;
  p.scores.resize(model.labels().size());
  for (std::size_t c = 0; c < model.labels().size(); ++c) {
    p.scores[c] = model.bias()[c] + dot(v, model.weights()[c]);
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < p.scores.size(); ++c) {
    if (p.scores[c] > p.scores[best]) best = c;  // ties keep the lowest index
  }
  p.label = model.labels()[best];
  return p;
}

namespace detail {

inline std::map<std::string, std::size_t> label_index_map(const std::vector<std::string>& labels) {
  std::map<std::string, std::size_t> m;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!m.emplace(labels[i], i).second) {
      throw Error(ErrorKind::InvalidArgument, "duplicate label '" + labels[i] + "'");
    }
  }
  return m;
}

inline TrainedClassifier train_probabilistic(const std::vector<TrainingExample>& examples,
                                             const ClassifierSpec& spec,
                                             const std::vector<std::string>& labels,
                                             std::size_t vocab_size,
                                             const std::map<std::string, std::size_t>& label_idx) {
  const std::size_t n_classes = labels.size();
  std::vector<std::vector<double>> token_mass(n_classes, std::vector<double>(vocab_size, 0.0));
  std::vector<double> class_count(n_classes, 0.0);

  for (const auto& ex : examples) {
    std::size_t c = label_idx.at(ex.label);
    class_count[c] += 1.0;
    for (const auto& [idx, w] : ex.features.entries) token_mass[c][idx] += w;
  }

  std::vector<std::vector<double>> weights(n_classes, std::vector<double>(vocab_size, 0.0));
  std::vector<double> bias(n_classes, 0.0);
  const double total = static_cast<double>(examples.size());
  for (std::size_t c = 0; c < n_classes; ++c) {
    double mass = std::accumulate(token_mass[c].begin(), token_mass[c].end(), 0.0);
    double denom = std::log(mass + spec.alpha * static_cast<double>(vocab_size));
    for (std::size_t t = 0; t < vocab_size; ++t) {
      weights[c][t] = std::log(token_mass[c][t] + spec.alpha) - denom;
    }
    // classes absent from the data keep a floor prior instead of -inf
    bias[c] = class_count[c] > 0.0 ? std::log(class_count[c] / total)
                                   : std::log(0.5 / total);
  }
  return TrainedClassifier(labels, std::move(weights), std::move(bias), spec, vocab_size);
}

inline TrainedClassifier train_linear(const std::vector<TrainingExample>& examples,
                                      const ClassifierSpec& spec,
                                      const std::vector<std::string>& labels,
                                      std::size_t vocab_size,
                                      const std::map<std::string, std::size_t>& label_idx) {
  const std::size_t n_classes = labels.size();
  std::vector<std::vector<double>> weights(n_classes);
  std::vector<double> bias(n_classes, 0.0);

  for (std::size_t c = 0; c < n_classes; ++c) {
    // one-vs-rest hinge with L2, subgradient steps, lazily scaled weights
    std::vector<double> w(vocab_size, 0.0);
    double scale = 1.0;
    double b = 0.0;

    Rng rng(mix_seed(spec.seed, c));
    std::vector<std::size_t> order(examples.size());
    std::iota(order.begin(), order.end(), 0);

    std::uint64_t t = 0;
    for (std::uint32_t epoch = 0; epoch < spec.epochs; ++epoch) {
      rng.shuffle(order);
      for (std::size_t i : order) {
        const auto& ex = examples[i];
        const double y = label_idx.at(ex.label) == c ? 1.0 : -1.0;
        ++t;
        const double eta =
            spec.learning_rate / (1.0 + spec.learning_rate * spec.lambda * static_cast<double>(t));
        const double margin = y * (scale * dot(ex.features, w) + b);
        scale *= (1.0 - eta * spec.lambda);
        if (scale < 1e-9) {
          for (auto& x : w) x *= scale;
          scale = 1.0;
        }
        if (margin < 1.0) {
          const double step = eta * y / scale;
          for (const auto& [idx, x] : ex.features.entries) w[idx] += step * x;
          b += eta * y;
        }
      }
    }
    for (auto& x : w) x *= scale;
    weights[c] = std::move(w);
    bias[c] = b;
  }
  return TrainedClassifier(labels, std::move(weights), std::move(bias), spec, vocab_size);
}

}  // namespace detail

inline TrainedClassifier train(const std::vector<TrainingExample>& examples,
                               const ClassifierSpec& spec, const std::vector<std::string>& labels,
                               std::size_t vocab_size) {
  spec.validate();
  if (examples.empty()) throw Error(ErrorKind::EmptyTrainingSet, "no training examples");
  auto label_idx = detail::label_index_map(labels);

  std::set<std::string> distinct;
  for (const auto& ex : examples) {
    if (!label_idx.count(ex.label)) {
      throw Error(ErrorKind::InvalidArgument, "example label '" + ex.label + "' not in label list");
    }
    if (!ex.features.well_formed(vocab_size)) {
      throw Error(ErrorKind::DimensionMismatch, "malformed feature vector");
    }
    distinct.insert(ex.label);
  }
  if (distinct.size() < 2) throw Error(ErrorKind::SingleClassData, "need >= 2 distinct labels");

  return spec.kind == ClassifierKind::Probabilistic
             ? detail::train_probabilistic(examples, spec, labels, vocab_size, label_idx)
             : detail::train_linear(examples, spec, labels, vocab_size, label_idx);
}

// Raw confusion counts; row = true class, column = predicted class.
struct ConfusionMatrix {
  std::vector<std::string> labels;
  std::vector<std::vector<std::int64_t>> counts;

  std::int64_t total() const {
    std::int64_t s = 0;
    for (const auto& row : counts) {
      for (auto v : row) s += v;
    }
    return s;
  }
};

// Seeded stratified k-fold cross-prediction; every example is predicted
// exactly once by a model that never saw it.
inline ConfusionMatrix cv_confusion(const std::vector<TrainingExample>& examples,
                                    const ClassifierSpec& spec,
                                    const std::vector<std::string>& labels, std::uint32_t folds,
                                    std::uint64_t seed, std::size_t vocab_size) {
  if (folds < 2) throw Error(ErrorKind::InvalidArgument, "folds must be >= 2");
  auto label_idx = detail::label_index_map(labels);

  std::vector<std::vector<std::size_t>> per_class(labels.size());
  for (std::size_t i = 0; i < examples.size(); ++i) {
    per_class[label_idx.at(examples[i].label)].push_back(i);
  }
  for (std::size_t c = 0; c < labels.size(); ++c) {
    if (per_class[c].size() < folds) {
      throw Error(ErrorKind::TooFewExamples,
                  "class '" + labels[c] + "' has " + std::to_string(per_class[c].size()) +
                      " examples, need >= " + std::to_string(folds));
    }
  }

  std::vector<std::uint32_t> fold_of(examples.size(), 0);
  for (std::size_t c = 0; c < labels.size(); ++c) {
    Rng rng(mix_seed(seed, 0x500 + c));
    rng.shuffle(per_class[c]);
    for (std::size_t i = 0; i < per_class[c].size(); ++i) {
      fold_of[per_class[c][i]] = static_cast<std::uint32_t>(i % folds);
    }
  }

  ConfusionMatrix m;
  m.labels = labels;
  m.counts.assign(labels.size(), std::vector<std::int64_t>(labels.size(), 0));

  for (std::uint32_t f = 0; f < folds; ++f) {
    std::vector<TrainingExample> train_set;
    std::vector<std::size_t> held_out;
    for (std::size_t i = 0; i < examples.size(); ++i) {
      if (fold_of[i] == f) {
        held_out.push_back(i);
      } else {
        train_set.push_back(examples[i]);
      }
    }
    ClassifierSpec fold_spec = spec;
    fold_spec.seed = mix_seed(seed, 1000 + f);
    TrainedClassifier model = train(train_set, fold_spec, labels, vocab_size);
    for (std::size_t i : held_out) {
      auto pred = predict(model, examples[i].features);
      ++m.counts[label_idx.at(examples[i].label)][label_idx.at(pred.label)];
    }
  }
  return m;
}

}  // namespace tdscan

// tdscan: detect technical-debt mentions in peer-review issue comments and
// run corpus-level analytics over the detections.

#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tdscan/tdscan.hpp"
#include "tdscan/github_crawler.hpp"

namespace {

using namespace tdscan;

constexpr int kExitOk = 0;
constexpr int kExitFatal = 1;
constexpr int kExitPartial = 2;

std::string now_iso8601_utc() {
  // SOURCE_DATE_EPOCH (reproducible-builds convention) pins the timestamp
  std::time_t t = 0;
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
    t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  } else {
    t = std::time(nullptr);
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw Error(ErrorKind::IoError, "write failed for '" + path + "'");
}

std::map<int, std::int64_t> load_packages_by_year(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open '" + path + "'");
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(ErrorKind::SerializationError, "'" + path + "' must be a JSON object year -> count");
  }
  std::map<int, std::int64_t> out;
  for (const auto& [year, count] : j.items()) {
    try {
      out[std::stoi(year)] = count.get<std::int64_t>();
    } catch (const std::exception&) {
      throw Error(ErrorKind::SerializationError, "bad year entry '" + year + "' in " + path);
    }
  }
  return out;
}

ClassifierSpec build_spec(const std::string& kind, const std::string& scheme, double alpha,
                          std::uint32_t epochs, double lr, double lambda, std::uint64_t seed) {
  ClassifierSpec spec;
  spec.kind = classifier_kind_from_string(kind);
  spec.scheme = scheme.empty()
                    ? (spec.kind == ClassifierKind::Probabilistic ? WeightScheme::Counts
                                                                  : WeightScheme::Tfidf)
                    : scheme_from_string(scheme);
  spec.alpha = alpha;
  spec.epochs = epochs;
  spec.learning_rate = lr;
  spec.lambda = lambda;
  spec.seed = seed;
  spec.validate();
  return spec;
}

std::vector<LabeledPhrase> load_phrases(const std::string& path) {
  std::vector<LabeledPhrase> phrases;
  detail::read_jsonl(path, [&](const json& j) {
    try {
      LabeledPhrase p;
      p.comment_id = j.at("comment_id").get<std::string>();
      p.phrase = j.at("phrase").get<std::string>();
      auto type = td_type_from_string(j.at("type").get<std::string>());
      if (!type) throw Error(ErrorKind::SerializationError, "unknown TD type in labels file");
      p.type = *type;
      phrases.push_back(std::move(p));
    } catch (const json::exception& e) {
      throw Error(ErrorKind::SerializationError, std::string("bad phrase record: ") + e.what());
    }
    return 0;
  });
  return phrases;
}

std::map<TdType, std::size_t> parse_targets(const std::string& spec_str,
                                            const std::vector<LabeledSentence>& dataset) {
  if (spec_str.empty()) return default_augment_targets(dataset);
  std::map<TdType, std::size_t> targets;
  std::stringstream ss(spec_str);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::InvalidArgument, "--targets expects type=count[,type=count...]");
    }
    auto type = td_type_from_string(trim(item.substr(0, eq)));
    if (!type) throw Error(ErrorKind::InvalidArgument, "unknown TD type in --targets: " + item);
    try {
      targets[*type] = static_cast<std::size_t>(std::stoull(item.substr(eq + 1)));
    } catch (const std::exception&) {
      throw Error(ErrorKind::InvalidArgument, "bad count in --targets: " + item);
    }
  }
  return targets;
}

int cmd_crawl(const std::string& platform, const std::string& repo_arg, const std::string& label,
              const std::string& out_path, const std::string& title_regex,
              const std::string& api_base, const std::string& token_env, int concurrency) {
  auto slash = repo_arg.find('/');
  if (slash == std::string::npos) {
    throw Error(ErrorKind::InvalidArgument, "--repo expects owner/name");
  }
  RepoCoordinate repo;
  repo.api_base = api_base;
  repo.owner = repo_arg.substr(0, slash);
  repo.repo = repo_arg.substr(slash + 1);

  CrawlOptions options;
  options.platform = platform;
  options.approved_label = label;
  options.package_title_regex = title_regex;
  options.concurrency = concurrency;
  if (const char* token = std::getenv(token_env.c_str())) options.token = token;

  CorpusWriter writer(out_path);
  CrawlStats stats = crawl_issues(repo, options, [&](const RawComment& c) { writer.write(c); });

  std::cerr << "tdscan: crawled " << stats.issues_seen << " issues, " << stats.comments_emitted
            << " comments, " << stats.pages_fetched << " pages";
  if (stats.malformed_pages > 0) {
    std::cerr << " (" << stats.malformed_pages << " malformed pages skipped)";
  }
  std::cerr << "\n";
  return stats.partial() ? kExitPartial : kExitOk;
}

int cmd_prepare(const std::string& corpus_path, const std::string& labels_path,
                const std::string& out_path) {
  auto corpus = load_corpus(corpus_path);
  auto phrases = load_phrases(labels_path);
  auto result = derive_benchmark(phrases, corpus);
  save_dataset(result.sentences, out_path);

  std::size_t td = 0;
  for (const auto& s : result.sentences) {
    if (s.label) ++td;
  }
  std::cout << "sentences: " << result.sentences.size() << " (td " << td << ", non_td "
            << result.sentences.size() - td << ")\n";
  for (const auto& id : result.unresolved_comment_ids) {
    std::cerr << "tdscan: warning unresolved comment_id " << id << "\n";
  }
  for (const auto& text : result.multi_label_texts) {
    std::cerr << "tdscan: warning multi-type sentence kept under each label: " << text << "\n";
  }
  return result.unresolved_comment_ids.empty() ? kExitOk : kExitPartial;
}

int cmd_train(const std::string& dataset_path, const std::string& kind,
              const std::string& scheme, double alpha, std::uint32_t epochs, double lr,
              double lambda, const std::string& hierarchy_arg, std::uint32_t folds, int k_max,
              std::uint64_t seed, std::optional<double> gate_threshold,
              const std::string& model_out) {
  auto dataset = load_dataset(dataset_path);
  auto spec = build_spec(kind, scheme, alpha, epochs, lr, lambda, seed);

  HierarchySource source = InduceHierarchy{k_max, folds};
  if (hierarchy_arg.rfind("preset:", 0) == 0) {
    source = load_hierarchy(hierarchy_arg.substr(7));
  } else if (hierarchy_arg != "induce") {
    throw Error(ErrorKind::InvalidArgument, "--hierarchy expects 'induce' or 'preset:<file>'");
  }

  auto model = train_pipeline(dataset, spec, source, seed);
  model.gate_threshold = gate_threshold;
  save_model(model, model_out);

  std::size_t td = 0;
  for (const auto& s : dataset) {
    if (s.label) ++td;
  }
  std::cout << "trained on " << dataset.size() << " sentences (" << td << " td)\n";
  std::cout << "vocabulary: " << model.vocabulary.size() << " tokens\n";
  std::cout << "stage-1 gate: " << model.stage1.labels().size() << " labels\n";
  std::cout << "hierarchy: " << model.hierarchy.clusters.size() << " clusters";
  for (const auto& c : model.hierarchy.clusters) {
    std::cout << " " << c.name << "(" << c.types.size() << ")";
  }
  std::cout << "\nleaf models: " << model.leaf_models.size() << "\n";
  std::cout << "model written to " << model_out << "\n";
  return kExitOk;
}

int cmd_induce(const std::string& dataset_path, std::uint32_t folds, int k_max,
               std::uint64_t seed, const std::string& kind, const std::string& out_path) {
  auto dataset = load_dataset(dataset_path);
  auto spec = build_spec(kind, "", 1.0, 30, 0.1, 1e-4, seed);

  std::vector<LabeledSentence> td_only;
  for (const auto& s : dataset) {
    if (s.label) td_only.push_back(s);
  }
  if (td_only.empty()) throw Error(ErrorKind::EmptyTrainingSet, "dataset has no TD sentences");

  std::vector<std::vector<std::string>> docs;
  for (const auto& s : td_only) docs.push_back(tokenize(s.text));
  auto vocab = build_vocabulary(docs, {});
  std::vector<TrainingExample> examples;
  for (std::size_t i = 0; i < td_only.size(); ++i) {
    examples.push_back({vectorize(docs[i], vocab, spec.scheme), to_string(*td_only[i].label)});
  }
  std::set<std::string> present;
  for (const auto& ex : examples) present.insert(ex.label);
  std::vector<std::string> labels;
  for (TdType t : all_td_types()) {
    if (present.count(to_string(t))) labels.push_back(to_string(t));
  }

  auto confusion = cv_confusion(examples, spec, labels, folds, mix_seed(seed, 2), vocab.size());
  auto stochastic = normalize_confusion(confusion);
  auto dist = distance_matrix(confusion.labels, stochastic);
  const int effective_k_max = k_max > 0 ? k_max : static_cast<int>(labels.size()) - 1;
  auto hierarchy = induce_hierarchy(confusion, effective_k_max, mix_seed(seed, 3));

  // hierarchy file loadable as a preset; matrices ride along for inspection
  json out = hierarchy_to_json(hierarchy);
  out["diagnostics"] = {{"labels", confusion.labels},
                        {"confusion", confusion.counts},
                        {"normalized", stochastic},
                        {"distance", dist.d},
                        {"eigengap_k", static_cast<int>(hierarchy.clusters.size())},
                        {"folds", folds},
                        {"seed", seed}};
  write_text_file(out_path, out.dump(2) + "\n");
  std::cout << "k = " << hierarchy.clusters.size() << "\n";
  for (const auto& c : hierarchy.clusters) {
    std::cout << c.name << ":";
    for (const auto& t : c.types) std::cout << " " << t;
    std::cout << "\n";
  }
  return kExitOk;
}

int cmd_eval(const std::string& model_path, const std::string& test_path,
             const std::string& out_path) {
  auto model = load_model(model_path);
  auto test = load_dataset(test_path);
  auto report = evaluate_pipeline(model, test);
  write_text_file(out_path, pipeline_report_to_json(report).dump(2) + "\n");
  std::cout << pipeline_report_to_text(report);
  return kExitOk;
}

int cmd_classify(const std::string& model_path, const std::string& in_path,
                 const std::string& out_path) {
  auto model = load_model(model_path);
  std::vector<RawComment> comments;
  if (in_path == "-") {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(std::cin, line)) {
      ++lineno;
      if (trim(line).empty()) continue;
      json j = json::parse(line, nullptr, false);
      if (j.is_discarded()) {
        throw Error(ErrorKind::SerializationError, "stdin:" + std::to_string(lineno) + ": invalid JSON");
      }
      comments.push_back(comment_from_json(j));
    }
  } else {
    comments = load_corpus(in_path);
  }
  std::vector<TdInstance> instances;
  for (const auto& comment : comments) {
    for (auto& instance : classify_comment(model, comment)) {
      instances.push_back(std::move(instance));
    }
  }
  save_instances(instances, out_path);
  std::cout << "classified " << comments.size() << " comments -> " << instances.size()
            << " TD instances\n";
  return kExitOk;
}

int cmd_analyze(const std::string& mode, const std::string& instances_path,
                const std::string& packages_by_year_path, int first_year, int last_year,
                const std::string& out_path, const std::string& csv_path) {
  auto instances = load_instances(instances_path);

  json out;
  std::string csv;
  if (mode == "distribution") {
    auto table = distribution(instances);
    out = distribution_to_json(table);
    csv = distribution_to_csv(table);
  } else if (mode == "correlation") {
    auto corr = correlation_matrix(per_package_counts(instances));
    out = correlation_to_json(corr);
    csv = correlation_to_csv(corr);
  } else if (mode == "trend") {
    auto series = trend(instances, load_packages_by_year(packages_by_year_path));
    out = trend_to_json(series);
    csv = trend_to_csv(series);
  } else if (mode == "growth") {
    auto series = trend(instances, load_packages_by_year(packages_by_year_path));
    auto stats = growth(series, first_year, last_year);
    out = growth_to_json(stats);
    csv = growth_to_csv(stats);
  } else if (mode == "impact") {
    auto series = trend(instances, load_packages_by_year(packages_by_year_path));
    auto stats = growth(series, first_year, last_year);
    auto corr = correlation_matrix(per_package_counts(instances));
    auto points = impact(stats, corr, totals_by_type(instances));
    out = impact_to_json(points);
    csv = impact_to_csv(points);
  } else {
    throw Error(ErrorKind::InvalidArgument, "unknown analyze mode '" + mode + "'");
  }
  write_text_file(out_path, out.dump(2) + "\n");
  if (!csv_path.empty()) {
    if (csv.empty()) throw Error(ErrorKind::InvalidArgument, "no CSV form for mode " + mode);
    write_text_file(csv_path, csv);
  }
  return kExitOk;
}

int cmd_report(const std::string& model_path, const std::string& corpus_path,
               const std::string& package, const std::string& format,
               const std::string& out_path) {
  auto model = load_model(model_path);
  auto corpus = load_corpus(corpus_path);

  std::string platform;
  std::vector<TdInstance> instances;
  for (const auto& comment : corpus) {
    if (comment.package != package) continue;
    if (platform.empty()) platform = comment.platform;
    for (auto& instance : classify_comment(model, comment)) {
      instances.push_back(std::move(instance));
    }
  }
  auto report = build_report(package, platform, std::move(instances), now_iso8601_utc());

  ReportFormat fmt;
  if (format == "json") {
    fmt = ReportFormat::Json;
  } else if (format == "html") {
    fmt = ReportFormat::Html;
  } else {
    throw Error(ErrorKind::InvalidArgument, "--format expects json or html");
  }
  write_text_file(out_path, render_report(report, fmt));
  std::cout << "report for " << package << ": " << report.instances.size() << " instances -> "
            << out_path << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"technical-debt detection and analytics for peer-review issue comments"};
  app.set_config("--config", "", "INI config file; command-line flags take precedence");
  app.require_subcommand(1);

  // crawl
  std::string crawl_platform, crawl_repo, crawl_label = "approved", crawl_out;
  std::string crawl_regex = R"(([A-Za-z0-9][A-Za-z0-9._-]*))";
  std::string crawl_api_base = "https://api.github.com", crawl_token_env = "GITHUB_TOKEN";
  int crawl_concurrency = 4;
  auto* crawl = app.add_subcommand("crawl", "fetch labeled review issues into a corpus file");
  crawl->add_option("--platform", crawl_platform, "platform tag stored on each comment")->required();
  crawl->add_option("--repo", crawl_repo, "owner/name of the review repository")->required();
  crawl->add_option("--label", crawl_label, "issue label to crawl");
  crawl->add_option("--out", crawl_out, "output corpus JSONL")->required();
  crawl->add_option("--package-title-regex", crawl_regex, "regex extracting the package name from issue titles");
  crawl->add_option("--api-base", crawl_api_base, "API base URL");
  crawl->add_option("--token-env", crawl_token_env, "environment variable holding the API token");
  crawl->add_option("--concurrency", crawl_concurrency, "concurrent comment-page fetches");

  // prepare
  std::string prep_corpus, prep_labels, prep_out;
  auto* prepare = app.add_subcommand("prepare", "derive a labeled sentence dataset from phrases");
  prepare->add_option("--corpus", prep_corpus)->required();
  prepare->add_option("--labels", prep_labels, "JSONL of {comment_id, phrase, type}")->required();
  prepare->add_option("--out", prep_out)->required();

  // augment
  std::string aug_in, aug_lexicon, aug_targets, aug_out;
  std::uint64_t aug_seed = 1;
  auto* augment_cmd = app.add_subcommand("augment", "synonym-replacement upsampling of TD classes");
  augment_cmd->add_option("--in", aug_in)->required();
  augment_cmd->add_option("--lexicon", aug_lexicon, "JSONL of {word, pos, synonyms}")->required();
  augment_cmd->add_option("--targets", aug_targets,
                          "type=count[,type=count...]; default: min(2*median, max) per class");
  augment_cmd->add_option("--seed", aug_seed);
  augment_cmd->add_option("--out", aug_out)->required();

  // train
  std::string train_dataset, train_kind = "linear", train_scheme, train_hierarchy = "induce";
  std::string train_model_out;
  double train_alpha = 1.0, train_lr = 0.1, train_lambda = 1e-4;
  std::uint32_t train_epochs = 30, train_folds = 5;
  int train_k_max = 0;
  std::uint64_t train_seed = 1;
  std::optional<double> train_gate_threshold;
  auto* train_cmd = app.add_subcommand("train", "train the two-stage pipeline");
  train_cmd->add_option("--dataset", train_dataset)->required();
  train_cmd->add_option("--spec", train_kind, "classifier kind: linear|probabilistic");
  train_cmd->add_option("--scheme", train_scheme, "counts|tfidf (default by kind)");
  train_cmd->add_option("--alpha", train_alpha, "smoothing (probabilistic)");
  train_cmd->add_option("--epochs", train_epochs);
  train_cmd->add_option("--lr", train_lr, "learning rate (linear)");
  train_cmd->add_option("--lambda", train_lambda, "L2 regularization (linear)");
  train_cmd->add_option("--hierarchy", train_hierarchy, "induce | preset:<file>");
  train_cmd->add_option("--folds", train_folds, "CV folds for hierarchy induction");
  train_cmd->add_option("--k-max", train_k_max, "eigengap search bound; 0 = n-1");
  train_cmd->add_option("--seed", train_seed);
  train_cmd->add_option("--gate-threshold", train_gate_threshold,
                        "stage-1 margin required to pass a sentence on; default argmax");
  train_cmd->add_option("--model-out", train_model_out)->required();

  // induce
  std::string induce_dataset, induce_out, induce_kind = "linear";
  std::uint32_t induce_folds = 5;
  int induce_k_max = 0;
  std::uint64_t induce_seed = 1;
  auto* induce_cmd = app.add_subcommand("induce", "induce the TD type hierarchy from CV confusion");
  induce_cmd->add_option("--dataset", induce_dataset)->required();
  induce_cmd->add_option("--folds", induce_folds);
  induce_cmd->add_option("--k-max", induce_k_max, "0 = n-1");
  induce_cmd->add_option("--seed", induce_seed);
  induce_cmd->add_option("--spec", induce_kind, "classifier kind for the CV confusion");
  induce_cmd->add_option("--out", induce_out)->required();

  // eval
  std::string eval_model, eval_test, eval_out;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a model on a labeled test set");
  eval_cmd->add_option("--model", eval_model)->required();
  eval_cmd->add_option("--test", eval_test)->required();
  eval_cmd->add_option("--out", eval_out, "JSON report path")->required();

  // classify
  std::string cls_model, cls_in, cls_out;
  auto* classify_cmd = app.add_subcommand("classify", "classify a corpus into TD instances");
  classify_cmd->add_option("--model", cls_model)->required();
  classify_cmd->add_option("--in", cls_in, "corpus JSONL or - for stdin")->required();
  classify_cmd->add_option("--out", cls_out)->required();

  // analyze
  std::string an_mode, an_instances, an_packages, an_out, an_csv;
  int an_first_year = 2016, an_last_year = 2020;
  auto* analyze_cmd = app.add_subcommand("analyze", "corpus-level analytics over TD instances");
  analyze_cmd->add_option("mode", an_mode, "distribution|correlation|trend|growth|impact")
      ->required();
  analyze_cmd->add_option("--instances", an_instances)->required();
  analyze_cmd->add_option("--packages-by-year", an_packages, "JSON object year -> package count");
  analyze_cmd->add_option("--first-year", an_first_year);
  analyze_cmd->add_option("--last-year", an_last_year);
  analyze_cmd->add_option("--out", an_out)->required();
  analyze_cmd->add_option("--csv", an_csv, "also emit a CSV table");

  // report
  std::string rep_model, rep_corpus, rep_package, rep_format = "json", rep_out;
  auto* report_cmd = app.add_subcommand("report", "emit a per-package TD report");
  report_cmd->add_option("--model", rep_model)->required();
  report_cmd->add_option("--corpus", rep_corpus)->required();
  report_cmd->add_option("--package", rep_package)->required();
  report_cmd->add_option("--format", rep_format, "json|html");
  report_cmd->add_option("--out", rep_out)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (crawl->parsed()) {
      return cmd_crawl(crawl_platform, crawl_repo, crawl_label, crawl_out, crawl_regex,
                       crawl_api_base, crawl_token_env, crawl_concurrency);
    }
    if (prepare->parsed()) return cmd_prepare(prep_corpus, prep_labels, prep_out);
    if (augment_cmd->parsed()) {
      auto dataset = load_dataset(aug_in);
      auto lexicon = load_lexicon(aug_lexicon);
      auto out = augment(dataset, lexicon, parse_targets(aug_targets, dataset), aug_seed);
      save_dataset(out, aug_out);
      std::cout << "augmented " << dataset.size() << " -> " << out.size() << " sentences\n";
      return kExitOk;
    }
    if (train_cmd->parsed()) {
      return cmd_train(train_dataset, train_kind, train_scheme, train_alpha, train_epochs,
                       train_lr, train_lambda, train_hierarchy, train_folds, train_k_max,
                       train_seed, train_gate_threshold, train_model_out);
    }
    if (induce_cmd->parsed()) {
      return cmd_induce(induce_dataset, induce_folds, induce_k_max, induce_seed, induce_kind,
                        induce_out);
    }
    if (eval_cmd->parsed()) return cmd_eval(eval_model, eval_test, eval_out);
    if (classify_cmd->parsed()) return cmd_classify(cls_model, cls_in, cls_out);
    if (analyze_cmd->parsed()) {
      return cmd_analyze(an_mode, an_instances, an_packages, an_first_year, an_last_year, an_out,
                         an_csv);
    }
    if (report_cmd->parsed()) {
      return cmd_report(rep_model, rep_corpus, rep_package, rep_format, rep_out);
    }
  } catch (const RateLimitedError& e) {
    std::cerr << "tdscan: error kind=RateLimited retry_after=" << e.retry_after_seconds()
              << " msg=\"" << e.message() << "\"\n";
    return kExitFatal;
  } catch (const Error& e) {
    std::cerr << "tdscan: error kind=" << kind_name(e.kind()) << " msg=\"" << e.message()
              << "\"\n";
    return kExitFatal;
  } catch (const std::exception& e) {
    std::cerr << "tdscan: error kind=Unhandled msg=\"" << e.what() << "\"\n";
    return kExitFatal;
  }
  return kExitFatal;
}

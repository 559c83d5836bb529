#pragma once

// End-to-end label generation: ingest features and labels, build the
// similarity graph, initialize, propagate, decode pseudo-labels, evaluate and
// report.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "transduct/baselines.hpp"
#include "transduct/core.hpp"
#include "transduct/dynamics.hpp"
#include "transduct/io.hpp"
#include "transduct/metrics.hpp"
#include "transduct/priors.hpp"
#include "transduct/similarity.hpp"

namespace transduct {

enum class Method { Gtg, GroupLoss, LabelSpreading, LabelPropagation, Harmonic };

inline std::string to_string(Method m) {
  switch (m) {
    case Method::Gtg: return "gtg";
    case Method::GroupLoss: return "group_loss";
    case Method::LabelSpreading: return "label_spreading";
    case Method::LabelPropagation: return "label_propagation";
    case Method::Harmonic: return "harmonic";
  }
  return "?";
}

inline Method parse_method(const std::string& s) {
  for (Method m : {Method::Gtg, Method::GroupLoss, Method::LabelSpreading, Method::LabelPropagation, Method::Harmonic})
    if (to_string(m) == s) return m;
  throw ConfigError("unknown method '" + s + "'");
}

inline const std::vector<std::string>& default_metrics() {
  static const std::vector<std::string> names{"accuracy", "macro_f1", "nmi"};
  return names;
}

struct RunConfig {
  Method method = Method::Gtg;
  std::string features_path;
  /// Label file (`id,label`); its labeled rows are the anchor pool.
  std::string labels_path;
  /// Explicit anchors (`id,label`); alternative to labels_path.
  std::string anchors_path;
  std::string truth_path;
  /// Optional `id,l0,...` logits; switches the prior to softmax mode.
  std::string logits_path;
  /// Optional `id,allowed` class masks.
  std::string class_mask_path;

  NegativeHandling negative_handling = NegativeHandling::Clamp;
  std::optional<std::size_t> knn;
  double temperature = 1.0;
  /// Fraction of each class's labeled rows used as anchors; all of them when
  /// unset.
  std::optional<double> anchor_fraction;
  std::uint64_t seed = 0;

  std::optional<std::size_t> max_iterations;
  std::optional<double> tolerance;
  std::optional<std::size_t> fixed_iterations;
  bool reclamp_anchors = true;
  double alpha = 0.99;

  std::vector<std::string> metrics = default_metrics();
  std::string out_dir = ".";

  DynamicsConfig dynamics() const {
    DynamicsConfig d;
    if (max_iterations) d.max_iterations = *max_iterations;
    if (tolerance) d.tolerance = *tolerance;
    d.reclamp_anchors = reclamp_anchors;
    if (method == Method::GroupLoss)
      d.fixed_iterations = fixed_iterations.value_or(kGroupLossIterations);
    else
      d.fixed_iterations = fixed_iterations;
    return d;
  }

  BaselineConfig baseline() const {
    BaselineConfig b;
    b.alpha = alpha;
    if (max_iterations) b.max_iterations = *max_iterations;
    if (tolerance) b.tolerance = *tolerance;
    b.seed = seed;
    return b;
  }

  void validate() const {
    if (features_path.empty()) throw ConfigError("--features is required");
    if (labels_path.empty() == anchors_path.empty())
      throw ConfigError("exactly one anchor source is required: --labels or --anchors-file");
    if (anchor_fraction) {
      if (!anchors_path.empty()) throw ConfigError("--anchor-fraction applies to --labels, not --anchors-file");
      if (!(*anchor_fraction > 0.0 && *anchor_fraction <= 1.0)) throw ConfigError("--anchor-fraction must lie in (0, 1]");
    }
    if (knn && *knn < 1) throw ConfigError("--knn must be >= 1");
    if (!(temperature > 0.0) || !std::isfinite(temperature)) throw ConfigError("--temperature must be positive");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("--alpha must lie in (0, 1)");
    dynamics().validate();
    if (fixed_iterations && *fixed_iterations < 1) throw ConfigError("--fixed-iters must be >= 1");
    for (const auto& name : metrics) {
      if (name == "accuracy" || name == "macro_f1" || name == "nmi" || name == "group_loss" || name == "kmeans_nmi")
        continue;
      if (name.rfind("recall@", 0) == 0) {
        const std::string k = name.substr(7);
        if (!k.empty() && k.find_first_not_of("0123456789") == std::string::npos && std::stoul(k) >= 1) continue;
      }
      throw ConfigError("unknown metric '" + name + "'");
    }
  }

  nlohmann::json to_json() const {
    auto opt = [](const auto& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    DynamicsConfig d = dynamics();
    BaselineConfig b = baseline();
    return {
        {"method", to_string(method)},
        {"features", features_path},
        {"labels", labels_path.empty() ? nlohmann::json(nullptr) : nlohmann::json(labels_path)},
        {"anchors_file", anchors_path.empty() ? nlohmann::json(nullptr) : nlohmann::json(anchors_path)},
        {"truth", truth_path.empty() ? nlohmann::json(nullptr) : nlohmann::json(truth_path)},
        {"logits", logits_path.empty() ? nlohmann::json(nullptr) : nlohmann::json(logits_path)},
        {"class_mask", class_mask_path.empty() ? nlohmann::json(nullptr) : nlohmann::json(class_mask_path)},
        {"negative_handling", to_string(negative_handling)},
        {"knn", opt(knn)},
        {"prior", logits_path.empty() ? "uniform" : "logits"},
        {"temperature", temperature},
        {"anchor_fraction", opt(anchor_fraction)},
        {"seed", seed},
        {"dynamics",
         {{"max_iterations", d.max_iterations},
          {"tolerance", d.tolerance},
          {"fixed_iterations", opt(d.fixed_iterations)},
          {"reclamp_anchors", d.reclamp_anchors}}},
        {"baseline",
         {{"alpha", b.alpha},
          {"max_iterations", b.max_iterations},
          {"tolerance", b.tolerance},
          {"kmeans_restarts", b.kmeans_restarts}}},
        {"metrics", metrics},
        {"out_dir", out_dir},
    };
  }
};

/// Metric values plus run metadata.
struct EvaluationReport {
  std::map<std::string, double> metrics;
  nlohmann::json config_echo;
  std::size_t iterations_used = 0;
  bool converged = false;
};

/// Everything the pipeline needs, resolved from files.
struct PipelineInput {
  FeatureSet features;
  ClassVocabulary vocab;
  /// Number of classes the propagators may assign (classes seen in the
  /// anchor source); truth-only classes come after these in `vocab`.
  std::size_t num_classes = 0;
  AnchorSet anchors;
  /// Truth class per sample or kUnlabeled; empty when no truth file.
  std::vector<std::size_t> truth;
  std::optional<Matrix> logits;
  std::optional<ClassMask> class_mask;
};

/// Per-class stratified anchor sample: from each class's labeled rows,
/// max(1, round(fraction * count)) rows chosen by a seeded Fisher-Yates
/// shuffle. Result is sorted by sample index.
inline std::vector<Anchor> sample_anchors(const std::vector<std::size_t>& labels, std::size_t num_classes,
                                          double fraction, std::uint64_t seed) {
  std::vector<std::vector<std::size_t>> by_class(num_classes);
  std::size_t labeled = 0;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] != kUnlabeled) {
      by_class.at(labels[i]).push_back(i);
      ++labeled;
    }
  if (fraction * static_cast<double>(labeled) < 1.0)
    throw ConfigError("anchor fraction selects no samples (fraction * labeled < 1)");
  std::mt19937_64 rng(seed);
  std::vector<Anchor> out;
  for (std::size_t c = 0; c < num_classes; ++c) {
    auto& pool = by_class[c];
    if (pool.empty()) continue;
    for (std::size_t i = pool.size() - 1; i > 0; --i) {
      std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
      std::swap(pool[i], pool[j]);
    }
    auto take = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(pool.size())));
    take = std::clamp<std::size_t>(take, 1, pool.size());
    for (std::size_t r = 0; r < take; ++r) out.push_back({pool[r], c});
  }
  std::sort(out.begin(), out.end(), [](const Anchor& a, const Anchor& b) { return a.index < b.index; });
  return out;
}

inline PipelineInput load_inputs(const RunConfig& cfg) {
  cfg.validate();
  FeatureSet features = read_features(cfg.features_path);
  ClassVocabulary vocab;
  std::vector<Anchor> anchors;
  if (!cfg.labels_path.empty()) {
    std::vector<std::size_t> labels = read_label_column(cfg.labels_path, features, vocab);
    if (cfg.anchor_fraction) {
      anchors = sample_anchors(labels, vocab.size(), *cfg.anchor_fraction, cfg.seed);
    } else {
      for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] != kUnlabeled) anchors.push_back({i, labels[i]});
    }
  } else {
    std::vector<std::size_t> labels = read_label_column(cfg.anchors_path, features, vocab);
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] != kUnlabeled) anchors.push_back({i, labels[i]});
  }
  const std::size_t m = vocab.size();
  if (m < 2) throw DataError("anchor source must contain at least two classes, found " + std::to_string(m));
  if (anchors.empty()) throw DataError("no anchors");

  PipelineInput input{std::move(features), {}, m, {}, {}, std::nullopt, std::nullopt};
  input.anchors = AnchorSet(std::move(anchors), input.features.size(), m);
  if (!cfg.truth_path.empty()) input.truth = read_label_column(cfg.truth_path, input.features, vocab);
  if (!cfg.logits_path.empty()) input.logits = read_matrix_by_id(cfg.logits_path, input.features, m);
  if (!cfg.class_mask_path.empty()) input.class_mask = read_class_mask(cfg.class_mask_path, input.features, vocab);
  input.vocab = std::move(vocab);
  return input;
}

struct RunOutputs {
  std::string predictions_csv;
  nlohmann::json report_json;
  EvaluationReport report;
  AssignmentMatrix assignment;
  std::vector<std::size_t> predicted;
};

namespace detail {

inline nlohmann::json ids_of(const std::vector<std::size_t>& rows, const FeatureSet& features) {
  nlohmann::json out = nlohmann::json::array();
  for (std::size_t i : rows) out.push_back(features.ids()[i]);
  return out;
}

}  // namespace detail

/// Runs the configured method on resolved inputs.
inline RunOutputs execute(const RunConfig& cfg, const PipelineInput& in) {
  cfg.validate();
  const FeatureSet& features = in.features;
  const std::size_t n = features.size();
  const std::size_t m = in.num_classes;

  // Similarity graph.
  PearsonResult pearson = pearson_matrix(features);
  SimilarityMatrix w = handle_negatives(pearson.w, cfg.negative_handling);
  if (cfg.knn) w = sparsify_knn(w, *cfg.knn);

  std::vector<std::size_t> degenerate;
  std::vector<std::size_t> isolated;
  std::vector<double> trace_values;
  std::size_t iterations = 0;
  bool converged = false;
  std::optional<AssignmentMatrix> result;

  const bool game = cfg.method == Method::Gtg || cfg.method == Method::GroupLoss;
  if (game) {
    PriorConfig prior;
    prior.mode = in.logits ? PriorMode::Logits : PriorMode::Uniform;
    prior.temperature = cfg.temperature;
    prior.class_mask = in.class_mask;
    AssignmentMatrix x0 = initial_assignment(n, m, prior, in.anchors, in.logits ? &*in.logits : nullptr);
    auto [x, trace] = run_dynamics(w, std::move(x0), cfg.dynamics(), in.anchors);
    result = std::move(x);
    trace_values = std::move(trace.functional_values);
    iterations = trace.iterations_used;
    converged = trace.converged;
    degenerate = std::move(trace.degenerate_rows);
  } else {
    std::vector<std::size_t> seeds(n, kUnlabeled);
    for (const auto& a : in.anchors.entries()) seeds[a.index] = a.label;
    LabelSet labels(m, std::move(seeds), std::vector<std::string>(in.vocab.names().begin(), in.vocab.names().begin() + m));
    PropagationResult r = [&] {
      switch (cfg.method) {
        case Method::LabelSpreading: return label_spreading(w, labels, cfg.baseline());
        case Method::LabelPropagation: return label_propagation(w, labels, cfg.baseline());
        default: return harmonic_function(w, labels);
      }
    }();
    result = std::move(r.x);
    iterations = r.iterations_used;
    converged = r.converged;
    isolated = std::move(r.isolated);
  }

  const AssignmentMatrix& x = *result;
  std::vector<std::size_t> predicted = argmax_decode(x);

  std::ostringstream csv;
  csv << "id,predicted_label,confidence";
  for (std::size_t c = 0; c < m; ++c) csv << ",p_" << c;
  csv << '\n';
  for (std::size_t i = 0; i < n; ++i) {
    auto r = x.row(i);
    csv << features.ids()[i] << ',' << in.vocab.names()[predicted[i]] << ','
        << format_double(*std::max_element(r.begin(), r.end()));
    for (double v : r) csv << ',' << format_double(v);
    csv << '\n';
  }

  // Evaluation on held-out rows: truth present and not an anchor.
  EvaluationReport report;
  report.config_echo = cfg.to_json();
  report.iterations_used = iterations;
  report.converged = converged;
  nlohmann::json notes = nlohmann::json::array();
  std::size_t evaluated = 0;

  if (!in.truth.empty()) {
    const std::vector<bool> anchored = in.anchors.mask(n);
    std::vector<std::size_t> eval_pred, eval_truth, eval_rows;
    for (std::size_t i = 0; i < n; ++i)
      if (in.truth[i] != kUnlabeled && !anchored[i]) {
        eval_rows.push_back(i);
        eval_pred.push_back(predicted[i]);
        eval_truth.push_back(in.truth[i]);
      }
    evaluated = eval_rows.size();
    std::vector<std::size_t> truth_rows;
    for (std::size_t i = 0; i < n; ++i)
      if (in.truth[i] != kUnlabeled) truth_rows.push_back(i);

    for (const auto& name : cfg.metrics) {
      const bool held_out = name == "accuracy" || name == "macro_f1" || name == "nmi" || name == "group_loss";
      if (held_out && eval_rows.empty()) {
        notes.push_back("metric " + name + " skipped: no held-out rows with truth");
        continue;
      }
      if (name == "accuracy") {
        report.metrics[name] = accuracy(eval_pred, eval_truth);
      } else if (name == "macro_f1") {
        report.metrics[name] = macro_f1(eval_pred, eval_truth, in.vocab.size());
      } else if (name == "nmi") {
        report.metrics[name] = nmi(eval_pred, eval_truth);
      } else if (name == "group_loss") {
        std::vector<std::size_t> y(n, kUnlabeled);
        std::size_t usable = 0;
        for (std::size_t i : eval_rows)
          if (in.truth[i] < m) {
            y[i] = in.truth[i];
            ++usable;
          }
        if (usable == 0) {
          notes.push_back("metric group_loss skipped: no held-out rows with a modelled class");
          continue;
        }
        report.metrics[name] = group_loss_value(x, LabelSet(m, std::move(y)));
      } else if (name == "kmeans_nmi" || name.rfind("recall@", 0) == 0) {
        if (truth_rows.size() < 2) {
          notes.push_back("metric " + name + " skipped: fewer than two rows with truth");
          continue;
        }
        Matrix sub(truth_rows.size(), features.dim());
        std::vector<std::string> sub_ids;
        std::vector<std::size_t> sub_truth;
        for (std::size_t r = 0; r < truth_rows.size(); ++r) {
          auto src = features.data().row(truth_rows[r]);
          std::copy(src.begin(), src.end(), sub.row(r).begin());
          sub_ids.push_back(features.ids()[truth_rows[r]]);
          sub_truth.push_back(in.truth[truth_rows[r]]);
        }
        FeatureSet subset(std::move(sub), std::move(sub_ids));
        if (name == "kmeans_nmi") {
          std::set<std::size_t> classes(sub_truth.begin(), sub_truth.end());
          KMeansResult km = kmeans(subset, classes.size(), cfg.baseline());
          report.metrics[name] = nmi(km.assignment, sub_truth);
        } else {
          std::size_t k = std::stoul(name.substr(7));
          if (subset.size() < k + 1) {
            notes.push_back("metric " + name + " skipped: not enough rows with truth");
            continue;
          }
          report.metrics[name] = recall_at_k(subset, sub_truth, {k}).at(k);
        }
      }
    }
  } else {
    notes.push_back("no truth file supplied; metrics not computed");
  }

  for (const auto& [name, value] : report.metrics)
    if (!std::isfinite(value)) throw NumericalError("metric " + name + " is not finite");
  if (!std::isfinite(trace_values.empty() ? 0.0 : trace_values.back()))
    throw NumericalError("consistency functional is not finite");

  nlohmann::json json;
  json["config"] = report.config_echo;
  json["metrics"] = report.metrics;
  json["iterations_used"] = report.iterations_used;
  json["converged"] = report.converged;
  json["functional_trace"] = trace_values;
  json["summary"] = {
      {"n_samples", n},
      {"n_features", features.dim()},
      {"n_classes", m},
      {"classes", std::vector<std::string>(in.vocab.names().begin(), in.vocab.names().begin() + m)},
      {"n_anchors", in.anchors.size()},
      {"n_evaluated", evaluated},
  };
  json["warnings"] = {
      {"degenerate_rows", detail::ids_of(degenerate, features)},
      {"isolated_vertices", detail::ids_of(isolated, features)},
      {"zero_variance_samples", detail::ids_of(pearson.zero_variance, features)},
      {"notes", notes},
  };

  return {csv.str(), std::move(json), std::move(report), x, std::move(predicted)};
}

inline RunOutputs run_pipeline(const RunConfig& cfg) { return execute(cfg, load_inputs(cfg)); }

/// Writes predictions.csv and report.json under cfg.out_dir.
inline void write_outputs(const RunOutputs& out, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  const auto dir = std::filesystem::path(out_dir);
  {
    std::ofstream f(dir / "predictions.csv", std::ios::binary);
    if (!f) throw DataError("cannot write predictions.csv in '" + out_dir + "'");
    f << out.predictions_csv;
  }
  {
    std::ofstream f(dir / "report.json", std::ios::binary);
    if (!f) throw DataError("cannot write report.json in '" + out_dir + "'");
    f << out.report_json.dump(2) << '\n';
  }
}

}  // namespace transduct

#pragma once

// Offline evaluation of a predictions file against a truth file.

#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "transduct/baselines.hpp"
#include "transduct/io.hpp"
#include "transduct/metrics.hpp"

namespace transduct {

struct EvalConfig {
  std::string predictions_path;
  std::string truth_path;
  /// Needed only for recall@K and kmeans_nmi.
  std::string features_path;
  std::vector<std::string> metrics{"accuracy", "macro_f1", "nmi"};
  std::uint64_t seed = 0;
};

/// Scores every predicted row whose id has a truth label. Returns a report
/// with the same `metrics` / `summary` / `warnings` layout as a run report.
inline nlohmann::json evaluate_predictions(const EvalConfig& cfg) {
  if (cfg.predictions_path.empty() || cfg.truth_path.empty())
    throw ConfigError("eval needs --predictions and --truth");
  CsvTable pred = read_csv(cfg.predictions_path);
  if (pred.header.size() < 2 || pred.header[0] != "id" || pred.header[1] != "predicted_label")
    throw ParseError(cfg.predictions_path, 1, "header must start with 'id,predicted_label'");
  CsvTable truth = read_csv(cfg.truth_path);
  if (truth.header.size() != 2 || truth.header[0] != "id")
    throw ParseError(cfg.truth_path, 1, "label header must be 'id,label'");

  ClassVocabulary vocab;
  std::unordered_map<std::string, std::size_t> truth_of;
  for (const auto& row : truth.rows) {
    if (row.fields[1].empty()) continue;
    if (!truth_of.emplace(row.fields[0], vocab.intern(row.fields[1])).second)
      throw DuplicateId(cfg.truth_path, row.line, row.fields[0]);
  }

  std::vector<std::size_t> p, t;
  std::set<std::string> seen;
  nlohmann::json notes = nlohmann::json::array();
  for (const auto& row : pred.rows) {
    if (!seen.insert(row.fields[0]).second) throw DuplicateId(cfg.predictions_path, row.line, row.fields[0]);
    auto it = truth_of.find(row.fields[0]);
    if (it == truth_of.end()) continue;
    p.push_back(vocab.intern(row.fields[1]));
    t.push_back(it->second);
  }

  nlohmann::json metrics = nlohmann::json::object();
  for (const auto& name : cfg.metrics) {
    if (name == "accuracy" || name == "macro_f1" || name == "nmi") {
      if (p.empty()) {
        notes.push_back("metric " + name + " skipped: no predicted rows with truth");
        continue;
      }
      if (name == "accuracy") metrics[name] = accuracy(p, t);
      if (name == "macro_f1") metrics[name] = macro_f1(p, t, vocab.size());
      if (name == "nmi") metrics[name] = nmi(p, t);
    } else if (name == "kmeans_nmi" || name.rfind("recall@", 0) == 0) {
      if (cfg.features_path.empty()) throw ConfigError("metric " + name + " needs --features");
      FeatureSet features = read_features(cfg.features_path);
      Matrix sub(0, 0);
      std::vector<std::size_t> rows, labels;
      for (std::size_t i = 0; i < features.size(); ++i) {
        auto it = truth_of.find(features.ids()[i]);
        if (it == truth_of.end()) continue;
        rows.push_back(i);
        labels.push_back(it->second);
      }
      if (rows.size() < 2) {
        notes.push_back("metric " + name + " skipped: fewer than two rows with truth");
        continue;
      }
      sub = Matrix(rows.size(), features.dim());
      std::vector<std::string> ids;
      for (std::size_t r = 0; r < rows.size(); ++r) {
        auto src = features.data().row(rows[r]);
        std::copy(src.begin(), src.end(), sub.row(r).begin());
        ids.push_back(features.ids()[rows[r]]);
      }
      FeatureSet subset(std::move(sub), std::move(ids));
      if (name == "kmeans_nmi") {
        BaselineConfig b;
        b.seed = cfg.seed;
        std::set<std::size_t> classes(labels.begin(), labels.end());
        metrics[name] = nmi(kmeans(subset, classes.size(), b).assignment, labels);
      } else {
        const std::string k_text = name.substr(7);
        if (k_text.empty() || k_text.find_first_not_of("0123456789") != std::string::npos)
          throw ConfigError("unknown metric '" + name + "'");
        std::size_t k = std::stoul(k_text);
        if (k < 1) throw ConfigError("recall@K needs K >= 1");
        if (subset.size() < k + 1) {
          notes.push_back("metric " + name + " skipped: not enough rows with truth");
          continue;
        }
        metrics[name] = recall_at_k(subset, labels, {k}).at(k);
      }
    } else {
      throw ConfigError("unknown metric '" + name + "'");
    }
  }

  nlohmann::json out;
  out["metrics"] = metrics;
  out["summary"] = {{"n_predictions", pred.rows.size()}, {"n_evaluated", p.size()}};
  out["warnings"] = {{"notes", notes}};
  out["config"] = {{"predictions", cfg.predictions_path},
                   {"truth", cfg.truth_path},
                   {"features", cfg.features_path.empty() ? nlohmann::json(nullptr) : nlohmann::json(cfg.features_path)},
                   {"metrics", cfg.metrics},
                   {"seed", cfg.seed}};
  return out;
}

}  // namespace transduct

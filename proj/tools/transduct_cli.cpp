// transduct: graph transduction from the command line.
//
//   transduct synth --out-dir data --seed 7
//   transduct run --features data/features.csv --labels data/labels.csv \
//       --truth data/labels.csv --anchor-fraction 0.02 --out-dir out
//   transduct eval --predictions out/predictions.csv --truth data/labels.csv
//
// Exit codes: 0 success, 1 config error, 2 data error, 3 numerical failure.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "transduct/transduct.hpp"

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

int exit_code(const transduct::Error& e) { return static_cast<int>(e.kind()); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph transduction: propagate labels from anchors to unlabeled samples"};
  app.require_subcommand(1);

  // run
  transduct::RunConfig run;
  std::string method = "gtg";
  std::string negatives = "clamp";
  std::string metrics;
  std::optional<std::size_t> knn, max_iters, fixed_iters;
  std::optional<double> anchor_fraction, tol;
  bool no_reclamp = false;
  auto* run_cmd = app.add_subcommand("run", "Propagate labels and write predictions.csv and report.json");
  run_cmd->add_option("--features", run.features_path, "Feature CSV (id,f0,f1,...)")->required();
  run_cmd->add_option("--labels", run.labels_path, "Label CSV (id,label); empty label = unlabeled");
  run_cmd->add_option("--anchors-file", run.anchors_path, "Explicit anchor CSV (id,label)");
  run_cmd->add_option("--truth", run.truth_path, "Truth CSV (id,label) for evaluation");
  run_cmd->add_option("--logits", run.logits_path, "Prior logits CSV (id,l0,...,l{m-1})");
  run_cmd->add_option("--class-mask", run.class_mask_path, "Allowed classes CSV (id,allowed with ';' separators)");
  run_cmd->add_option("--method", method, "gtg | group_loss | label_spreading | label_propagation | harmonic")
      ->capture_default_str();
  run_cmd->add_option("--anchor-fraction", anchor_fraction, "Stratified fraction of labeled rows used as anchors");
  run_cmd->add_option("--negative-handling", negatives, "clamp | shift")->capture_default_str();
  run_cmd->add_option("--knn", knn, "Keep k nearest neighbours per row");
  run_cmd->add_option("--temperature", run.temperature, "Softmax temperature for logit priors")->capture_default_str();
  run_cmd->add_option("--max-iters", max_iters, "Iteration cap");
  run_cmd->add_option("--tol", tol, "Convergence tolerance");
  run_cmd->add_option("--fixed-iters", fixed_iters, "Run exactly this many replicator steps");
  run_cmd->add_flag("--no-reclamp", no_reclamp, "Do not re-set anchor rows after each step");
  run_cmd->add_option("--alpha", run.alpha, "Label spreading alpha")->capture_default_str();
  run_cmd->add_option("--seed", run.seed, "Random seed")->capture_default_str();
  run_cmd->add_option("--out-dir", run.out_dir, "Output directory")->capture_default_str();
  run_cmd->add_option("--metrics", metrics, "Comma list: accuracy,macro_f1,nmi,group_loss,kmeans_nmi,recall@K");

  // synth
  transduct::BlobSpec blobs;
  std::uint64_t synth_seed = 7;
  std::string synth_dir = ".";
  auto* synth_cmd = app.add_subcommand("synth", "Write a seeded Gaussian-blob dataset");
  synth_cmd->add_option("--blobs", blobs.blobs, "Number of blobs")->capture_default_str();
  synth_cmd->add_option("--per-blob", blobs.per_blob, "Points per blob")->capture_default_str();
  synth_cmd->add_option("--dim", blobs.dim, "Feature dimension")->capture_default_str();
  synth_cmd->add_option("--separation", blobs.separation, "Minimum centroid distance")->capture_default_str();
  synth_cmd->add_option("--stddev", blobs.stddev, "Per-coordinate standard deviation")->capture_default_str();
  synth_cmd->add_option("--seed", synth_seed, "Random seed")->capture_default_str();
  synth_cmd->add_option("--out-dir", synth_dir, "Output directory")->capture_default_str();

  // eval
  transduct::EvalConfig eval;
  std::string eval_metrics;
  std::string eval_out;
  auto* eval_cmd = app.add_subcommand("eval", "Score a predictions file against truth labels");
  eval_cmd->add_option("--predictions", eval.predictions_path, "predictions.csv from run")->required();
  eval_cmd->add_option("--truth", eval.truth_path, "Truth CSV (id,label)")->required();
  eval_cmd->add_option("--features", eval.features_path, "Feature CSV, for recall@K and kmeans_nmi");
  eval_cmd->add_option("--metrics", eval_metrics, "Comma list of metrics");
  eval_cmd->add_option("--seed", eval.seed, "Seed for kmeans_nmi")->capture_default_str();
  eval_cmd->add_option("--out", eval_out, "Write the JSON report here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*run_cmd) {
      run.method = transduct::parse_method(method);
      run.negative_handling = transduct::parse_negative_handling(negatives);
      run.knn = knn;
      run.anchor_fraction = anchor_fraction;
      run.max_iterations = max_iters;
      run.tolerance = tol;
      run.fixed_iterations = fixed_iters;
      run.reclamp_anchors = !no_reclamp;
      if (!metrics.empty()) run.metrics = split_list(metrics);
      auto out = transduct::run_pipeline(run);
      transduct::write_outputs(out, run.out_dir);
      std::cerr << "wrote " << (std::filesystem::path(run.out_dir) / "predictions.csv").string() << " and report.json ("
                << out.report.iterations_used << " iterations, "
                << (out.report.converged ? "converged" : "not converged") << ")\n";
    } else if (*synth_cmd) {
      auto data = transduct::make_synthetic(blobs, synth_seed);
      std::filesystem::create_directories(synth_dir);
      const auto dir = std::filesystem::path(synth_dir);
      transduct::write_features((dir / "features.csv").string(), data.features);
      transduct::write_labels((dir / "labels.csv").string(), data.features.ids(), data.labels);
      std::vector<std::string> centroid_ids;
      for (const auto& name : data.labels.class_names()) centroid_ids.push_back(name);
      transduct::write_features((dir / "centroids.csv").string(),
                                transduct::FeatureSet(data.centroids, centroid_ids));
      std::cerr << "wrote " << data.features.size() << " samples to " << synth_dir << "\n";
    } else if (*eval_cmd) {
      if (!eval_metrics.empty()) eval.metrics = split_list(eval_metrics);
      auto report = transduct::evaluate_predictions(eval);
      if (eval_out.empty()) {
        std::cout << report.dump(2) << '\n';
      } else {
        std::ofstream f(eval_out, std::ios::binary);
        if (!f) throw transduct::DataError("cannot write '" + eval_out + "'");
        f << report.dump(2) << '\n';
      }
    }
  } catch (const transduct::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e);
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

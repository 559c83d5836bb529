#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "support/generators.hpp"
#include "support/oracles.hpp"
#include "transduct/transduct.hpp"

using namespace transduct;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  fs::path dir = fs::path(TRANSDUCT_TEST_TMP) / "pipeline" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  f << text;
}

std::string read_file(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  std::string cmd = std::string(TRANSDUCT_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

/// Blobs whose Pearson similarities separate the classes: high-dimensional
/// centroids with large spread across coordinates.
SyntheticData wide_blobs(std::uint64_t seed) {
  BlobSpec spec;
  spec.blobs = 3;
  spec.per_blob = 40;
  spec.dim = 32;
  spec.separation = 6.0;
  spec.stddev = 1.0;
  return make_synthetic(spec, seed);
}

}  // namespace

TEST(Ingest, JoinsIdsAndKeepsEmptyLabelsUnlabeled) {
  auto dir = scratch("ingest");
  write_file(dir / "f.csv", "id,f0,f1\na,1,2\nb,3,4\nc,5,6\n");
  write_file(dir / "l.csv", "id,label\nc,cat\na,dog\nb,\n");
  auto [features, labels] = ingest((dir / "f.csv").string(), (dir / "l.csv").string());
  EXPECT_EQ(features.size(), 3u);
  EXPECT_EQ(labels.num_classes(), 2u);
  EXPECT_EQ(labels.class_names(), (std::vector<std::string>{"cat", "dog"}));
  EXPECT_EQ(labels[0], 1u);
  EXPECT_FALSE(labels.is_labeled(1));
  EXPECT_EQ(labels[2], 0u);
}

TEST(Ingest, UnknownId) {
  auto dir = scratch("unknown");
  write_file(dir / "f.csv", "id,f0,f1\na,1,2\n");
  write_file(dir / "l.csv", "id,label\nz,cat\n");
  EXPECT_THROW(ingest((dir / "f.csv").string(), (dir / "l.csv").string()), UnknownId);
}

TEST(Ingest, RaggedFeatureRow) {
  auto dir = scratch("ragged");
  write_file(dir / "f.csv", "id,f0,f1\na,1,2\nb,3\n");
  write_file(dir / "l.csv", "id,label\na,cat\n");
  try {
    ingest((dir / "f.csv").string(), (dir / "l.csv").string());
    FAIL() << "expected DimensionMismatch";
  } catch (const DimensionMismatch& e) {
    EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos) << e.what();
  }
}

TEST(Ingest, DuplicateAndBadNumbers) {
  auto dir = scratch("dup");
  write_file(dir / "f.csv", "id,f0\na,1\na,2\n");
  EXPECT_THROW(read_features((dir / "f.csv").string()), DuplicateId);
  write_file(dir / "g.csv", "id,f0\na,1x\n");
  EXPECT_THROW(read_features((dir / "g.csv").string()), ParseError);
  write_file(dir / "h.csv", "id,f0\na,nan\n");
  EXPECT_THROW(read_features((dir / "h.csv").string()), ParseError);
  EXPECT_THROW(read_features((dir / "missing.csv").string()), DataError);
}

TEST(Ingest, FeatureRoundTripIsExact) {
  auto dir = scratch("roundtrip");
  tsupport::Gen gen(61);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix x = gen.gaussian(gen.index(1, 30), gen.index(1, 8), std::pow(10.0, gen.uniform(-8, 8)));
    FeatureSet f(x);
    write_features((dir / "f.csv").string(), f);
    FeatureSet back = read_features((dir / "f.csv").string());
    EXPECT_EQ(back.ids(), f.ids());
    EXPECT_EQ(back.data(), f.data());
  }
}

TEST(Synthetic, ShapeAndSeparation) {
  BlobSpec spec;
  auto data = make_synthetic(spec, 7);
  EXPECT_EQ(data.features.size(), 300u);
  EXPECT_EQ(data.features.dim(), 2u);
  EXPECT_EQ(data.labels.num_classes(), 3u);
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = a + 1; b < 3; ++b) {
      double s = 0.0;
      for (std::size_t k = 0; k < 2; ++k) s += std::pow(data.centroids(a, k) - data.centroids(b, k), 2);
      EXPECT_GE(std::sqrt(s), 6.0);
    }
  auto again = make_synthetic(spec, 7);
  EXPECT_EQ(again.features.data(), data.features.data());
}

TEST(Synthetic, ZeroStddevAndSingleBlob) {
  BlobSpec spec;
  spec.stddev = 0.0;
  auto data = make_synthetic(spec, 1);
  for (std::size_t i = 0; i < data.features.size(); ++i)
    for (std::size_t k = 0; k < 2; ++k) EXPECT_EQ(data.features.data()(i, k), data.centroids(data.labels[i], k));
  spec.blobs = 1;
  auto single = make_synthetic(spec, 1);
  EXPECT_EQ(single.labels.num_classes(), 1u);
  spec.blobs = 0;
  EXPECT_THROW(make_synthetic(spec, 1), InvalidSpec);
}

TEST(SampleAnchors, StratifiedAndDeterministic) {
  std::vector<std::size_t> labels;
  for (std::size_t c = 0; c < 3; ++c)
    for (int i = 0; i < 100; ++i) labels.push_back(c);
  auto a = sample_anchors(labels, 3, 0.02, 7);
  EXPECT_EQ(a.size(), 6u);
  std::vector<int> per(3, 0);
  for (const auto& x : a) ++per[x.label];
  EXPECT_EQ(per, (std::vector<int>{2, 2, 2}));
  EXPECT_EQ(a, sample_anchors(labels, 3, 0.02, 7));
  auto two = sample_anchors({0, 0}, 1, 0.5, 3);
  EXPECT_EQ(two.size(), 1u);
  EXPECT_EQ(two, sample_anchors({0, 0}, 1, 0.5, 3));
  EXPECT_THROW(sample_anchors({0, 0}, 1, 0.4, 3), ConfigError);
}

class PipelineRun : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = scratch(::testing::UnitTest::GetInstance()->current_test_info()->name());
    data_ = std::make_unique<SyntheticData>(wide_blobs(3));
    write_features((dir_ / "features.csv").string(), data_->features);
    write_labels((dir_ / "labels.csv").string(), data_->features.ids(), data_->labels);
  }

  RunConfig config(Method method) const {
    RunConfig cfg;
    cfg.method = method;
    cfg.features_path = (dir_ / "features.csv").string();
    cfg.labels_path = (dir_ / "labels.csv").string();
    cfg.truth_path = (dir_ / "labels.csv").string();
    cfg.anchor_fraction = 0.05;
    cfg.seed = 11;
    cfg.out_dir = (dir_ / "out").string();
    return cfg;
  }

  fs::path dir_;
  std::unique_ptr<SyntheticData> data_;
};

TEST_F(PipelineRun, GtgRecoversBlobs) {
  auto out = run_pipeline(config(Method::Gtg));
  EXPECT_EQ(out.report_json["summary"]["n_anchors"], 6);
  EXPECT_GE(out.report.metrics.at("accuracy"), 0.95);
  auto oracle = tsupport::nearest_centroid(data_->features.data(), data_->centroids);
  EXPECT_EQ(oracle, data_->labels.labels());
  EXPECT_FALSE(out.report_json["functional_trace"].empty());
}

TEST_F(PipelineRun, EveryMethodRunsWithTheSameReportSchema) {
  std::vector<std::string> keys;
  for (Method m : {Method::Gtg, Method::GroupLoss, Method::LabelSpreading, Method::LabelPropagation, Method::Harmonic}) {
    auto cfg = config(m);
    cfg.metrics = {"accuracy", "macro_f1", "nmi", "group_loss", "kmeans_nmi", "recall@1", "recall@4"};
    auto out = run_pipeline(cfg);
    std::vector<std::string> mine;
    for (const auto& [k, v] : out.report_json.items()) mine.push_back(k);
    for (const auto& [k, v] : out.report_json["config"].items()) mine.push_back("config." + k);
    if (keys.empty()) keys = mine;
    EXPECT_EQ(mine, keys) << to_string(m);
    EXPECT_EQ(out.report.metrics.size(), 7u) << to_string(m);
    EXPECT_GE(out.report.metrics.at("accuracy"), 0.9) << to_string(m);
  }
}

TEST_F(PipelineRun, GroupLossRunsFixedSteps) {
  auto out = run_pipeline(config(Method::GroupLoss));
  EXPECT_EQ(out.report.iterations_used, kGroupLossIterations);
  EXPECT_EQ(out.report_json["functional_trace"].size(), kGroupLossIterations + 1);
}

TEST_F(PipelineRun, AllRowsAnchoredReturnsInputLabels) {
  auto cfg = config(Method::Gtg);
  cfg.anchor_fraction.reset();
  auto out = run_pipeline(cfg);
  EXPECT_EQ(out.predicted, data_->labels.labels());
  EXPECT_EQ(out.report.iterations_used, 1u);
  EXPECT_TRUE(out.report.converged);
  EXPECT_TRUE(out.report.metrics.empty());
}

TEST_F(PipelineRun, PredictionsCsvLayout) {
  auto out = run_pipeline(config(Method::Gtg));
  std::istringstream csv(out.predictions_csv);
  std::string header, first;
  std::getline(csv, header);
  std::getline(csv, first);
  EXPECT_EQ(header, "id,predicted_label,confidence,p_0,p_1,p_2");
  auto fields = split_csv_line(first);
  ASSERT_EQ(fields.size(), 6u);
  EXPECT_EQ(fields[0], "s0");
  double p0 = std::stod(fields[3]), p1 = std::stod(fields[4]), p2 = std::stod(fields[5]);
  EXPECT_NEAR(p0 + p1 + p2, 1.0, 1e-9);
  EXPECT_EQ(std::stod(fields[2]), std::max({p0, p1, p2}));
}

TEST_F(PipelineRun, ConfigErrors) {
  auto cfg = config(Method::Gtg);
  cfg.anchors_path = cfg.labels_path;
  cfg.anchor_fraction.reset();
  EXPECT_THROW(run_pipeline(cfg), ConfigError);
  cfg = config(Method::Gtg);
  cfg.anchor_fraction = 1.5;
  EXPECT_THROW(run_pipeline(cfg), ConfigError);
  cfg = config(Method::Gtg);
  cfg.metrics = {"bogus"};
  EXPECT_THROW(run_pipeline(cfg), ConfigError);
}

TEST_F(PipelineRun, CliExitCodesAndDeterminism) {
  std::string base = "run --features " + (dir_ / "features.csv").string() + " --labels " +
                     (dir_ / "labels.csv").string() + " --truth " + (dir_ / "labels.csv").string() +
                     " --anchor-fraction 0.05 --seed 5 --out-dir " + (dir_ / "cli").string();
  ASSERT_EQ(run_cli(base), 0);
  std::string csv1 = read_file(dir_ / "cli" / "predictions.csv");
  std::string json1 = read_file(dir_ / "cli" / "report.json");
  ASSERT_EQ(run_cli(base), 0);
  EXPECT_EQ(read_file(dir_ / "cli" / "predictions.csv"), csv1);
  EXPECT_EQ(read_file(dir_ / "cli" / "report.json"), json1);

  EXPECT_EQ(run_cli(base + " --method nope"), 1);
  EXPECT_EQ(run_cli(base + " --alpha 2 --method label_spreading"), 1);
  EXPECT_EQ(run_cli("run --features " + (dir_ / "missing.csv").string() + " --labels x"), 2);
  write_file(dir_ / "bad.csv", "id,f0,f1\ns0,1\n");
  EXPECT_EQ(run_cli("run --features " + (dir_ / "bad.csv").string() + " --labels " + (dir_ / "labels.csv").string()),
            2);

  // An unlabeled vertex with no path to an anchor makes the harmonic system singular.
  write_file(dir_ / "iso_f.csv", "id,f0,f1,f2\na,1,2,3\nb,1,2,4\nc,3,2,1\nd,5,5,5\n");
  write_file(dir_ / "iso_l.csv", "id,label\na,x\nb,\nc,y\nd,\n");
  EXPECT_EQ(run_cli("run --method harmonic --features " + (dir_ / "iso_f.csv").string() + " --labels " +
                    (dir_ / "iso_l.csv").string() + " --out-dir " + (dir_ / "iso").string()),
            3);
}

TEST_F(PipelineRun, SynthAndEvalSubcommands) {
  auto synth = dir_ / "synth";
  ASSERT_EQ(run_cli("synth --blobs 2 --per-blob 10 --dim 8 --seed 3 --out-dir " + synth.string()), 0);
  EXPECT_TRUE(fs::exists(synth / "features.csv"));
  EXPECT_TRUE(fs::exists(synth / "labels.csv"));
  EXPECT_TRUE(fs::exists(synth / "centroids.csv"));

  auto out = run_pipeline(config(Method::Gtg));
  write_outputs(out, (dir_ / "out").string());
  EvalConfig eval;
  eval.predictions_path = (dir_ / "out" / "predictions.csv").string();
  eval.truth_path = (dir_ / "labels.csv").string();
  eval.features_path = (dir_ / "features.csv").string();
  eval.metrics = {"accuracy", "nmi", "recall@1"};
  auto report = evaluate_predictions(eval);
  EXPECT_EQ(report["summary"]["n_evaluated"], 120);
  EXPECT_GE(report["metrics"]["accuracy"].get<double>(), 0.95);
  EXPECT_EQ(run_cli("eval --predictions " + eval.predictions_path + " --truth " + eval.truth_path + " --out " +
                    (dir_ / "eval.json").string()),
            0);
  EXPECT_TRUE(fs::exists(dir_ / "eval.json"));
}

TEST(PipelineInputs, LogitsAndClassMaskFiles) {
  auto dir = scratch("logits");
  write_file(dir / "f.csv", "id,f0,f1,f2\na,1,2,3\nb,1,2,4\nc,3,2,1\n");
  write_file(dir / "l.csv", "id,label\na,x\nb,\nc,y\n");
  write_file(dir / "logits.csv", "id,l0,l1\na,0,0\nb,0,3\nc,0,0\n");
  write_file(dir / "mask.csv", "id,allowed\nb,x\n");
  RunConfig cfg;
  cfg.features_path = (dir / "f.csv").string();
  cfg.labels_path = (dir / "l.csv").string();
  cfg.logits_path = (dir / "logits.csv").string();
  cfg.class_mask_path = (dir / "mask.csv").string();
  cfg.fixed_iterations = 1;
  auto out = run_pipeline(cfg);
  EXPECT_EQ(out.assignment(1, 0), 1.0);
  EXPECT_EQ(out.report_json["config"]["prior"], "logits");
}

// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "support/print.hpp"
#include "dmgsl/csv.hpp"
#include "dmgsl/errors.hpp"
#include "dmgsl/eval.hpp"
#include "dmgsl/random.hpp"

namespace dmgsl::eval {
namespace {

std::size_t count(const SplitSpec& s, Subset subset) { return s.indices(subset).size(); }

TEST(StratifiedSplit, SingleClassOfTen) {
  const SplitSpec s = stratified_split(std::vector<int>(10, 0), 4);
  EXPECT_EQ(count(s, Subset::kTrain), 6u);
  EXPECT_EQ(count(s, Subset::kVal), 2u);
  EXPECT_EQ(count(s, Subset::kTest), 2u);
}

TEST(StratifiedSplit, SmallClassKeepsATrainNode) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const SplitSpec s = stratified_split({0, 0, 0}, seed);
    EXPECT_GE(count(s, Subset::kTrain), 1u);
    EXPECT_LE(count(s, Subset::kVal), 1u);
    EXPECT_LE(count(s, Subset::kTest), 1u);
  }
  const SplitSpec one = stratified_split({0, 1, 1, 1, 1, 1}, 2);
  EXPECT_EQ(one.assignment[0], Subset::kTrain);
}

TEST(StratifiedSplit, DeterministicAndPartitioning) {
  Rng rng = substream(1, "labels");
  std::vector<int> labels(82);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i % 10);
  std::shuffle(labels.begin(), labels.end(), rng);
  const SplitSpec a = stratified_split(labels, 7);
  const SplitSpec b = stratified_split(labels, 7);
  EXPECT_EQ(a.assignment, b.assignment);
  EXPECT_NE(a.assignment, stratified_split(labels, 8).assignment);

  std::vector<std::size_t> all;
  for (Subset s : {Subset::kTrain, Subset::kVal, Subset::kTest}) {
    const auto idx = a.indices(s);
    all.insert(all.end(), idx.begin(), idx.end());
  }
  std::sort(all.begin(), all.end());
  std::vector<std::size_t> expected(82);
  std::iota(expected.begin(), expected.end(), 0);
  EXPECT_EQ(all, expected);
}

TEST(StratifiedSplit, PerClassProportionsWithinOneNode) {
  Rng rng = substream(2, "fuzz-split");
  for (int trial = 0; trial < 100; ++trial) {
    const int classes = 1 + static_cast<int>(rng() % 6);
    std::vector<int> labels;
    for (int c = 0; c < classes; ++c) {
      const std::size_t size = 1 + rng() % 20;
      labels.insert(labels.end(), size, c);
    }
    std::shuffle(labels.begin(), labels.end(), rng);
    const SplitSpec s = stratified_split(labels, rng());
    for (int c = 0; c < classes; ++c) {
      std::array<double, 3> got{};
      double size = 0;
      for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != c) continue;
        got[static_cast<int>(s.assignment[i])] += 1;
        size += 1;
      }
      EXPECT_GE(got[0], 1.0);
      const double target[3] = {0.6, 0.2, 0.2};
      for (int k = 0; k < 3; ++k) EXPECT_LE(std::abs(got[k] - target[k] * size), 1.0 + 1e-9);
    }
  }
}

TEST(StratifiedSplit, Errors) {
  EXPECT_THROW(stratified_split({0, 2, 2}, 0), DataError);
  EXPECT_THROW(stratified_split({0, 0}, 0, {-0.5, 1.0, 0.5}), ConfigError);
}

TEST(Metrics, HandWorkedExample) {
  const MetricsReport m = compute_metrics({0, 0, 1, 1}, {0, 1, 1, 1}, 2);
  EXPECT_DOUBLE_EQ(m.accuracy, 0.75);
  EXPECT_NEAR(m.precision, 5.0 / 6.0, 1e-12);
  EXPECT_DOUBLE_EQ(m.recall, 0.75);
  EXPECT_NEAR(m.f1, 0.7333333333333333, 1e-12);
  EXPECT_EQ(m.averaging, "weighted");
}

TEST(Metrics, PerfectPredictions) {
  const MetricsReport m = compute_metrics({2, 0, 1, 1}, {2, 0, 1, 1}, 3);
  EXPECT_EQ(m.accuracy, 1.0);
  EXPECT_EQ(m.precision, 1.0);
  EXPECT_EQ(m.recall, 1.0);
  EXPECT_EQ(m.f1, 1.0);
}

TEST(Metrics, Errors) {
  EXPECT_THROW(compute_metrics({0, 1}, {0}, 2), DimensionError);
  EXPECT_THROW(compute_metrics({0, 3}, {0, 1}, 2), DataError);
}

TEST(Metrics, AccuracyEqualsWeightedRecallOnFuzzedInputs) {
  Rng rng = substream(3, "fuzz-metrics");
  for (int trial = 0; trial < 1000; ++trial) {
    const int classes = 2 + static_cast<int>(rng() % 8);
    const std::size_t n = 1 + rng() % 60;
    std::vector<int> y(n), p(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = static_cast<int>(rng() % classes);
      p[i] = static_cast<int>(rng() % classes);
    }
    const MetricsReport m = compute_metrics(y, p, classes);
    EXPECT_NEAR(m.accuracy, m.recall, 1e-12);
    for (double v : {m.accuracy, m.precision, m.recall, m.f1}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(Metrics, RelabelingInvariance) {
  Rng rng = substream(4, "relabel");
  for (int trial = 0; trial < 100; ++trial) {
    const int classes = 4;
    std::vector<int> y(30), p(30);
    for (std::size_t i = 0; i < 30; ++i) {
      y[i] = static_cast<int>(rng() % classes);
      p[i] = static_cast<int>(rng() % classes);
    }
    std::vector<int> perm{0, 1, 2, 3};
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<int> y2(30), p2(30);
    for (std::size_t i = 0; i < 30; ++i) {
      y2[i] = perm[y[i]];
      p2[i] = perm[p[i]];
    }
    const MetricsReport a = compute_metrics(y, p, classes);
    const MetricsReport b = compute_metrics(y2, p2, classes);
    EXPECT_NEAR(a.accuracy, b.accuracy, 1e-12);
    EXPECT_NEAR(a.precision, b.precision, 1e-12);
    EXPECT_NEAR(a.recall, b.recall, 1e-12);
    EXPECT_NEAR(a.f1, b.f1, 1e-12);
  }
}

TEST(Summary, SampleStandardDeviation) {
  MetricsReport a, b;
  a.accuracy = 0.5;
  b.accuracy = 0.7;
  const MetricsSummary s = summarize({a, b}, {1, 2});
  EXPECT_NEAR(s.mean.accuracy, 0.6, 1e-15);
  EXPECT_NEAR(s.stddev.accuracy, std::sqrt(0.02), 1e-15);
  EXPECT_EQ(summarize({a}, {1}).stddev.accuracy, 0.0);
}

Tensor one_hot(const std::vector<int>& labels, int classes) {
  Tensor t(labels.size(), static_cast<std::size_t>(classes));
  for (std::size_t i = 0; i < labels.size(); ++i) t(i, static_cast<std::size_t>(labels[i])) = 1.0;
  return t;
}

std::vector<int> cyclic_labels(std::size_t n, int classes) {
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i % static_cast<std::size_t>(classes));
  return labels;
}

TEST(LinearProbe, OneHotEmbeddingsAreSeparable) {
  const auto labels = cyclic_labels(82, 10);
  EvalOptions options;
  const MetricsSummary s = evaluate(one_hot(labels, 10), labels, 10, options);
  EXPECT_EQ(s.mean.accuracy, 1.0);
  EXPECT_EQ(s.seeds, (std::vector<std::uint64_t>{0, 1, 2, 3, 4}));
}

TEST(LinearProbe, ShuffledLabelsAreAtChance) {
  const int classes = 5;
  const auto truth = cyclic_labels(200, classes);
  const Tensor embeddings = one_hot(truth, classes);
  double total = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::vector<int> shuffled = truth;
    Rng rng = substream(seed, "shuffle-labels");
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const SplitSpec split = stratified_split(shuffled, seed);
    ProbeConfig config;
    config.seed = seed;
    const ProbeResult r = linear_probe(embeddings, shuffled, classes, split, config);
    std::vector<int> y;
    for (std::size_t i : r.test_nodes) y.push_back(shuffled[i]);
    total += compute_metrics(y, r.predictions, classes).accuracy;
  }
  EXPECT_NEAR(total / 20.0, 1.0 / classes, 0.1);
}

TEST(LinearProbe, DeterministicAndChecked) {
  Rng rng = substream(5, "probe-emb");
  const auto labels = cyclic_labels(40, 4);
  Tensor e(40, 6);
  for (double& v : e.values()) v = normal(rng);
  const SplitSpec split = stratified_split(labels, 1);
  ProbeConfig config;
  config.epochs = 50;
  const ProbeResult a = linear_probe(e, labels, 4, split, config);
  const ProbeResult b = linear_probe(e, labels, 4, split, config);
  EXPECT_EQ(a.predictions, b.predictions);
  EXPECT_EQ(a.test_nodes, split.indices(Subset::kTest));

  EXPECT_THROW(linear_probe(Tensor(39, 6), labels, 4, split, config), DimensionError);
  const std::vector<int> single(40, 0);
  EXPECT_THROW(linear_probe(e, single, 4, stratified_split(single, 1), config), DataError);
}

TEST(GcnProbe, RecoversClassesOverClassGraph) {
  const auto labels = cyclic_labels(40, 4);
  Tensor adj(40, 40);
  for (std::size_t i = 0; i < 40; ++i) {
    for (std::size_t j = 0; j < 40; ++j) {
      if (i != j && labels[i] == labels[j]) adj(i, j) = 1.0;
    }
  }
  Rng rng = substream(6, "gcn-feat");
  Tensor features(40, 3);
  for (std::size_t i = 0; i < 40; ++i) {
    features(i, 0) = labels[i] + 0.3 * normal(rng);
    features(i, 1) = (labels[i] % 2) + 0.3 * normal(rng);
    features(i, 2) = normal(rng);
  }
  EvalOptions options;
  options.probe = ProbeKind::kGcn;
  const MetricsSummary s = evaluate(Tensor(40, 1), labels, 4, options, features, adj);
  EXPECT_GE(s.mean.accuracy, 0.9);
}

TEST(MetricsFiles, JsonFields) {
  MetricsReport a;
  a.accuracy = a.recall = 0.5;
  const std::string json = metrics_json(summarize({a, a}, {3, 4}));
  for (const char* key : {"\"accuracy\"", "\"precision\"", "\"recall\"", "\"f1\"", "\"stddevs\"", "\"seeds\""}) {
    EXPECT_NE(json.find(key), std::string::npos) << key;
  }
}

class HeatmapTest : public ::testing::Test {
 protected:
  std::filesystem::path dir = std::filesystem::temp_directory_path() / "dmgsl_heatmap_test";
  void SetUp() override { std::filesystem::create_directories(dir); }
  void TearDown() override { std::filesystem::remove_all(dir); }
};

TEST_F(HeatmapTest, ZeroMatrixIsWhite) {
  export_heatmap(Tensor(3, 4), dir / "z.pgm");
  EXPECT_EQ(read_pgm(dir / "z.pgm"), Tensor(3, 4, 255.0));
}

TEST_F(HeatmapTest, FullWeightIsBlackAndHalfIsMidGray) {
  const Tensor a = Tensor::from({{1, 0.5}, {0, 0.25}});
  export_heatmap(a, dir / "a.pgm");
  EXPECT_EQ(read_pgm(dir / "a.pgm"), Tensor::from({{0, 128}, {255, 191}}));
}

TEST_F(HeatmapTest, CsvRoundTrip) {
  Rng rng = substream(7, "heat");
  Tensor a(6, 6);
  for (double& v : a.values()) v = uniform01(rng);
  export_heatmap(a, dir / "h.pgm");
  const Tensor back = csv::read_matrix(dir / "h.csv");
  ASSERT_EQ(back.shape(), a.shape());
  EXPECT_LE(kernels::max_abs_diff(back, a), 1e-6);
}

TEST_F(HeatmapTest, OutOfRangeIsRejected) {
  EXPECT_THROW(export_heatmap(Tensor::from({{0.5, 1.2}}), dir / "bad.pgm"), DataError);
  EXPECT_THROW(export_heatmap(Tensor::from({{-0.1}}), dir / "bad.pgm"), DataError);
}

TEST_F(HeatmapTest, ForeignFileIsAParseError) {
  std::ofstream(dir / "x.pgm") << "P2\n1 1\n255\n0\n";
  EXPECT_THROW(read_pgm(dir / "x.pgm"), ParseError);
}

}  // namespace
}  // namespace dmgsl::eval

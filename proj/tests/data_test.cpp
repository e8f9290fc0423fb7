// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "support/print.hpp"
#include "dmgsl/data.hpp"
#include "dmgsl/errors.hpp"

namespace dmgsl::data {
namespace {

namespace fs = std::filesystem;

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("dmgsl_data_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

TelemetryTable parse(const std::string& text) {
  std::istringstream in(text);
  return parse_telemetry(in, 40.0);
}

TEST(Telemetry, HeaderAndRows) {
  const auto t = parse("a,b,c\n1,2,3\n4,5,6\n");
  EXPECT_EQ(t.num_rows(), 2u);
  EXPECT_EQ(t.num_fields(), 3u);
  EXPECT_EQ(t.field_names[2], "c");
}

TEST(Telemetry, EmptyCellIsMissing) {
  const auto t = parse("a,b,c\n1,2,3\n4,5,\n");
  EXPECT_TRUE(t.is_missing(1, 2));
  EXPECT_FALSE(t.is_missing(0, 2));
}

TEST(Telemetry, RaggedRowReportsLine) {
  try {
    parse("a,b\n1,2\n3\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find(":3"), std::string::npos) << e.what();
  }
}

TEST(Telemetry, ZeroColumnsIsSchemaError) { EXPECT_THROW(parse("\n\n"), SchemaError); }

TEST(Telemetry, LargeTableShape) {
  const auto dir = scratch_dir("large");
  TelemetryTable t;
  for (int i = 0; i < 82; ++i) t.field_names.push_back("f" + std::to_string(i));
  t.samples = Tensor(38250, 82, 0.25);
  write_telemetry(dir / "t.csv", t, 2);
  const auto back = load_telemetry(dir / "t.csv", 40.0);
  EXPECT_EQ(back.num_rows(), 38250u);
  EXPECT_EQ(back.num_fields(), 82u);
}

TEST(Impute, ForwardFillThenMinMax) {
  const auto t = impute_and_normalize(parse("x,y\n1,5\n,6\n3,7\n"));
  EXPECT_EQ(t.samples, Tensor::from({{0, 0}, {0, 0.5}, {1, 1}}));
}

TEST(Impute, LinearColumn) {
  const auto t = impute_and_normalize(parse("x\n0\n5\n10\n"));
  EXPECT_EQ(t.samples, Tensor::column({0, 0.5, 1}));
}

TEST(Impute, ConstantColumnMapsToHalf) {
  const auto t = impute_and_normalize(parse("x\n7\n7\n"));
  EXPECT_EQ(t.samples, Tensor::column({0.5, 0.5}));
}

TEST(Impute, LeadingGapUsesColumnMean) {
  const auto t = impute_and_normalize(parse("x,y\n,0\n2,1\n4,2\n"));
  // Filled column: [3, 2, 4].
  EXPECT_DOUBLE_EQ(t.samples(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(t.samples(1, 0), 0.0);
  EXPECT_DOUBLE_EQ(t.samples(2, 0), 1.0);
}

TEST(Impute, FullyMissingColumnNamesField) {
  try {
    impute_and_normalize(parse("good,empty\n1,\n2,\n"));
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("empty"), std::string::npos);
  }
}

TEST(Impute, IdempotentAndBounded) {
  const auto once = impute_and_normalize(parse("a,b,c\n1,,9\n-4,2,\n,8,3\n6,1,3\n"));
  const auto twice = impute_and_normalize(once);
  for (std::size_t i = 0; i < once.samples.size(); ++i) {
    EXPECT_NEAR(once.samples[i], twice.samples[i], 1e-15);
    EXPECT_GE(once.samples[i], 0.0);
    EXPECT_LE(once.samples[i], 1.0);
  }
}

TEST(CoherenceTime, ParkWalkingSpeed) {
  EXPECT_NEAR(doppler_shift(3.55e9, 2.7778), 32.89, 0.01);
  const double tc = coherence_time(3.55e9, 2.7778);
  // 9 / (16 pi f_d) evaluated by hand.
  EXPECT_NEAR(tc, 5.44e-3, 0.01e-3);
}

TEST(CoherenceTime, DoublingSpeedHalves) {
  EXPECT_NEAR(coherence_time(3.55e9, 5.5556) * 2, coherence_time(3.55e9, 2.7778), 1e-15);
}

TEST(CoherenceTime, ZeroSpeedIsConfigError) {
  try {
    coherence_time(3.55e9, 0.0);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("infinite coherence time"), std::string::npos);
  }
}

TypedEdgeList chain_edges(std::size_t n) {
  TypedEdgeList e{n, 3, {}};
  for (std::size_t i = 0; i + 1 < n; ++i) e.edges.push_back({i, i + 1, static_cast<int>(i % 3) + 1, 1.0});
  return e;
}

NodeLabels alternating_labels(std::size_t n) {
  NodeLabels l;
  l.class_names = {"0", "1"};
  for (std::size_t i = 0; i < n; ++i) l.class_of.push_back(static_cast<int>(i % 2));
  return l;
}

TelemetryTable ramp_table(std::size_t rows, std::size_t n) {
  TelemetryTable t;
  for (std::size_t i = 0; i < n; ++i) t.field_names.push_back("f" + std::to_string(i));
  t.samples = Tensor(rows, n);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < n; ++c) t.samples(r, c) = static_cast<double>(r * n + c);
  }
  return t;
}

TEST(Slicing, FullDriveCounts) {
  const auto report = slice_snapshots(ramp_table(38250, 3), chain_edges(3), alternating_labels(3), 450);
  EXPECT_EQ(report.sequence.num_snapshots(), 85u);
  EXPECT_EQ(report.sequence.feature_dim(), 450u);
  EXPECT_EQ(report.dropped_rows, 0u);
}

TEST(Slicing, RemainderDropped) {
  const auto report = slice_snapshots(ramp_table(100, 3), chain_edges(3), alternating_labels(3), 30);
  EXPECT_EQ(report.sequence.num_snapshots(), 3u);
  EXPECT_EQ(report.dropped_rows, 10u);
  EXPECT_EQ(report.sequence.num_snapshots() * report.sequence.feature_dim() + report.dropped_rows, 100u);
}

TEST(Slicing, WholeTableIsStatic) {
  const auto report = slice_snapshots(ramp_table(40, 3), chain_edges(3), alternating_labels(3), 40);
  EXPECT_EQ(report.sequence.num_snapshots(), 1u);
}

TEST(Slicing, FeaturesAreTransposedWindows) {
  const auto table = ramp_table(20, 3);
  const auto seq = slice_snapshots(table, chain_edges(3), alternating_labels(3), 10).sequence;
  // Node 2, window 1, sample 4 is table row 14, column 2.
  EXPECT_EQ(seq.snapshots[1].features(2, 4), table.samples(14, 2));
  EXPECT_EQ(seq.snapshots[0].slices, seq.snapshots[1].slices);
  EXPECT_EQ(seq.snapshots[0].slices[0](0, 1), 1.0);
  EXPECT_EQ(seq.snapshots[0].slices[1](1, 2), 1.0);
}

TEST(Slicing, ShortWindowIsConfigError) {
  EXPECT_THROW(slice_snapshots(ramp_table(40, 3), chain_edges(3), alternating_labels(3), 4), ConfigError);
}

const char* kNames[] = {"rsrp", "sinr", "cqi", "mcs"};
std::vector<std::string> names() { return {std::begin(kNames), std::end(kNames)}; }

KnowledgeGraph kg(const std::string& edges, const std::string& labels = "node,class\nrsrp,a\nsinr,a\ncqi,b\nmcs,b\n") {
  std::istringstream e(edges), l(labels);
  return parse_kg(e, l, names(), 3);
}

TEST(KnowledgeGraph, TwoEdges) {
  const auto g = kg("src,dst,type,weight\nrsrp,sinr,1,1\ncqi,mcs,2,0.5\n");
  EXPECT_EQ(g.edges.edges.size(), 2u);
  EXPECT_EQ(g.edges.edges[1].type, 2);
  EXPECT_EQ(g.labels.num_classes(), 2);
}

TEST(KnowledgeGraph, TypeOutOfRange) {
  EXPECT_THROW(kg("src,dst,type,weight\nrsrp,sinr,4,1\n"), SchemaError);
}

TEST(KnowledgeGraph, DuplicateEdge) {
  EXPECT_THROW(kg("src,dst,type,weight\nrsrp,sinr,1,1\nrsrp,sinr,1,0.5\n"), SchemaError);
}

TEST(KnowledgeGraph, UnknownNode) {
  EXPECT_THROW(kg("src,dst,type,weight\nrsrp,pci,1,1\n"), SchemaError);
}

TEST(KnowledgeGraph, WeightOutsideUnitInterval) {
  EXPECT_THROW(kg("src,dst,type,weight\nrsrp,sinr,1,1.5\n"), SchemaError);
}

TEST(KnowledgeGraph, MissingLabel) {
  EXPECT_THROW(kg("src,dst,type,weight\n", "node,class\nrsrp,a\nsinr,b\ncqi,b\n"), SchemaError);
}

TEST(Synthetic, DeterministicInSeed) {
  SyntheticSpec spec;
  spec.snapshots = 3;
  spec.dim = 12;
  const auto a = generate_synthetic(spec);
  const auto b = generate_synthetic(spec);
  EXPECT_EQ(a.telemetry.samples, b.telemetry.samples);
  EXPECT_EQ(a.expert_edges.edges, b.expert_edges.edges);
  EXPECT_EQ(a.true_adjacency, b.true_adjacency);
  spec.seed = 2;
  EXPECT_NE(generate_synthetic(spec).telemetry.samples, a.telemetry.samples);
}

TEST(Synthetic, DefaultShapes) {
  SyntheticSpec spec;
  const auto ds = generate_synthetic(spec);
  const auto& seq = ds.sequence;
  EXPECT_EQ(seq.num_nodes(), 82u);
  EXPECT_EQ(seq.num_snapshots(), 8u);
  EXPECT_EQ(seq.snapshots[0].features.shape(), (Shape{82, 32}));
  ASSERT_EQ(seq.snapshots[0].slices.size(), 3u);
  EXPECT_EQ(seq.snapshots[0].slices[0].shape(), (Shape{82, 82}));
  EXPECT_EQ(seq.labels.num_nodes(), 82u);
  EXPECT_EQ(seq.labels.num_classes(), 10);
  EXPECT_EQ(ds.true_edges.edges.size(), 133u);
  EXPECT_EQ(ds.expert_edges.edges.size(), 133u);
  for (double v : ds.telemetry.samples.values()) {
    ASSERT_GE(v, 0.0);
    ASSERT_LE(v, 1.0);
  }
}

TEST(Synthetic, FewerNodesThanClassesIsError) {
  SyntheticSpec spec;
  spec.nodes = 5;
  EXPECT_THROW(generate_synthetic(spec), ConfigError);
}

/// Independent oracle: ordinary least squares on [1, window means, variance]
/// with one-hot targets must fit the training nodes perfectly.
TEST(Synthetic, LeastSquaresProbeSeparatesTrainSplit) {
  SyntheticSpec spec;
  spec.snapshots = 10;
  spec.dim = 20;  // 200 samples per node
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    spec.seed = seed;
    const auto ds = generate_synthetic(spec);
    const auto& x = ds.telemetry.samples;
    const std::size_t n = spec.nodes;
    const std::size_t windows = spec.snapshots;
    Eigen::MatrixXd features(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(windows + 2));
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = static_cast<Eigen::Index>(i);
      features(row, 0) = 1.0;
      double total = 0.0, total_sq = 0.0;
      for (std::size_t w = 0; w < windows; ++w) {
        double m = 0.0;
        for (std::size_t r = w * spec.dim; r < (w + 1) * spec.dim; ++r) {
          m += x(r, i);
          total += x(r, i);
          total_sq += x(r, i) * x(r, i);
        }
        features(row, static_cast<Eigen::Index>(w + 1)) = m / static_cast<double>(spec.dim);
      }
      const double count = static_cast<double>(x.rows());
      features(row, static_cast<Eigen::Index>(windows + 1)) = total_sq / count - (total / count) * (total / count);
    }
    std::vector<Eigen::Index> train;
    for (std::size_t i = 0; i < n; ++i) {
      if (i % 5 < 3) train.push_back(static_cast<Eigen::Index>(i));
    }
    Eigen::MatrixXd a(static_cast<Eigen::Index>(train.size()), features.cols());
    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(train.size()), spec.classes);
    for (std::size_t k = 0; k < train.size(); ++k) {
      a.row(static_cast<Eigen::Index>(k)) = features.row(train[k]);
      y(static_cast<Eigen::Index>(k), ds.labels.class_of[static_cast<std::size_t>(train[k])]) = 1.0;
    }
    const Eigen::MatrixXd coef = a.colPivHouseholderQr().solve(y);
    const Eigen::MatrixXd scores = a * coef;
    for (Eigen::Index k = 0; k < scores.rows(); ++k) {
      Eigen::Index best = 0;
      scores.row(k).maxCoeff(&best);
      EXPECT_EQ(best, ds.labels.class_of[static_cast<std::size_t>(train[static_cast<std::size_t>(k)])])
          << "seed " << seed << " node " << train[static_cast<std::size_t>(k)];
    }
  }
}

/// Planted edges carry a lagged cross-correlation that random pairs lack.
TEST(Synthetic, PlantedEdgesShowLaggedCorrelation) {
  SyntheticSpec spec;
  spec.seed = 4;
  const auto ds = generate_synthetic(spec);
  const auto& x = ds.telemetry.samples;
  const std::size_t rows = x.rows();
  auto lagged_corr = [&](std::size_t i, std::size_t j) {
    // corr of diff(x_i)(t-1) with diff(x_j)(t), which removes slow regime drift.
    std::vector<double> a, b;
    for (std::size_t t = 2; t < rows; ++t) {
      a.push_back(x(t - 1, i) - x(t - 2, i));
      b.push_back(x(t, j) - x(t - 1, j));
    }
    double ma = 0, mb = 0;
    for (std::size_t k = 0; k < a.size(); ++k) {
      ma += a[k];
      mb += b[k];
    }
    ma /= static_cast<double>(a.size());
    mb /= static_cast<double>(b.size());
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t k = 0; k < a.size(); ++k) {
      sab += (a[k] - ma) * (b[k] - mb);
      saa += (a[k] - ma) * (a[k] - ma);
      sbb += (b[k] - mb) * (b[k] - mb);
    }
    return sab / std::sqrt(saa * sbb);
  };
  double planted = 0.0;
  for (const auto& e : ds.true_edges.edges) planted += lagged_corr(e.src, e.dst);
  planted /= static_cast<double>(ds.true_edges.edges.size());
  double background = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < spec.nodes; ++i) {
    for (std::size_t j = 0; j < spec.nodes; ++j) {
      if (i == j || ds.true_adjacency(i, j) > 0 || ds.true_adjacency(j, i) > 0) continue;
      background += lagged_corr(i, j);
      ++count;
    }
  }
  background /= static_cast<double>(count);
  EXPECT_GT(planted, background + 0.1) << "planted " << planted << " background " << background;
}

TEST(Dataset, RoundTrip) {
  const auto dir = scratch_dir("roundtrip");
  SyntheticSpec spec;
  spec.snapshots = 2;
  spec.dim = 10;
  const auto ds = generate_synthetic(spec);
  write_dataset(dir, ds.telemetry, ds.expert_edges, ds.labels, spec.dim, &ds.true_edges, {{"source", "test"}});
  const auto files = read_dataset(dir);
  EXPECT_EQ(files.window_rows, 10u);
  EXPECT_TRUE(files.has_truth);
  EXPECT_EQ(files.kg.edges.edges.size(), ds.expert_edges.edges.size());
  EXPECT_EQ(files.true_edges.edges.size(), ds.true_edges.edges.size());
  const auto seq = load_sequence(dir);
  EXPECT_EQ(seq.num_snapshots(), 2u);
  EXPECT_EQ(seq.labels.class_of, ds.labels.class_of);
  EXPECT_LT(kernels::max_abs_diff(seq.snapshots[1].features, ds.sequence.snapshots[1].features), 1e-6);
}

}  // namespace
}  // namespace dmgsl::data

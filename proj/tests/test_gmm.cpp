#include <cmath>
#include <filesystem>
#include <numeric>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "strongreg/error.hpp"
#include "strongreg/gmm.hpp"

using namespace strongreg;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no strongreg::Error thrown";
  return ErrorCode::ConfigError;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("strongreg_gmm_" + name)).string();
}

Eigen::MatrixXd coordinate_covariance(const Eigen::MatrixXd& M) {
  // columns are the independent draws
  const Eigen::MatrixXd C = M.colwise() - M.rowwise().mean();
  return C * C.transpose() / static_cast<double>(M.cols() - 1);
}

}  // namespace

TEST(SampleMeans, IndependentWhenUncorrelated) {
  RngStream rng(1, 1);
  const Eigen::MatrixXd M = sample_means(4, 100000, 0.0, rng);
  EXPECT_LT((coordinate_covariance(M) - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff(), 0.02);
}

TEST(SampleMeans, IdenticalWhenFullyCorrelated) {
  RngStream rng(2, 1);
  const Eigen::MatrixXd M = sample_means(5, 200, 1.0, rng);
  for (int l = 1; l < 5; ++l) EXPECT_LT((M.row(l) - M.row(0)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SampleMeans, EquicorrelatedMoments) {
  RngStream rng(3, 1);
  const Eigen::MatrixXd M = sample_means(5, 100000, 0.8, rng);
  const Eigen::MatrixXd C = coordinate_covariance(M);
  for (int a = 0; a < 5; ++a) {
    for (int b = 0; b < 5; ++b) EXPECT_NEAR(C(a, b), a == b ? 1.0 : 0.8, 0.02) << a << "," << b;
  }
}

TEST(SampleMeans, NegativeCorrelationWithinPsdRange) {
  RngStream rng(4, 1);
  const Eigen::MatrixXd M = sample_means(3, 100000, -0.45, rng);
  const Eigen::MatrixXd C = coordinate_covariance(M);
  EXPECT_NEAR(C(0, 1), -0.45, 0.02);
  EXPECT_NEAR(C(2, 2), 1.0, 0.02);
}

TEST(SampleMeans, NonPsdCorrelationRejected) {
  RngStream rng(5, 1);
  EXPECT_EQ(code_of([&] { sample_means(5, 10, -0.25, rng); }), ErrorCode::InvalidCorrelation);
  EXPECT_EQ(code_of([&] { sample_means(5, 10, 1.2, rng); }), ErrorCode::InvalidCorrelation);
}

TEST(SampleMeans, ExchangeableAcrossClasses) {
  RngStream rng(6, 1);
  const Eigen::MatrixXd M = sample_means(4, 60000, 0.5, rng);
  const Eigen::MatrixXd G = M * M.transpose() / 60000.0;
  for (int a = 0; a < 4; ++a) {
    EXPECT_NEAR(G(a, a), 1.0, 0.03);
    for (int b = a + 1; b < 4; ++b) EXPECT_NEAR(G(a, b), 0.5, 0.03);
  }
}

TEST(CorruptLabels, ZeroRateIsIdentity) {
  RngStream rng(7, 1);
  Labels y(1000);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = static_cast<int>(i % 5);
  EXPECT_EQ(corrupt_labels(y, 0.0, 5, rng), y);
}

TEST(CorruptLabels, FrequenciesMatchRate) {
  RngStream rng(8, 1);
  const int n = 100000;
  Labels y(n, 2);
  const Labels z = corrupt_labels(y, 0.3, 5, rng);
  std::vector<int> counts(5, 0);
  for (int v : z) ++counts[v];
  EXPECT_NEAR(1.0 - counts[2] / double(n), 0.3, 0.01);
  for (int l : {0, 1, 3, 4}) EXPECT_NEAR(counts[l] / double(n), 0.075, 0.005) << l;
}

TEST(CorruptLabels, BinaryFlipRate) {
  RngStream rng(9, 1);
  const int n = 100000;
  Labels y(n);
  for (int i = 0; i < n; ++i) y[i] = i & 1;
  const Labels z = corrupt_labels(y, 0.4, 2, rng);
  int flips = 0;
  for (int i = 0; i < n; ++i) flips += z[i] != y[i];
  EXPECT_NEAR(flips / double(n), 0.4, 0.01);
}

TEST(GenerateDataset, NoiselessRowsEqualMeans) {
  GmmConfig cfg;
  cfg.d = 30;
  cfg.n = 50;
  cfg.sigma = 0.0;
  cfg.c = 0.0;
  const Dataset ds = generate_dataset(cfg);
  for (int i = 0; i < cfg.n; ++i) {
    EXPECT_EQ(ds.X.row(i), ds.M.row(ds.true_labels[i])) << i;
    EXPECT_EQ(ds.labels[i], ds.true_labels[i]);
  }
}

TEST(GenerateDataset, DefaultConfigurationClassCounts) {
  GmmConfig cfg;
  const Dataset ds = generate_dataset(cfg);
  EXPECT_EQ(ds.n(), 500);
  EXPECT_EQ(ds.d(), 750);
  EXPECT_EQ(ds.k(), 5);
  std::vector<int> counts(5, 0);
  for (int y : ds.true_labels) ++counts[y];
  for (int c : counts) EXPECT_LE(std::abs(c - 100), 3.0 * std::sqrt(100.0));
}

TEST(GenerateDataset, Deterministic) {
  GmmConfig cfg;
  cfg.d = 40;
  cfg.n = 60;
  cfg.seed = 123;
  const Dataset a = generate_dataset(cfg), b = generate_dataset(cfg);
  EXPECT_EQ(a.X, b.X);
  EXPECT_EQ(a.M, b.M);
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_EQ(a.true_labels, b.true_labels);
  cfg.seed = 124;
  EXPECT_NE(generate_dataset(cfg).X, a.X);
}

TEST(GenerateDataset, CorruptionConcentrates) {
  GmmConfig cfg;
  cfg.d = 2;
  cfg.n = 50000;
  const Dataset ds = generate_dataset(cfg);
  int wrong = 0;
  for (int i = 0; i < cfg.n; ++i) wrong += ds.labels[i] != ds.true_labels[i];
  EXPECT_NEAR(wrong / double(cfg.n), cfg.c, 0.01);
}

TEST(GenerateDataset, WithinClassCovarianceIsIsotropic) {
  GmmConfig cfg;
  cfg.d = 4;
  cfg.n = 40000;
  cfg.k = 2;
  cfg.c = 0.0;
  cfg.sigma = 1.5;
  const Dataset ds = generate_dataset(cfg);
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(4, 4);
  int m = 0;
  for (int i = 0; i < cfg.n; ++i) {
    if (ds.true_labels[i] != 1) continue;
    const Eigen::RowVectorXd g = ds.X.row(i) - ds.M.row(1);
    S += g.transpose() * g;
    ++m;
  }
  S /= m;
  EXPECT_LT((S - 2.25 * Eigen::MatrixXd::Identity(4, 4)).norm(), 0.1);
}

TEST(GenerateDataset, TestSetSharesMeansAndIsClean) {
  GmmConfig cfg;
  cfg.d = 20;
  cfg.n = 30;
  const Dataset train = generate_dataset(cfg);
  const Dataset test = generate_test_set(cfg, train.M, 500);
  EXPECT_EQ(test.M, train.M);
  EXPECT_EQ(test.labels, test.true_labels);
  EXPECT_EQ(test.n(), 500);
  EXPECT_EQ(code_of([&] { generate_test_set(cfg, Eigen::MatrixXd::Zero(3, 20), 10); }),
            ErrorCode::DimensionMismatch);
}

TEST(GmmConfig, ValidationErrors) {
  GmmConfig cfg;
  cfg.r = -0.3;
  EXPECT_EQ(code_of([&] { cfg.validate(); }), ErrorCode::InvalidCorrelation);
  cfg = {};
  cfg.c = 0.85;
  EXPECT_EQ(code_of([&] { cfg.validate(); }), ErrorCode::InvalidCorruption);
  cfg = {};
  cfg.k = 1;
  EXPECT_EQ(code_of([&] { cfg.validate(); }), ErrorCode::InvalidArgument);
  cfg = {};
  cfg.sigma = -1.0;
  EXPECT_EQ(code_of([&] { cfg.validate(); }), ErrorCode::InvalidArgument);
}

TEST(OneHot, Examples) {
  EXPECT_EQ(one_hot({0, 1, 2}, 3), Eigen::MatrixXd::Identity(3, 3));
  Eigen::MatrixXd expect(2, 2);
  expect << 0, 1, 0, 1;
  EXPECT_EQ(one_hot({1, 1}, 2), expect);
}

TEST(OneHot, ColumnSumsAreClassCounts) {
  RngStream rng(10, 1);
  Labels y(777);
  std::vector<int> counts(6, 0);
  for (auto& v : y) ++counts[v = static_cast<int>(rng.uniform_index(6))];
  const Eigen::MatrixXd Y = one_hot(y, 6);
  for (int l = 0; l < 6; ++l) EXPECT_EQ(Y.col(l).sum(), counts[l]);
  EXPECT_TRUE((Y.rowwise().sum().array() == 1.0).all());
}

TEST(OneHot, OutOfRangeLabel) {
  EXPECT_EQ(code_of([] { one_hot({0, 3}, 3); }), ErrorCode::LabelOutOfRange);
  EXPECT_EQ(code_of([] { one_hot({-1}, 3); }), ErrorCode::LabelOutOfRange);
}

class DatasetIo : public ::testing::TestWithParam<std::string> {};

TEST_P(DatasetIo, RoundTripIsExact) {
  GmmConfig cfg;
  cfg.d = 17;
  cfg.n = 23;
  cfg.k = 3;
  cfg.c = 0.2;
  const Dataset ds = generate_dataset(cfg);
  const std::string path = temp_path(GetParam());
  write_dataset(ds, path);
  const Dataset back = read_dataset(path);
  std::filesystem::remove(path);
  EXPECT_EQ(back.X, ds.X);
  EXPECT_EQ(back.M, ds.M);
  EXPECT_EQ(back.labels, ds.labels);
  EXPECT_EQ(back.true_labels, ds.true_labels);
}

INSTANTIATE_TEST_SUITE_P(Formats, DatasetIo, ::testing::Values("bundle.txt", "bundle.bin"));

TEST(DatasetIoErrors, MissingFile) {
  EXPECT_EQ(code_of([] { read_dataset(temp_path("missing.bin")); }), ErrorCode::IoError);
  EXPECT_EQ(code_of([] { read_dataset(temp_path("missing.txt")); }), ErrorCode::IoError);
}

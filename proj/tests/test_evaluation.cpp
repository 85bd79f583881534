#include <cmath>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "strongreg/error.hpp"
#include "strongreg/evaluation.hpp"
#include "strongreg/gaussian.hpp"
#include "strongreg/gmm.hpp"
#include "strongreg/solvers.hpp"
#include "strongreg/theory.hpp"

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

double combined_se(const ErrorEstimate& a, const ErrorEstimate& b) {
  return std::sqrt(a.std_error * a.std_error + b.std_error * b.std_error);
}

// Means m·e_l and weights e_l: every pair has margin m / (σ√2).
struct Symmetric {
  Eigen::MatrixXd M;
  WeightMatrix W;
};

Symmetric symmetric_instance(int k, int d, double margin, double sigma) {
  Symmetric s;
  s.M = Eigen::MatrixXd::Zero(k, d);
  s.W = Eigen::MatrixXd::Zero(d, k);
  for (int l = 0; l < k; ++l) {
    s.M(l, l) = margin * sigma * std::sqrt(2.0);
    s.W(l, l) = 1.0;
  }
  return s;
}

}  // namespace

TEST(Predict, Examples) {
  const WeightMatrix W = Eigen::MatrixXd::Identity(4, 4);
  EXPECT_EQ(predict(W, Eigen::Vector4d(0, 0, 1, 0)), 2);
  WeightMatrix tied(3, 3);
  tied << 1, 1, 0, 2, 2, 0, 3, 3, 0;
  EXPECT_EQ(predict(tied, Eigen::Vector3d(1, 1, 1)), 0);
  EXPECT_EQ(predict(Eigen::MatrixXd::Zero(3, 5), Eigen::Vector3d(4, 5, 6)), 0);
}

TEST(Predict, MatchesNaiveScan) {
  RngStream rng(40, 0);
  WeightMatrix W(12, 6);
  for (Eigen::Index i = 0; i < W.size(); ++i) W.data()[i] = rng.normal();
  Eigen::MatrixXd X(200, 12);
  for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = rng.normal();
  const Labels got = predict_all(W, X);
  for (int i = 0; i < 200; ++i) {
    int best = 0;
    double bv = -1e300;
    for (int l = 0; l < 6; ++l) {
      double s = 0;
      for (int j = 0; j < 12; ++j) s += W(j, l) * X(i, j);
      if (s > bv) {
        bv = s;
        best = l;
      }
    }
    EXPECT_EQ(got[i], best);
    EXPECT_EQ(predict(W, X.row(i).transpose()), best);
  }
}

TEST(Predict, DimensionMismatch) {
  EXPECT_EQ(code_of([] { predict(Eigen::MatrixXd::Zero(3, 2), Eigen::Vector4d::Zero()); }),
            ErrorCode::DimensionMismatch);
}

TEST(EmpiricalError, ZeroWeightsPredictClassZero) {
  GmmConfig cfg;
  cfg.d = 10;
  cfg.n = 10;
  const Dataset train = generate_dataset(cfg);
  const Dataset test = generate_test_set(cfg, train.M, 5000);
  int not_zero = 0;
  for (int y : test.true_labels) not_zero += y != 0;
  const ErrorEstimate e = empirical_error(Eigen::MatrixXd::Zero(10, 5), test);
  EXPECT_DOUBLE_EQ(e.value, not_zero / 5000.0);
  EXPECT_NEAR(e.value, 0.8, 0.03);
  EXPECT_NEAR(e.std_error, std::sqrt(e.value * (1 - e.value) / 5000.0), 1e-15);
  EXPECT_EQ(e.samples, 5000);
}

TEST(EmpiricalError, NoiselessTestSetIsPerfect) {
  GmmConfig cfg;
  cfg.d = 30;
  cfg.n = 40;
  cfg.c = 0.0;
  cfg.sigma = 0.0;
  const Dataset train = generate_dataset(cfg);
  const Dataset test = generate_test_set(cfg, train.M, 1000);
  const WeightMatrix W = train_all(train, {RegKind::L2Squared, 1e-3}).W;
  EXPECT_EQ(empirical_error(W, test).value, 0.0);
}

TEST(EmpiricalError, EmptyTestSet) {
  Dataset empty;
  empty.X.resize(0, 3);
  empty.M = Eigen::MatrixXd::Zero(2, 3);
  EXPECT_EQ(code_of([&] { empirical_error(Eigen::MatrixXd::Zero(3, 2), empty); }), ErrorCode::EmptyTestSet);
}

TEST(EmpiricalError, SignMatrixInvariantUnderPositiveRescaling) {
  GmmConfig cfg;
  cfg.d = 50;
  cfg.n = 40;
  const Dataset train = generate_dataset(cfg);
  const Dataset test = generate_test_set(cfg, train.M, 2000);
  const WeightMatrix S = train_all(train, {RegKind::LInf, 50.0}).W.cwiseSign();
  EXPECT_EQ(empirical_error(S, test).value, empirical_error(0.01 * S, test).value);
  EXPECT_EQ(empirical_error(S, test).value, empirical_error(250.0 * S, test).value);
}

class QkAtZero : public ::testing::TestWithParam<int> {};

TEST_P(QkAtZero, EqualsChanceError) {
  const int k = GetParam();
  RngStream rng(41, static_cast<std::uint64_t>(k));
  const ErrorEstimate e = qk(0.0, k, 400000, rng);
  EXPECT_NEAR(e.value, (k - 1.0) / k, 3.0 * e.std_error);
}

INSTANTIATE_TEST_SUITE_P(Classes, QkAtZero, ::testing::Values(2, 3, 5, 10));

TEST(Qk, LargeMarginIsZero) {
  RngStream rng(42, 0);
  EXPECT_EQ(qk(50.0, 5, 100000, rng).value, 0.0);
}

TEST(Qk, TwoClassesReduceToGaussianTail) {
  RngStream rng(43, 0);
  const QkEstimator est(2, 400000, rng);
  for (double a : {-1.0, 0.0, 0.4, 1.3, 2.2}) {
    const ErrorEstimate e = est(a);
    EXPECT_NEAR(e.value, q_tail(a), 3.0 * e.std_error + 1e-12) << a;
  }
}

TEST(Qk, MonotoneInMargin) {
  RngStream rng(44, 0);
  const QkEstimator est(5, 100000, rng);
  double prev = 1.0;
  for (double a = -2.0; a <= 3.0; a += 0.25) {
    const double v = est(a).value;
    EXPECT_LE(v, prev) << a;
    prev = v;
  }
}

TEST(Qk, DefaultEstimatorIsShared) {
  EXPECT_EQ(&default_qk(5), &default_qk(5));
  EXPECT_EQ(default_qk(5).samples(), 200000);
  EXPECT_NEAR(default_qk(5)(0.0).value, 0.8, 3.0 * default_qk(5)(0.0).std_error);
}

TEST(AnalyticError, SymmetricConstructionMatchesQk) {
  for (double a : {0.3, 1.0, 1.8}) {
    const Symmetric s = symmetric_instance(5, 8, a, 1.3);
    RngStream rng(45, 0), rq(46, 0);
    const AnalyticError ae = analytic_error(s.W, s.M, 1.3, 5, 200000, rng);
    EXPECT_NEAR(ae.margin, a, 1e-12);
    const ErrorEstimate ref = qk(a, 5, 200000, rq);
    EXPECT_NEAR(ae.exact.value, ref.value, 3.0 * combined_se(ae.exact, ref)) << a;
    EXPECT_NEAR(ae.pairwise.value, ref.value, 3.0 * combined_se(ae.pairwise, ref)) << a;
  }
}

TEST(AnalyticError, InvariantUnderRescalingAndCommonShift) {
  GmmConfig cfg;
  cfg.d = 60;
  cfg.n = 50;
  const Dataset ds = generate_dataset(cfg);
  const WeightMatrix W = train_all(ds, {RegKind::L2Squared, 20.0}).W;
  RngStream shift_rng(47, 0);
  Eigen::VectorXd v(cfg.d);
  for (auto& x : v) x = shift_rng.normal();
  const WeightMatrix shifted = W.colwise() + 0.3 * v;
  const double m = mean_pair_margin(W, ds.M, 1.0);
  EXPECT_NEAR(mean_pair_margin(4.0 * W, ds.M, 1.0), m, 1e-12 * std::abs(m));
  EXPECT_NEAR(mean_pair_margin(shifted, ds.M, 1.0), m, 1e-10 * std::abs(m));

  RngStream r1(48, 0), r2(48, 0), r3(48, 0);
  const AnalyticError a = analytic_error(W, ds.M, 1.0, 5, 100000, r1);
  const AnalyticError b = analytic_error(4.0 * W, ds.M, 1.0, 5, 100000, r2);
  const AnalyticError c = analytic_error(shifted, ds.M, 1.0, 5, 100000, r3);
  EXPECT_NEAR(a.exact.value, b.exact.value, 1e-12);
  EXPECT_NEAR(a.exact.value, c.exact.value, 3.0 * combined_se(a.exact, c.exact));
}

TEST(AnalyticError, DegenerateWeights) {
  RngStream rng(49, 0);
  const WeightMatrix W = Eigen::MatrixXd::Ones(6, 3);
  const Eigen::MatrixXd M = Eigen::MatrixXd::Ones(3, 6);
  EXPECT_EQ(code_of([&] { analytic_error(W, M, 1.0, 3, 10000, rng); }), ErrorCode::DegenerateWeights);
}

TEST(ExactError, TiedWeightsFallBackToLowestIndex) {
  RngStream rng(50, 0);
  const Eigen::MatrixXd M = Eigen::MatrixXd::Identity(4, 4);
  const ErrorEstimate e = exact_error(Eigen::MatrixXd::Zero(4, 4), M, 1.0, 20000, rng);
  EXPECT_NEAR(e.value, 0.75, 1e-12);
}

TEST(ExactError, MatchesHeldOutErrorForRidge) {
  GmmConfig cfg;
  cfg.d = 200;
  cfg.n = 150;
  const Dataset ds = generate_dataset(cfg);
  const WeightMatrix W = train_all(ds, {RegKind::L2Squared, 10.0}).W;
  const Dataset test = generate_test_set(cfg, ds.M, 200000);
  RngStream rng(51, 0);
  const ErrorEstimate ex = exact_error(W, ds.M, cfg.sigma, 400000, rng);
  const ErrorEstimate em = empirical_error(W, test);
  EXPECT_GT(em.value, 0.01);
  EXPECT_NEAR(ex.value, em.value, 4.0 * combined_se(ex, em));
}

TEST(Sandwich, LowerNeverExceedsTheOthers) {
  for (int seed = 1; seed <= 4; ++seed) {
    GmmConfig cfg;
    cfg.d = 60;
    cfg.n = 40;
    cfg.seed = static_cast<std::uint64_t>(seed);
    const Dataset ds = generate_dataset(cfg);
    for (RegKind kind : {RegKind::L2Squared, RegKind::L1, RegKind::LInf}) {
      for (double lambda : {0.5, 20.0, 1e3}) {
        RngStream rng(52, static_cast<std::uint64_t>(seed));
        const SandwichResult s = sandwich_check(ds, cfg.c, {kind, lambda}, cfg.n, rng);
        const double tol = 1e-6 * (1.0 + std::abs(s.upper));
        EXPECT_LE(s.lower, s.mid + tol);
        EXPECT_LE(s.lower, s.upper + tol);
        EXPECT_LE(s.upper, s.f_zero + tol);
        EXPECT_LE(s.mid, s.f_zero + tol);
      }
    }
  }
}

TEST(Sandwich, ZeroWeightBound) {
  GmmConfig cfg;
  cfg.d = 60;
  cfg.n = 40;
  const Dataset ds = generate_dataset(cfg);
  RngStream rng(53, 0);
  const SandwichResult s = sandwich_check(ds, cfg.c, {RegKind::L1, 1.0}, cfg.n, rng);
  const StConstants st = st_constants(cfg.c, cfg.k);
  const double f0 = (double(cfg.n) / cfg.k) *
                    (cfg.c * cfg.c / (cfg.k - 1) + (1 - cfg.c) * (1 - cfg.c) + st.s * st.s + st.t * st.t);
  EXPECT_NEAR(s.f_zero, f0, 1e-12 * f0);
}

TEST(Sandwich, BoundsCloseAtLargeLambda) {
  GmmConfig cfg;
  cfg.d = 60;
  cfg.n = 40;
  const Dataset ds = generate_dataset(cfg);
  for (RegKind kind : {RegKind::L2Squared, RegKind::L1, RegKind::LInf}) {
    RngStream r1(54, 0), r2(54, 0);
    const SandwichResult a = sandwich_check(ds, cfg.c, {kind, 1e3}, cfg.n, r1);
    const SandwichResult b = sandwich_check(ds, cfg.c, {kind, 1e6}, cfg.n, r2);
    EXPECT_LE(b.upper - b.lower, 0.05 * std::abs(b.upper)) << to_string(kind);
    EXPECT_LE(b.upper - b.lower, a.upper - a.lower + 1e-9) << to_string(kind);
  }
}

TEST(Sandwich, InvalidArguments) {
  GmmConfig cfg;
  cfg.d = 10;
  cfg.n = 6;
  const Dataset ds = generate_dataset(cfg);
  RngStream rng(55, 0);
  EXPECT_EQ(code_of([&] { sandwich_check(ds, cfg.c, {RegKind::L1, 1.0}, 6.0, rng); }), ErrorCode::InvalidArgument);
}

#include <gtest/gtest.h>

#include "aireml/likelihood.hpp"
#include "aireml/predict.hpp"
#include "test_util.hpp"

using namespace aireml;
using namespace aireml::testing;

TEST(Predict, T1TauVariance) {
  const EffectsEstimate e = effects_with_uncertainty(t1(), theta(5.0 / 3.0));
  EXPECT_NEAR(e.tau_hat(0), 2.5, 1e-14);
  EXPECT_NEAR(e.tau_cov(0, 0), 5.0 / 12.0, 1e-14);
  ASSERT_TRUE(e.u_cov.has_value());
  EXPECT_EQ(e.u_cov->size(), 0);
}

TEST(Predict, T2FullCovariance) {
  MatrixXd C(3, 3);
  C << 4, 2, 2, 2, 3, 0, 2, 0, 3;
  const MatrixXd expected = C.inverse();
  const EffectsEstimate e = effects_with_uncertainty(t2(), theta(1.0, {1.0}));
  EXPECT_LT(max_abs(e.tau_cov - expected.topLeftCorner(1, 1)), 1e-10);
  ASSERT_TRUE(e.u_cov.has_value());
  EXPECT_LT(max_abs(*e.u_cov - expected.bottomRightCorner(2, 2)), 1e-10);
  EXPECT_LT((e.u_pev_diagonal - expected.diagonal().tail(2)).cwiseAbs().maxCoeff(), 1e-10);

  const EffectsEstimate scaled = effects_with_uncertainty(t2(), theta(2.5, {1.0}));
  EXPECT_LT(max_abs(scaled.tau_cov - 2.5 * expected.topLeftCorner(1, 1)), 1e-10);
}

TEST(Predict, TauCovarianceIsGlsCovariance) {
  std::mt19937_64 rng(51);
  for (int rep = 0; rep < 10; ++rep) {
    const auto inst = random_instance(rng);
    const Model& m = inst.model;
    const MatrixXd hinv = build_H(m, inst.theta).inverse();
    const MatrixXd ref = inst.theta.sigma2 * (m.X().transpose() * hinv * m.X()).inverse();
    EXPECT_LT(max_abs(effects_with_uncertainty(m, inst.theta).tau_cov - ref), 1e-9 * max_abs(ref));
  }
}

TEST(Predict, AboveCapOnlyDiagonal) {
  std::mt19937_64 rng(52);
  const auto inst = random_instance(rng, RandomOptions{.max_groups = 2});
  const EffectsEstimate full = effects_with_uncertainty(inst.model, inst.theta);
  const EffectsEstimate capped = effects_with_uncertainty(inst.model, inst.theta, 0);
  if (inst.model.b() > 0) {
    EXPECT_FALSE(capped.u_cov.has_value());
  }
  EXPECT_LT((capped.u_pev_diagonal - full.u_pev_diagonal).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT(max_abs(capped.tau_cov - full.tau_cov), 1e-12);
  EXPECT_EQ(capped.u_tilde, full.u_tilde);
}

TEST(Predict, KernelScalingAbsorbedByGamma) {
  std::mt19937_64 rng(53);
  const double c = 3.7;
  int tried = 0;
  for (int rep = 0; rep < 20 && tried < 6; ++rep) {
    const auto inst = random_instance(rng);
    const Model& m = inst.model;
    if (m.num_groups() == 0) continue;
    VarianceSpec spec = m.spec();
    spec.groups[0].kernel = c * m.group_kernel(0);
    const Model scaled = validate(m.dataset(), spec);
    Theta t = inst.theta;
    t.kappa(0) /= c;
    const EffectsEstimate a = effects_with_uncertainty(m, inst.theta);
    const EffectsEstimate b = effects_with_uncertainty(scaled, t);
    EXPECT_LT((a.tau_hat - b.tau_hat).cwiseAbs().maxCoeff(), 1e-9 * std::max(1.0, a.tau_hat.cwiseAbs().maxCoeff()));
    EXPECT_LT((a.u_tilde - b.u_tilde).cwiseAbs().maxCoeff(), 1e-9 * std::max(1.0, a.u_tilde.cwiseAbs().maxCoeff()));
    EXPECT_NEAR(log_likelihood(m, inst.theta), log_likelihood(scaled, t), 1e-9 * std::abs(log_likelihood(m, inst.theta)));
    ++tried;
  }
  EXPECT_GT(tried, 0);
}

#include <gtest/gtest.h>

#include <algorithm>
#include <numbers>
#include <numeric>

#include "aireml/likelihood.hpp"
#include "aireml/oracle.hpp"
#include "test_util.hpp"

using namespace aireml;
using namespace aireml::testing;

TEST(LogLikelihood, T1HandValue) {
  // yPy = 5, |H| = 1, |X^T X| = 4, n - p = 3
  const double expected = -0.5 * (std::log(4.0) + 5.0) - 1.5 * std::log(2.0 * std::numbers::pi);
  EXPECT_NEAR(log_likelihood(t1(), theta(1.0)), expected, 1e-13);
  const double s2 = 5.0 / 3.0;
  const double at_hat = -0.5 * (3.0 * std::log(s2) + std::log(4.0) + 3.0) - 1.5 * std::log(2.0 * std::numbers::pi);
  EXPECT_NEAR(log_likelihood(t1(), theta(s2)), at_hat, 1e-13);
}

TEST(LogLikelihood, CoerciveInSigma2) {
  const Model m = t2();
  double previous = log_likelihood(m, theta(1e-4, {0.5}));
  // the maximiser in sigma2 at fixed gamma is yPy/(n-p)
  for (double s2 : {1e-3, 1e-2, 1e-1}) {
    const double l = log_likelihood(m, theta(s2, {0.5}));
    EXPECT_GT(l, previous);
    previous = l;
  }
  previous = log_likelihood(m, theta(1e2, {0.5}));
  for (double s2 : {1e3, 1e4, 1e5}) {
    const double l = log_likelihood(m, theta(s2, {0.5}));
    EXPECT_LT(l, previous);
    previous = l;
  }
}

TEST(LogLikelihood, InvariantUnderRowPermutation) {
  std::mt19937_64 rng(31);
  for (int rep = 0; rep < 10; ++rep) {
    const auto inst = random_instance(rng, RandomOptions{.allow_partitions = false});
    const Model& m = inst.model;
    std::vector<Index> perm(static_cast<size_t>(m.n()));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Dataset d = m.dataset();
    for (Index i = 0; i < m.n(); ++i) {
      d.y(i) = m.y()(perm[static_cast<size_t>(i)]);
      d.X.row(i) = m.X().row(perm[static_cast<size_t>(i)]);
      d.Z.row(i) = m.Z().row(perm[static_cast<size_t>(i)]);
    }
    const Model permuted = validate(d, m.spec());
    const double a = log_likelihood(m, inst.theta);
    EXPECT_NEAR(log_likelihood(permuted, inst.theta), a, 1e-10 * std::max(1.0, std::abs(a)));
  }
}

TEST(LogLikelihood, SizeCapAndAdmissibility) {
  EXPECT_THROW(log_likelihood(t2(), theta(1.0, {0.5}), 3), Error);
  EXPECT_THROW(log_likelihood(t2(), theta(-1.0, {0.5})), Error);
  EXPECT_THROW(log_likelihood(t2(), theta(1.0, {-0.5})), Error);
}

TEST(Score, T1HandValues) {
  const ScoreVector s1 = score(t1(), theta(1.0));
  EXPECT_NEAR(s1.s_sigma2, 1.0, 1e-14);
  EXPECT_EQ(s1.s_kappa.size(), 0);
  EXPECT_NEAR(score(t1(), theta(5.0 / 3.0)).s_sigma2, 0.0, 1e-14);
}

TEST(Score, T2MatchesFiniteDifferences) {
  const Model m = t2();
  const Theta t = theta(1.0, {0.5});
  const VectorXd analytic = score(m, t).packed();
  const VectorXd numeric = oracle::fd_score(m, t, 1e-5);
  for (Index i = 0; i < analytic.size(); ++i) {
    EXPECT_LE(std::abs(numeric(i) - analytic(i)), 1e-6 * std::max(1.0, std::abs(analytic(i))));
  }
}

TEST(Score, FiniteDifferencesConvergeQuadraticallyOnRandomInstances) {
  std::mt19937_64 rng(32);
  int instances = 0;
  for (Scale scale : {Scale::natural, Scale::log}) {
    RandomOptions opt;
    opt.scale = scale;
    for (int rep = 0; rep < 12; ++rep) {
      const auto inst = random_instance(rng, opt);
      const VectorXd analytic = score(inst.model, inst.theta).packed();
      const VectorXd e1 = (oracle::fd_score(inst.model, inst.theta, 1e-3) - analytic).cwiseAbs();
      const VectorXd e2 = (oracle::fd_score(inst.model, inst.theta, 5e-4) - analytic).cwiseAbs();
      const double scale_ref = std::max(1.0, analytic.cwiseAbs().maxCoeff());
      EXPECT_LE((oracle::fd_score(inst.model, inst.theta, 1e-5) - analytic).cwiseAbs().maxCoeff(), 1e-6 * scale_ref);
      for (Index i = 0; i < analytic.size(); ++i) {
        // only judge the rate where truncation error dominates roundoff
        if (e1(i) < 1e-9 * scale_ref) continue;
        const double ratio = e1(i) / e2(i);
        EXPECT_GT(ratio, 3.0) << "parameter " << i;
        EXPECT_LT(ratio, 5.0) << "parameter " << i;
      }
      ++instances;
    }
  }
  EXPECT_GE(instances, 20);
}

TEST(Score, ScoreMaxAbs) {
  ScoreVector s;
  s.s_sigma2 = -0.5;
  s.s_kappa = (VectorXd(2) << 0.25, -2.0).finished();
  EXPECT_EQ(s.max_abs(), 2.0);
  EXPECT_EQ(s.packed(), (VectorXd(3) << -0.5, 0.25, -2.0).finished());
}

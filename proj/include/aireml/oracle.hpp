#pragma once

// Brute-force reference routines. Everything here is O(n^3), forms n x n
// matrices directly from their textbook definitions, and shares no code path
// with the mixed-model-equation route it is used to check.

#include <cstdint>
#include <string>
#include <vector>

#include "aireml/information.hpp"
#include "aireml/mme.hpp"

namespace aireml::oracle {

/// P = H^{-1} - H^{-1} X (X^T H^{-1} X)^{-1} X^T H^{-1}, H^{-1} by direct inversion.
MatrixXd dense_P(const Model& model, const Theta& theta, Index cap = kDefaultDenseCap);

/// H^{-1} by direct Cholesky inversion of build_H.
MatrixXd dense_H_inverse(const Model& model, const Theta& theta, Index cap = kDefaultDenseCap);

/// X (X^T X)^{-1} X^T
MatrixXd projection_X(const MatrixXd& X);

/// K = [K1, K2] orthogonal with P_X = K1 K1^T, and L = [L1, L2] = [X, K2 B^T]^{-T}
/// with B = b_scale * I, so L1^T X = I and L2^T X = 0.
struct TransformPair {
  MatrixXd K1;
  MatrixXd K2;
  MatrixXd L1;
  MatrixXd L2;
};

TransformPair transform_pair(const MatrixXd& X, double b_scale = 1.0);

/// Scale c of B = c I for which log|L^T L| = 0, i.e. c^{2(n-p)} |X^T X| = 1.
double unit_determinant_b_scale(const MatrixXd& X);

/// L2 (L2^T H L2)^{-1} L2^T
MatrixXd projection_from_L2(const MatrixXd& H, const MatrixXd& L2);
/// L1^T H L1 - L1^T H L2 (L2^T H L2)^{-1} L2^T H L1, which equals (X^T H^{-1} X)^{-1}.
MatrixXd xhx_inverse_from_L(const MatrixXd& H, const TransformPair& L);

/// Log-likelihood of the error contrasts y2 = L2^T y,
///   -1/2 [(n-p) log(2 pi sigma2) + log|L2^T H L2| + y2^T (L2^T H L2)^{-1} y2 / sigma2],
/// with L built so that log|L^T L| = 0.
double l2_form_loglik(const Model& model, const Theta& theta, Index cap = kDefaultDenseCap);

/// Central differences of log_likelihood with step h * (1 + |theta_i|).
VectorXd fd_score(const Model& model, const Theta& theta, double h);
/// Central second differences of log_likelihood, symmetrized.
MatrixXd fd_hessian(const Model& model, const Theta& theta, double h);

struct SimpleModelRecord {
  double S_R = 0.0;
  double sigma2_ml = 0.0;
  double sigma2_reml = 0.0;
};

/// Closed-form ML and REML variance estimates for y = X tau + e.
SimpleModelRecord simple_model_check(const Dataset& dataset);

struct BiasEstimate {
  int reps = 0;
  double mean_ml = 0.0;
  double se_ml = 0.0;
  double mean_reml = 0.0;
  double se_reml = 0.0;
  double bias_ml = 0.0;    // mean_ml - sigma2_true
  double bias_reml = 0.0;  // mean_reml - sigma2_true
};

/// Monte Carlo of the ML/REML estimators over y ~ N(0, sigma2_true I).
BiasEstimate simple_model_bias(const MatrixXd& X, double sigma2_true, int reps, std::uint64_t seed);

struct MatrixMoments {
  MatrixXd mean;
  MatrixXd se;
};

struct Expectations {
  int reps = 0;
  MatrixMoments score;  // (m+1) x 1
  MatrixMoments observed;
  MatrixMoments average;
  MatrixMoments splitting_residual;
  MatrixXd fisher;
};

/// Per-entry Monte Carlo mean and standard error of S, I_O, I_A and I_Z over
/// y simulated at theta_true.
Expectations mc_expectations(const Model& model, const Theta& theta_true, int reps, std::uint64_t seed,
                             Index cap = kDefaultDenseCap);

/// (A + B C D)^{-1} = A^{-1} - A^{-1} B (C^{-1} + D A^{-1} B)^{-1} D A^{-1}
MatrixXd woodbury_inverse(const MatrixXd& A, const MatrixXd& B, const MatrixXd& C, const MatrixXd& D);
/// Inverse of [[A, B], [B^T, C]] via S = (A - B C^{-1} B^T)^{-1}.
MatrixXd block_inverse(const MatrixXd& A, const MatrixXd& B, const MatrixXd& C);

enum class CheckStatus { pass, fail, skip };

struct CheckResult {
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  CheckStatus status = CheckStatus::skip;
};

std::string_view to_string(CheckStatus status);

/// All matrix identities, two-route agreements and derivative checks at theta.
/// Every check reports SKIP when n exceeds cap.
std::vector<CheckResult> run_identity_suite(const Model& model, const Theta& theta,
                                            Index cap = kDefaultDenseCap);

}  // namespace aireml::oracle

#pragma once

#include "aireml/model.hpp"

namespace aireml {

/// Largest n for which n x n helpers (H^{-1}, dense P, log|H|) are formed.
inline constexpr Index kDefaultDenseCap = 5000;

/// Mixed-model equations at one theta:
///   C = W^T R^{-1} W + blockdiag(0_p, G^{-1}),  rhs = W^T R^{-1} y,
/// with C factorized once and shared by every subsequent solve.
class MMESystem {
 public:
  const Model& model() const { return model_; }
  const Theta& theta() const { return theta_; }
  const MatrixXd& C() const { return C_; }
  const VectorXd& rhs() const { return rhs_; }
  /// Diagonal of R^{-1}.
  const VectorXd& r_inverse() const { return r_inv_; }
  const MatrixXd& W() const { return model_.W(); }

  VectorXd solve(const VectorXd& v) const { return llt_.solve(v); }
  MatrixXd solve(const MatrixXd& v) const { return llt_.solve(v); }
  const Eigen::LLT<MatrixXd>& factor() const { return llt_; }

 private:
  MMESystem(Model model, Theta theta) : model_(std::move(model)), theta_(std::move(theta)) {}

  Model model_;
  Theta theta_;
  MatrixXd C_;
  VectorXd rhs_;
  VectorXd r_inv_;
  Eigen::LLT<MatrixXd> llt_;

  friend MMESystem assemble(const Model& model, const Theta& theta);
};

struct Effects {
  VectorXd tau_hat;
  VectorXd u_tilde;
};

MMESystem assemble(const Model& model, const Theta& theta);

/// BLUE and BLUP for response vector y (normally model.y()).
Effects solve_effects(const MMESystem& sys, const VectorXd& y);

/// P v = R^{-1} v - R^{-1} W C^{-1} W^T R^{-1} v.
VectorXd apply_P(const MMESystem& sys, const VectorXd& v);

/// X-block of C^{-1}, equal to (X^T H^{-1} X)^{-1}.
MatrixXd cxx_block(const MMESystem& sys);

/// Full C^{-1}.
MatrixXd c_inverse(const MMESystem& sys);

/// H^{-1} through the Woodbury route.
MatrixXd h_inverse_dense(const Model& model, const Theta& theta, Index cap = kDefaultDenseCap);

/// P materialized through the C route (R^{-1} - R^{-1} W C^{-1} W^T R^{-1}).
MatrixXd dense_P_from_mme(const MMESystem& sys, Index cap = kDefaultDenseCap);

void require_within_cap(Index n, Index cap, const char* what);

}  // namespace aireml

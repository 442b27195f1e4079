#include "aireml/likelihood.hpp"

#include <cmath>
#include <numbers>

namespace aireml {

VectorXd ScoreVector::packed() const {
  VectorXd v(s_kappa.size() + 1);
  v(0) = s_sigma2;
  v.tail(s_kappa.size()) = s_kappa;
  return v;
}

double ScoreVector::max_abs() const { return packed().cwiseAbs().maxCoeff(); }

double log_likelihood(const Model& model, const Theta& theta, Index cap) {
  require_within_cap(model.n(), cap, "log|H|");
  const MatrixXd H = build_H(model, theta);
  Eigen::LLT<MatrixXd> h_chol(H);
  if (h_chol.info() != Eigen::Success) {
    throw Error(ErrorCode::FactorizationFailure, "H is not positive definite");
  }
  const double log_det_h = 2.0 * h_chol.matrixLLT().diagonal().array().log().sum();

  const MatrixXd hinv_x = h_chol.solve(model.X());
  const MatrixXd xthx = model.X().transpose() * hinv_x;
  Eigen::LLT<MatrixXd> x_chol(xthx);
  if (x_chol.info() != Eigen::Success) {
    throw Error(ErrorCode::FactorizationFailure, "X^T H^{-1} X is not positive definite");
  }
  const double log_det_xthx = 2.0 * x_chol.matrixLLT().diagonal().array().log().sum();

  const VectorXd hinv_y = h_chol.solve(model.y());
  const VectorXd xthy = model.X().transpose() * hinv_y;
  const double yPy = model.y().dot(hinv_y) - xthy.dot(x_chol.solve(xthy));

  const double dof = static_cast<double>(model.n() - model.p());
  return -0.5 * (dof * std::log(theta.sigma2) + log_det_h + log_det_xthx + yPy / theta.sigma2) -
         0.5 * dof * std::log(2.0 * std::numbers::pi);
}

ScoreVector score_from(const Model& model, const Theta& theta, const QuadraticForms& forms,
                       const TraceTerms& traces) {
  const double s2 = theta.sigma2;
  const double dof = static_cast<double>(model.n() - model.p());
  ScoreVector s;
  s.s_sigma2 = -0.5 * (dof / s2 - forms.yPy / (s2 * s2));
  s.s_kappa = -0.5 * (traces.first - forms.yPdHPy / s2);
  return s;
}

ScoreVector score(const Model& model, const Theta& theta, Index cap) {
  const MMESystem sys = assemble(model, theta);
  const QuadraticForms forms = quadratic_forms(sys, model.y());
  const TraceTerms traces = compute_trace_terms(sys, false, cap);
  return score_from(model, theta, forms, traces);
}

}  // namespace aireml

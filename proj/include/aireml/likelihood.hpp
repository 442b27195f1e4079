#pragma once

#include "aireml/information.hpp"
#include "aireml/mme.hpp"
#include "aireml/trace_terms.hpp"

namespace aireml {

/// S(theta) ordered (sigma2, kappa_1..kappa_m).
struct ScoreVector {
  double s_sigma2 = 0.0;
  VectorXd s_kappa;

  VectorXd packed() const;
  double max_abs() const;
};

/// Restricted log-likelihood
///   -1/2 [(n-p) log sigma2 + log|H| + log|X^T H^{-1} X| + y^T P y / sigma2]
///   - (n-p)/2 log(2 pi),
/// with both determinants from a dense Cholesky of H (n <= cap).
double log_likelihood(const Model& model, const Theta& theta, Index cap = kDefaultDenseCap);

ScoreVector score(const Model& model, const Theta& theta, Index cap = kDefaultDenseCap);

/// Score from pieces already computed at the same theta.
ScoreVector score_from(const Model& model, const Theta& theta, const QuadraticForms& forms,
                       const TraceTerms& traces);

}  // namespace aireml

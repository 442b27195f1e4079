#pragma once

#include "aireml/mme.hpp"

namespace aireml {

/// Largest b for which the full b x b prediction-error covariance is formed.
inline constexpr Index kDefaultRandomCovCap = 2000;

struct EffectsEstimate {
  VectorXd tau_hat;
  MatrixXd tau_cov;               // sigma2 * C^{XX} = sigma2 (X^T H^{-1} X)^{-1}
  VectorXd u_tilde;
  std::optional<MatrixXd> u_cov;  // sigma2 * C^{ZZ}, only when b <= cap
  VectorXd u_pev_diagonal;        // diag(sigma2 * C^{ZZ}), always present
};

/// BLUE/BLUP with var(tau_hat, u_tilde - u) = sigma2 C^{-1}.
EffectsEstimate effects_with_uncertainty(const Model& model, const Theta& theta,
                                         Index random_cov_cap = kDefaultRandomCovCap);
EffectsEstimate effects_with_uncertainty(const MMESystem& sys,
                                         Index random_cov_cap = kDefaultRandomCovCap);

}  // namespace aireml

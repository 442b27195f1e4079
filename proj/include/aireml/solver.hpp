#pragma once

#include <optional>

#include "aireml/likelihood.hpp"
#include "aireml/predict.hpp"
#include "aireml/report.hpp"

namespace aireml {

struct SolveOptions {
  Variant variant = Variant::ai;
  int max_iter = 100;
  /// Converged once ||S(theta)||_inf <= tol.
  double tol = 1e-8;
  /// Starting point; initial_theta(model) when empty.
  std::optional<Theta> init;
  int step_halving_max = 20;
  Index dense_cap = kDefaultDenseCap;
  Index random_cov_cap = kDefaultRandomCovCap;
};

/// Relative roundoff allowance on the log-likelihood in the monotone step test:
/// a candidate is accepted when loglik_new >= loglik_old - kLoglikSlack * (1 + |loglik_old|).
inline constexpr double kLoglikSlack = 1e-11;

/// Fixed-effects-only residual sum of squares y^T (I - P_X) y.
double residual_sum_of_squares(const Model& model);

/// sigma2_0 = S_R / (n - p); gamma_g = 0.1 and phi_r = 1 (log scale: log of those).
Theta initial_theta(const Model& model);

/// Newton-type iteration theta_{k+1} = theta_k + alpha_k delta_k with
/// Info(theta_k) delta_k = S(theta_k), Info chosen by options.variant.
/// Throws for invalid options or a degenerate residual; other failures
/// are reported through FitReport::status.
FitReport fit(const Model& model, const SolveOptions& options = {});

}  // namespace aireml

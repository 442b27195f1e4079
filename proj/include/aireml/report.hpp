#pragma once

#include <optional>
#include <string>
#include <vector>

#include "aireml/information.hpp"

namespace aireml {

enum class Variant { newton, fisher, ai };
enum class FitStatus { converged, max_iter, error };

std::string_view to_string(Variant variant);
std::string_view to_string(FitStatus status);

struct IterationRecord {
  int k = 0;
  VectorXd theta;  // packed (sigma2, kappa)
  double loglik = 0.0;
  double score_norm = 0.0;
  /// Step halvings used to move from this iterate to the next.
  int halvings = 0;
  /// Information matrix that produced the step (newton may fall back to ai).
  Variant variant = Variant::ai;
  bool fallback = false;
  /// Levenberg inflation applied to the information diagonal, 0 if none.
  double inflation = 0.0;
};

using IterationTrace = std::vector<IterationRecord>;

struct FitReport {
  Variant variant = Variant::ai;
  Scale scale = Scale::natural;
  FitStatus status = FitStatus::error;
  std::optional<ErrorCode> error;
  std::string message;

  Theta theta_hat;
  std::vector<std::string> parameter_names;  // sigma2 then kappa names
  VectorXd se_theta;
  InfoKind info_kind_used = InfoKind::average;
  VectorXd final_score;
  MatrixXd final_information;

  VectorXd tau_hat;
  MatrixXd tau_cov;
  VectorXd u_tilde;
  std::optional<MatrixXd> u_cov;  // sigma2 * C^{ZZ}; absent above the size cap
  VectorXd u_pev_diagonal;

  double loglik = 0.0;
  int iterations = 0;
  IterationTrace trace;
};

}  // namespace aireml

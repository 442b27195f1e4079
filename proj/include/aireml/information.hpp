#pragma once

#include <vector>

#include "aireml/mme.hpp"
#include "aireml/trace_terms.hpp"

namespace aireml {

enum class InfoKind { observed, fisher, average, splitting_residual };

std::string_view to_string(InfoKind kind);

/// (m+1) x (m+1) symmetric matrix over (sigma2, kappa_1..kappa_m).
struct InfoMatrix {
  InfoKind kind = InfoKind::average;
  MatrixXd values;
};

/// The vectors shared by every quadratic form at one theta:
///   xi = P y,  eta_i = dH_i xi,  zeta_i = P eta_i.
/// All entries of the average information are inner products of these.
struct QuadraticForms {
  VectorXd xi;
  std::vector<VectorXd> eta;
  std::vector<VectorXd> zeta;
  double yPy = 0.0;
  VectorXd yPdHPy;      // eta_i . xi
  MatrixXd yPdHPdHPy;   // eta_i . zeta_j, symmetrized
  VectorXd yPd2HPy;     // xi . d2H_ii xi (off-diagonal d2H vanish)
};

/// Builds the cached vectors with m + 1 applications of P (one per xi and zeta_i).
QuadraticForms quadratic_forms(const MMESystem& sys, const VectorXd& y);

InfoMatrix observed(const Model& model, const Theta& theta, Index cap = kDefaultDenseCap);
InfoMatrix fisher(const Model& model, const Theta& theta, Index cap = kDefaultDenseCap);
/// Trace-free; needs only the factorized mixed-model equations.
InfoMatrix average(const Model& model, const Theta& theta);
InfoMatrix splitting_residual(const Model& model, const Theta& theta, Index cap = kDefaultDenseCap);

// Variants over precomputed pieces at one theta. `traces.second` must be
// present for observed and fisher.
InfoMatrix observed_from(const Model& model, const Theta& theta, const QuadraticForms& forms,
                         const TraceTerms& traces);
InfoMatrix fisher_from(const Model& model, const Theta& theta, const TraceTerms& traces);
InfoMatrix average_from(const Model& model, const Theta& theta, const QuadraticForms& forms);
InfoMatrix splitting_residual_from(const Model& model, const Theta& theta,
                                   const QuadraticForms& forms, const TraceTerms& traces);

}  // namespace aireml

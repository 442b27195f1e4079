#pragma once

#include "aireml/mme.hpp"

namespace aireml {

/// Trace terms of the score and information matrices at one theta:
///   first(i)     = tr(P dH_i)
///   second(i, j) = tr(P dH_i P dH_j)
/// They depend on theta only (not on y). Computed from a dense P, hence
/// subject to the dense size cap.
struct TraceTerms {
  VectorXd first;
  MatrixXd second;  // empty unless requested
};

TraceTerms compute_trace_terms(const MMESystem& sys, bool with_second, Index cap = kDefaultDenseCap);

}  // namespace aireml

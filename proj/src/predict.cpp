#include "aireml/predict.hpp"

namespace aireml {

EffectsEstimate effects_with_uncertainty(const Model& model, const Theta& theta,
                                         Index random_cov_cap) {
  return effects_with_uncertainty(assemble(model, theta), random_cov_cap);
}

EffectsEstimate effects_with_uncertainty(const MMESystem& sys, Index random_cov_cap) {
  const Model& model = sys.model();
  const double s2 = sys.theta().sigma2;
  const Index p = model.p();
  const Index b = model.b();
  const Effects effects = solve_effects(sys, model.y());

  EffectsEstimate out;
  out.tau_hat = effects.tau_hat;
  out.u_tilde = effects.u_tilde;
  if (b <= random_cov_cap) {
    const MatrixXd cinv = c_inverse(sys);
    out.tau_cov = s2 * cinv.topLeftCorner(p, p);
    out.u_cov = s2 * cinv.bottomRightCorner(b, b);
    out.u_pev_diagonal = out.u_cov->diagonal();
    return out;
  }
  out.tau_cov = s2 * cxx_block(sys);
  out.u_pev_diagonal.resize(b);
  VectorXd unit = VectorXd::Zero(p + b);
  for (Index j = 0; j < b; ++j) {
    unit(p + j) = 1.0;
    out.u_pev_diagonal(j) = s2 * sys.solve(unit)(p + j);
    unit(p + j) = 0.0;
  }
  return out;
}

}  // namespace aireml

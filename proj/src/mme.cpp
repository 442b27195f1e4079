#include "aireml/mme.hpp"

namespace aireml {

void require_within_cap(Index n, Index cap, const char* what) {
  if (n > cap) {
    throw Error(ErrorCode::SizeCapExceeded, std::string(what) + " needs n x n storage; n=" +
                                                std::to_string(n) + " exceeds cap " +
                                                std::to_string(cap));
  }
}

namespace {

/// Adds blockdiag(K_g^{-1} / gamma_g) into the random block of `target`,
/// whose top-left corner sits at `offset`.
void add_g_inverse(const Model& model, const Theta& theta, MatrixXd& target, Index offset) {
  const VectorXd kappa = model.natural_kappa(theta);
  for (Index g = 0; g < model.num_groups(); ++g) {
    const auto& kinv = model.kernel_inverse(g);
    if (!kinv) {
      throw Error(ErrorCode::SingularKernel,
                  "kernel of group '" + model.spec().groups[static_cast<size_t>(g)].name +
                      "' is not invertible");
    }
    const Index o = offset + model.group_offset(g);
    const Index w = model.group_width(g);
    target.block(o, o, w, w) += *kinv / kappa(g);
  }
}

}  // namespace

MMESystem assemble(const Model& model, const Theta& theta) {
  model.require_admissible(theta);
  MMESystem sys(model, theta);
  sys.r_inv_ = model.residual_diagonal(theta).cwiseInverse();
  const MatrixXd& W = model.W();
  const MatrixXd root_weighted = sys.r_inv_.cwiseSqrt().asDiagonal() * W;
  sys.C_ = MatrixXd::Zero(W.cols(), W.cols());
  sys.C_.selfadjointView<Eigen::Lower>().rankUpdate(root_weighted.transpose());
  sys.C_ = sys.C_.selfadjointView<Eigen::Lower>();
  add_g_inverse(model, theta, sys.C_, model.p());
  sys.rhs_ = W.transpose() * sys.r_inv_.cwiseProduct(model.y());
  sys.llt_.compute(sys.C_);
  if (sys.llt_.info() != Eigen::Success) {
    throw Error(ErrorCode::FactorizationFailure, "mixed-model coefficient matrix is not positive definite");
  }
  return sys;
}

Effects solve_effects(const MMESystem& sys, const VectorXd& y) {
  if (y.size() != sys.model().n()) {
    throw Error(ErrorCode::DimensionMismatch, "response length " + std::to_string(y.size()));
  }
  const VectorXd rhs = sys.W().transpose() * sys.r_inverse().cwiseProduct(y);
  const VectorXd sol = sys.solve(rhs);
  const Index p = sys.model().p();
  return Effects{sol.head(p), sol.tail(sol.size() - p)};
}

VectorXd apply_P(const MMESystem& sys, const VectorXd& v) {
  if (v.size() != sys.model().n()) {
    throw Error(ErrorCode::DimensionMismatch,
                "vector length " + std::to_string(v.size()) + ", expected " +
                    std::to_string(sys.model().n()));
  }
  const VectorXd rv = sys.r_inverse().cwiseProduct(v);
  const VectorXd coef = sys.solve(VectorXd(sys.W().transpose() * rv));
  return rv - sys.r_inverse().cwiseProduct(sys.W() * coef);
}

MatrixXd cxx_block(const MMESystem& sys) {
  const Index p = sys.model().p();
  const Index q = sys.C().rows();
  const MatrixXd cols = sys.solve(MatrixXd(MatrixXd::Identity(q, p)));
  const MatrixXd block = cols.topRows(p);
  return 0.5 * (block + block.transpose());
}

MatrixXd c_inverse(const MMESystem& sys) {
  const Index q = sys.C().rows();
  const MatrixXd inv = sys.solve(MatrixXd(MatrixXd::Identity(q, q)));
  return 0.5 * (inv + inv.transpose());
}

MatrixXd h_inverse_dense(const Model& model, const Theta& theta, Index cap) {
  require_within_cap(model.n(), cap, "H^{-1}");
  model.require_admissible(theta);
  const VectorXd r_inv = model.residual_diagonal(theta).cwiseInverse();
  MatrixXd out = r_inv.asDiagonal();
  if (model.b() == 0) return out;
  const MatrixXd rz = r_inv.asDiagonal() * model.Z();
  MatrixXd czz = model.Z().transpose() * rz;
  add_g_inverse(model, theta, czz, 0);
  Eigen::LLT<MatrixXd> llt(czz);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::FactorizationFailure, "Z^T R^{-1} Z + G^{-1} is not positive definite");
  }
  out.noalias() -= rz * llt.solve(MatrixXd(rz.transpose()));
  return 0.5 * (out + out.transpose());
}

MatrixXd dense_P_from_mme(const MMESystem& sys, Index cap) {
  const Index n = sys.model().n();
  require_within_cap(n, cap, "dense P");
  // P = R^{-1} - M^T M with M = L^{-1} W^T R^{-1}, C = L L^T
  const MatrixXd M = sys.factor().matrixL().solve(MatrixXd(sys.W().transpose() * sys.r_inverse().asDiagonal()));
  MatrixXd P = sys.r_inverse().asDiagonal();
  P.selfadjointView<Eigen::Lower>().rankUpdate(M.transpose(), -1.0);
  return P.selfadjointView<Eigen::Lower>();
}

}  // namespace aireml

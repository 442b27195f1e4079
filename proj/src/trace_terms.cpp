#include "aireml/trace_terms.hpp"

namespace aireml {

namespace {

// dH_i = U_i M_i U_i^T where U_i is Z_g (group) or a row selection
// (residual partition) and M_i is chain * K_g or chain * I.
struct Factor {
  bool is_group = false;
  Index offset = 0;
  Index width = 0;
  const std::vector<Index>* rows = nullptr;
  std::optional<MatrixXd> middle;  // empty: chain * identity
  double chain = 1.0;
};

Factor factor_of(const Model& model, const Theta& theta, Index i) {
  Factor f;
  f.chain = model.chain_factor(theta, i);
  if (model.parameter_kind(i) == ParameterKind::group) {
    f.is_group = true;
    f.offset = model.group_offset(i);
    f.width = model.group_width(i);
    if (model.group_has_kernel(i)) f.middle = f.chain * model.group_kernel(i);
  } else {
    f.rows = &model.partition_rows(i);
    f.width = static_cast<Index>(f.rows->size());
  }
  return f;
}

// U^T A for an n x k matrix A.
MatrixXd left_apply(const Model& model, const Factor& f, const MatrixXd& A) {
  if (f.is_group) return model.Z().middleCols(f.offset, f.width).transpose() * A;
  return A(*f.rows, Eigen::all);
}

// A U for a (symmetric) n x n matrix A.
MatrixXd right_apply(const Model& model, const Factor& f, const MatrixXd& A) {
  if (f.is_group) return A * model.Z().middleCols(f.offset, f.width);
  return A(Eigen::all, *f.rows);
}

MatrixXd times_middle(const Factor& f, const MatrixXd& A) {
  return f.middle ? MatrixXd(A * *f.middle) : MatrixXd(f.chain * A);
}

}  // namespace

TraceTerms compute_trace_terms(const MMESystem& sys, bool with_second, Index cap) {
  const Model& model = sys.model();
  const Index m = model.m();
  TraceTerms out;
  out.first = VectorXd::Zero(m);
  if (m == 0) {
    if (with_second) out.second.resize(0, 0);
    return out;
  }
  const MatrixXd P = dense_P_from_mme(sys, cap);

  std::vector<Factor> factors;
  std::vector<MatrixXd> PU;
  factors.reserve(static_cast<size_t>(m));
  for (Index i = 0; i < m; ++i) {
    factors.push_back(factor_of(model, sys.theta(), i));
    PU.push_back(right_apply(model, factors.back(), P));
  }

  for (Index i = 0; i < m; ++i) {
    const auto& fi = factors[static_cast<size_t>(i)];
    const MatrixXd Qii = left_apply(model, fi, PU[static_cast<size_t>(i)]);
    out.first(i) = times_middle(fi, Qii).trace();
  }
  if (!with_second) return out;

  out.second = MatrixXd::Zero(m, m);
  for (Index i = 0; i < m; ++i) {
    const auto& fi = factors[static_cast<size_t>(i)];
    for (Index j = i; j < m; ++j) {
      const auto& fj = factors[static_cast<size_t>(j)];
      // Q = U_i^T P U_j; tr(P dH_i P dH_j) = tr(Q M_j Q^T M_i)
      const MatrixXd Q = left_apply(model, fi, PU[static_cast<size_t>(j)]);
      const MatrixXd QMj = times_middle(fj, Q);
      const MatrixXd QtMi = times_middle(fi, MatrixXd(Q.transpose()));
      const double value = QMj.cwiseProduct(QtMi.transpose()).sum();
      out.second(i, j) = value;
      out.second(j, i) = value;
    }
  }
  return out;
}

}  // namespace aireml

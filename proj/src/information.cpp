#include "aireml/information.hpp"

namespace aireml {

std::string_view to_string(InfoKind kind) {
  switch (kind) {
    case InfoKind::observed: return "observed";
    case InfoKind::fisher: return "fisher";
    case InfoKind::average: return "average";
    case InfoKind::splitting_residual: return "splitting_residual";
  }
  return "unknown";
}

namespace {

InfoMatrix symmetrized(InfoKind kind, MatrixXd values) {
  return InfoMatrix{kind, 0.5 * (values + values.transpose())};
}

bool has_second_derivative(const Model& model) { return model.scale() == Scale::log; }

}  // namespace

QuadraticForms quadratic_forms(const MMESystem& sys, const VectorXd& y) {
  const Model& model = sys.model();
  const Theta& theta = sys.theta();
  const Index m = model.m();
  QuadraticForms f;
  f.xi = apply_P(sys, y);
  f.yPy = y.dot(f.xi);
  f.yPdHPy.resize(m);
  f.yPd2HPy = VectorXd::Zero(m);
  for (Index i = 0; i < m; ++i) {
    f.eta.push_back(model.apply_dH(theta, i, f.xi));
    f.zeta.push_back(apply_P(sys, f.eta.back()));
    f.yPdHPy(i) = f.eta.back().dot(f.xi);
    if (has_second_derivative(model)) {
      f.yPd2HPy(i) = f.xi.dot(model.apply_d2H(theta, i, i, f.xi));
    }
  }
  f.yPdHPdHPy.resize(m, m);
  for (Index i = 0; i < m; ++i) {
    for (Index j = i; j < m; ++j) {
      const double v = 0.5 * (f.eta[static_cast<size_t>(i)].dot(f.zeta[static_cast<size_t>(j)]) +
                              f.eta[static_cast<size_t>(j)].dot(f.zeta[static_cast<size_t>(i)]));
      f.yPdHPdHPy(i, j) = v;
      f.yPdHPdHPy(j, i) = v;
    }
  }
  return f;
}

InfoMatrix observed_from(const Model& model, const Theta& theta, const QuadraticForms& forms,
                         const TraceTerms& traces) {
  const Index m = model.m();
  const double s2 = theta.sigma2;
  const double dof = static_cast<double>(model.n() - model.p());
  MatrixXd I(m + 1, m + 1);
  I(0, 0) = forms.yPy / (s2 * s2 * s2) - dof / (2.0 * s2 * s2);
  for (Index i = 0; i < m; ++i) {
    I(0, i + 1) = I(i + 1, 0) = forms.yPdHPy(i) / (2.0 * s2 * s2);
    for (Index j = 0; j < m; ++j) {
      double value = -0.5 * traces.second(i, j) + forms.yPdHPdHPy(i, j) / s2;
      if (i == j && has_second_derivative(model)) {
        // tr(P d2H_ii) = tr(P dH_i) on the log scale
        value += 0.5 * traces.first(i) - forms.yPd2HPy(i) / (2.0 * s2);
      }
      I(i + 1, j + 1) = value;
    }
  }
  return symmetrized(InfoKind::observed, std::move(I));
}

InfoMatrix fisher_from(const Model& model, const Theta& theta, const TraceTerms& traces) {
  const Index m = model.m();
  const double s2 = theta.sigma2;
  const double dof = static_cast<double>(model.n() - model.p());
  MatrixXd I(m + 1, m + 1);
  I(0, 0) = dof / (2.0 * s2 * s2);
  for (Index i = 0; i < m; ++i) {
    I(0, i + 1) = I(i + 1, 0) = traces.first(i) / (2.0 * s2);
    for (Index j = 0; j < m; ++j) I(i + 1, j + 1) = 0.5 * traces.second(i, j);
  }
  return symmetrized(InfoKind::fisher, std::move(I));
}

InfoMatrix average_from(const Model& model, const Theta& theta, const QuadraticForms& forms) {
  const Index m = model.m();
  const double s2 = theta.sigma2;
  MatrixXd I(m + 1, m + 1);
  I(0, 0) = forms.yPy / (2.0 * s2 * s2 * s2);
  for (Index i = 0; i < m; ++i) {
    I(0, i + 1) = I(i + 1, 0) = forms.yPdHPy(i) / (2.0 * s2 * s2);
    for (Index j = 0; j < m; ++j) I(i + 1, j + 1) = forms.yPdHPdHPy(i, j) / (2.0 * s2);
  }
  return symmetrized(InfoKind::average, std::move(I));
}

InfoMatrix splitting_residual_from(const Model& model, const Theta& theta,
                                   const QuadraticForms& forms, const TraceTerms& traces) {
  const Index m = model.m();
  const double s2 = theta.sigma2;
  MatrixXd I = MatrixXd::Zero(m + 1, m + 1);
  for (Index i = 0; i < m; ++i) {
    I(0, i + 1) = I(i + 1, 0) = traces.first(i) / (4.0 * s2) - forms.yPdHPy(i) / (4.0 * s2 * s2);
    if (has_second_derivative(model)) {
      I(i + 1, i + 1) = 0.25 * (traces.first(i) - forms.yPd2HPy(i) / s2);
    }
  }
  return symmetrized(InfoKind::splitting_residual, std::move(I));
}

InfoMatrix observed(const Model& model, const Theta& theta, Index cap) {
  const MMESystem sys = assemble(model, theta);
  return observed_from(model, theta, quadratic_forms(sys, model.y()),
                       compute_trace_terms(sys, true, cap));
}

InfoMatrix fisher(const Model& model, const Theta& theta, Index cap) {
  const MMESystem sys = assemble(model, theta);
  return fisher_from(model, theta, compute_trace_terms(sys, true, cap));
}

InfoMatrix average(const Model& model, const Theta& theta) {
  const MMESystem sys = assemble(model, theta);
  return average_from(model, theta, quadratic_forms(sys, model.y()));
}

InfoMatrix splitting_residual(const Model& model, const Theta& theta, Index cap) {
  const MMESystem sys = assemble(model, theta);
  return splitting_residual_from(model, theta, quadratic_forms(sys, model.y()),
                                 compute_trace_terms(sys, false, cap));
}

}  // namespace aireml

#include "aireml/oracle.hpp"

#include <cmath>
#include <numbers>

#include "aireml/likelihood.hpp"
#include "aireml/simulate.hpp"

namespace aireml::oracle {

namespace {

double max_abs(const MatrixXd& A) { return A.size() == 0 ? 0.0 : A.cwiseAbs().maxCoeff(); }

double relative_max(const MatrixXd& diff, const MatrixXd& reference) {
  return max_abs(diff) / std::max(max_abs(reference), std::numeric_limits<double>::min());
}

Eigen::LLT<MatrixXd> checked_llt(const MatrixXd& A, const char* what) {
  Eigen::LLT<MatrixXd> llt(A);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::FactorizationFailure, std::string(what) + " is not positive definite");
  }
  return llt;
}

double log_det_pd(const MatrixXd& A, const char* what) {
  return 2.0 * checked_llt(A, what).matrixLLT().diagonal().array().log().sum();
}

Theta shifted(const Theta& theta, Index k, double step) {
  VectorXd v = theta.packed();
  v(k) += step;
  return Theta::unpack(v);
}

double step_for(const Theta& theta, Index k, double h) {
  return h * (1.0 + std::abs(theta.packed()(k)));
}

struct Accumulator {
  MatrixXd sum;
  MatrixXd sum_sq;

  void add(const MatrixXd& x) {
    if (sum.size() == 0) {
      sum = MatrixXd::Zero(x.rows(), x.cols());
      sum_sq = MatrixXd::Zero(x.rows(), x.cols());
    }
    sum += x;
    sum_sq += x.cwiseProduct(x);
  }

  MatrixMoments moments(int reps) const {
    const double r = reps;
    MatrixMoments out;
    out.mean = sum / r;
    const MatrixXd var = ((sum_sq - r * out.mean.cwiseProduct(out.mean)) / (r - 1.0)).cwiseMax(0.0);
    out.se = (var / r).cwiseSqrt();
    return out;
  }
};

CheckStatus judge(double residual, double tolerance) {
  return std::isfinite(residual) && residual <= tolerance ? CheckStatus::pass : CheckStatus::fail;
}

}  // namespace

std::string_view to_string(CheckStatus status) {
  switch (status) {
    case CheckStatus::pass: return "PASS";
    case CheckStatus::fail: return "FAIL";
    case CheckStatus::skip: return "SKIP";
  }
  return "?";
}

MatrixXd dense_H_inverse(const Model& model, const Theta& theta, Index cap) {
  require_within_cap(model.n(), cap, "oracle H^{-1}");
  const MatrixXd H = build_H(model, theta);
  const MatrixXd inv = checked_llt(H, "H").solve(MatrixXd::Identity(model.n(), model.n()));
  return 0.5 * (inv + inv.transpose());
}

MatrixXd dense_P(const Model& model, const Theta& theta, Index cap) {
  const MatrixXd hinv = dense_H_inverse(model, theta, cap);
  const MatrixXd hx = hinv * model.X();
  const MatrixXd xthx = model.X().transpose() * hx;
  const MatrixXd P = hinv - hx * checked_llt(xthx, "X^T H^{-1} X").solve(MatrixXd(hx.transpose()));
  return 0.5 * (P + P.transpose());
}

MatrixXd projection_X(const MatrixXd& X) {
  const MatrixXd xtx = X.transpose() * X;
  const MatrixXd P = X * checked_llt(xtx, "X^T X").solve(MatrixXd(X.transpose()));
  return 0.5 * (P + P.transpose());
}

TransformPair transform_pair(const MatrixXd& X, double b_scale) {
  const Index n = X.rows();
  const Index p = X.cols();
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(projection_X(X));
  // eigenvalues are 0 (n - p times) then 1 (p times), ascending
  Index zeros = 0;
  while (zeros < n && eig.eigenvalues()(zeros) < 0.5) ++zeros;
  if (zeros != n - p) {
    throw Error(ErrorCode::RankDeficientX, "P_X does not have rank p");
  }
  TransformPair t;
  t.K2 = eig.eigenvectors().leftCols(n - p);
  t.K1 = eig.eigenvectors().rightCols(p);

  MatrixXd D(n, n);
  D << X, b_scale * t.K2;
  // L^T D = I  <=>  D^T L = I
  const MatrixXd L = D.transpose().partialPivLu().solve(MatrixXd::Identity(n, n));
  t.L1 = L.leftCols(p);
  t.L2 = L.rightCols(n - p);
  return t;
}

double unit_determinant_b_scale(const MatrixXd& X) {
  const double dof = static_cast<double>(X.rows() - X.cols());
  return std::exp(-log_det_pd(X.transpose() * X, "X^T X") / (2.0 * dof));
}

MatrixXd projection_from_L2(const MatrixXd& H, const MatrixXd& L2) {
  const MatrixXd inner = L2.transpose() * H * L2;
  const MatrixXd P = L2 * checked_llt(inner, "L2^T H L2").solve(MatrixXd(L2.transpose()));
  return 0.5 * (P + P.transpose());
}

MatrixXd xhx_inverse_from_L(const MatrixXd& H, const TransformPair& L) {
  const MatrixXd h12 = L.L1.transpose() * H * L.L2;
  const MatrixXd h22 = L.L2.transpose() * H * L.L2;
  const MatrixXd out =
      L.L1.transpose() * H * L.L1 - h12 * checked_llt(h22, "L2^T H L2").solve(MatrixXd(h12.transpose()));
  return 0.5 * (out + out.transpose());
}

double l2_form_loglik(const Model& model, const Theta& theta, Index cap) {
  require_within_cap(model.n(), cap, "l2-form log-likelihood");
  const MatrixXd H = build_H(model, theta);
  const TransformPair t = transform_pair(model.X(), unit_determinant_b_scale(model.X()));
  const MatrixXd inner = t.L2.transpose() * H * t.L2;
  const auto llt = checked_llt(inner, "L2^T H L2");
  const VectorXd y2 = t.L2.transpose() * model.y();
  const double dof = static_cast<double>(model.n() - model.p());
  const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  return -0.5 * (dof * std::log(2.0 * std::numbers::pi * theta.sigma2) + log_det +
                 y2.dot(llt.solve(y2)) / theta.sigma2);
}

VectorXd fd_score(const Model& model, const Theta& theta, double h) {
  const Index k = model.m() + 1;
  VectorXd g(k);
  for (Index i = 0; i < k; ++i) {
    const double step = step_for(theta, i, h);
    const Theta plus = shifted(theta, i, step);
    const Theta minus = shifted(theta, i, -step);
    model.require_admissible(plus);
    model.require_admissible(minus);
    g(i) = (log_likelihood(model, plus) - log_likelihood(model, minus)) / (2.0 * step);
  }
  return g;
}

MatrixXd fd_hessian(const Model& model, const Theta& theta, double h) {
  const Index k = model.m() + 1;
  const double center = log_likelihood(model, theta);
  MatrixXd out(k, k);
  for (Index i = 0; i < k; ++i) {
    const double hi = step_for(theta, i, h);
    const Theta plus = shifted(theta, i, hi);
    const Theta minus = shifted(theta, i, -hi);
    model.require_admissible(minus);
    out(i, i) = (log_likelihood(model, plus) - 2.0 * center + log_likelihood(model, minus)) / (hi * hi);
    for (Index j = i + 1; j < k; ++j) {
      const double hj = step_for(theta, j, h);
      const double pp = log_likelihood(model, shifted(plus, j, hj));
      const double pm = log_likelihood(model, shifted(plus, j, -hj));
      const double mp = log_likelihood(model, shifted(minus, j, hj));
      const double mm = log_likelihood(model, shifted(minus, j, -hj));
      out(i, j) = out(j, i) = (pp - pm - mp + mm) / (4.0 * hi * hj);
    }
  }
  return out;
}

SimpleModelRecord simple_model_check(const Dataset& dataset) {
  if (dataset.Z.cols() != 0) {
    throw Error(ErrorCode::DimensionMismatch, "simple model check needs a fixed-effects-only dataset");
  }
  const Index n = dataset.y.size();
  const Index p = dataset.X.cols();
  const VectorXd resid = dataset.y - projection_X(dataset.X) * dataset.y;
  SimpleModelRecord r;
  r.S_R = resid.squaredNorm();
  if (r.S_R <= 1e-12 * dataset.y.squaredNorm()) {
    throw Error(ErrorCode::DegenerateResidual, "response lies in the span of X");
  }
  r.sigma2_ml = r.S_R / static_cast<double>(n);
  r.sigma2_reml = r.S_R / static_cast<double>(n - p);
  return r;
}

BiasEstimate simple_model_bias(const MatrixXd& X, double sigma2_true, int reps, std::uint64_t seed) {
  if (reps < 2) throw Error(ErrorCode::InvalidOptions, "need at least two replicates");
  const Model model = validate(Dataset{VectorXd::Zero(X.rows()), X, MatrixXd(X.rows(), 0)}, VarianceSpec{});
  const SimConfig cfg{Theta{sigma2_true, VectorXd(0)}, seed, {}};
  Accumulator ml;
  Accumulator reml;
  for (int r = 0; r < reps; ++r) {
    const VectorXd y = simulate_y(model, cfg, static_cast<std::uint64_t>(r));
    const SimpleModelRecord rec = simple_model_check(Dataset{y, X, MatrixXd(X.rows(), 0)});
    ml.add(MatrixXd::Constant(1, 1, rec.sigma2_ml));
    reml.add(MatrixXd::Constant(1, 1, rec.sigma2_reml));
  }
  const MatrixMoments m1 = ml.moments(reps);
  const MatrixMoments m2 = reml.moments(reps);
  BiasEstimate out;
  out.reps = reps;
  out.mean_ml = m1.mean(0, 0);
  out.se_ml = m1.se(0, 0);
  out.mean_reml = m2.mean(0, 0);
  out.se_reml = m2.se(0, 0);
  out.bias_ml = out.mean_ml - sigma2_true;
  out.bias_reml = out.mean_reml - sigma2_true;
  return out;
}

Expectations mc_expectations(const Model& model, const Theta& theta_true, int reps, std::uint64_t seed,
                             Index cap) {
  if (reps < 100) throw Error(ErrorCode::InvalidOptions, "Monte Carlo expectations need reps >= 100");
  const MMESystem sys = assemble(model, theta_true);
  const TraceTerms traces = compute_trace_terms(sys, true, cap);
  const SimConfig cfg{theta_true, seed, {}};
  Accumulator s, io, ia, iz;
  for (int r = 0; r < reps; ++r) {
    const VectorXd y = simulate_y(model, cfg, static_cast<std::uint64_t>(r));
    const QuadraticForms forms = quadratic_forms(sys, y);
    s.add(score_from(model, theta_true, forms, traces).packed());
    io.add(observed_from(model, theta_true, forms, traces).values);
    ia.add(average_from(model, theta_true, forms).values);
    iz.add(splitting_residual_from(model, theta_true, forms, traces).values);
  }
  Expectations out;
  out.reps = reps;
  out.score = s.moments(reps);
  out.observed = io.moments(reps);
  out.average = ia.moments(reps);
  out.splitting_residual = iz.moments(reps);
  out.fisher = fisher_from(model, theta_true, traces).values;
  return out;
}

MatrixXd woodbury_inverse(const MatrixXd& A, const MatrixXd& B, const MatrixXd& C, const MatrixXd& D) {
  const auto a_lu = A.partialPivLu();
  const MatrixXd ainv_b = a_lu.solve(B);
  const MatrixXd d_ainv = D * a_lu.inverse();
  const MatrixXd core = C.partialPivLu().inverse() + D * ainv_b;
  return a_lu.inverse() - ainv_b * core.partialPivLu().solve(d_ainv);
}

MatrixXd block_inverse(const MatrixXd& A, const MatrixXd& B, const MatrixXd& C) {
  const Index a = A.rows();
  const Index c = C.rows();
  const MatrixXd cinv = C.partialPivLu().inverse();
  const MatrixXd S = (A - B * cinv * B.transpose()).partialPivLu().inverse();
  MatrixXd out(a + c, a + c);
  out.topLeftCorner(a, a) = S;
  out.topRightCorner(a, c) = -S * B * cinv;
  out.bottomLeftCorner(c, a) = -cinv * B.transpose() * S;
  out.bottomRightCorner(c, c) = cinv * B.transpose() * S * B * cinv + cinv;
  return out;
}

std::vector<CheckResult> run_identity_suite(const Model& model, const Theta& theta, Index cap) {
  static const std::vector<std::pair<std::string, double>> kChecks = {
      {"PX=0 (dense P)", 1e-9},
      {"PX=0 (mixed-model route)", 1e-9},
      {"PHP=P", 1e-8},
      {"tr(PH)=n-p", 1e-8},
      {"Py two-route agreement", 1e-9},
      {"P via C equals P via H", 1e-9},
      {"Py = R^-1 e", 1e-10},
      {"Woodbury H^-1", 1e-9},
      {"C^XX = (X^T H^-1 X)^-1", 1e-9},
      {"K-transform K1 K1^T = P_X, K2^T X = 0", 1e-10},
      {"L-transform L1^T X = I, L2^T X = 0", 1e-10},
      {"I - P_X = L2 (L2^T L2)^-1 L2^T", 1e-9},
      {"P = L2 (L2^T H L2)^-1 L2^T", 1e-8},
      {"(X^T H^-1 X)^-1 via L", 1e-8},
      {"l2-form log-likelihood", 1e-8},
      {"splitting identity", 1e-9},
      {"I_Z(sigma2,sigma2) = 0", 0.0},
      {"average information vs dense quadratic forms", 1e-10},
      {"average information PSD", 1e-10},
      {"score vs finite differences", 1e-6},
      {"observed vs finite-difference Hessian", 1e-5},
  };
  std::vector<CheckResult> out;
  for (const auto& [name, tol] : kChecks) out.push_back(CheckResult{name, 0.0, tol, CheckStatus::skip});
  if (model.n() > cap) return out;

  auto record = [&](size_t index, double residual) {
    out[index].residual = residual;
    out[index].status = judge(residual, out[index].tolerance);
  };

  const Index n = model.n();
  const Index p = model.p();
  const MatrixXd& X = model.X();
  const MatrixXd H = build_H(model, theta);
  const MatrixXd P = dense_P(model, theta, cap);
  const MMESystem sys = assemble(model, theta);

  record(0, relative_max(P * X, P) / std::max(1.0, max_abs(X)));
  {
    VectorXd c = VectorXd::LinSpaced(p, 1.0, 2.0);
    const VectorXd v = X * c;
    record(1, apply_P(sys, v).norm() / v.norm());
  }
  record(2, relative_max(P * H * P - P, P));
  record(3, std::abs((P * H).trace() - static_cast<double>(n - p)));
  const VectorXd py_dense = P * model.y();
  const VectorXd py_mme = apply_P(sys, model.y());
  record(4, (py_mme - py_dense).norm() / py_dense.norm());
  record(5, relative_max(dense_P_from_mme(sys, cap) - P, P));
  {
    const Effects eff = solve_effects(sys, model.y());
    const VectorXd e = model.y() - X * eff.tau_hat - model.Z() * eff.u_tilde;
    const VectorXd rinv_e = model.residual_diagonal(theta).cwiseInverse().cwiseProduct(e);
    record(6, (py_mme - rinv_e).norm() / std::max(rinv_e.norm(), 1e-300));
  }
  const MatrixXd hinv = dense_H_inverse(model, theta, cap);
  record(7, relative_max(h_inverse_dense(model, theta, cap) - hinv, hinv));
  const MatrixXd xhx_inv = (X.transpose() * hinv * X).inverse();
  record(8, relative_max(cxx_block(sys) - xhx_inv, xhx_inv));

  const MatrixXd PX = projection_X(X);
  const MatrixXd I = MatrixXd::Identity(n, n);
  const TransformPair t = transform_pair(X);
  {
    const double xs = std::max(1.0, max_abs(X));
    const double r = std::max({max_abs(t.K1 * t.K1.transpose() - PX), max_abs(t.K2.transpose() * X) / xs,
                               max_abs(I - PX - t.K2 * t.K2.transpose())});
    record(9, r);
    record(10, std::max(max_abs(t.L1.transpose() * X - MatrixXd::Identity(p, p)),
                        max_abs(t.L2.transpose() * X) / xs));
    const MatrixXd l2l2 = t.L2 * (t.L2.transpose() * t.L2).inverse() * t.L2.transpose();
    record(11, max_abs(I - PX - l2l2));
  }
  record(12, relative_max(projection_from_L2(H, t.L2) - P, P));
  record(13, relative_max(xhx_inverse_from_L(H, t) - xhx_inv, xhx_inv));
  {
    const double l_r = log_likelihood(model, theta, cap);
    record(14, std::abs(l2_form_loglik(model, theta, cap) - l_r) / std::max(1.0, std::abs(l_r)));
  }

  const MatrixXd io = observed(model, theta, cap).values;
  const MatrixXd fi = fisher(model, theta, cap).values;
  const MatrixXd ia = average(model, theta).values;
  const MatrixXd iz = splitting_residual(model, theta, cap).values;
  const MatrixXd mean_info = 0.5 * (io + fi);
  record(15, relative_max(mean_info - ia - iz, mean_info));
  record(16, std::abs(iz(0, 0)));
  {
    // quadratic forms straight from dense P and dense dH
    const Index m = model.m();
    const double s2 = theta.sigma2;
    const VectorXd& y = model.y();
    MatrixXd ref(m + 1, m + 1);
    ref(0, 0) = y.dot(P * y) / (2.0 * s2 * s2 * s2);
    for (Index i = 0; i < m; ++i) {
      const MatrixXd Hi = dH(model, theta, i);
      ref(0, i + 1) = ref(i + 1, 0) = y.dot(P * Hi * P * y) / (2.0 * s2 * s2);
      for (Index j = 0; j < m; ++j) {
        ref(i + 1, j + 1) = y.dot(P * Hi * P * dH(model, theta, j) * P * y) / (2.0 * s2);
      }
    }
    record(17, relative_max(ia - ref, ref));
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(ia);
    const double largest = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
    record(18, std::max(0.0, -eig.eigenvalues().minCoeff()) / largest);
  }
  {
    const VectorXd analytic = score(model, theta, cap).packed();
    const VectorXd numeric = fd_score(model, theta, 1e-5);
    record(19, (numeric - analytic).cwiseAbs().maxCoeff() / std::max(1.0, analytic.cwiseAbs().maxCoeff()));
    const MatrixXd hess = -fd_hessian(model, theta, 1e-4);
    record(20, max_abs(hess - io) / std::max(1.0, max_abs(io)));
  }
  return out;
}

}  // namespace aireml::oracle

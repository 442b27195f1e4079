#include "aireml/solver.hpp"

#include <cmath>

namespace aireml {

std::string_view to_string(Variant variant) {
  switch (variant) {
    case Variant::newton: return "newton";
    case Variant::fisher: return "fisher";
    case Variant::ai: return "ai";
  }
  return "unknown";
}

std::string_view to_string(FitStatus status) {
  switch (status) {
    case FitStatus::converged: return "converged";
    case FitStatus::max_iter: return "max_iter";
    case FitStatus::error: return "error";
  }
  return "unknown";
}

namespace {

constexpr double kDegenerateResidual = 1e-12;
constexpr double kInflationStart = 1e-6;
constexpr int kInflationRetries = 6;
// Largest change of any log-scale parameter in one step.
constexpr double kMaxLogStep = 10.0;

void check_options(const SolveOptions& options) {
  if (!(options.tol > 0.0)) throw Error(ErrorCode::InvalidOptions, "tol must be positive");
  if (options.max_iter < 1) throw Error(ErrorCode::InvalidOptions, "max_iter must be at least 1");
  if (options.step_halving_max < 0) {
    throw Error(ErrorCode::InvalidOptions, "step_halving_max must be non-negative");
  }
}

void check_residual(const Model& model, double yPy) {
  if (yPy <= kDegenerateResidual * model.y().squaredNorm()) {
    throw Error(ErrorCode::DegenerateResidual,
                "response lies in the span of X (y^T P y = " + std::to_string(yPy) + ")");
  }
}

struct Evaluation {
  ScoreVector score;
  QuadraticForms forms;
  InfoMatrix info;
};

Evaluation evaluate(const Model& model, const Theta& theta, Variant variant, Index cap) {
  const MMESystem sys = assemble(model, theta);
  Evaluation e;
  e.forms = quadratic_forms(sys, model.y());
  check_residual(model, e.forms.yPy);
  const TraceTerms traces = compute_trace_terms(sys, variant != Variant::ai, cap);
  e.score = score_from(model, theta, e.forms, traces);
  switch (variant) {
    case Variant::newton: e.info = observed_from(model, theta, e.forms, traces); break;
    case Variant::fisher: e.info = fisher_from(model, theta, traces); break;
    case Variant::ai: e.info = average_from(model, theta, e.forms); break;
  }
  return e;
}

std::optional<VectorXd> solve_pd(const MatrixXd& A, const VectorXd& rhs) {
  Eigen::LLT<MatrixXd> llt(A);
  if (llt.info() != Eigen::Success) return std::nullopt;
  VectorXd x = llt.solve(rhs);
  if (!x.allFinite()) return std::nullopt;
  return x;
}

struct Direction {
  VectorXd delta;
  Variant used = Variant::ai;
  bool fallback = false;
  double inflation = 0.0;
};

std::optional<Direction> step_direction(const Model& model, const Theta& theta,
                                        const Evaluation& e, Variant variant) {
  const VectorXd rhs = e.score.packed();
  Direction out;
  out.used = variant;
  MatrixXd info = e.info.values;
  if (variant == Variant::newton) {
    if (auto d = solve_pd(info, rhs)) {
      out.delta = *d;
      return out;
    }
    // indefinite observed information: take this step with the average information
    info = average_from(model, theta, e.forms).values;
    out.used = Variant::ai;
    out.fallback = true;
  }
  if (auto d = solve_pd(info, rhs)) {
    out.delta = *d;
    return out;
  }
  VectorXd diag = info.diagonal().cwiseAbs();
  diag = diag.cwiseMax(1e-8 * std::max(diag.maxCoeff(), 1.0));
  double mu = kInflationStart;
  for (int retry = 0; retry < kInflationRetries; ++retry, mu *= 10.0) {
    MatrixXd inflated = info;
    inflated.diagonal() += mu * diag;
    if (auto d = solve_pd(inflated, rhs)) {
      out.delta = *d;
      out.inflation = mu;
      return out;
    }
  }
  return std::nullopt;
}

VectorXd standard_errors(const MatrixXd& info) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(info);
  const VectorXd& lambda = eig.eigenvalues();
  const double largest = lambda.cwiseAbs().maxCoeff();
  VectorXd inv = VectorXd::Zero(lambda.size());
  for (Index i = 0; i < lambda.size(); ++i) {
    if (lambda(i) > 1e-12 * largest) inv(i) = 1.0 / lambda(i);
  }
  const MatrixXd& V = eig.eigenvectors();
  const VectorXd var = (V * inv.asDiagonal() * V.transpose()).diagonal();
  return var.cwiseMax(0.0).cwiseSqrt();
}

std::vector<std::string> parameter_names(const Model& model) {
  std::vector<std::string> names{"sigma2"};
  for (Index i = 0; i < model.m(); ++i) names.push_back(model.parameter_name(i));
  return names;
}

}  // namespace

double residual_sum_of_squares(const Model& model) {
  const VectorXd beta = model.X().colPivHouseholderQr().solve(model.y());
  return (model.y() - model.X() * beta).squaredNorm();
}

Theta initial_theta(const Model& model) {
  const double sr = residual_sum_of_squares(model);
  check_residual(model, sr);
  Theta theta;
  theta.sigma2 = sr / static_cast<double>(model.n() - model.p());
  theta.kappa.resize(model.m());
  for (Index i = 0; i < model.m(); ++i) {
    const double natural = model.parameter_kind(i) == ParameterKind::group ? 0.1 : 1.0;
    theta.kappa(i) = model.scale() == Scale::log ? std::log(natural) : natural;
  }
  return theta;
}

FitReport fit(const Model& model, const SolveOptions& options) {
  check_options(options);
  FitReport report;
  report.variant = options.variant;
  report.scale = model.scale();
  report.parameter_names = parameter_names(model);

  Theta theta = options.init ? *options.init : initial_theta(model);
  model.require_admissible(theta);
  check_residual(model, residual_sum_of_squares(model));
  double loglik = log_likelihood(model, theta, options.dense_cap);

  for (int k = 0;; ++k) {
    const Evaluation e = evaluate(model, theta, options.variant, options.dense_cap);
    IterationRecord record{k, theta.packed(), loglik, e.score.max_abs(), 0, options.variant, false, 0.0};
    report.final_score = e.score.packed();
    report.iterations = k;

    if (record.score_norm <= options.tol) {
      report.status = FitStatus::converged;
      report.trace.push_back(record);
      break;
    }
    if (k == options.max_iter) {
      report.status = FitStatus::max_iter;
      report.error = ErrorCode::NoConvergence;
      report.message = "maximum number of iterations reached";
      report.trace.push_back(record);
      break;
    }

    const auto direction = step_direction(model, theta, e, options.variant);
    if (!direction) {
      report.status = FitStatus::error;
      report.error = ErrorCode::NoConvergence;
      report.message = "information matrix stayed indefinite after diagonal inflation";
      report.trace.push_back(record);
      break;
    }
    record.variant = direction->used;
    record.fallback = direction->fallback;
    record.inflation = direction->inflation;

    const VectorXd current = theta.packed();
    double alpha = 1.0;
    if (model.scale() == Scale::log && model.m() > 0) {
      const double largest = direction->delta.tail(model.m()).cwiseAbs().maxCoeff();
      if (largest > kMaxLogStep) alpha = kMaxLogStep / largest;
    }
    std::optional<Theta> accepted;
    double accepted_loglik = loglik;
    for (int h = 0; h <= options.step_halving_max; ++h, alpha *= 0.5) {
      const Theta candidate = Theta::unpack(current + alpha * direction->delta);
      if (!model.admissible(candidate)) continue;
      double candidate_loglik;
      try {
        candidate_loglik = log_likelihood(model, candidate, options.dense_cap);
      } catch (const Error& err) {
        if (err.code() == ErrorCode::FactorizationFailure) continue;
        throw;
      }
      if (std::isfinite(candidate_loglik) &&
          candidate_loglik >= loglik - kLoglikSlack * (1.0 + std::abs(loglik))) {
        accepted = candidate;
        accepted_loglik = candidate_loglik;
        record.halvings = h;
        break;
      }
    }
    if (!accepted) {
      record.halvings = options.step_halving_max;
      report.status = FitStatus::error;
      report.error = ErrorCode::NoConvergence;
      report.message = "step halving exhausted without an admissible non-decreasing step";
      report.trace.push_back(record);
      break;
    }
    report.trace.push_back(record);
    theta = *accepted;
    loglik = accepted_loglik;
  }

  report.theta_hat = theta;
  report.loglik = loglik;
  // Standard errors from the average information at the final iterate.
  const MMESystem sys = assemble(model, theta);
  report.info_kind_used = InfoKind::average;
  report.final_information = average_from(model, theta, quadratic_forms(sys, model.y())).values;
  report.se_theta = standard_errors(report.final_information);

  EffectsEstimate effects = effects_with_uncertainty(sys, options.random_cov_cap);
  report.tau_hat = std::move(effects.tau_hat);
  report.tau_cov = std::move(effects.tau_cov);
  report.u_tilde = std::move(effects.u_tilde);
  report.u_cov = std::move(effects.u_cov);
  report.u_pev_diagonal = std::move(effects.u_pev_diagonal);
  return report;
}

}  // namespace aireml

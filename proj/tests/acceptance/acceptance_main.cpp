// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "aireml/information.hpp"
#include "aireml/likelihood.hpp"
#include "aireml/oracle.hpp"
#include "aireml/simulate.hpp"
#include "aireml/solver.hpp"

using namespace aireml;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Detail {
 public:
  void add(const char* fmt, double value) {
    char buf[128];
    std::snprintf(buf, sizeof buf, fmt, value);
    if (!text_.empty()) text_ += ", ";
    text_ += buf;
  }
  void note(const std::string& s) {
    if (!text_.empty()) text_ += ", ";
    text_ += s;
  }
  const std::string& str() const { return text_; }

 private:
  std::string text_;
};

double max_abs(const MatrixXd& A) { return A.size() ? A.cwiseAbs().maxCoeff() : 0.0; }

Model t1() {
  return validate(Dataset{(VectorXd(4) << 1, 2, 3, 4).finished(), MatrixXd::Ones(4, 1), MatrixXd(4, 0)},
                  VarianceSpec{});
}

Model t2(Scale scale) {
  MatrixXd Z(4, 2);
  Z << 1, 0, 1, 0, 0, 1, 0, 1;
  VarianceSpec spec;
  spec.groups.push_back(RandomGroup{"g", 2, std::nullopt});
  spec.scale = scale;
  return validate(Dataset{(VectorXd(4) << 1, 2, 3, 4).finished(), MatrixXd::Ones(4, 1), Z}, spec);
}

Theta make_theta(double sigma2, std::vector<double> kappa) {
  Theta t;
  t.sigma2 = sigma2;
  t.kappa = Eigen::Map<VectorXd>(kappa.data(), static_cast<Index>(kappa.size()));
  return t;
}

struct Instance {
  Model model;
  Theta theta;
};

// Random full-rank model with n <= 50, up to two random groups (some with
// kernels) and an optional two-way residual partition.
Instance random_instance(std::mt19937_64& rng, Scale scale) {
  std::uniform_int_distribution<Index> n_dist(12, 50);
  std::uniform_int_distribution<int> p_dist(1, 3);
  std::uniform_int_distribution<int> g_dist(0, 2);
  std::uniform_int_distribution<Index> w_dist(2, 6);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal;

  const Index n = n_dist(rng);
  const int p = p_dist(rng);
  MatrixXd X(n, p);
  for (Index i = 0; i < n; ++i) {
    X(i, 0) = 1.0;
    for (int j = 1; j < p; ++j) X(i, j) = normal(rng);
  }
  VarianceSpec spec;
  spec.scale = scale;
  const int groups = g_dist(rng);
  std::vector<MatrixXd> blocks;
  for (int g = 0; g < groups; ++g) {
    const Index w = w_dist(rng);
    MatrixXd block = MatrixXd::Zero(n, w);
    for (Index i = 0; i < n; ++i) block(i, std::uniform_int_distribution<Index>(0, w - 1)(rng)) = 1.0;
    RandomGroup group{"g" + std::to_string(g), w, std::nullopt};
    if (unif(rng) < 0.5) {
      MatrixXd A(w, w);
      for (Index i = 0; i < w * w; ++i) A(i) = normal(rng);
      group.kernel = A * A.transpose() / static_cast<double>(w) + 0.5 * MatrixXd::Identity(w, w);
    }
    spec.groups.push_back(std::move(group));
    blocks.push_back(std::move(block));
  }
  Index b = 0;
  for (const auto& bl : blocks) b += bl.cols();
  MatrixXd Z(n, b);
  Index off = 0;
  for (const auto& bl : blocks) {
    Z.middleCols(off, bl.cols()) = bl;
    off += bl.cols();
  }
  if (unif(rng) < 0.4) {
    std::vector<int> part(static_cast<size_t>(n));
    for (Index i = 0; i < n; ++i) part[static_cast<size_t>(i)] = static_cast<int>(i % 2);
    spec.residual = ResidualStructure::partitioned(part, 2);
  }
  VectorXd y(n);
  for (Index i = 0; i < n; ++i) y(i) = 1.5 * normal(rng) + 0.5;
  Model model = validate(Dataset{y, X, Z}, spec);
  Theta theta;
  theta.sigma2 = 0.5 + 1.5 * unif(rng);
  theta.kappa.resize(model.m());
  for (Index i = 0; i < model.m(); ++i) {
    const double natural = 0.2 + 1.8 * unif(rng);
    theta.kappa(i) = scale == Scale::log ? std::log(natural) : natural;
  }
  return {model, theta};
}

Model one_way_design(Index levels, Index per_level, Scale scale) {
  const Index n = levels * per_level;
  MatrixXd Z = MatrixXd::Zero(n, levels);
  for (Index i = 0; i < n; ++i) Z(i, i / per_level) = 1.0;
  VarianceSpec spec;
  spec.groups.push_back(RandomGroup{"group", levels, std::nullopt});
  spec.scale = scale;
  return validate(Dataset{VectorXd::Zero(n), MatrixXd::Ones(n, 1), Z}, spec);
}

// ---------------------------------------------------------------------------

Outcome closed_form_reml() {
  Outcome o;
  Detail d;
  const Model m = t1();
  const double s2 = 5.0 / 3.0;
  double worst_est = 0.0;
  for (Variant v : {Variant::newton, Variant::fisher, Variant::ai}) {
    SolveOptions opt;
    opt.variant = v;
    opt.init = make_theta(1.0, {});
    const FitReport r = fit(m, opt);
    worst_est = std::max(worst_est, std::abs(r.theta_hat.sigma2 - s2));
    o.pass = o.pass && r.status == FitStatus::converged;
  }
  const Theta hat = make_theta(s2, {});
  const double l_hand = -0.5 * (3.0 * std::log(s2) + std::log(4.0) + 3.0) - 1.5 * std::log(2.0 * std::numbers::pi);
  const double e_l = std::abs(log_likelihood(m, hat) - l_hand);
  const double e_s = std::abs(score(m, hat).s_sigma2);
  const double e_o = std::abs(observed(m, hat).values(0, 0) - 0.54);
  const double e_f = std::abs(fisher(m, hat).values(0, 0) - 0.54);
  const double e_a = std::abs(average(m, hat).values(0, 0) - 0.54);
  const double e_info = std::max({e_o, e_f, e_a});
  o.pass = o.pass && worst_est <= 1e-8 && e_l <= 1e-9 && e_s <= 1e-9 && e_info <= 1e-9;
  d.add("|sigma2_hat - 5/3| = %.2e (tol 1e-8)", worst_est);
  d.add("|loglik - hand| = %.2e", e_l);
  d.add("|score| = %.2e", e_s);
  d.add("max |I - 0.54| = %.2e (tol 1e-9)", e_info);
  o.detail = d.str();
  return o;
}

Outcome ml_bias() {
  Outcome o;
  Detail d;
  std::mt19937_64 rng(20240601);
  std::normal_distribution<double> normal;
  MatrixXd X(10, 3);
  for (Index i = 0; i < 10; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = normal(rng);
    X(i, 2) = normal(rng);
  }
  const auto b = oracle::simple_model_bias(X, 2.0, 5000, 777);
  const double z_ml = (b.bias_ml - (-0.6)) / b.se_ml;
  const double z_reml = b.bias_reml / b.se_reml;
  o.pass = std::abs(z_ml) <= 4.0 && std::abs(z_reml) <= 4.0;
  d.add("ML bias %.4f", b.bias_ml);
  d.add("(target -0.6, z = %.2f)", z_ml);
  d.add("REML bias %.4f", b.bias_reml);
  d.add("(z = %.2f, |z| <= 4)", z_reml);
  o.detail = d.str();
  return o;
}

Outcome projection_identities() {
  Outcome o;
  Detail d;
  std::mt19937_64 rng(3);
  double px = 0.0, php = 0.0, tr = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const auto inst = random_instance(rng, rep % 2 ? Scale::log : Scale::natural);
    const Model& m = inst.model;
    const MatrixXd P = oracle::dense_P(m, inst.theta);
    const MatrixXd H = build_H(m, inst.theta);
    const MMESystem sys = assemble(m, inst.theta);
    px = std::max(px, max_abs(P * m.X()) / std::max(1.0, max_abs(m.X())));
    for (Index j = 0; j < m.p(); ++j) {
      const VectorXd xj = m.X().col(j);
      px = std::max(px, apply_P(sys, xj).norm() / xj.norm());
    }
    php = std::max(php, max_abs(P * H * P - P) / max_abs(P));
    tr = std::max(tr, std::abs((P * H).trace() - static_cast<double>(m.n() - m.p())));
  }
  o.pass = px <= 1e-9 && php <= 1e-8 && tr <= 1e-8;
  d.add("max PX = %.2e (tol 1e-9)", px);
  d.add("max |PHP-P| = %.2e (tol 1e-8)", php);
  d.add("max |tr(PH)-(n-p)| = %.2e (tol 1e-8)", tr);
  o.detail = d.str();
  return o;
}

Outcome two_route_py() {
  Outcome o;
  Detail d;
  std::mt19937_64 rng(4);
  double py = 0.0, p2 = 0.0, rinv = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const auto inst = random_instance(rng, rep % 2 ? Scale::log : Scale::natural);
    const Model& m = inst.model;
    const MatrixXd P = oracle::dense_P(m, inst.theta);
    const MMESystem sys = assemble(m, inst.theta);
    const VectorXd dense = P * m.y();
    const VectorXd mme = apply_P(sys, m.y());
    py = std::max(py, (mme - dense).norm() / dense.norm());
    p2 = std::max(p2, max_abs(dense_P_from_mme(sys) - P) / max_abs(P));
    const Effects e = solve_effects(sys, m.y());
    const VectorXd r = m.residual_diagonal(inst.theta)
                           .cwiseInverse()
                           .cwiseProduct(m.y() - m.X() * e.tau_hat - m.Z() * e.u_tilde);
    rinv = std::max(rinv, (mme - r).norm() / r.norm());
  }
  o.pass = py <= 1e-9 && p2 <= 1e-9;
  d.add("max rel |Py_mme - Py_dense| = %.2e (tol 1e-9)", py);
  d.add("max |P_C - P_H| / max|P| = %.2e (tol 1e-9)", p2);
  d.add("Py vs R^-1 e %.2e", rinv);
  o.detail = d.str();
  return o;
}

Outcome derivative_oracles() {
  Outcome o;
  Detail d;
  double score_err = 0.0, hess_err = 0.0;
  double min_ratio = 1e300, max_ratio = 0.0;
  int rate_checks = 0;
  auto check = [&](const Model& m, const Theta& t) {
    const VectorXd an = score(m, t).packed();
    const double ref = std::max(1.0, an.cwiseAbs().maxCoeff());
    score_err = std::max(score_err, (oracle::fd_score(m, t, 1e-5) - an).cwiseAbs().maxCoeff() / ref);
    const VectorXd e1 = (oracle::fd_score(m, t, 1e-3) - an).cwiseAbs();
    const VectorXd e2 = (oracle::fd_score(m, t, 5e-4) - an).cwiseAbs();
    for (Index i = 0; i < an.size(); ++i) {
      if (e1(i) < 1e-9 * ref) continue;  // truncation error below roundoff
      min_ratio = std::min(min_ratio, e1(i) / e2(i));
      max_ratio = std::max(max_ratio, e1(i) / e2(i));
      ++rate_checks;
    }
    const MatrixXd io = observed(m, t).values;
    hess_err = std::max(hess_err, max_abs(-oracle::fd_hessian(m, t, 1e-4) - io) / std::max(1.0, max_abs(io)));
  };
  check(t2(Scale::natural), make_theta(1.0, {0.5}));
  check(t2(Scale::log), make_theta(1.0, {std::log(0.5)}));
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    const auto inst = random_instance(rng, rep % 2 ? Scale::log : Scale::natural);
    check(inst.model, inst.theta);
  }
  o.pass = score_err <= 1e-6 && hess_err <= 1e-5 && rate_checks > 0 && min_ratio >= 3.0 && max_ratio <= 5.0;
  d.add("score rel err = %.2e (tol 1e-6)", score_err);
  d.add("h-halving error ratio in [%.2f", min_ratio);
  d.add("%.2f] (want ~4)", max_ratio);
  d.add("Hessian rel err = %.2e (tol 1e-5)", hess_err);
  o.detail = d.str() + ", natural and log scales";
  return o;
}

Outcome splitting_identity() {
  Outcome o;
  Detail d;
  double worst = 0.0;
  bool exact_zero = true;
  auto check = [&](const Model& m, const Theta& t) {
    const MatrixXd io = observed(m, t).values;
    const MatrixXd fi = fisher(m, t).values;
    const MatrixXd ia = average(m, t).values;
    const MatrixXd iz = splitting_residual(m, t).values;
    const MatrixXd mean = 0.5 * (io + fi);
    worst = std::max(worst, max_abs(mean - ia - iz) / max_abs(mean));
    exact_zero = exact_zero && iz(0, 0) == 0.0;
  };
  check(t2(Scale::natural), make_theta(1.0, {0.5}));
  check(t2(Scale::log), make_theta(1.0, {std::log(0.5)}));
  std::mt19937_64 rng(6);
  for (int rep = 0; rep < 20; ++rep) {
    const auto inst = random_instance(rng, rep % 2 ? Scale::log : Scale::natural);
    check(inst.model, inst.theta);
  }
  o.pass = worst <= 1e-9 && exact_zero;
  d.add("max |(I_O+I_F)/2 - I_A - I_Z| / max entry = %.2e (tol 1e-9)", worst);
  d.note(std::string("I_Z(sigma2,sigma2) == 0: ") + (exact_zero ? "yes" : "no"));
  o.detail = d.str();
  return o;
}

Outcome expectation_properties() {
  Outcome o;
  Detail d;
  const Model design = one_way_design(20, 10, Scale::natural);
  const Theta truth = make_theta(1.0, {0.5});
  const auto mc = oracle::mc_expectations(design, truth, 4000, 99);
  double z_o = 0.0, z_a = 0.0, z_z = 0.0, z_s = 0.0;
  auto z = [](double diff, double se) { return se > 0 ? std::abs(diff) / se : (diff == 0.0 ? 0.0 : 1e300); };
  for (Index i = 0; i < mc.fisher.rows(); ++i) {
    z_s = std::max(z_s, z(mc.score.mean(i, 0), mc.score.se(i, 0)));
    for (Index j = 0; j < mc.fisher.cols(); ++j) {
      z_o = std::max(z_o, z(mc.observed.mean(i, j) - mc.fisher(i, j), mc.observed.se(i, j)));
      z_a = std::max(z_a, z(mc.average.mean(i, j) - mc.fisher(i, j), mc.average.se(i, j)));
      z_z = std::max(z_z, z(mc.splitting_residual.mean(i, j), mc.splitting_residual.se(i, j)));
    }
  }
  o.pass = z_o <= 4 && z_a <= 4 && z_z <= 4 && z_s <= 4;
  d.add("%.0f reps, n=200", static_cast<double>(mc.reps));
  d.add("max |z| E(I_O)-I_F = %.2f", z_o);
  d.add("E(I_A)-I_F = %.2f", z_a);
  d.add("E(I_Z) = %.2f", z_z);
  d.add("E(S) = %.2f (limit 4)", z_s);
  o.detail = d.str();
  return o;
}

Outcome l_transform() {
  Outcome o;
  Detail d;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> unif(0.2, 3.0);
  double l_err = 0.0, c1 = 0.0, c2 = 0.0;
  auto check = [&](const Model& m, const Theta& t) {
    const double l = log_likelihood(m, t);
    l_err = std::max(l_err, std::abs(oracle::l2_form_loglik(m, t) - l) / std::max(1.0, std::abs(l)));
    const MatrixXd H = build_H(m, t);
    const auto pair = oracle::transform_pair(m.X());
    const MatrixXd P = oracle::dense_P(m, t);
    c1 = std::max(c1, max_abs(oracle::projection_from_L2(H, pair.L2) - P) / max_abs(P));
    const MatrixXd hinv = H.inverse();
    const MatrixXd xhx = (m.X().transpose() * hinv * m.X()).inverse();
    c2 = std::max(c2, max_abs(oracle::xhx_inverse_from_L(H, pair) - xhx) / max_abs(xhx));
  };
  for (int rep = 0; rep < 5; ++rep) {
    check(t1(), make_theta(unif(rng), {}));
    check(t2(Scale::natural), make_theta(unif(rng), {unif(rng)}));
    check(t2(Scale::log), make_theta(unif(rng), {std::log(unif(rng))}));
  }
  o.pass = l_err <= 1e-8 && c1 <= 1e-8 && c2 <= 1e-8;
  d.add("max |l2-form - loglik| = %.2e (tol 1e-8)", l_err);
  d.add("L2 projection %.2e", c1);
  d.add("(X^T H^-1 X)^-1 via L %.2e (tol 1e-8)", c2);
  o.detail = d.str();
  return o;
}

Outcome solver_behavior() {
  Outcome o;
  Detail d;
  bool monotone = true;
  auto check_monotone = [&](const FitReport& r) {
    for (size_t k = 1; k < r.trace.size(); ++k) {
      const double prev = r.trace[k - 1].loglik;
      if (r.trace[k].loglik < prev - kLoglikSlack * (1.0 + std::abs(prev))) monotone = false;
    }
  };

  // variant agreement on 10 simulated problems
  double spread = 0.0;
  int converged = 0;
  const SolveOptions base;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Model design = one_way_design(20, 10 + static_cast<Index>(seed % 3) * 5, Scale::natural);
    const Model m = design.with_response(simulate_y(design, SimConfig{make_theta(1.0, {0.5}), seed, {}}, 0));
    std::vector<VectorXd> ends;
    for (Variant v : {Variant::newton, Variant::fisher, Variant::ai}) {
      SolveOptions opt;
      opt.variant = v;
      const FitReport r = fit(m, opt);
      check_monotone(r);
      converged += r.status == FitStatus::converged;
      ends.push_back(r.theta_hat.packed());
    }
    spread = std::max({spread, (ends[0] - ends[2]).cwiseAbs().maxCoeff(), (ends[1] - ends[2]).cwiseAbs().maxCoeff()});
  }

  // parameter recovery, 200 simulations of 20 levels x 20 observations
  const int R = 200;
  const Model design = one_way_design(20, 20, Scale::natural);
  const Theta truth = make_theta(1.0, {0.5});
  VectorXd sum = VectorXd::Zero(2), sum_sq = VectorXd::Zero(2);
  int recovered = 0;
  for (int r = 0; r < R; ++r) {
    const Model m = design.with_response(simulate_y(design, SimConfig{truth, 4242, {}}, static_cast<std::uint64_t>(r)));
    const FitReport rep = fit(m);
    check_monotone(rep);
    if (rep.status != FitStatus::converged) continue;
    ++recovered;
    const VectorXd t = rep.theta_hat.packed();
    sum += t;
    sum_sq += t.cwiseProduct(t);
  }
  const VectorXd mean = sum / recovered;
  const VectorXd var = (sum_sq - recovered * mean.cwiseProduct(mean)) / (recovered - 1);
  const VectorXd se = (var / recovered).cwiseSqrt();
  const VectorXd z = (mean - truth.packed()).cwiseQuotient(se).cwiseAbs();

  o.pass = monotone && converged == 30 && spread <= 10 * base.tol && recovered == R && z.maxCoeff() <= 4.0;
  d.note(std::string("monotone traces: ") + (monotone ? "yes" : "no"));
  d.add("converged %.0f/30", converged);
  d.add("max variant spread = %.2e (tol 1e-7)", spread);
  d.add("recovery mean sigma2 %.4f", mean(0));
  d.add("gamma %.4f", mean(1));
  d.add("max |z| = %.2f over 200 fits (limit 4)", z.maxCoeff());
  o.detail = d.str();
  return o;
}

Outcome cost_asymmetry() {
  Outcome o;
  Detail d;
  const Index n = 2000;
  const Index widths[3] = {40, 30, 20};
  MatrixXd Z = MatrixXd::Zero(n, 90);
  std::mt19937_64 rng(10);
  Index off = 0;
  VarianceSpec spec;
  for (int g = 0; g < 3; ++g) {
    for (Index i = 0; i < n; ++i) Z(i, off + std::uniform_int_distribution<Index>(0, widths[g] - 1)(rng)) = 1.0;
    spec.groups.push_back(RandomGroup{"g" + std::to_string(g), widths[g], std::nullopt});
    off += widths[g];
  }
  const Model design = validate(Dataset{VectorXd::Zero(n), MatrixXd::Ones(n, 1), Z}, spec);
  const Theta t = make_theta(1.0, {0.5, 0.3, 0.2});
  const Model m = design.with_response(simulate_y(design, SimConfig{t, 1, {}}, 0));

  auto best_of = [](int reps, const std::function<void()>& fn) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
      const auto start = std::chrono::steady_clock::now();
      fn();
      best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    }
    return best;
  };
  volatile double sink = 0.0;
  const double t_ai = best_of(5, [&] { sink = sink + average(m, t).values(0, 0); });
  const double t_fisher = best_of(3, [&] { sink = sink + fisher(m, t).values(0, 0); });
  const double ratio = t_fisher / t_ai;
  o.pass = ratio >= 5.0;
  d.add("ai evaluation %.4f s", t_ai);
  d.add("fisher evaluation %.4f s", t_fisher);
  d.add("speed-up %.1fx (need >= 5x) at n=2000, m=3", ratio);
  o.detail = d.str();
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {"closed-form REML on the intercept-only model", closed_form_reml},
      {"ML bias -p/n sigma2 and REML unbiasedness", ml_bias},
      {"projection identities PX=0, PHP=P, tr(PH)=n-p", projection_identities},
      {"two-route Py agreement", two_route_py},
      {"finite-difference score and Hessian", derivative_oracles},
      {"splitting identity", splitting_identity},
      {"expectations E(I_O)=E(I_A)=I_F, E(I_Z)=0, E(S)=0", expectation_properties},
      {"L-transform log-likelihood equivalence", l_transform},
      {"solver monotonicity, variant agreement, recovery", solver_behavior},
      {"average-information cost advantage", cost_asymmetry},
  };
  int failures = 0;
  int index = 0;
  for (const auto& c : criteria) {
    ++index;
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail = std::string("exception: ") + e.what();
    }
    failures += !out.pass;
    std::printf("%s [%d] %s: %s\n", out.pass ? "PASS" : "FAIL", index, c.name, out.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", index - failures, index);
  return failures == 0 ? 0 : 1;
}

#include "aireml/simulate.hpp"

#include <cmath>
#include <random>

namespace aireml {

VectorXd simulate_y(const Model& model, const SimConfig& cfg, std::uint64_t replicate) {
  model.require_admissible(cfg.theta_true);
  const Index n = model.n();
  VectorXd y = VectorXd::Zero(n);
  if (cfg.tau_true.size() != 0) {
    if (cfg.tau_true.size() != model.p()) {
      throw Error(ErrorCode::DimensionMismatch,
                  "tau_true has " + std::to_string(cfg.tau_true.size()) + " entries, expected " +
                      std::to_string(model.p()));
    }
    y = model.X() * cfg.tau_true;
  }

  std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                    static_cast<std::uint32_t>(replicate),
                    static_cast<std::uint32_t>(replicate >> 32)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto draw = [&](Index size) {
    VectorXd z(size);
    for (Index i = 0; i < size; ++i) z(i) = normal(rng);
    return z;
  };

  const double s2 = cfg.theta_true.sigma2;
  const VectorXd kappa = model.natural_kappa(cfg.theta_true);
  for (Index g = 0; g < model.num_groups(); ++g) {
    const Index w = model.group_width(g);
    const VectorXd u = std::sqrt(s2 * kappa(g)) * (model.kernel_sqrt(g) * draw(w));
    y.noalias() += model.Z().middleCols(model.group_offset(g), w) * u;
  }
  const VectorXd r = model.residual_diagonal(cfg.theta_true);
  y += (s2 * r).cwiseSqrt().cwiseProduct(draw(n));
  return y;
}

}  // namespace aireml

#pragma once

#include <cstdint>

#include "aireml/model.hpp"

namespace aireml {

struct SimConfig {
  Theta theta_true;
  std::uint64_t seed = 0;
  VectorXd tau_true;  // length p; zero when empty
};

/// y = X tau + Z u + e with u ~ N(0, sigma2 G), e ~ N(0, sigma2 R).
/// Replicate r draws from its own stream seeded by (seed, r), so replicates
/// are reproducible independently of evaluation order.
VectorXd simulate_y(const Model& model, const SimConfig& cfg, std::uint64_t replicate = 0);

}  // namespace aireml

#pragma once

#include <cstdint>
#include <utility>

#include "entroute/network.hpp"

namespace entroute {

struct WaxmanConfig {
  int n_nodes = 50;
  double area_km = 100.0;
  double alpha = 0.25;
  double beta = 0.4;
  std::pair<double, double> rate_range{10.0, 90.0};
  std::pair<double, double> fid_range{0.7, 0.95};
  std::uint64_t seed = 1;
  int max_attempts = 100;
};

// Waxman random geometric topology. Nodes are placed uniformly in an
// area_km x area_km square; each pair is linked with probability
// alpha * exp(-d / (beta * d_max)). Disconnected draws are retried with
// derived sub-seeds; CONNECTIVITY_FAILURE once max_attempts is spent.
QuantumNetwork waxman_generate(const WaxmanConfig& cfg);

// Single draw without the connectivity retry (used by the statistics tests).
QuantumNetwork waxman_draw(const WaxmanConfig& cfg, std::uint64_t draw_seed);

// Alpha that makes the expected edge density equal `target_density`, from a
// Monte Carlo estimate of E[exp(-d / (beta * d_max))] over `samples` layouts.
double waxman_alpha_for_density(int n_nodes, double beta, double target_density,
                                std::uint64_t seed, int samples = 64);

}  // namespace entroute

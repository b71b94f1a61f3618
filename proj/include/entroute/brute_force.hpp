#pragma once

#include <optional>

#include "entroute/grid.hpp"
#include "entroute/network.hpp"
#include "entroute/tree.hpp"

namespace entroute {

enum class OracleMode {
  kExact,    // exact fidelities; the grid is applied only to the root threshold
  kFloored,  // every node's fidelity floored to the grid, as the DP does
};

struct OracleLimits {
  int max_leaves = 4;           // links per path, at most 8
  int max_purify_per_node = 2;  // directly nested PURIFY nodes above any node, at most 8
};

// Exhaustive search over simple s-d paths, every binary swap shape over each
// path and every chain of up to `max_purify_per_node` PURIFY nodes (each with
// 1..I_max iterations) on top of every tree node. Returns the least-latency
// tree whose root fidelity floors to at least f_min, or nullopt.
// SEARCH_BUDGET_EXCEEDED when the limits are too large to enumerate.
std::optional<OperationTree> brute_force_edp(const QuantumNetwork& net, NodeIndex s,
                                             NodeIndex d, double f_min,
                                             const FidelityGrid& grid,
                                             const OperationParams& params,
                                             OracleLimits limits = {},
                                             OracleMode mode = OracleMode::kExact);

}  // namespace entroute

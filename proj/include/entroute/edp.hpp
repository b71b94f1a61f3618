#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "entroute/grid.hpp"
#include "entroute/network.hpp"
#include "entroute/tree.hpp"

namespace entroute {

// Minimum-latency table over (node pair, grid fidelity) states.
//
// States are keyed by the exact floored fidelity a tree produces. Both
// transitions strictly increase latency (a swap multiplies the slower operand
// by 3/(2 p_s) >= 1.5, a purification adds positive terms and divides by a
// probability), so states are finalized smallest-latency first, Dijkstra
// style. A finalized state is expanded only if no higher-fidelity state of
// the same pair was finalized earlier; otherwise that state dominates it.
class EdpTable {
 public:
  struct Target {
    NodeIndex s;
    NodeIndex d;
    std::size_t min_index;
  };

  // Builds the full table, or stops as soon as `target` is settled.
  static EdpTable build(const QuantumNetwork& net, const FidelityGrid& grid,
                        const OperationParams& params,
                        std::optional<Target> target = std::nullopt);

  // Least latency of any tree producing (u, v) at fidelity >= f.
  std::optional<double> latency(NodeIndex u, NodeIndex v, double f) const;
  // Least latency among trees whose floored fidelity is exactly grid[k].
  std::optional<double> exact_latency(NodeIndex u, NodeIndex v, std::size_t k) const;
  // Tree achieving latency(u, v, f).
  std::optional<OperationTree> tree(NodeIndex u, NodeIndex v, double f) const;

  // Latencies in the order states were finalized (nondecreasing).
  const std::vector<double>& finalized_latencies() const { return finalized_; }
  std::size_t expanded_states() const { return expanded_; }
  const FidelityGrid& grid() const { return grid_; }

 private:
  enum class Via : std::uint8_t { kNone, kLeaf, kSwap, kPurify };
  struct Entry {
    double latency;
    int nodes = 0;
    Via how = Via::kNone;
    NodeIndex via = -1;
    std::uint32_t left_k = 0;   // swap: (a, via) child; purify: source
    std::uint32_t right_k = 0;  // swap: (via, b) child
    int iterations = 0;
    bool final = false;
  };

  EdpTable(const QuantumNetwork& net, const FidelityGrid& grid);
  std::size_t state(NodeIndex u, NodeIndex v, std::size_t k) const;
  OperationTree rebuild(NodeIndex a, NodeIndex b, std::size_t k) const;

  const QuantumNetwork* net_;
  FidelityGrid grid_;
  int n_;
  std::vector<Entry> entries_;
  std::vector<double> finalized_;
  std::size_t expanded_ = 0;
};

// Minimum-latency purification-augmented swapping tree for (s, d) whose
// floored root fidelity is at least f_min; nullopt when unreachable.
// INVALID_DEMAND when s == d or f_min lies outside the grid range.
std::optional<OperationTree> solve_edp(const QuantumNetwork& net, NodeIndex s,
                                       NodeIndex d, double f_min,
                                       const FidelityGrid& grid,
                                       const OperationParams& params);

// Quantity model: link rates are integer copy counts. Swaps deliver
// floor(p_s * min(counts)); i pumping steps over a homogeneous pool of c
// copies deliver floor(prod rho_j * floor(c / (i + 1))). Maximizes the
// delivered count at fidelity >= f_min; nullopt when the best count is 0.
std::optional<OperationTree> solve_edp_quantity(const QuantumNetwork& net,
                                                NodeIndex s, NodeIndex d,
                                                double f_min,
                                                const FidelityGrid& grid,
                                                const OperationParams& params);

// Same tree producing (b, a) instead of (a, b).
OperationTree flip_tree(OperationTree tree);

// Copies surviving `iterations` pumping steps on `count` copies at `fidelity`.
long quantity_purify_yield(long count, double fidelity, int iterations);
long quantity_swap_yield(long left, long right, double p_s);

}  // namespace entroute

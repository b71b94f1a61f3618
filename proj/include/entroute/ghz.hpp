#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "entroute/entmath.hpp"
#include "entroute/grid.hpp"
#include "entroute/hypergraph.hpp"
#include "entroute/lp.hpp"
#include "entroute/network.hpp"

namespace entroute {

struct VirtualEdge {
  NodeIndex leaf = 0;
  double rate = 0.0;
  double fidelity = 0.0;
};

// Remote EPs between a center terminal and every other terminal.
struct VirtualStar {
  NodeIndex center = 0;
  std::vector<VirtualEdge> edges;

  // Center first, then leaves in edge order.
  std::vector<NodeIndex> terminals() const;
  int edge_of(NodeIndex leaf) const;  // -1 when not a leaf
  void validate() const;
};

enum class Stage1Method { kDp, kLp };

// Solves center-to-leaf EP distribution at fidelity >= f_edge for every
// leaf. The DP method routes each edge independently; the LP method solves
// one joint flow that maximizes the smallest edge rate. Without a fixed
// center, the terminal whose star has the largest minimum edge rate wins
// (ties to the smaller node id). INFEASIBLE_EDGE names an unreachable leaf.
VirtualStar stage1_virtual_star(const QuantumNetwork& net,
                                const std::vector<NodeIndex>& terminals, double f_edge,
                                const FidelityGrid& grid, const OperationParams& params,
                                Stage1Method method,
                                std::optional<NodeIndex> center = std::nullopt);

enum class FusionKind { kLeaf, kFuse, kSelfPurify, kSubsetPurify };

std::string_view to_string(FusionKind kind);

// LEAF consumes one virtual edge. FUSE joins two children whose subsets
// share only the center. SELF_PURIFY has one child on the same subset.
// SUBSET_PURIFY has the target first and the sacrificial child second.
struct FusionTree {
  FusionKind kind = FusionKind::kLeaf;
  std::vector<NodeIndex> subset;  // sorted
  double fidelity = 0.0;
  double rate = 0.0;
  std::vector<FusionTree> children;

  int node_count() const;
};

nlohmann::json fusion_tree_to_json(const FusionTree& tree,
                                   const std::vector<std::string>& names);
FusionTree fusion_tree_from_json(const nlohmann::json& j, std::vector<std::string>& names);

struct FusionEval {
  double fidelity;
  double rate;
  std::vector<double> consumption;  // per star edge
};

// Recomputes the tree bottom-up against the star. ANNOTATION_MISMATCH on a
// disagreeing annotation or a structural rule violation, naming the node
// path; INVARIANT_VIOLATION when an edge is consumed beyond its rate.
FusionEval evaluate_fusion_tree(const FusionTree& tree, const VirtualStar& star,
                                const RateGrid& kgrid, const OperationParams& params,
                                const entmath::FusionModel& model = {},
                                double tolerance = 1e-9);

// Root fidelity with every node's fidelity floored to `grid`, which is how
// the GGDP hypergraph carries the same tree; nullopt when a node falls
// below the grid.
std::optional<double> floored_fidelity(const FusionTree& tree, const FidelityGrid& grid,
                                       const entmath::FusionModel& model = {});

enum class GdpVariant {
  kOptimal,  // every transition, per-edge consumption in the state
  kSS,       // fusion and self purification
  kOT,       // SS plus one subset purification between fusions
  k2G,       // fusion and subset purification sacrificing an EP
};

std::string_view to_string(GdpVariant v);

struct GdpOptions {
  entmath::FusionModel fusion;
  // Consumption of edge e is rounded up to multiples of rate_e / ep_levels
  // before it is checked against the edge rate; 0 keeps it exact.
  int ep_levels = 4;
  std::size_t max_entries = 4'000'000;
};

struct GdpResult {
  std::optional<FusionTree> tree;
  // Best fidelity of the full terminal set at each reachable grid rate,
  // ascending in rate.
  std::vector<std::pair<double, double>> frontier;
  std::size_t entries = 0;
};

// STATE_SPACE_EXCEEDED above 6 terminals (optimal) or 12 (others), or when
// the entry budget runs out. DOMAIN_ERROR unless f_min is in (0.5, 1].
GdpResult solve_gdp(const VirtualStar& star, double f_min, const RateGrid& kgrid,
                    const OperationParams& params, GdpVariant variant,
                    const GdpOptions& options = {});

std::optional<FusionTree> solve_gdp_optimal(const VirtualStar& star, double f_min,
                                            const RateGrid& kgrid,
                                            const OperationParams& params);
std::optional<FusionTree> solve_gdp_ss(const VirtualStar& star, double f_min,
                                       const RateGrid& kgrid, const OperationParams& params);
std::optional<FusionTree> solve_gdp_ot(const VirtualStar& star, double f_min,
                                       const RateGrid& kgrid, const OperationParams& params);
std::optional<FusionTree> solve_gdp_2g(const VirtualStar& star, double f_min,
                                       const RateGrid& kgrid, const OperationParams& params);

// Four values per octave below the largest edge rate (twenty octaves),
// plus every edge rate.
RateGrid rate_grid_for_star(const VirtualStar& star);

enum class GgdpVertexKind { kStart, kTerm, kAvail, kFuse, kPurify1, kPurify2 };

struct GgdpOptions {
  HypergraphScope scope = HypergraphScope::kReachable;
  entmath::FusionModel fusion;
};

struct GgdpLp {
  LpModel model;
  std::vector<GgdpVertexKind> vertex_kinds;
  std::size_t arc_count = 0;
  std::vector<int> term_demand;  // per variable: demand index or -1

  std::size_t count(GgdpVertexKind kind) const;
};

// Subsets of the star's terminals stand in for node pairs: AVAIL, FUSE,
// PURIFY1 and PURIFY2 vertices per (subset, grid fidelity). Demands whose
// terminals are not all in the star raise INVALID_DEMAND; more than 10
// terminals raise STATE_SPACE_EXCEEDED.
GgdpLp build_ggdp_lp(const VirtualStar& star, const std::vector<GhzDemand>& demands,
                     const FidelityGrid& grid, const OperationParams& params,
                     const GgdpOptions& options = {});

struct GgdpResult {
  double objective = 0.0;
  std::vector<double> delivered;  // per demand
  std::size_t vertex_count = 0;
  std::size_t arc_count = 0;
  int lp_variables = 0;
  int lp_rows = 0;
  std::string fusion_model;
};

GgdpResult solve_ggdp(const VirtualStar& star, const std::vector<GhzDemand>& demands,
                      const FidelityGrid& grid, const OperationParams& params,
                      const GgdpOptions& options = {});

}  // namespace entroute

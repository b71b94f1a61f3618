#pragma once

#include <optional>
#include <vector>

#include <json.hpp>

#include "entroute/hypergraph.hpp"
#include "entroute/lp.hpp"

namespace entroute {

enum class GedpMode {
  kFull,
  kNaive,  // purification only on demanded pairs
};

struct GedpLp {
  LpModel model;
  std::vector<int> var_of_arc;  // -1 for arcs dropped by the mode
  std::vector<int> arc_of_var;
};

GedpLp build_lp(const Hypergraph& hg, const OperationParams& params,
                GedpMode mode = GedpMode::kFull);

// Rate of every hyperarc (0 for arcs absent from the LP), clamped at 0.
std::vector<double> arc_rates(const GedpLp& lp, const LpSolution& solution);

struct LevelOp {
  int arc;
  ArcFamily family;
  NodeIndex u, v;    // produced pair (consumed pair for kTerm)
  NodeIndex via;
  double fidelity;   // head fidelity (tail fidelity for kTerm)
  std::vector<double> operand_fidelities;
  double rate;
};

struct LevelStructure {
  std::vector<std::vector<LevelOp>> layers;
  std::vector<double> delivered;  // per pair demand
  double max_residual = 0.0;      // worst conservation deficit
};

// Layers by longest-path depth from START over arcs with rate >= 1e-9.
// CYCLIC_FLOW when the retained arcs contain a cycle; INVARIANT_VIOLATION
// when a retained vertex consumes more than it produces (beyond 1e-6).
LevelStructure extract_levels(const Hypergraph& hg, const OperationParams& params,
                              const std::vector<double>& rates,
                              std::size_t demand_count);

nlohmann::json levels_to_json(const LevelStructure& levels, const QuantumNetwork& net);

struct GedpResult {
  double objective = 0.0;
  std::vector<double> delivered;  // per pair demand
  LevelStructure levels;
  std::size_t vertex_count = 0;
  std::size_t arc_count = 0;
  int lp_variables = 0;
  int lp_rows = 0;
  int iterations = 0;
};

GedpResult solve_gedp(const QuantumNetwork& net, const DemandSet& demands,
                      const FidelityGrid& grid, const OperationParams& params,
                      GedpMode mode = GedpMode::kFull);

// Optimum of the single-demand LP at `threshold` (a grid value).
double gedp_rate(const QuantumNetwork& net, NodeIndex s, NodeIndex d, double threshold,
                 const FidelityGrid& grid, const OperationParams& params,
                 GedpMode mode = GedpMode::kFull);

struct FidelitySearch {
  std::optional<double> fidelity;
  std::vector<std::pair<double, double>> probes;  // (threshold, optimum)
};

// Bisection over grid indices, first probe at the grid value nearest 0.75
// from above. `iterations` caps the probes; 0 means enough to be exact.
FidelitySearch max_fidelity_under_rate(const QuantumNetwork& net, NodeIndex s,
                                       NodeIndex d, double r_min,
                                       const FidelityGrid& grid,
                                       const OperationParams& params,
                                       int iterations = 0,
                                       GedpMode mode = GedpMode::kFull);

}  // namespace entroute

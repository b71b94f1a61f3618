#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "entroute/grid.hpp"
#include "entroute/network.hpp"

namespace entroute {

enum class VertexKind : std::uint8_t { kStart, kTerm, kAvail, kSwap, kPurify1, kPurify2 };
enum class ArcFamily : std::uint8_t {
  kStart,
  kSwap,
  kSelfPurify,
  kPurifyDistinct,
  kTerm,
  kRelay
};

std::string_view to_string(VertexKind kind);
std::string_view to_string(ArcFamily family);

struct HVertex {
  VertexKind kind;
  NodeIndex u = -1;  // u < v for pair vertices
  NodeIndex v = -1;
  int f = -1;        // grid index
};

struct HArc {
  ArcFamily family;
  std::vector<int> tails;  // 1 or 2 vertices
  int head = -1;
  NodeIndex via = -1;      // kSwap: the swapping node
  int demand = -1;         // kTerm: index into DemandSet::pairs
  double capacity = 0.0;   // kStart: link generation rate
};

enum class HypergraphScope {
  kFull,       // every vertex and arc the construction rules allow
  kReachable,  // only what lies on some start -> term route
};

// Typed hypergraph over (pair, grid fidelity) EP classes.
//
// Purification arcs are only created when the floored output fidelity index
// is strictly above the target's: an arc that does not improve the target
// spends two EPs to obtain one no better than an input.
class Hypergraph {
 public:
  const std::vector<HVertex>& vertices() const { return vertices_; }
  const std::vector<HArc>& arcs() const { return arcs_; }
  const FidelityGrid& grid() const { return grid_; }
  int start() const { return 0; }
  int term() const { return 1; }
  std::optional<int> find(VertexKind kind, NodeIndex u, NodeIndex v, int f) const;

  std::string vertex_name(int v) const;
  // Deterministic LP variable name, z_{family}_{u}_{v}_{f}...
  std::string arc_name(int a) const;

  std::size_t count(VertexKind kind) const;
  std::size_t count(ArcFamily family) const;

  // Arcs entering / leaving (as a tail) each vertex.
  std::vector<std::vector<int>> in_arcs() const;
  std::vector<std::vector<int>> out_arcs() const;

 private:
  friend Hypergraph build_hypergraph(const QuantumNetwork&, const DemandSet&,
                                     const FidelityGrid&, HypergraphScope);
  explicit Hypergraph(FidelityGrid grid) : grid_(std::move(grid)) {}
  int add_vertex(VertexKind kind, NodeIndex u, NodeIndex v, int f);
  static std::uint64_t key(VertexKind kind, NodeIndex u, NodeIndex v, int f);

  FidelityGrid grid_;
  std::vector<HVertex> vertices_;
  std::vector<HArc> arcs_;
  std::unordered_map<std::uint64_t, int> index_;
};

// NO_DEMAND when `demands.pairs` is empty. Demand thresholds are rounded up
// to the grid; a threshold above the grid maximum gets no Term arcs.
Hypergraph build_hypergraph(const QuantumNetwork& net, const DemandSet& demands,
                            const FidelityGrid& grid,
                            HypergraphScope scope = HypergraphScope::kReachable);

}  // namespace entroute

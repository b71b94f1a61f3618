#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace entroute {

using NodeIndex = int;

struct Link {
  NodeIndex a = 0;
  NodeIndex b = 0;
  double rate = 0.0;      // EPs per second (copy count in quantity mode)
  double fidelity = 0.0;  // Werner fidelity in (0.25, 1]

  friend bool operator==(const Link&, const Link&) = default;
};

struct Position {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Position&, const Position&) = default;
};

// Undirected simple graph with per-link EP generation rate and fidelity.
// Immutable after construction; the constructor enforces every invariant.
class QuantumNetwork {
 public:
  QuantumNetwork() = default;
  QuantumNetwork(std::vector<std::string> nodes, std::vector<Link> links,
                 std::optional<std::vector<Position>> positions = std::nullopt);

  // Convenience builder keyed by node ids.
  struct LinkSpec {
    std::string a;
    std::string b;
    double rate;
    double fidelity;
  };
  static QuantumNetwork from_ids(std::vector<std::string> nodes,
                                 const std::vector<LinkSpec>& links);

  int node_count() const { return static_cast<int>(nodes_.size()); }
  const std::vector<std::string>& nodes() const { return nodes_; }
  const std::string& node_id(NodeIndex i) const { return nodes_.at(i); }
  std::optional<NodeIndex> find_node(const std::string& id) const;
  NodeIndex index_of(const std::string& id) const;

  const std::vector<Link>& links() const { return links_; }
  const Link* link_between(NodeIndex u, NodeIndex v) const;
  const std::vector<NodeIndex>& neighbors(NodeIndex u) const {
    return adjacency_.at(u);
  }
  const std::optional<std::vector<Position>>& positions() const {
    return positions_;
  }

  bool connected() const;
  double max_rate() const;
  double edge_density() const;

  // Copy with one additional link; used for resource-monotonicity checks.
  QuantumNetwork with_link(const Link& link) const;

  friend bool operator==(const QuantumNetwork& x, const QuantumNetwork& y) {
    return x.nodes_ == y.nodes_ && x.links_ == y.links_ &&
           x.positions_ == y.positions_;
  }

 private:
  std::vector<std::string> nodes_;
  std::vector<Link> links_;
  std::optional<std::vector<Position>> positions_;
  std::unordered_map<std::string, NodeIndex> index_;
  std::vector<std::vector<NodeIndex>> adjacency_;
  std::map<std::pair<NodeIndex, NodeIndex>, std::size_t> link_index_;
};

struct PairDemand {
  NodeIndex s = 0;
  NodeIndex d = 0;
  double threshold = 0.0;
};

struct GhzDemand {
  std::vector<NodeIndex> terminals;
  double threshold = 0.0;
};

struct DemandSet {
  std::vector<PairDemand> pairs;
  std::vector<GhzDemand> ghz;

  bool empty() const { return pairs.empty() && ghz.empty(); }
  // Throws INVALID_DEMAND when a demand references unknown nodes or breaks
  // the threshold/terminal-count rules.
  void validate(const QuantumNetwork& net) const;
};

// Physical operation parameters shared by every solver and the simulator.
struct OperationParams {
  double p_s = 0.4;     // swap success probability
  double t_s = 10e-6;   // swap latency (s)
  double t_p = 10e-6;   // purification latency (s)
  double t_c = 0.0;     // classical communication latency (s)
  double p_f = 0.4;     // fusion success probability
  int i_max = 5;        // maximum purification iterations per purify node
  double gamma = 0.0;   // decoherence rate (1/s)

  void validate() const;
};

}  // namespace entroute

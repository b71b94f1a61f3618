#include "entroute/network.hpp"

#include <algorithm>
#include <queue>
#include <sstream>

#include "entroute/error.hpp"

namespace entroute {

namespace {

std::pair<NodeIndex, NodeIndex> ordered(NodeIndex u, NodeIndex v) {
  return u < v ? std::pair{u, v} : std::pair{v, u};
}

}  // namespace

QuantumNetwork::QuantumNetwork(std::vector<std::string> nodes,
                               std::vector<Link> links,
                               std::optional<std::vector<Position>> positions)
    : nodes_(std::move(nodes)),
      links_(std::move(links)),
      positions_(std::move(positions)) {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!index_.emplace(nodes_[i], static_cast<NodeIndex>(i)).second) {
      throw Error(ErrorCode::kInvariantViolation,
                  "duplicate node id '" + nodes_[i] + "'");
    }
  }
  if (positions_ && positions_->size() != nodes_.size()) {
    throw Error(ErrorCode::kInvariantViolation,
                "positions must cover every node");
  }
  adjacency_.assign(nodes_.size(), {});
  const int n = node_count();
  for (std::size_t i = 0; i < links_.size(); ++i) {
    Link& l = links_[i];
    std::ostringstream where;
    where << "link " << i;
    if (l.a < 0 || l.a >= n || l.b < 0 || l.b >= n) {
      throw Error(ErrorCode::kInvariantViolation,
                  where.str() + ": endpoint is not a declared node");
    }
    if (l.a == l.b) {
      throw Error(ErrorCode::kInvariantViolation, where.str() + ": self-loop");
    }
    if (!(l.rate > 0.0)) {
      throw Error(ErrorCode::kInvariantViolation,
                  where.str() + ": rate must be positive");
    }
    if (!(l.fidelity > 0.25 && l.fidelity <= 1.0)) {
      throw Error(ErrorCode::kInvariantViolation,
                  where.str() + ": fidelity must lie in (0.25, 1]");
    }
    if (l.a > l.b) std::swap(l.a, l.b);
    if (!link_index_.emplace(ordered(l.a, l.b), i).second) {
      throw Error(ErrorCode::kInvariantViolation,
                  where.str() + ": duplicate link " + nodes_[l.a] + "-" +
                      nodes_[l.b]);
    }
    adjacency_[l.a].push_back(l.b);
    adjacency_[l.b].push_back(l.a);
  }
  for (auto& adj : adjacency_) std::sort(adj.begin(), adj.end());
}

QuantumNetwork QuantumNetwork::from_ids(std::vector<std::string> nodes,
                                        const std::vector<LinkSpec>& links) {
  std::unordered_map<std::string, NodeIndex> idx;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    idx.emplace(nodes[i], static_cast<NodeIndex>(i));
  }
  std::vector<Link> out;
  out.reserve(links.size());
  for (const auto& spec : links) {
    auto ia = idx.find(spec.a);
    auto ib = idx.find(spec.b);
    if (ia == idx.end() || ib == idx.end()) {
      throw Error(ErrorCode::kInvariantViolation,
                  "link " + spec.a + "-" + spec.b + " references unknown node");
    }
    out.push_back(Link{ia->second, ib->second, spec.rate, spec.fidelity});
  }
  return QuantumNetwork(std::move(nodes), std::move(out));
}

std::optional<NodeIndex> QuantumNetwork::find_node(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

NodeIndex QuantumNetwork::index_of(const std::string& id) const {
  auto found = find_node(id);
  if (!found) {
    throw Error(ErrorCode::kInvalidDemand, "unknown node '" + id + "'");
  }
  return *found;
}

const Link* QuantumNetwork::link_between(NodeIndex u, NodeIndex v) const {
  auto it = link_index_.find(ordered(u, v));
  if (it == link_index_.end()) return nullptr;
  return &links_[it->second];
}

bool QuantumNetwork::connected() const {
  if (nodes_.empty()) return true;
  std::vector<char> seen(nodes_.size(), 0);
  std::queue<NodeIndex> frontier;
  frontier.push(0);
  seen[0] = 1;
  std::size_t count = 1;
  while (!frontier.empty()) {
    NodeIndex u = frontier.front();
    frontier.pop();
    for (NodeIndex v : adjacency_[u]) {
      if (!seen[v]) {
        seen[v] = 1;
        ++count;
        frontier.push(v);
      }
    }
  }
  return count == nodes_.size();
}

double QuantumNetwork::max_rate() const {
  double best = 0.0;
  for (const auto& l : links_) best = std::max(best, l.rate);
  return best;
}

double QuantumNetwork::edge_density() const {
  const double n = static_cast<double>(nodes_.size());
  if (n < 2) return 0.0;
  return static_cast<double>(links_.size()) / (n * (n - 1) / 2.0);
}

QuantumNetwork QuantumNetwork::with_link(const Link& link) const {
  auto links = links_;
  links.push_back(link);
  return QuantumNetwork(nodes_, std::move(links), positions_);
}

void DemandSet::validate(const QuantumNetwork& net) const {
  const int n = net.node_count();
  auto in_range = [n](NodeIndex v) { return v >= 0 && v < n; };
  for (const auto& p : pairs) {
    if (!in_range(p.s) || !in_range(p.d)) {
      throw Error(ErrorCode::kInvalidDemand, "pair demand references unknown node");
    }
    if (p.s == p.d) {
      throw Error(ErrorCode::kInvalidDemand, "source equals destination");
    }
    if (!(p.threshold > 0.5 && p.threshold <= 1.0)) {
      throw Error(ErrorCode::kInvalidDemand, "threshold must lie in (0.5, 1]");
    }
  }
  for (const auto& g : ghz) {
    if (g.terminals.size() < 3) {
      throw Error(ErrorCode::kInvalidDemand, "GHZ demand needs >= 3 terminals");
    }
    std::vector<NodeIndex> sorted = g.terminals;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw Error(ErrorCode::kInvalidDemand, "GHZ terminals must be distinct");
    }
    for (NodeIndex t : sorted) {
      if (!in_range(t)) {
        throw Error(ErrorCode::kInvalidDemand, "GHZ demand references unknown node");
      }
    }
    if (!(g.threshold > 0.5 && g.threshold <= 1.0)) {
      throw Error(ErrorCode::kInvalidDemand, "threshold must lie in (0.5, 1]");
    }
  }
}

void OperationParams::validate() const {
  auto prob = [](double p) { return p > 0.0 && p <= 1.0; };
  if (!prob(p_s) || !prob(p_f)) {
    throw Error(ErrorCode::kDomainError, "probabilities must lie in (0, 1]");
  }
  if (t_s < 0.0 || t_p < 0.0 || t_c < 0.0) {
    throw Error(ErrorCode::kDomainError, "latencies must be nonnegative");
  }
  if (i_max < 1) {
    throw Error(ErrorCode::kDomainError, "i_max must be >= 1");
  }
  if (gamma < 0.0) {
    throw Error(ErrorCode::kDomainError, "gamma must be nonnegative");
  }
}

}  // namespace entroute

#include "entroute/edp.hpp"

#include <cmath>
#include <limits>
#include <queue>
#include <tuple>

#include "entroute/entmath.hpp"
#include "entroute/error.hpp"

namespace entroute {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool same_latency(double x, double y) {
  if (std::isinf(x) || std::isinf(y)) return x == y;
  return std::fabs(x - y) <= 1e-12 * std::max(std::fabs(x), std::fabs(y));
}

struct QueueItem {
  double latency;
  int nodes;
  NodeIndex via;
  std::size_t state;

  bool operator>(const QueueItem& o) const {
    return std::tie(latency, nodes, via, state) >
           std::tie(o.latency, o.nodes, o.via, o.state);
  }
};

// Expanded state incident to a node: the pair's other endpoint and grid index.
struct Incident {
  NodeIndex other;
  std::uint32_t k;
};

}  // namespace

OperationTree flip_tree(OperationTree t) {
  std::swap(t.a, t.b);
  if (t.kind == TreeKind::kSwap) std::swap(t.children[0], t.children[1]);
  for (auto& c : t.children) c = flip_tree(std::move(c));
  return t;
}

EdpTable::EdpTable(const QuantumNetwork& net, const FidelityGrid& grid)
    : net_(&net), grid_(grid), n_(net.node_count()) {
  entries_.assign(static_cast<std::size_t>(n_) * n_ * grid_.size(), Entry{kInf});
}

std::size_t EdpTable::state(NodeIndex u, NodeIndex v, std::size_t k) const {
  if (u > v) std::swap(u, v);
  return (static_cast<std::size_t>(u) * n_ + v) * grid_.size() + k;
}

EdpTable EdpTable::build(const QuantumNetwork& net, const FidelityGrid& grid,
                         const OperationParams& params, std::optional<Target> target) {
  params.validate();
  EdpTable t(net, grid);
  const std::size_t G = grid.size();
  const int n = t.n_;

  std::priority_queue<QueueItem, std::vector<QueueItem>, std::greater<>> queue;
  auto relax = [&](NodeIndex a, NodeIndex b, std::size_t k, double latency,
                   const Entry& how) {
    Entry& e = t.entries_[t.state(a, b, k)];
    if (e.final) return;
    const bool better =
        latency < e.latency && !same_latency(latency, e.latency);
    const bool tie = same_latency(latency, e.latency) &&
                     std::tie(how.nodes, how.via) < std::tie(e.nodes, e.via);
    if (!better && !tie) return;
    e = how;
    e.latency = latency;
    queue.push({latency, how.nodes, how.via, t.state(a, b, k)});
  };

  for (const auto& link : net.links()) {
    auto k = grid.floor_index(link.fidelity);
    if (!k) continue;
    Entry how{kInf};
    how.how = Via::kLeaf;
    how.nodes = 1;
    relax(link.a, link.b, *k, 1.0 / link.rate, how);
  }

  std::vector<std::vector<Incident>> incident(n);
  std::vector<int> best_final_k(static_cast<std::size_t>(n) * n, -1);

  while (!queue.empty()) {
    const QueueItem item = queue.top();
    queue.pop();
    Entry& e = t.entries_[item.state];
    if (e.final || item.latency != e.latency || item.nodes != e.nodes ||
        item.via != e.via) {
      continue;
    }
    e.final = true;
    t.finalized_.push_back(e.latency);

    const std::size_t k = item.state % G;
    const std::size_t pair = item.state / G;
    const NodeIndex a = static_cast<NodeIndex>(pair / n);
    const NodeIndex b = static_cast<NodeIndex>(pair % n);

    if (target && ((a == target->s && b == target->d) || (a == target->d && b == target->s)) &&
        k >= target->min_index) {
      break;
    }
    int& best_k = best_final_k[pair];
    if (static_cast<int>(k) <= best_k) continue;  // dominated
    best_k = static_cast<int>(k);
    ++t.expanded_;

    const double f = grid[k];
    const double l = e.latency;
    const int nodes = e.nodes;

    if (f > 0.5) {
      for (int i = 1; i <= params.i_max; ++i) {
        auto pr = purify_step_result(f, l, i, params);
        auto kp = grid.floor_index(pr.fidelity);
        if (!kp || *kp <= k) continue;
        Entry how{kInf};
        how.how = Via::kPurify;
        how.nodes = nodes + 1;
        how.left_k = static_cast<std::uint32_t>(k);
        how.iterations = i;
        relax(a, b, *kp, pr.latency, how);
      }
    }

    // Swap at each endpoint with every expanded state sharing it.
    for (const auto& [here, there] : {std::pair{a, b}, std::pair{b, a}}) {
      for (const Incident& inc : incident[here]) {
        if (inc.other == there) continue;
        const std::size_t other_state = t.state(here, inc.other, inc.k);
        const Entry& o = t.entries_[other_state];
        const double fs = entmath::swap_fidelity(f, grid[inc.k]);
        auto ks = grid.floor_index(fs);
        if (!ks) continue;
        const double ls = entmath::swap_latency(l, o.latency, params);
        // Output pair (x, y) with x < y; left child produces (x, here).
        const NodeIndex x = std::min(there, inc.other);
        const NodeIndex y = std::max(there, inc.other);
        Entry how{kInf};
        how.how = Via::kSwap;
        how.via = here;
        how.nodes = nodes + o.nodes + 1;
        const std::uint32_t k_there = static_cast<std::uint32_t>(k);
        how.left_k = x == there ? k_there : inc.k;
        how.right_k = x == there ? inc.k : k_there;
        relax(x, y, *ks, ls, how);
      }
    }
    incident[a].push_back({b, static_cast<std::uint32_t>(k)});
    incident[b].push_back({a, static_cast<std::uint32_t>(k)});
  }
  return t;
}

std::optional<double> EdpTable::exact_latency(NodeIndex u, NodeIndex v,
                                              std::size_t k) const {
  if (u == v || k >= grid_.size()) return std::nullopt;
  const Entry& e = entries_[state(u, v, k)];
  if (!e.final) return std::nullopt;
  return e.latency;
}

std::optional<double> EdpTable::latency(NodeIndex u, NodeIndex v, double f) const {
  auto k0 = grid_.ceil_index(f);
  if (!k0 || u == v) return std::nullopt;
  std::optional<double> best;
  for (std::size_t k = *k0; k < grid_.size(); ++k) {
    auto l = exact_latency(u, v, k);
    if (l && (!best || *l < *best)) best = l;
  }
  return best;
}

std::optional<OperationTree> EdpTable::tree(NodeIndex u, NodeIndex v, double f) const {
  auto k0 = grid_.ceil_index(f);
  if (!k0 || u == v) return std::nullopt;
  std::optional<std::size_t> best_k;
  double best = kInf;
  for (std::size_t k = *k0; k < grid_.size(); ++k) {
    auto l = exact_latency(u, v, k);
    if (l && *l < best && !same_latency(*l, best)) {
      best = *l;
      best_k = k;
    }
  }
  if (!best_k) return std::nullopt;
  return rebuild(u, v, *best_k);
}

OperationTree EdpTable::rebuild(NodeIndex a, NodeIndex b, std::size_t k) const {
  if (a > b) return flip_tree(rebuild(b, a, k));
  const Entry& e = entries_[state(a, b, k)];
  OperationTree t;
  t.a = a;
  t.b = b;
  t.fidelity = grid_[k];
  t.latency = e.latency;
  t.rate = 1.0 / e.latency;
  switch (e.how) {
    case Via::kLeaf:
      t.kind = TreeKind::kLeaf;
      break;
    case Via::kPurify:
      t.kind = TreeKind::kPurify;
      t.iterations = e.iterations;
      t.children.push_back(rebuild(a, b, e.left_k));
      break;
    case Via::kSwap:
      t.kind = TreeKind::kSwap;
      t.via = e.via;
      t.children.push_back(rebuild(a, e.via, e.left_k));
      t.children.push_back(rebuild(e.via, b, e.right_k));
      break;
    case Via::kNone:
      throw Error(ErrorCode::kInvariantViolation, "rebuild of an unreached state");
  }
  return t;
}

std::optional<OperationTree> solve_edp(const QuantumNetwork& net, NodeIndex s,
                                       NodeIndex d, double f_min,
                                       const FidelityGrid& grid,
                                       const OperationParams& params) {
  if (s < 0 || d < 0 || s >= net.node_count() || d >= net.node_count()) {
    throw Error(ErrorCode::kInvalidDemand, "demand endpoint is not a node");
  }
  if (s == d) throw Error(ErrorCode::kInvalidDemand, "source equals destination");
  if (f_min < grid.min() - DiscreteGrid::kSnap || f_min > grid.max() + DiscreteGrid::kSnap) {
    throw Error(ErrorCode::kInvalidDemand, "fidelity threshold outside the grid range");
  }
  const std::size_t k_min = *grid.ceil_index(f_min);
  auto table = EdpTable::build(net, grid, params, EdpTable::Target{s, d, k_min});
  auto tree = table.tree(s, d, grid[k_min]);
  if (tree && tree->a != s) return flip_tree(std::move(*tree));
  return tree;
}

}  // namespace entroute

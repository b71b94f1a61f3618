#include <cmath>
#include <queue>
#include <tuple>

#include "entroute/edp.hpp"
#include "entroute/entmath.hpp"
#include "entroute/error.hpp"

namespace entroute {

long quantity_swap_yield(long left, long right, double p_s) {
  return static_cast<long>(std::floor(p_s * static_cast<double>(std::min(left, right)) + 1e-9));
}

long quantity_purify_yield(long count, double fidelity, int iterations) {
  const auto seq = entmath::iterated_purify(fidelity, iterations);
  double p = 1.0;
  for (int j = 1; j <= iterations; ++j) p *= seq[j].success_prob;
  const long groups = count / (iterations + 1);
  return static_cast<long>(std::floor(p * static_cast<double>(groups) + 1e-9));
}

namespace {

enum class How : std::uint8_t { kNone, kLeaf, kSwap, kPurify };

struct Entry {
  long count = 0;
  int nodes = 0;
  How how = How::kNone;
  NodeIndex via = -1;
  std::uint32_t left_k = 0;
  std::uint32_t right_k = 0;
  int iterations = 0;
  bool final = false;
};

struct Item {
  long count;
  int nodes;
  NodeIndex via;
  std::size_t state;
  // Max-heap on count; ties prefer fewer nodes, then smaller via.
  bool operator<(const Item& o) const {
    return std::tie(count, o.nodes, o.via, o.state) <
           std::tie(o.count, nodes, via, state);
  }
};

struct Table {
  int n;
  std::size_t G;
  std::vector<Entry> e;
  std::size_t id(NodeIndex u, NodeIndex v, std::size_t k) const {
    if (u > v) std::swap(u, v);
    return (static_cast<std::size_t>(u) * n + v) * G + k;
  }
};

OperationTree rebuild(const Table& t, const FidelityGrid& grid, NodeIndex a,
                      NodeIndex b, std::size_t k) {
  if (a > b) return flip_tree(rebuild(t, grid, b, a, k));
  const Entry& e = t.e[t.id(a, b, k)];
  OperationTree out;
  out.a = a;
  out.b = b;
  out.fidelity = grid[k];
  out.count = e.count;
  out.rate = static_cast<double>(e.count);
  out.latency = 1.0 / static_cast<double>(e.count);
  switch (e.how) {
    case How::kLeaf:
      out.kind = TreeKind::kLeaf;
      break;
    case How::kPurify:
      out.kind = TreeKind::kPurify;
      out.iterations = e.iterations;
      out.children.push_back(rebuild(t, grid, a, b, e.left_k));
      break;
    case How::kSwap:
      out.kind = TreeKind::kSwap;
      out.via = e.via;
      out.children.push_back(rebuild(t, grid, a, e.via, e.left_k));
      out.children.push_back(rebuild(t, grid, e.via, b, e.right_k));
      break;
    case How::kNone:
      throw Error(ErrorCode::kInvariantViolation, "rebuild of an unreached state");
  }
  return out;
}

}  // namespace

std::optional<OperationTree> solve_edp_quantity(const QuantumNetwork& net,
                                                NodeIndex s, NodeIndex d,
                                                double f_min,
                                                const FidelityGrid& grid,
                                                const OperationParams& params) {
  params.validate();
  if (s < 0 || d < 0 || s >= net.node_count() || d >= net.node_count()) {
    throw Error(ErrorCode::kInvalidDemand, "demand endpoint is not a node");
  }
  if (s == d) throw Error(ErrorCode::kInvalidDemand, "source equals destination");
  if (f_min < grid.min() - DiscreteGrid::kSnap || f_min > grid.max() + DiscreteGrid::kSnap) {
    throw Error(ErrorCode::kInvalidDemand, "fidelity threshold outside the grid range");
  }
  const std::size_t k_min = *grid.ceil_index(f_min);

  Table t{net.node_count(), grid.size(), {}};
  t.e.assign(static_cast<std::size_t>(t.n) * t.n * t.G, Entry{});
  std::priority_queue<Item> queue;

  auto relax = [&](NodeIndex a, NodeIndex b, std::size_t k, const Entry& how) {
    if (how.count <= 0) return;
    Entry& e = t.e[t.id(a, b, k)];
    if (e.final) return;
    if (how.count < e.count) return;
    if (how.count == e.count &&
        std::tie(how.nodes, how.via) >= std::tie(e.nodes, e.via)) {
      return;
    }
    e = how;
    queue.push({how.count, how.nodes, how.via, t.id(a, b, k)});
  };

  for (const auto& link : net.links()) {
    if (link.rate != std::floor(link.rate) || link.rate < 1.0) {
      throw Error(ErrorCode::kDomainError,
                  "quantity mode needs positive integer link counts");
    }
    auto k = grid.floor_index(link.fidelity);
    if (!k) continue;
    Entry how;
    how.count = static_cast<long>(link.rate);
    how.nodes = 1;
    how.how = How::kLeaf;
    relax(link.a, link.b, *k, how);
  }

  struct Incident {
    NodeIndex other;
    std::uint32_t k;
  };
  std::vector<std::vector<Incident>> incident(t.n);
  std::vector<int> best_final_k(static_cast<std::size_t>(t.n) * t.n, -1);
  std::optional<std::size_t> answer;

  while (!queue.empty()) {
    const Item item = queue.top();
    queue.pop();
    Entry& e = t.e[item.state];
    if (e.final || e.count != item.count || e.nodes != item.nodes || e.via != item.via) {
      continue;
    }
    e.final = true;
    const std::size_t k = item.state % t.G;
    const std::size_t pair = item.state / t.G;
    const NodeIndex a = static_cast<NodeIndex>(pair / t.n);
    const NodeIndex b = static_cast<NodeIndex>(pair % t.n);
    if (((a == s && b == d) || (a == d && b == s)) && k >= k_min) {
      answer = k;
      break;
    }
    int& best_k = best_final_k[pair];
    if (static_cast<int>(k) <= best_k) continue;
    best_k = static_cast<int>(k);

    const double f = grid[k];
    if (f > 0.5) {
      for (int i = 1; i <= params.i_max; ++i) {
        const auto pr = purify_step_result(f, 1.0 / static_cast<double>(e.count), i, params);
        auto kp = grid.floor_index(pr.fidelity);
        if (!kp || *kp <= k) continue;
        Entry how;
        how.count = quantity_purify_yield(e.count, f, i);
        how.nodes = e.nodes + 1;
        how.how = How::kPurify;
        how.left_k = static_cast<std::uint32_t>(k);
        how.iterations = i;
        relax(a, b, *kp, how);
      }
    }
    for (const auto& [here, there] : {std::pair{a, b}, std::pair{b, a}}) {
      for (const Incident& inc : incident[here]) {
        if (inc.other == there) continue;
        const Entry& o = t.e[t.id(here, inc.other, inc.k)];
        auto ks = grid.floor_index(entmath::swap_fidelity(f, grid[inc.k]));
        if (!ks) continue;
        const NodeIndex x = std::min(there, inc.other);
        const NodeIndex y = std::max(there, inc.other);
        Entry how;
        how.count = quantity_swap_yield(e.count, o.count, params.p_s);
        how.nodes = e.nodes + o.nodes + 1;
        how.how = How::kSwap;
        how.via = here;
        const auto k_there = static_cast<std::uint32_t>(k);
        how.left_k = x == there ? k_there : inc.k;
        how.right_k = x == there ? inc.k : k_there;
        relax(x, y, *ks, how);
      }
    }
    incident[a].push_back({b, static_cast<std::uint32_t>(k)});
    incident[b].push_back({a, static_cast<std::uint32_t>(k)});
  }

  if (!answer) return std::nullopt;
  return rebuild(t, grid, s, d, *answer);
}

}  // namespace entroute

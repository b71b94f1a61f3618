#include "entroute/brute_force.hpp"

#include <algorithm>
#include <functional>
#include <limits>

#include "entroute/entmath.hpp"
#include "entroute/error.hpp"

namespace entroute {

namespace {

struct Candidate {
  double fidelity;
  double latency;
  OperationTree tree;
};

// Both operations are monotone in their operands (higher fidelity and lower
// latency in give higher fidelity and lower latency out), so only the Pareto
// front over (fidelity, latency) needs to be kept per interval.
constexpr std::size_t kCandidateBudget = 2'000'000;

void prune(std::vector<Candidate>& c) {
  std::sort(c.begin(), c.end(), [](const Candidate& x, const Candidate& y) {
    if (x.latency != y.latency) return x.latency < y.latency;
    if (x.fidelity != y.fidelity) return x.fidelity > y.fidelity;
    return x.tree.node_count() < y.tree.node_count();
  });
  std::vector<Candidate> front;
  double best_f = -1.0;
  for (auto& x : c) {
    if (x.fidelity > best_f) {
      best_f = x.fidelity;
      front.push_back(std::move(x));
    }
  }
  c = std::move(front);
}

class Search {
 public:
  Search(const FidelityGrid& grid, const OperationParams& params, OracleLimits limits,
         OracleMode mode, double latency_bound)
      : grid_(grid), params_(params), limits_(limits), mode_(mode), bound_(latency_bound) {}

  // Candidates for (path[0], path.back()) over the given path.
  std::vector<Candidate> solve_path(const QuantumNetwork& net,
                                    const std::vector<NodeIndex>& path) const {
    const int L = static_cast<int>(path.size()) - 1;
    std::vector<std::vector<std::vector<Candidate>>> cand(
        L + 1, std::vector<std::vector<Candidate>>(L + 1));
    for (int i = 0; i < L; ++i) {
      const Link* link = net.link_between(path[i], path[i + 1]);
      auto f = adjust(link->fidelity);
      if (!f || 1.0 / link->rate > bound_) continue;
      OperationTree t;
      t.kind = TreeKind::kLeaf;
      t.a = path[i];
      t.b = path[i + 1];
      t.fidelity = *f;
      t.latency = 1.0 / link->rate;
      t.rate = link->rate;
      std::vector<Candidate> base{{*f, t.latency, t}};
      cand[i][i + 1] = with_purification(std::move(base));
    }
    for (int len = 2; len <= L; ++len) {
      for (int i = 0; i + len <= L; ++i) {
        const int j = i + len;
        std::vector<Candidate> out;
        for (int m = i + 1; m < j; ++m) {
          for (const auto& x : cand[i][m]) {
            for (const auto& y : cand[m][j]) {
              auto f = adjust(entmath::swap_fidelity(x.fidelity, y.fidelity));
              const double l = entmath::swap_latency(x.latency, y.latency, params_);
              if (!f || l > bound_) continue;
              OperationTree t;
              t.kind = TreeKind::kSwap;
              t.a = path[i];
              t.b = path[j];
              t.via = path[m];
              t.fidelity = *f;
              t.latency = l;
              t.rate = 1.0 / t.latency;
              t.children = {x.tree, y.tree};
              out.push_back({*f, t.latency, std::move(t)});
            }
          }
        }
        spend(out.size());
        prune(out);
        cand[i][j] = with_purification(std::move(out));
      }
    }
    return cand[0][L];
  }

 private:
  void spend(std::size_t n) const {
    spent_ += n;
    if (spent_ > kCandidateBudget) {
      throw Error(ErrorCode::kSearchBudgetExceeded, "oracle candidate budget exhausted");
    }
  }

  std::optional<double> adjust(double f) const {
    if (mode_ == OracleMode::kExact) return f;
    return grid_.floor(f);
  }

  std::vector<Candidate> with_purification(std::vector<Candidate> base) const {
    std::vector<Candidate> all = base;
    std::vector<Candidate> layer = std::move(base);
    for (int depth = 0; depth < limits_.max_purify_per_node; ++depth) {
      std::vector<Candidate> next;
      for (const auto& c : layer) {
        if (!(c.fidelity > 0.5)) continue;
        for (int i = 1; i <= params_.i_max; ++i) {
          auto pr = purify_step_result(c.fidelity, c.latency, i, params_);
          auto f = adjust(pr.fidelity);
          if (!f || pr.latency > bound_) continue;
          OperationTree t;
          t.kind = TreeKind::kPurify;
          t.a = c.tree.a;
          t.b = c.tree.b;
          t.iterations = i;
          t.fidelity = *f;
          t.latency = pr.latency;
          t.rate = 1.0 / pr.latency;
          t.children = {c.tree};
          next.push_back({*f, pr.latency, std::move(t)});
        }
      }
      spend(next.size());
      prune(next);
      all.insert(all.end(), next.begin(), next.end());
      layer = std::move(next);
    }
    prune(all);
    return all;
  }

  const FidelityGrid& grid_;
  const OperationParams& params_;
  OracleLimits limits_;
  OracleMode mode_;
  mutable std::size_t spent_ = 0;
  double bound_;  // candidates slower than this cannot be part of the answer
};

}  // namespace

std::optional<OperationTree> brute_force_edp(const QuantumNetwork& net, NodeIndex s,
                                             NodeIndex d, double f_min,
                                             const FidelityGrid& grid,
                                             const OperationParams& params,
                                             OracleLimits limits, OracleMode mode) {
  params.validate();
  if (limits.max_leaves > 8 || limits.max_leaves < 1 || limits.max_purify_per_node > 8 ||
      limits.max_purify_per_node < 0) {
    throw Error(ErrorCode::kSearchBudgetExceeded,
                "oracle limits exceed the enumeration bound (max_leaves <= 8, "
                "max_purify_per_node <= 8)");
  }
  if (s < 0 || d < 0 || s >= net.node_count() || d >= net.node_count() || s == d) {
    throw Error(ErrorCode::kInvalidDemand, "invalid demand endpoints");
  }
  if (f_min < grid.min() - DiscreteGrid::kSnap || f_min > grid.max() + DiscreteGrid::kSnap) {
    throw Error(ErrorCode::kInvalidDemand, "fidelity threshold outside the grid range");
  }
  const std::size_t k_min = *grid.ceil_index(f_min);

  // Latency only grows towards the root, so any achievable latency bounds
  // every subtree of the optimum. The floored search is cheap (fidelities
  // live on the grid) and its answer is achievable without flooring too.
  double bound = std::numeric_limits<double>::infinity();
  if (mode == OracleMode::kExact) {
    if (auto ub = brute_force_edp(net, s, d, f_min, grid, params, limits, OracleMode::kFloored)) {
      bound = ub->latency * (1.0 + 1e-12);
    }
  }
  Search search(grid, params, limits, mode, bound);

  std::optional<Candidate> best;
  std::vector<NodeIndex> path{s};
  std::vector<char> on_path(net.node_count(), 0);
  on_path[s] = 1;
  std::function<void()> dfs = [&] {
    const NodeIndex u = path.back();
    if (u == d) {
      for (auto& c : search.solve_path(net, path)) {
        auto k = grid.floor_index(c.fidelity);
        if (!k || *k < k_min) continue;
        if (!best || c.latency < best->latency ||
            (c.latency == best->latency &&
             c.tree.node_count() < best->tree.node_count())) {
          best = std::move(c);
        }
      }
      return;
    }
    if (static_cast<int>(path.size()) - 1 >= limits.max_leaves) return;
    for (NodeIndex v : net.neighbors(u)) {
      if (on_path[v]) continue;
      on_path[v] = 1;
      path.push_back(v);
      dfs();
      path.pop_back();
      on_path[v] = 0;
    }
  };
  dfs();
  if (!best) return std::nullopt;
  return best->tree;
}

}  // namespace entroute

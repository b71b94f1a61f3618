#include "entroute/gedp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "entroute/entmath.hpp"
#include "entroute/error.hpp"

namespace entroute {

namespace {

// Multiplier applied to an arc's flow at its head vertex.
double head_factor(const Hypergraph& hg, const HArc& arc, const OperationParams& params) {
  const auto& vx = hg.vertices();
  const auto& grid = hg.grid();
  switch (arc.family) {
    case ArcFamily::kSwap:
      return 2.0 / 3.0 * params.p_s;
    case ArcFamily::kSelfPurify: {
      const double f = grid[vx[arc.tails[0]].f];
      return 0.5 * entmath::ep_purify(f, f).success_prob;
    }
    case ArcFamily::kPurifyDistinct: {
      const double hi = grid[vx[arc.tails[0]].f];
      const double lo = grid[vx[arc.tails[1]].f];
      return 2.0 / 3.0 * entmath::ep_purify(hi, lo).success_prob;
    }
    default:
      return 1.0;
  }
}

bool is_purify(ArcFamily f) {
  return f == ArcFamily::kSelfPurify || f == ArcFamily::kPurifyDistinct;
}

}  // namespace

GedpLp build_lp(const Hypergraph& hg, const OperationParams& params, GedpMode mode) {
  params.validate();
  const auto& vx = hg.vertices();
  const auto& arcs = hg.arcs();

  std::set<std::pair<NodeIndex, NodeIndex>> demanded;
  for (const auto& a : arcs) {
    if (a.family == ArcFamily::kTerm) {
      const HVertex& t = vx[a.tails[0]];
      demanded.emplace(t.u, t.v);
    }
  }

  GedpLp lp;
  lp.var_of_arc.assign(arcs.size(), -1);
  for (int a = 0; a < static_cast<int>(arcs.size()); ++a) {
    const HArc& arc = arcs[a];
    if (mode == GedpMode::kNaive && is_purify(arc.family)) {
      const HVertex& h = vx[arc.head];
      if (!demanded.count({h.u, h.v})) continue;
    }
    const double obj = arc.family == ArcFamily::kTerm ? 1.0 : 0.0;
    const double ub = arc.family == ArcFamily::kStart
                          ? arc.capacity
                          : std::numeric_limits<double>::infinity();
    lp.var_of_arc[a] = lp.model.add_variable(hg.arc_name(a), obj, ub);
    lp.arc_of_var.push_back(a);
  }

  std::vector<std::vector<LpTerm>> rows(vx.size());
  for (int a = 0; a < static_cast<int>(arcs.size()); ++a) {
    const int var = lp.var_of_arc[a];
    if (var < 0) continue;
    const HArc& arc = arcs[a];
    rows[arc.head].push_back({var, head_factor(hg, arc, params)});
    for (int t : arc.tails) rows[t].push_back({var, -1.0});
  }
  for (int v = 0; v < static_cast<int>(vx.size()); ++v) {
    if (v == hg.start() || v == hg.term() || rows[v].empty()) continue;
    lp.model.add_constraint("c_" + hg.vertex_name(v), std::move(rows[v]), Sense::kGe, 0.0);
  }
  return lp;
}

std::vector<double> arc_rates(const GedpLp& lp, const LpSolution& solution) {
  std::vector<double> rates(lp.var_of_arc.size(), 0.0);
  for (std::size_t a = 0; a < rates.size(); ++a) {
    const int var = lp.var_of_arc[a];
    if (var >= 0) rates[a] = std::max(0.0, solution.values[var]);
  }
  return rates;
}

LevelStructure extract_levels(const Hypergraph& hg, const OperationParams& params,
                              const std::vector<double>& rates,
                              std::size_t demand_count) {
  constexpr double kDrop = 1e-9;
  const auto& vx = hg.vertices();
  const auto& arcs = hg.arcs();
  const int V = static_cast<int>(vx.size());
  const int A = static_cast<int>(arcs.size());

  std::vector<char> kept(A, 0);
  for (int a = 0; a < A; ++a) kept[a] = rates[a] >= kDrop;

  // Flow that never reaches term is idle capacity the LP was free to leave
  // anywhere; it is not part of the structure.
  {
    std::vector<std::vector<int>> into(V);
    for (int a = 0; a < A; ++a) {
      if (kept[a]) into[arcs[a].head].push_back(a);
    }
    std::vector<char> useful(V, 0);
    std::vector<int> stack{hg.term()};
    useful[hg.term()] = 1;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (int a : into[v]) {
        for (int t : arcs[a].tails) {
          if (!useful[t]) {
            useful[t] = 1;
            stack.push_back(t);
          }
        }
      }
    }
    for (int a = 0; a < A; ++a) kept[a] = kept[a] && useful[arcs[a].head];
  }

  std::vector<std::vector<int>> out(V);
  std::vector<int> indeg(V, 0);
  std::vector<char> touched(V, 0);
  double largest = 1.0;
  for (int a = 0; a < A; ++a) {
    if (!kept[a]) continue;
    largest = std::max(largest, rates[a]);
    touched[arcs[a].head] = 1;
    for (int t : arcs[a].tails) {
      out[t].push_back(a);
      ++indeg[arcs[a].head];
      touched[t] = 1;
    }
  }
  std::vector<int> depth(V, 0);
  std::vector<int> ready;
  for (int v = 0; v < V; ++v) {
    if (touched[v] && indeg[v] == 0) ready.push_back(v);
  }
  int seen = 0;
  while (!ready.empty()) {
    const int v = ready.back();
    ready.pop_back();
    ++seen;
    for (int a : out[v]) {
      const int h = arcs[a].head;
      depth[h] = std::max(depth[h], depth[v] + 1);
      if (--indeg[h] == 0) ready.push_back(h);
    }
  }
  const int touched_count = static_cast<int>(std::count(touched.begin(), touched.end(), 1));
  if (seen != touched_count) {
    throw Error(ErrorCode::kCyclicFlow, "retained flow contains a cycle");
  }

  LevelStructure levels;
  std::vector<double> balance(V, 0.0);
  for (int a = 0; a < A; ++a) {
    if (!kept[a]) continue;
    balance[arcs[a].head] += head_factor(hg, arcs[a], params) * rates[a];
    for (int t : arcs[a].tails) balance[t] -= rates[a];
  }
  for (int v = 0; v < V; ++v) {
    if (!touched[v] || v == hg.start() || v == hg.term()) continue;
    levels.max_residual = std::max(levels.max_residual, -balance[v]);
  }
  if (levels.max_residual > 1e-6 * largest) {
    throw Error(ErrorCode::kInvariantViolation,
                "flow consumes more than it produces at some vertex");
  }

  std::map<int, std::vector<LevelOp>> by_depth;
  levels.delivered.assign(demand_count, 0.0);
  const auto& grid = hg.grid();
  for (int a = 0; a < A; ++a) {
    if (!kept[a] || arcs[a].family == ArcFamily::kRelay) continue;
    const HArc& arc = arcs[a];
    const HVertex& pair = arc.family == ArcFamily::kTerm ? vx[arc.tails[0]] : vx[arc.head];
    LevelOp op{a, arc.family, pair.u, pair.v, arc.via, grid[pair.f], {}, rates[a]};
    if (arc.family != ArcFamily::kStart) {
      for (int t : arc.tails) op.operand_fidelities.push_back(grid[vx[t].f]);
    }
    if (arc.family == ArcFamily::kTerm && arc.demand >= 0 &&
        static_cast<std::size_t>(arc.demand) < demand_count) {
      levels.delivered[arc.demand] += rates[a];
    }
    by_depth[depth[arc.head]].push_back(std::move(op));
  }
  for (auto& [d, ops] : by_depth) levels.layers.push_back(std::move(ops));
  return levels;
}

nlohmann::json levels_to_json(const LevelStructure& levels, const QuantumNetwork& net) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& layer : levels.layers) {
    nlohmann::json ops = nlohmann::json::array();
    for (const auto& op : layer) {
      nlohmann::json j;
      j["kind"] = std::string(to_string(op.family));
      j["pair"] = {net.node_id(op.u), net.node_id(op.v)};
      if (op.via >= 0) j["via"] = net.node_id(op.via);
      j["fidelity"] = op.fidelity;
      j["operands"] = op.operand_fidelities;
      j["rate"] = op.rate;
      ops.push_back(std::move(j));
    }
    layers.push_back(std::move(ops));
  }
  return {{"layers", layers}, {"delivered", levels.delivered}};
}

GedpResult solve_gedp(const QuantumNetwork& net, const DemandSet& demands,
                      const FidelityGrid& grid, const OperationParams& params,
                      GedpMode mode) {
  const Hypergraph hg = build_hypergraph(net, demands, grid);
  const GedpLp lp = build_lp(hg, params, mode);
  const LpSolution sol = solve_lp(lp.model);
  const auto rates = arc_rates(lp, sol);

  GedpResult r;
  r.objective = sol.objective;
  r.levels = extract_levels(hg, params, rates, demands.pairs.size());
  r.delivered = r.levels.delivered;
  r.vertex_count = hg.vertices().size();
  r.arc_count = hg.arcs().size();
  r.lp_variables = lp.model.num_vars();
  r.lp_rows = lp.model.num_rows();
  r.iterations = sol.iterations;
  return r;
}

double gedp_rate(const QuantumNetwork& net, NodeIndex s, NodeIndex d, double threshold,
                 const FidelityGrid& grid, const OperationParams& params, GedpMode mode) {
  DemandSet demands;
  demands.pairs.push_back({s, d, threshold});
  const Hypergraph hg = build_hypergraph(net, demands, grid);
  const GedpLp lp = build_lp(hg, params, mode);
  return solve_lp(lp.model).objective;
}

FidelitySearch max_fidelity_under_rate(const QuantumNetwork& net, NodeIndex s,
                                       NodeIndex d, double r_min,
                                       const FidelityGrid& grid,
                                       const OperationParams& params, int iterations,
                                       GedpMode mode) {
  if (!(r_min > 0.0)) throw Error(ErrorCode::kDomainError, "r_min must be positive");
  const int G = static_cast<int>(grid.size());
  if (iterations <= 0) {
    const int exact = static_cast<int>(std::ceil(std::log2(static_cast<double>(G) + 1.0))) + 1;
    iterations = std::max(8, exact);
  }
  // Indices <= lo meet r_min, indices >= hi do not.
  int lo = -1;
  int hi = G;
  auto first = grid.ceil_index(0.75);
  int probe = first ? static_cast<int>(*first) : G / 2;
  FidelitySearch out;
  for (int n = 0; n < iterations && hi - lo > 1; ++n) {
    const double rate = gedp_rate(net, s, d, grid[probe], grid, params, mode);
    out.probes.emplace_back(grid[probe], rate);
    if (rate >= r_min * (1.0 - 1e-9)) {
      lo = probe;
    } else {
      hi = probe;
    }
    probe = lo + (hi - lo) / 2;
  }
  if (lo >= 0) out.fidelity = grid[lo];
  return out;
}

}  // namespace entroute

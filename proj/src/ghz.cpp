#include "entroute/ghz.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "entroute/edp.hpp"
#include "entroute/error.hpp"
#include "entroute/gedp.hpp"

namespace entroute {

std::vector<NodeIndex> VirtualStar::terminals() const {
  std::vector<NodeIndex> t{center};
  for (const auto& e : edges) t.push_back(e.leaf);
  return t;
}

int VirtualStar::edge_of(NodeIndex leaf) const {
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (edges[i].leaf == leaf) return static_cast<int>(i);
  }
  return -1;
}

void VirtualStar::validate() const {
  if (edges.empty()) throw Error(ErrorCode::kInvariantViolation, "star has no edges");
  std::set<NodeIndex> seen{center};
  for (const auto& e : edges) {
    if (!seen.insert(e.leaf).second) {
      throw Error(ErrorCode::kInvariantViolation,
                  "star leaves must be distinct from each other and the center");
    }
    if (!(e.rate > 0.0) || !std::isfinite(e.rate)) {
      throw Error(ErrorCode::kInvariantViolation, "star edge rate must be positive");
    }
    if (!(e.fidelity > 0.25 && e.fidelity <= 1.0)) {
      throw Error(ErrorCode::kInvariantViolation, "star edge fidelity must lie in (0.25, 1]");
    }
  }
}

namespace {

struct EdgeFailure {
  NodeIndex leaf;
};

VirtualStar star_by_dp(const QuantumNetwork& net, NodeIndex center,
                       const std::vector<NodeIndex>& leaves, double f_edge,
                       const FidelityGrid& grid, const OperationParams& params) {
  VirtualStar star{center, {}};
  for (NodeIndex leaf : leaves) {
    auto tree = solve_edp(net, center, leaf, f_edge, grid, params);
    if (!tree || !(tree->rate > 0.0)) throw EdgeFailure{leaf};
    star.edges.push_back({leaf, tree->rate, tree->fidelity});
  }
  return star;
}

VirtualStar star_by_lp(const QuantumNetwork& net, NodeIndex center,
                       const std::vector<NodeIndex>& leaves, double f_edge,
                       const FidelityGrid& grid, const OperationParams& params) {
  const auto thr = grid.ceil_index(f_edge);
  if (!thr) throw EdgeFailure{leaves.front()};
  DemandSet demands;
  for (NodeIndex leaf : leaves) demands.pairs.push_back({center, leaf, grid[*thr]});
  const Hypergraph hg = build_hypergraph(net, demands, grid);
  GedpLp lp = build_lp(hg, params);

  // Max-min over the edges instead of the summed rate.
  std::fill(lp.model.objective.begin(), lp.model.objective.end(), 0.0);
  const int t = lp.model.add_variable("z_min_edge", 1.0);
  std::vector<std::vector<LpTerm>> rows(leaves.size());
  for (int a = 0; a < static_cast<int>(hg.arcs().size()); ++a) {
    const HArc& arc = hg.arcs()[a];
    if (arc.family == ArcFamily::kTerm && lp.var_of_arc[a] >= 0) {
      rows[arc.demand].push_back({lp.var_of_arc[a], 1.0});
    }
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].push_back({t, -1.0});
    lp.model.add_constraint("c_edge_" + std::to_string(i), std::move(rows[i]), Sense::kGe, 0.0);
  }
  const LpSolution first = solve_lp(lp.model);
  const double worst = first.values[t];
  if (worst <= 1e-9) {
    for (NodeIndex leaf : leaves) {
      if (gedp_rate(net, center, leaf, grid[*thr], grid, params) <= 1e-9) throw EdgeFailure{leaf};
    }
    throw EdgeFailure{leaves.front()};
  }
  // Then the largest total with the minimum held.
  lp.model.objective[t] = 0.0;
  for (int a = 0; a < static_cast<int>(hg.arcs().size()); ++a) {
    if (hg.arcs()[a].family == ArcFamily::kTerm && lp.var_of_arc[a] >= 0) {
      lp.model.objective[lp.var_of_arc[a]] = 1.0;
    }
  }
  lp.model.add_constraint("c_edge_floor", {{t, 1.0}}, Sense::kGe, worst * (1.0 - 1e-9));
  const LpSolution sol = solve_lp(lp.model);
  const auto rates = arc_rates(lp, sol);
  std::vector<double> delivered(leaves.size(), 0.0);
  for (int a = 0; a < static_cast<int>(hg.arcs().size()); ++a) {
    const HArc& arc = hg.arcs()[a];
    if (arc.family == ArcFamily::kTerm) delivered[arc.demand] += rates[a];
  }
  VirtualStar star{center, {}};
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    star.edges.push_back({leaves[i], delivered[i], grid[*thr]});
  }
  return star;
}

double min_rate(const VirtualStar& s) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& e : s.edges) m = std::min(m, e.rate);
  return m;
}

}  // namespace

VirtualStar stage1_virtual_star(const QuantumNetwork& net,
                                const std::vector<NodeIndex>& terminals, double f_edge,
                                const FidelityGrid& grid, const OperationParams& params,
                                Stage1Method method, std::optional<NodeIndex> center) {
  params.validate();
  if (terminals.size() < 3) {
    throw Error(ErrorCode::kInvalidDemand, "a GHZ star needs at least 3 terminals");
  }
  std::set<NodeIndex> distinct;
  for (NodeIndex t : terminals) {
    if (t < 0 || t >= net.node_count()) {
      throw Error(ErrorCode::kInvalidDemand, "GHZ terminal is not a node");
    }
    distinct.insert(t);
  }
  if (distinct.size() != terminals.size()) {
    throw Error(ErrorCode::kInvalidDemand, "GHZ terminals must be distinct");
  }
  if (center && !distinct.count(*center)) {
    throw Error(ErrorCode::kInvalidDemand, "star center must be a terminal");
  }

  std::vector<NodeIndex> candidates;
  if (center) {
    candidates.push_back(*center);
  } else {
    candidates.assign(terminals.begin(), terminals.end());
    std::sort(candidates.begin(), candidates.end(), [&](NodeIndex a, NodeIndex b) {
      return net.node_id(a) < net.node_id(b);
    });
  }

  std::optional<VirtualStar> best;
  std::optional<NodeIndex> failed;
  for (NodeIndex c : candidates) {
    std::vector<NodeIndex> leaves;
    for (NodeIndex t : terminals) {
      if (t != c) leaves.push_back(t);
    }
    try {
      VirtualStar s = method == Stage1Method::kDp
                          ? star_by_dp(net, c, leaves, f_edge, grid, params)
                          : star_by_lp(net, c, leaves, f_edge, grid, params);
      if (!best || min_rate(s) > min_rate(*best)) best = std::move(s);
    } catch (const EdgeFailure& f) {
      if (!failed) failed = f.leaf;
    }
  }
  if (!best) {
    throw Error(ErrorCode::kInfeasibleEdge,
                "no EP route at the edge fidelity reaches terminal '" +
                    net.node_id(*failed) + "'");
  }
  best->validate();
  return *best;
}

std::string_view to_string(FusionKind kind) {
  switch (kind) {
    case FusionKind::kLeaf: return "leaf";
    case FusionKind::kFuse: return "fuse";
    case FusionKind::kSelfPurify: return "self_purify";
    case FusionKind::kSubsetPurify: return "subset_purify";
  }
  return "?";
}

int FusionTree::node_count() const {
  int n = 1;
  for (const auto& c : children) n += c.node_count();
  return n;
}

nlohmann::json fusion_tree_to_json(const FusionTree& t, const std::vector<std::string>& names) {
  nlohmann::json j;
  j["kind"] = std::string(to_string(t.kind));
  nlohmann::json subset = nlohmann::json::array();
  for (NodeIndex v : t.subset) subset.push_back(names.at(v));
  j["subset"] = std::move(subset);
  j["fidelity"] = t.fidelity;
  j["rate"] = t.rate;
  if (!t.children.empty()) {
    nlohmann::json kids = nlohmann::json::array();
    for (const auto& c : t.children) kids.push_back(fusion_tree_to_json(c, names));
    j["children"] = std::move(kids);
  }
  return j;
}

FusionTree fusion_tree_from_json(const nlohmann::json& j, std::vector<std::string>& names) {
  if (!j.is_object()) throw Error(ErrorCode::kParseError, "fusion tree node must be an object");
  FusionTree t;
  try {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "leaf") t.kind = FusionKind::kLeaf;
    else if (kind == "fuse") t.kind = FusionKind::kFuse;
    else if (kind == "self_purify") t.kind = FusionKind::kSelfPurify;
    else if (kind == "subset_purify") t.kind = FusionKind::kSubsetPurify;
    else throw Error(ErrorCode::kParseError, "unknown fusion node kind '" + kind + "'");
    for (const auto& v : j.at("subset")) {
      const auto id = v.get<std::string>();
      auto it = std::find(names.begin(), names.end(), id);
      if (it == names.end()) {
        names.push_back(id);
        it = names.end() - 1;
      }
      t.subset.push_back(static_cast<NodeIndex>(it - names.begin()));
    }
    std::sort(t.subset.begin(), t.subset.end());
    t.fidelity = j.at("fidelity").get<double>();
    t.rate = j.at("rate").get<double>();
    if (j.contains("children")) {
      for (const auto& c : j.at("children")) t.children.push_back(fusion_tree_from_json(c, names));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("malformed fusion tree: ") + e.what());
  }
  return t;
}

namespace {

class FusionChecker {
 public:
  FusionChecker(const VirtualStar& star, const RateGrid& kgrid, const OperationParams& params,
                const entmath::FusionModel& model, double tol)
      : star_(star), kgrid_(kgrid), params_(params), model_(model), tol_(tol),
        consumption_(star.edges.size(), 0.0) {}

  std::pair<double, double> eval(const FusionTree& t, const std::string& path) {
    std::vector<std::pair<double, double>> kids;
    for (std::size_t i = 0; i < t.children.size(); ++i) {
      kids.push_back(eval(t.children[i], path + "/" + std::to_string(i)));
    }
    double f = 0.0;
    double r = 0.0;
    const int n = static_cast<int>(t.subset.size());
    switch (t.kind) {
      case FusionKind::kLeaf: {
        arity(t, 0, path);
        const int e = t.subset.size() == 2 ? leaf_edge(t.subset) : -1;
        if (e < 0) fail(path, "leaf subset is not a star edge");
        f = star_.edges[e].fidelity;
        r = t.rate;
        if (!kgrid_.index_of(r)) fail(path, "leaf rate is not a grid value");
        consumption_[e] += r;
        break;
      }
      case FusionKind::kFuse: {
        arity(t, 2, path);
        const auto& a = t.children[0].subset;
        const auto& b = t.children[1].subset;
        std::vector<NodeIndex> common, joined;
        std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
        std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(joined));
        if (common != std::vector<NodeIndex>{star_.center}) {
          fail(path, "fused subsets must share only the center");
        }
        if (joined != t.subset) fail(path, "fused subset is not the union of its operands");
        same_rate(kids, path);
        f = entmath::fuse_fidelity(kids[0].first, kids[1].first, model_);
        r = floor_rate(2.0 / 3.0 * params_.p_f * kids[0].second, path);
        break;
      }
      case FusionKind::kSelfPurify: {
        arity(t, 1, path);
        if (t.children[0].subset != t.subset) fail(path, "self purification changes the subset");
        const auto o = entmath::ghz_purify(n, n, kids[0].first, kids[0].first);
        f = o.fidelity;
        r = floor_rate(0.5 * o.success_prob * kids[0].second, path);
        break;
      }
      case FusionKind::kSubsetPurify: {
        arity(t, 2, path);
        const auto& target = t.children[0].subset;
        const auto& sac = t.children[1].subset;
        if (target != t.subset) fail(path, "subset purification target changes the subset");
        if (sac.size() < 2 || sac.size() >= target.size() ||
            !std::includes(target.begin(), target.end(), sac.begin(), sac.end())) {
          fail(path, "sacrificial subset must be strictly inside the target");
        }
        same_rate(kids, path);
        const auto o = entmath::ghz_purify(n, static_cast<int>(sac.size()), kids[0].first,
                                           kids[1].first);
        f = o.fidelity;
        r = floor_rate(2.0 / 3.0 * o.success_prob * kids[0].second, path);
        break;
      }
    }
    check(t.fidelity, f, path, "fidelity");
    check(t.rate, r, path, "rate");
    return {f, r};
  }

  std::vector<double> consumption() const { return consumption_; }

 private:
  int leaf_edge(const std::vector<NodeIndex>& s) const {
    if (s[0] == star_.center) return star_.edge_of(s[1]);
    if (s[1] == star_.center) return star_.edge_of(s[0]);
    return -1;
  }

  void arity(const FusionTree& t, std::size_t n, const std::string& path) const {
    if (t.children.size() != n) fail(path, "wrong number of children");
  }

  void same_rate(const std::vector<std::pair<double, double>>& kids, const std::string& path) const {
    if (std::fabs(kids[0].second - kids[1].second) > tol_ * std::max(1.0, kids[0].second)) {
      fail(path, "operands must share one rate");
    }
  }

  double floor_rate(double x, const std::string& path) const {
    auto r = kgrid_.floor(x);
    if (!r) fail(path, "rate falls below the rate grid");
    return *r;
  }

  void check(double stored, double expected, const std::string& path, const char* what) const {
    if (std::fabs(stored - expected) > tol_ * std::max(1.0, std::fabs(expected))) {
      fail(path, std::string(what) + " annotation " + std::to_string(stored) + " != " +
                     std::to_string(expected));
    }
  }

  [[noreturn]] static void fail(const std::string& path, const std::string& what) {
    throw Error(ErrorCode::kAnnotationMismatch, path + ": " + what);
  }

  const VirtualStar& star_;
  const RateGrid& kgrid_;
  const OperationParams& params_;
  const entmath::FusionModel& model_;
  double tol_;
  std::vector<double> consumption_;
};

}  // namespace

FusionEval evaluate_fusion_tree(const FusionTree& tree, const VirtualStar& star,
                                const RateGrid& kgrid, const OperationParams& params,
                                const entmath::FusionModel& model, double tolerance) {
  FusionChecker checker(star, kgrid, params, model, tolerance);
  const auto [f, r] = checker.eval(tree, "root");
  FusionEval out{f, r, checker.consumption()};
  for (std::size_t e = 0; e < star.edges.size(); ++e) {
    if (out.consumption[e] > star.edges[e].rate * (1.0 + tolerance)) {
      throw Error(ErrorCode::kInvariantViolation,
                  "edge " + std::to_string(e) + " consumed beyond its rate");
    }
  }
  return out;
}

std::optional<double> floored_fidelity(const FusionTree& t, const FidelityGrid& grid,
                                       const entmath::FusionModel& model) {
  std::vector<double> kids;
  for (const auto& c : t.children) {
    auto f = floored_fidelity(c, grid, model);
    if (!f) return std::nullopt;
    kids.push_back(*f);
  }
  const int n = static_cast<int>(t.subset.size());
  double f = t.fidelity;
  switch (t.kind) {
    case FusionKind::kLeaf: break;
    case FusionKind::kFuse: f = entmath::fuse_fidelity(kids[0], kids[1], model); break;
    case FusionKind::kSelfPurify: f = entmath::ghz_purify(n, n, kids[0], kids[0]).fidelity; break;
    case FusionKind::kSubsetPurify:
      f = entmath::ghz_purify(n, static_cast<int>(t.children[1].subset.size()), kids[0], kids[1])
              .fidelity;
      break;
  }
  return grid.floor(f);
}

RateGrid rate_grid_for_star(const VirtualStar& star) {
  double top = 0.0;
  std::vector<double> v;
  for (const auto& e : star.edges) {
    top = std::max(top, e.rate);
    v.push_back(e.rate);
  }
  for (int j = 0; j <= 80; ++j) v.push_back(top * std::exp2(-j / 4.0));
  std::sort(v.begin(), v.end());
  std::vector<double> uniq;
  for (double x : v) {
    if (uniq.empty() || x > uniq.back() * (1.0 + 1e-12)) uniq.push_back(x);
  }
  return RateGrid(std::move(uniq));
}

}  // namespace entroute

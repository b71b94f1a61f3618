#include <algorithm>
#include <bit>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <tuple>

#include "entroute/error.hpp"
#include "entroute/ghz.hpp"

namespace entroute {

std::size_t GgdpLp::count(GgdpVertexKind kind) const {
  return static_cast<std::size_t>(std::count(vertex_kinds.begin(), vertex_kinds.end(), kind));
}

namespace {

// Terminal i of the star is bit i (bit 0 is the center).
using Mask = std::uint32_t;

struct GArc {
  ArcFamily family;
  std::vector<int> tails;
  int head;
  double factor = 1.0;
  double capacity = 0.0;
  int demand = -1;
};

class GgdpBuilder {
 public:
  GgdpBuilder(const VirtualStar& star, const std::vector<GhzDemand>& demands,
              const FidelityGrid& grid, const OperationParams& params, const GgdpOptions& opt)
      : star_(star), grid_(grid), params_(params), opt_(opt),
        n_(static_cast<int>(star.edges.size()) + 1) {
    const auto terms = star.terminals();
    for (const auto& d : demands) {
      Mask m = 0;
      for (NodeIndex v : d.terminals) {
        auto it = std::find(terms.begin(), terms.end(), v);
        if (it == terms.end()) {
          throw Error(ErrorCode::kInvalidDemand, "GHZ demand terminal is not in the star");
        }
        m |= Mask{1} << (it - terms.begin());
      }
      if (std::popcount(m) < 2 || std::popcount(m) != static_cast<int>(d.terminals.size())) {
        throw Error(ErrorCode::kInvalidDemand, "GHZ demand needs distinct terminals");
      }
      const auto thr = grid.ceil_index(d.threshold);
      if (!thr) throw Error(ErrorCode::kInvalidDemand, "GHZ threshold above the fidelity grid");
      demand_masks_.push_back(m);
      demand_thr_.push_back(static_cast<int>(*thr));
    }
    names_ = {"start", "term"};
    kinds_ = {GgdpVertexKind::kStart, GgdpVertexKind::kTerm};
  }

  void build() {
    const int G = static_cast<int>(grid_.size());
    if (opt_.scope == HypergraphScope::kFull) {
      for (Mask m = 1; m < (Mask{1} << n_); ++m) {
        if (std::popcount(m) < 2) continue;
        for (int f = 0; f < G; ++f) {
          for (auto k : {GgdpVertexKind::kAvail, GgdpVertexKind::kFuse,
                         GgdpVertexKind::kPurify1, GgdpVertexKind::kPurify2}) {
            vertex(k, m, f);
          }
        }
      }
    }
    for (std::size_t e = 0; e < star_.edges.size(); ++e) {
      const auto f = grid_.floor_index(star_.edges[e].fidelity);
      if (!f) continue;
      const Mask m = 1u | Mask{1} << (e + 1);
      GArc a{ArcFamily::kStart, {0}, reach(m, static_cast<int>(*f))};
      a.capacity = star_.edges[e].rate;
      arcs_.push_back(std::move(a));
    }
    if (opt_.scope == HypergraphScope::kFull) {
      for (Mask m = 1; m < (Mask{1} << n_); ++m) {
        if (std::popcount(m) < 2) continue;
        for (int f = 0; f < G; ++f) reach(m, f);
      }
    }
    while (next_ < avail_.size()) {
      const auto [m, f] = avail_[next_];
      ++next_;
      for (std::size_t i = 0; i < next_; ++i) combine(avail_[i], {m, f});
      for (std::size_t d = 0; d < demand_masks_.size(); ++d) {
        if (demand_masks_[d] == m && f >= demand_thr_[d]) {
          GArc a{ArcFamily::kTerm, {vertex(GgdpVertexKind::kAvail, m, f)}, 1};
          a.demand = static_cast<int>(d);
          arcs_.push_back(std::move(a));
        }
      }
    }
    if (opt_.scope == HypergraphScope::kReachable) prune();
  }

  GgdpLp lp() const {
    GgdpLp out;
    out.vertex_kinds = kinds_;
    out.arc_count = arcs_.size();
    std::vector<std::vector<LpTerm>> rows(kinds_.size());
    for (const auto& a : arcs_) {
      const bool start = a.family == ArcFamily::kStart;
      const int var = out.model.add_variable(
          arc_name(a), a.family == ArcFamily::kTerm ? 1.0 : 0.0,
          start ? a.capacity : std::numeric_limits<double>::infinity());
      out.term_demand.push_back(a.demand);
      rows[a.head].push_back({var, a.factor});
      for (int t : a.tails) rows[t].push_back({var, -1.0});
    }
    for (std::size_t v = 2; v < rows.size(); ++v) {
      if (rows[v].empty()) continue;
      out.model.add_constraint("c_" + names_[v], rows[v], Sense::kGe, 0.0);
    }
    return out;
  }

 private:
  std::string subset_name(Mask m) const {
    std::string s = "s";
    for (int i = 0; i < n_; ++i) {
      if (m >> i & 1u) s += (s.size() > 1 ? "." : "") + std::to_string(i);
    }
    return s;
  }

  int vertex(GgdpVertexKind kind, Mask m, int f) {
    const auto key = std::make_tuple(static_cast<int>(kind), m, f);
    auto it = ids_.find(key);
    if (it != ids_.end()) return it->second;
    static constexpr const char* kNames[] = {"start", "term", "avail", "fuse", "pur1", "pur2"};
    const int id = static_cast<int>(kinds_.size());
    kinds_.push_back(kind);
    names_.push_back(std::string(kNames[static_cast<int>(kind)]) + "_" + subset_name(m) + "_f" +
                     std::to_string(f));
    ids_.emplace(key, id);
    return id;
  }

  // AVAIL vertex for (m, f), queued for combination the first time.
  int reach(Mask m, int f) {
    const int id = vertex(GgdpVertexKind::kAvail, m, f);
    if (queued_.emplace(m, f).second) avail_.emplace_back(m, f);
    return id;
  }

  // Operation vertex feeding AVAIL through one relay arc.
  int op_vertex(GgdpVertexKind kind, Mask m, int f) {
    const auto key = std::make_tuple(static_cast<int>(kind), m, f);
    const bool fresh = !relayed_.count(key);
    const int id = vertex(kind, m, f);
    if (fresh) {
      relayed_.insert(key);
      arcs_.push_back(GArc{ArcFamily::kRelay, {id}, reach(m, f)});
    }
    return id;
  }

  void combine(std::pair<Mask, int> a, std::pair<Mask, int> b) {
    const int ia = vertex(GgdpVertexKind::kAvail, a.first, a.second);
    const int ib = vertex(GgdpVertexKind::kAvail, b.first, b.second);
    if (a == b) {
      const int n = std::popcount(a.first);
      const double f = grid_[a.second];
      const auto o = entmath::ghz_purify(n, n, f, f);
      const auto h = grid_.floor_index(o.fidelity);
      if (h && static_cast<int>(*h) > a.second) {
        arcs_.push_back(GArc{ArcFamily::kSelfPurify, {ia},
                             op_vertex(GgdpVertexKind::kPurify1, a.first, static_cast<int>(*h)),
                             0.5 * o.success_prob});
      }
      return;
    }
    const Mask both = a.first & b.first;
    if (std::popcount(both) == 1) {
      const double f = entmath::fuse_fidelity(grid_[a.second], grid_[b.second], opt_.fusion);
      const auto h = grid_.floor_index(f);
      if (h) {
        arcs_.push_back(GArc{ArcFamily::kSwap, {ia, ib},
                             op_vertex(GgdpVertexKind::kFuse, a.first | b.first,
                                       static_cast<int>(*h)),
                             2.0 / 3.0 * params_.p_f});
      }
      return;
    }
    // Target first, sacrificial second.
    std::pair<Mask, int> t = a, s = b;
    int it = ia, is = ib;
    if (both == a.first && a.first != b.first) {
      std::swap(t, s);
      std::swap(it, is);
    } else if (a.first == b.first) {
      if (a.second < b.second) {
        std::swap(t, s);
        std::swap(it, is);
      }
    } else if (both != b.first) {
      return;
    }
    const auto o = entmath::ghz_purify(std::popcount(t.first), std::popcount(s.first),
                                       grid_[t.second], grid_[s.second]);
    const auto h = grid_.floor_index(o.fidelity);
    if (h && static_cast<int>(*h) > t.second) {
      arcs_.push_back(GArc{ArcFamily::kPurifyDistinct, {it, is},
                           op_vertex(GgdpVertexKind::kPurify2, t.first, static_cast<int>(*h)),
                           2.0 / 3.0 * o.success_prob});
    }
  }

  // Keeps arcs whose head reaches TERM and the vertices they touch.
  void prune() {
    std::vector<std::vector<int>> into(kinds_.size());
    for (int a = 0; a < static_cast<int>(arcs_.size()); ++a) into[arcs_[a].head].push_back(a);
    std::vector<char> useful(kinds_.size(), 0);
    std::vector<int> stack{1};
    useful[1] = 1;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (int a : into[v]) {
        for (int t : arcs_[a].tails) {
          if (!useful[t]) {
            useful[t] = 1;
            stack.push_back(t);
          }
        }
      }
    }
    std::vector<int> remap(kinds_.size(), -1);
    std::vector<GgdpVertexKind> kinds;
    std::vector<std::string> names;
    auto keep = [&](int v) {
      if (remap[v] < 0) {
        remap[v] = static_cast<int>(kinds.size());
        kinds.push_back(kinds_[v]);
        names.push_back(names_[v]);
      }
    };
    keep(0);
    keep(1);
    std::vector<GArc> arcs;
    for (auto& a : arcs_) {
      if (!useful[a.head]) continue;
      for (int& t : a.tails) {
        keep(t);
        t = remap[t];
      }
      keep(a.head);
      a.head = remap[a.head];
      arcs.push_back(std::move(a));
    }
    arcs_ = std::move(arcs);
    kinds_ = std::move(kinds);
    names_ = std::move(names);
  }

  std::string arc_name(const GArc& a) const {
    std::string s = "z_" + std::string(to_string(a.family)) + "_" + names_[a.head];
    if (a.family == ArcFamily::kStart) s = "z_start_" + names_[a.head];
    if (a.family == ArcFamily::kSwap) s = "z_fuse_" + names_[a.head];
    for (int t : a.tails) {
      if (t > 1) s += "_" + names_[t];
    }
    if (a.demand >= 0) s += "_d" + std::to_string(a.demand);
    return s;
  }

  const VirtualStar& star_;
  const FidelityGrid& grid_;
  const OperationParams& params_;
  const GgdpOptions& opt_;
  int n_;
  std::vector<Mask> demand_masks_;
  std::vector<int> demand_thr_;
  std::vector<GgdpVertexKind> kinds_;
  std::vector<std::string> names_;
  std::map<std::tuple<int, Mask, int>, int> ids_;
  std::set<std::tuple<int, Mask, int>> relayed_;
  std::set<std::pair<Mask, int>> queued_;
  std::vector<std::pair<Mask, int>> avail_;
  std::size_t next_ = 0;
  std::vector<GArc> arcs_;
};

}  // namespace

GgdpLp build_ggdp_lp(const VirtualStar& star, const std::vector<GhzDemand>& demands,
                     const FidelityGrid& grid, const OperationParams& params,
                     const GgdpOptions& options) {
  params.validate();
  star.validate();
  if (star.edges.size() + 1 > 10) {
    throw Error(ErrorCode::kStateSpaceExceeded,
                std::to_string(star.edges.size() + 1) + " terminals exceed the GGDP limit of 10");
  }
  GgdpBuilder b(star, demands, grid, params, options);
  b.build();
  return b.lp();
}

GgdpResult solve_ggdp(const VirtualStar& star, const std::vector<GhzDemand>& demands,
                      const FidelityGrid& grid, const OperationParams& params,
                      const GgdpOptions& options) {
  const GgdpLp lp = build_ggdp_lp(star, demands, grid, params, options);
  const LpSolution sol = solve_lp(lp.model);
  GgdpResult r;
  r.objective = sol.objective;
  r.delivered.assign(demands.size(), 0.0);
  for (int v = 0; v < lp.model.num_vars(); ++v) {
    if (lp.term_demand[v] >= 0) r.delivered[lp.term_demand[v]] += sol.values[v];
  }
  r.vertex_count = lp.vertex_kinds.size();
  r.arc_count = lp.arc_count;
  r.lp_variables = lp.model.num_vars();
  r.lp_rows = lp.model.num_rows();
  r.fusion_model = options.fusion.name;
  return r;
}

}  // namespace entroute

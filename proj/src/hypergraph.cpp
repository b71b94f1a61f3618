#include "entroute/hypergraph.hpp"

#include <algorithm>
#include <functional>

#include "entroute/entmath.hpp"
#include "entroute/error.hpp"

namespace entroute {

std::string_view to_string(VertexKind kind) {
  switch (kind) {
    case VertexKind::kStart: return "start";
    case VertexKind::kTerm: return "term";
    case VertexKind::kAvail: return "avail";
    case VertexKind::kSwap: return "swap";
    case VertexKind::kPurify1: return "purify1";
    case VertexKind::kPurify2: return "purify2";
  }
  return "?";
}

std::string_view to_string(ArcFamily family) {
  switch (family) {
    case ArcFamily::kStart: return "start";
    case ArcFamily::kSwap: return "swap";
    case ArcFamily::kSelfPurify: return "pur1";
    case ArcFamily::kPurifyDistinct: return "pur2";
    case ArcFamily::kTerm: return "term";
    case ArcFamily::kRelay: return "relay";
  }
  return "?";
}

std::uint64_t Hypergraph::key(VertexKind kind, NodeIndex u, NodeIndex v, int f) {
  if (u > v) std::swap(u, v);
  return (static_cast<std::uint64_t>(kind) << 56) |
         (static_cast<std::uint64_t>(static_cast<std::uint32_t>(u + 1) & 0xFFFFF) << 36) |
         (static_cast<std::uint64_t>(static_cast<std::uint32_t>(v + 1) & 0xFFFFF) << 16) |
         static_cast<std::uint64_t>(static_cast<std::uint32_t>(f + 1) & 0xFFFF);
}

int Hypergraph::add_vertex(VertexKind kind, NodeIndex u, NodeIndex v, int f) {
  if (u > v) std::swap(u, v);
  auto [it, inserted] = index_.emplace(key(kind, u, v, f), static_cast<int>(vertices_.size()));
  if (inserted) vertices_.push_back({kind, u, v, f});
  return it->second;
}

std::optional<int> Hypergraph::find(VertexKind kind, NodeIndex u, NodeIndex v, int f) const {
  auto it = index_.find(key(kind, u, v, f));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::string Hypergraph::vertex_name(int id) const {
  const HVertex& x = vertices_[id];
  std::string s(to_string(x.kind));
  if (x.kind == VertexKind::kStart || x.kind == VertexKind::kTerm) return s;
  return s + "_" + std::to_string(x.u) + "_" + std::to_string(x.v) + "_" + std::to_string(x.f);
}

std::string Hypergraph::arc_name(int id) const {
  const HArc& a = arcs_[id];
  const HVertex& h = vertices_[a.head];
  std::string s = "z_" + std::string(to_string(a.family)) + "_";
  auto pair_of = [&](const HVertex& x) {
    return std::to_string(x.u) + "_" + std::to_string(x.v) + "_" + std::to_string(x.f);
  };
  switch (a.family) {
    case ArcFamily::kStart:
      return s + pair_of(h);
    case ArcFamily::kSwap:
      return s + pair_of(h) + "_" + std::to_string(a.via) + "_" +
             std::to_string(vertices_[a.tails[0]].f) + "_" +
             std::to_string(vertices_[a.tails[1]].f);
    case ArcFamily::kSelfPurify:
      return s + pair_of(h) + "_" + std::to_string(vertices_[a.tails[0]].f);
    case ArcFamily::kPurifyDistinct:
      return s + pair_of(h) + "_" + std::to_string(vertices_[a.tails[0]].f) + "_" +
             std::to_string(vertices_[a.tails[1]].f);
    case ArcFamily::kTerm:
      return s + pair_of(vertices_[a.tails[0]]) + "_d" + std::to_string(a.demand);
    case ArcFamily::kRelay:
      return s + std::string(to_string(vertices_[a.tails[0]].kind)) + "_" + pair_of(h);
  }
  return s;
}

std::size_t Hypergraph::count(VertexKind kind) const {
  return static_cast<std::size_t>(std::count_if(
      vertices_.begin(), vertices_.end(), [&](const HVertex& v) { return v.kind == kind; }));
}

std::size_t Hypergraph::count(ArcFamily family) const {
  return static_cast<std::size_t>(std::count_if(
      arcs_.begin(), arcs_.end(), [&](const HArc& a) { return a.family == family; }));
}

std::vector<std::vector<int>> Hypergraph::in_arcs() const {
  std::vector<std::vector<int>> in(vertices_.size());
  for (int a = 0; a < static_cast<int>(arcs_.size()); ++a) in[arcs_[a].head].push_back(a);
  return in;
}

std::vector<std::vector<int>> Hypergraph::out_arcs() const {
  std::vector<std::vector<int>> out(vertices_.size());
  for (int a = 0; a < static_cast<int>(arcs_.size()); ++a) {
    for (int t : arcs_[a].tails) out[t].push_back(a);
  }
  return out;
}

namespace {

struct Builder {
  Hypergraph& hg;
  const FidelityGrid& grid;
  const std::vector<HVertex>& vx;
  std::vector<HArc>& arcs;
  std::function<int(VertexKind, NodeIndex, NodeIndex, int)> vertex;
  std::vector<char> relayed;

  // Operation vertex plus its relay into the matching avail vertex.
  int op_vertex(VertexKind kind, NodeIndex u, NodeIndex v, int f) {
    const int op = vertex(kind, u, v, f);
    if (op >= static_cast<int>(relayed.size())) relayed.resize(op + 1, 0);
    if (!relayed[op]) {
      relayed[op] = 1;
      const int avail = vertex(VertexKind::kAvail, u, v, f);
      arcs.push_back({ArcFamily::kRelay, {op}, avail});
    }
    return op;
  }

  // All arcs combining avail vertex `a` with avail vertex `b` (b may equal a).
  void combine(int a, int b) {
    const HVertex A = vx[a];
    const HVertex B = vx[b];
    if (a == b) {
      const double f = grid[A.f];
      if (!(f > 0.5)) return;
      auto k = grid.floor_index(entmath::ep_purify(f, f).fidelity);
      if (k && static_cast<int>(*k) > A.f) {
        const int op = op_vertex(VertexKind::kPurify1, A.u, A.v, static_cast<int>(*k));
        arcs.push_back({ArcFamily::kSelfPurify, {a}, op});
      }
      return;
    }
    if (A.u == B.u && A.v == B.v) {
      const int hi = A.f > B.f ? a : b;
      const int lo = A.f > B.f ? b : a;
      auto k = grid.floor_index(entmath::ep_purify(grid[vx[hi].f], grid[vx[lo].f]).fidelity);
      if (k && static_cast<int>(*k) > vx[hi].f) {
        const int op = op_vertex(VertexKind::kPurify2, A.u, A.v, static_cast<int>(*k));
        arcs.push_back({ArcFamily::kPurifyDistinct, {hi, lo}, op});
      }
      return;
    }
    // Swap at the shared endpoint, if there is exactly one.
    NodeIndex w = -1, x = -1, y = -1;
    if (A.u == B.u && A.v != B.v) { w = A.u; x = A.v; y = B.v; }
    else if (A.u == B.v && A.v != B.u) { w = A.u; x = A.v; y = B.u; }
    else if (A.v == B.u && A.u != B.v) { w = A.v; x = A.u; y = B.v; }
    else if (A.v == B.v && A.u != B.u) { w = A.v; x = A.u; y = B.u; }
    if (w < 0) return;
    auto k = grid.floor_index(entmath::swap_fidelity(grid[A.f], grid[B.f]));
    if (!k) return;
    // Tail order: the operand touching the smaller output endpoint first.
    const bool a_first = x < y;
    const int op = op_vertex(VertexKind::kSwap, x, y, static_cast<int>(*k));
    HArc arc{ArcFamily::kSwap, {a_first ? a : b, a_first ? b : a}, op};
    arc.via = w;
    arcs.push_back(std::move(arc));
  }
};

}  // namespace

Hypergraph build_hypergraph(const QuantumNetwork& net, const DemandSet& demands,
                            const FidelityGrid& grid, HypergraphScope scope) {
  if (demands.pairs.empty()) throw Error(ErrorCode::kNoDemand, "no pair demands given");
  const int n = net.node_count();
  for (const auto& d : demands.pairs) {
    if (d.s < 0 || d.d < 0 || d.s >= n || d.d >= n || d.s == d.d) {
      throw Error(ErrorCode::kInvalidDemand, "invalid demand endpoints");
    }
  }
  const int G = static_cast<int>(grid.size());

  Hypergraph hg(grid);
  hg.add_vertex(VertexKind::kStart, -1, -1, -1);
  hg.add_vertex(VertexKind::kTerm, -1, -1, -1);
  std::vector<HArc> arcs;
  Builder b{hg, grid, hg.vertices_, arcs,
            [&](VertexKind k, NodeIndex u, NodeIndex v, int f) { return hg.add_vertex(k, u, v, f); },
            {}};

  for (const auto& link : net.links()) {
    auto k = grid.floor_index(link.fidelity);
    if (!k) continue;  // below the grid: unusable
    const int avail = hg.add_vertex(VertexKind::kAvail, link.a, link.b, static_cast<int>(*k));
    HArc arc{ArcFamily::kStart, {hg.start()}, avail};
    arc.capacity = link.rate;
    arcs.push_back(std::move(arc));
  }

  if (scope == HypergraphScope::kFull) {
    for (int u = 0; u < n; ++u) {
      for (int v = u + 1; v < n; ++v) {
        for (int f = 0; f < G; ++f) {
          hg.add_vertex(VertexKind::kAvail, u, v, f);
          b.op_vertex(VertexKind::kSwap, u, v, f);
          b.op_vertex(VertexKind::kPurify1, u, v, f);
          b.op_vertex(VertexKind::kPurify2, u, v, f);
        }
      }
    }
    std::vector<int> avails;
    for (int id = 0; id < static_cast<int>(hg.vertices_.size()); ++id) {
      if (hg.vertices_[id].kind == VertexKind::kAvail) avails.push_back(id);
    }
    for (std::size_t i = 0; i < avails.size(); ++i) {
      for (std::size_t j = i; j < avails.size(); ++j) b.combine(avails[i], avails[j]);
    }
  } else {
    // Forward closure from the link EPs; each new avail vertex is combined
    // with itself and every avail vertex processed before it.
    std::vector<std::vector<int>> by_node(n);
    std::vector<char> done;
    std::vector<int> work;
    for (const auto& a : arcs) work.push_back(a.head);
    std::size_t next = 0;
    while (next < work.size()) {
      const int a = work[next++];
      if (a >= static_cast<int>(done.size())) done.resize(a + 1, 0);
      if (done[a]) continue;
      done[a] = 1;
      const HVertex A = hg.vertices_[a];
      const std::size_t before = arcs.size();
      b.combine(a, a);
      std::vector<int> partners;
      for (int x : by_node[A.u]) partners.push_back(x);
      for (int x : by_node[A.v]) {
        const HVertex& X = hg.vertices_[x];
        if (!(X.u == A.u || X.v == A.u)) partners.push_back(x);  // avoid duplicates
      }
      for (int x : partners) b.combine(a, x);
      by_node[A.u].push_back(a);
      by_node[A.v].push_back(a);
      for (std::size_t i = before; i < arcs.size(); ++i) {
        if (arcs[i].family == ArcFamily::kRelay) work.push_back(arcs[i].head);
      }
    }
  }

  for (int di = 0; di < static_cast<int>(demands.pairs.size()); ++di) {
    const auto& d = demands.pairs[di];
    auto k0 = grid.ceil_index(d.threshold);
    if (!k0) continue;
    for (int f = static_cast<int>(*k0); f < G; ++f) {
      auto avail = hg.find(VertexKind::kAvail, d.s, d.d, f);
      if (!avail) continue;
      HArc arc{ArcFamily::kTerm, {*avail}, hg.term()};
      arc.demand = di;
      arcs.push_back(std::move(arc));
    }
  }

  if (scope == HypergraphScope::kReachable) {
    // Keep arcs whose head can still reach term, then compact the vertices.
    std::vector<std::vector<int>> into(hg.vertices_.size());
    for (int a = 0; a < static_cast<int>(arcs.size()); ++a) into[arcs[a].head].push_back(a);
    std::vector<char> alive(hg.vertices_.size(), 0);
    std::vector<int> stack{hg.term()};
    alive[hg.term()] = 1;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (int a : into[v]) {
        for (int t : arcs[a].tails) {
          if (!alive[t]) {
            alive[t] = 1;
            stack.push_back(t);
          }
        }
      }
    }
    std::vector<int> remap(hg.vertices_.size(), -1);
    std::vector<HVertex> kept;
    hg.index_.clear();
    for (int v = 0; v < static_cast<int>(hg.vertices_.size()); ++v) {
      if (!alive[v] && v != hg.start()) continue;
      remap[v] = static_cast<int>(kept.size());
      const HVertex& x = hg.vertices_[v];
      hg.index_.emplace(Hypergraph::key(x.kind, x.u, x.v, x.f), remap[v]);
      kept.push_back(x);
    }
    std::vector<HArc> kept_arcs;
    for (auto& a : arcs) {
      if (!alive[a.head]) continue;
      for (int& t : a.tails) t = remap[t];
      a.head = remap[a.head];
      kept_arcs.push_back(std::move(a));
    }
    hg.vertices_ = std::move(kept);
    arcs = std::move(kept_arcs);
  }
  hg.arcs_ = std::move(arcs);
  return hg;
}

}  // namespace entroute

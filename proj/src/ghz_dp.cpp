#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>

#include "entroute/error.hpp"
#include "entroute/ghz.hpp"

namespace entroute {

std::string_view to_string(GdpVariant v) {
  switch (v) {
    case GdpVariant::kOptimal: return "optimal";
    case GdpVariant::kSS: return "ss";
    case GdpVariant::kOT: return "ot";
    case GdpVariant::k2G: return "2g";
  }
  return "?";
}

namespace {

constexpr double kTol = 1e-12;

struct Entry {
  double f;
  std::vector<double> ep;  // consumption per edge
  FusionKind op;
  std::uint32_t mask;
  int k;
  int a = -1;
  int b = -1;
};

// Subsets are bitmasks over the star's edges; the center is implicit.
// Within a subset every transition lowers the rate index, so subsets are
// settled in order of size and rates from the top down.
class GdpEngine {
 public:
  GdpEngine(const VirtualStar& star, const RateGrid& kgrid, const OperationParams& params,
            GdpVariant variant, const GdpOptions& options)
      : star_(star), kgrid_(kgrid), params_(params), variant_(variant), opt_(options),
        L_(static_cast<int>(star.edges.size())), K_(static_cast<int>(kgrid.size())),
        flags_(variant == GdpVariant::kOT ? 2 : 1),
        table_(static_cast<std::size_t>(1u << L_) * K_ * flags_) {}

  void run() {
    std::vector<std::uint32_t> masks;
    for (std::uint32_t m = 1; m < (1u << L_); ++m) masks.push_back(m);
    std::stable_sort(masks.begin(), masks.end(), [](std::uint32_t a, std::uint32_t b) {
      return std::popcount(a) < std::popcount(b);
    });
    for (std::uint32_t mask : masks) {
      if (std::popcount(mask) == 1) {
        base(mask);
      } else {
        fuse(mask);
      }
      purify(mask);
    }
  }

  GdpResult result(double f_min) const {
    GdpResult r;
    r.entries = arena_.size();
    const std::uint32_t full = (1u << L_) - 1;
    int best_id = -1;
    for (int k = 0; k < K_; ++k) {
      int top = -1;
      for (int fl = 0; fl < flags_; ++fl) {
        for (int id : cell(full, k, fl)) {
          if (top < 0 || arena_[id].f > arena_[top].f) top = id;
        }
      }
      if (top < 0) continue;
      r.frontier.emplace_back(kgrid_[k], arena_[top].f);
      if (arena_[top].f >= f_min - kTol) best_id = top;
    }
    if (best_id >= 0) r.tree = rebuild(best_id);
    return r;
  }

 private:
  std::vector<int>& cell(std::uint32_t mask, int k, int flag) {
    return table_[(static_cast<std::size_t>(mask) * K_ + k) * flags_ + flag];
  }
  const std::vector<int>& cell(std::uint32_t mask, int k, int flag) const {
    return table_[(static_cast<std::size_t>(mask) * K_ + k) * flags_ + flag];
  }

  double round_up(int e, double x) const {
    if (opt_.ep_levels <= 0) return x;
    const double unit = star_.edges[e].rate / opt_.ep_levels;
    return std::ceil(x / unit - 1e-9) * unit;
  }

  bool feasible(const std::vector<double>& ep) const {
    for (int e = 0; e < L_; ++e) {
      if (ep[e] > star_.edges[e].rate * (1.0 + 1e-12)) return false;
    }
    return true;
  }

  static double total(const std::vector<double>& ep) {
    double s = 0.0;
    for (double x : ep) s += x;
    return s;
  }

  void insert(int flag, Entry e) {
    if (!feasible(e.ep)) return;
    auto& list = cell(e.mask, e.k, flag);
    if (variant_ == GdpVariant::kOptimal) {
      for (int id : list) {
        if (dominates(arena_[id], e)) return;
      }
      std::erase_if(list, [&](int id) { return dominates(e, arena_[id]); });
    } else if (!list.empty()) {
      const Entry& cur = arena_[list.front()];
      const bool better = e.f > cur.f + kTol ||
                          (e.f >= cur.f - kTol && total(e.ep) < total(cur.ep) - kTol);
      if (!better) return;
      list.clear();
    }
    if (arena_.size() >= opt_.max_entries) {
      throw Error(ErrorCode::kStateSpaceExceeded, "GHZ DP entry budget exhausted");
    }
    arena_.push_back(std::move(e));
    list.push_back(static_cast<int>(arena_.size() - 1));
  }

  static bool dominates(const Entry& x, const Entry& y) {
    if (x.f < y.f - kTol) return false;
    for (std::size_t i = 0; i < x.ep.size(); ++i) {
      if (x.ep[i] > y.ep[i] + kTol) return false;
    }
    return true;
  }

  void base(std::uint32_t mask) {
    const int e = std::countr_zero(mask);
    for (int k = 0; k < K_; ++k) {
      if (kgrid_[k] > star_.edges[e].rate * (1.0 + 1e-12)) break;
      Entry x{star_.edges[e].fidelity, std::vector<double>(L_, 0.0), FusionKind::kLeaf, mask, k};
      x.ep[e] = round_up(e, kgrid_[k]);
      insert(0, std::move(x));
    }
  }

  void fuse(std::uint32_t mask) {
    for (std::uint32_t sub = (mask - 1) & mask; sub; sub = (sub - 1) & mask) {
      const std::uint32_t other = mask ^ sub;
      if (sub > other) continue;
      for (int k = 0; k < K_; ++k) {
        const auto kk = kgrid_.floor_index(2.0 / 3.0 * params_.p_f * kgrid_[k]);
        if (!kk) continue;
        for (int fa = 0; fa < flags_; ++fa) {
          for (int fb = 0; fb < flags_; ++fb) {
            const std::vector<int> left = cell(sub, k, fa);
            const std::vector<int> right = cell(other, k, fb);
            for (int a : left) {
              for (int b : right) {
                const Entry& x = arena_[a];
                const Entry& y = arena_[b];
                Entry z{entmath::fuse_fidelity(x.f, y.f, opt_.fusion), x.ep, FusionKind::kFuse,
                        mask, static_cast<int>(*kk), a, b};
                for (int e = 0; e < L_; ++e) z.ep[e] += y.ep[e];
                insert(0, std::move(z));
              }
            }
          }
        }
      }
    }
  }

  bool self_allowed() const { return variant_ != GdpVariant::k2G; }
  bool subset_allowed(int target_flag, std::uint32_t sac) const {
    switch (variant_) {
      case GdpVariant::kOptimal: return true;
      case GdpVariant::kSS: return false;
      case GdpVariant::kOT: return target_flag == 0;
      case GdpVariant::k2G: return std::popcount(sac) == 1;
    }
    return false;
  }

  void purify(std::uint32_t mask) {
    const int n = std::popcount(mask) + 1;
    for (int k = K_ - 1; k >= 0; --k) {
      for (int fl = 0; fl < flags_; ++fl) {
        const std::vector<int> ids = cell(mask, k, fl);
        for (int id : ids) {
          const double f = arena_[id].f;
          if (!(f > 0.5)) continue;
          if (self_allowed()) {
            const auto o = entmath::ghz_purify(n, n, f, f);
            const auto kk = kgrid_.floor_index(0.5 * o.success_prob * kgrid_[k]);
            if (kk && o.fidelity > f + kTol) {
              insert(fl, Entry{o.fidelity, arena_[id].ep, FusionKind::kSelfPurify, mask,
                               static_cast<int>(*kk), id});
            }
          }
          for (std::uint32_t sac = (mask - 1) & mask; sac; sac = (sac - 1) & mask) {
            if (!subset_allowed(fl, sac)) continue;
            const int m = std::popcount(sac) + 1;
            for (int sf = 0; sf < flags_; ++sf) {
              const std::vector<int> donors = cell(sac, k, sf);
              for (int d : donors) {
                const double fs = arena_[d].f;
                if (!(fs > 0.5)) continue;
                const auto o = entmath::ghz_purify(n, m, f, fs);
                if (!(o.fidelity > f + kTol)) continue;
                const auto kk = kgrid_.floor_index(2.0 / 3.0 * o.success_prob * kgrid_[k]);
                if (!kk) continue;
                Entry z{o.fidelity, arena_[id].ep, FusionKind::kSubsetPurify, mask,
                        static_cast<int>(*kk), id, d};
                for (int e = 0; e < L_; ++e) z.ep[e] = round_up(e, z.ep[e] + arena_[d].ep[e]);
                insert(variant_ == GdpVariant::kOT ? 1 : 0, std::move(z));
              }
            }
          }
        }
      }
    }
  }

  FusionTree rebuild(int id) const {
    const Entry& x = arena_[id];
    FusionTree t;
    t.kind = x.op;
    t.fidelity = x.f;
    t.rate = kgrid_[x.k];
    t.subset.push_back(star_.center);
    for (int e = 0; e < L_; ++e) {
      if (x.mask >> e & 1u) t.subset.push_back(star_.edges[e].leaf);
    }
    std::sort(t.subset.begin(), t.subset.end());
    if (x.a >= 0) t.children.push_back(rebuild(x.a));
    if (x.b >= 0) t.children.push_back(rebuild(x.b));
    return t;
  }

  const VirtualStar& star_;
  const RateGrid& kgrid_;
  const OperationParams& params_;
  GdpVariant variant_;
  const GdpOptions& opt_;
  int L_;
  int K_;
  int flags_;
  std::vector<std::vector<int>> table_;
  std::vector<Entry> arena_;
};

}  // namespace

GdpResult solve_gdp(const VirtualStar& star, double f_min, const RateGrid& kgrid,
                    const OperationParams& params, GdpVariant variant,
                    const GdpOptions& options) {
  params.validate();
  star.validate();
  if (!(f_min > 0.5 && f_min <= 1.0)) {
    throw Error(ErrorCode::kDomainError, "GHZ threshold must lie in (0.5, 1]");
  }
  const std::size_t terminals = star.edges.size() + 1;
  const std::size_t guard = variant == GdpVariant::kOptimal ? 6 : 12;
  if (terminals > guard) {
    throw Error(ErrorCode::kStateSpaceExceeded,
                std::to_string(terminals) + " terminals exceed the " +
                    std::string(to_string(variant)) + " limit of " + std::to_string(guard));
  }
  GdpEngine engine(star, kgrid, params, variant, options);
  engine.run();
  return engine.result(f_min);
}

std::optional<FusionTree> solve_gdp_optimal(const VirtualStar& star, double f_min,
                                            const RateGrid& kgrid,
                                            const OperationParams& params) {
  return solve_gdp(star, f_min, kgrid, params, GdpVariant::kOptimal).tree;
}

std::optional<FusionTree> solve_gdp_ss(const VirtualStar& star, double f_min,
                                       const RateGrid& kgrid, const OperationParams& params) {
  return solve_gdp(star, f_min, kgrid, params, GdpVariant::kSS).tree;
}

std::optional<FusionTree> solve_gdp_ot(const VirtualStar& star, double f_min,
                                       const RateGrid& kgrid, const OperationParams& params) {
  return solve_gdp(star, f_min, kgrid, params, GdpVariant::kOT).tree;
}

std::optional<FusionTree> solve_gdp_2g(const VirtualStar& star, double f_min,
                                       const RateGrid& kgrid, const OperationParams& params) {
  return solve_gdp(star, f_min, kgrid, params, GdpVariant::k2G).tree;
}

}  // namespace entroute

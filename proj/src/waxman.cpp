#include "entroute/waxman.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "entroute/error.hpp"
#include "entroute/rng.hpp"

namespace entroute {

namespace {

void validate(const WaxmanConfig& cfg) {
  if (cfg.n_nodes < 1) {
    throw Error(ErrorCode::kDomainError, "n_nodes must be positive");
  }
  if (!(cfg.area_km > 0.0)) {
    throw Error(ErrorCode::kDomainError, "area must be positive");
  }
  if (!(cfg.alpha > 0.0 && cfg.alpha <= 1.0) ||
      !(cfg.beta > 0.0 && cfg.beta <= 1.0)) {
    throw Error(ErrorCode::kDomainError, "alpha and beta must lie in (0, 1]");
  }
  const auto [rlo, rhi] = cfg.rate_range;
  const auto [flo, fhi] = cfg.fid_range;
  if (!(rlo > 0.0) || rhi < rlo) {
    throw Error(ErrorCode::kDomainError, "invalid rate range");
  }
  if (!(flo > 0.25) || fhi > 1.0 || fhi < flo) {
    throw Error(ErrorCode::kDomainError, "fidelity range must lie in (0.25, 1]");
  }
  if (cfg.max_attempts < 1) {
    throw Error(ErrorCode::kDomainError, "max_attempts must be positive");
  }
}

std::vector<Position> place(int n, double area, CounterRng& rng) {
  std::vector<Position> pos(n);
  for (auto& p : pos) {
    p.x = rng.uniform() * area;
    p.y = rng.uniform() * area;
  }
  return pos;
}

double dist(const Position& a, const Position& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

double max_pairwise(const std::vector<Position>& pos) {
  double d_max = 0.0;
  for (std::size_t i = 0; i < pos.size(); ++i) {
    for (std::size_t j = i + 1; j < pos.size(); ++j) {
      d_max = std::max(d_max, dist(pos[i], pos[j]));
    }
  }
  return d_max;
}

}  // namespace

QuantumNetwork waxman_draw(const WaxmanConfig& cfg, std::uint64_t draw_seed) {
  validate(cfg);
  CounterRng layout(draw_seed, 0);
  CounterRng edges(draw_seed, 1);
  CounterRng attrs(draw_seed, 2);

  const int n = cfg.n_nodes;
  std::vector<std::string> ids;
  ids.reserve(n);
  for (int i = 0; i < n; ++i) ids.push_back("n" + std::to_string(i));
  auto pos = place(n, cfg.area_km, layout);
  const double d_max = max_pairwise(pos);

  const auto [rlo, rhi] = cfg.rate_range;
  const auto [flo, fhi] = cfg.fid_range;
  std::vector<Link> links;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double p =
          d_max > 0.0 ? cfg.alpha * std::exp(-dist(pos[i], pos[j]) / (cfg.beta * d_max))
                      : cfg.alpha;
      if (edges.uniform() < p) {
        const double rate = rlo + (rhi - rlo) * attrs.uniform();
        const double fid = flo + (fhi - flo) * attrs.uniform();
        links.push_back(Link{i, j, rate, fid});
      }
    }
  }
  return QuantumNetwork(std::move(ids), std::move(links), std::move(pos));
}

QuantumNetwork waxman_generate(const WaxmanConfig& cfg) {
  validate(cfg);
  for (int attempt = 0; attempt < cfg.max_attempts; ++attempt) {
    const std::uint64_t sub =
        attempt == 0 ? cfg.seed : splitmix64(cfg.seed ^ splitmix64(attempt));
    QuantumNetwork net = waxman_draw(cfg, sub);
    if (net.connected()) return net;
  }
  throw Error(ErrorCode::kConnectivityFailure,
              "no connected topology after " + std::to_string(cfg.max_attempts) +
                  " attempts");
}

double waxman_alpha_for_density(int n_nodes, double beta, double target_density,
                                std::uint64_t seed, int samples) {
  if (n_nodes < 2 || samples < 1) return 1.0;
  double acc = 0.0;
  long pairs = 0;
  for (int s = 0; s < samples; ++s) {
    CounterRng rng(seed, 1000 + static_cast<std::uint64_t>(s));
    auto pos = place(n_nodes, 1.0, rng);
    const double d_max = max_pairwise(pos);
    for (int i = 0; i < n_nodes; ++i) {
      for (int j = i + 1; j < n_nodes; ++j) {
        acc += std::exp(-dist(pos[i], pos[j]) / (beta * d_max));
        ++pairs;
      }
    }
  }
  const double mean = acc / static_cast<double>(pairs);
  return std::clamp(target_density / mean, 1e-9, 1.0);
}

}  // namespace entroute

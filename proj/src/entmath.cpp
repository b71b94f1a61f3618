#include "entroute/entmath.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "entroute/error.hpp"

namespace entroute::entmath {

namespace {

void require_werner(double f, const char* what) {
  // The fully mixed point 0.25 itself is accepted; it is a fixed point of
  // both the swap and the purification maps.
  if (!(f >= 0.25 && f <= 1.0)) {
    throw Error(ErrorCode::kDomainError,
                std::string(what) + " must lie in [0.25, 1], got " + std::to_string(f));
  }
}

}  // namespace

double swap_fidelity(double f_left, double f_right) {
  require_werner(f_left, "swap operand fidelity");
  require_werner(f_right, "swap operand fidelity");
  return 0.25 * (1.0 + (4.0 * f_left - 1.0) * (4.0 * f_right - 1.0) / 3.0);
}

double swap_latency(double l_left, double l_right, const OperationParams& params) {
  if (!(l_left > 0.0) || !(l_right > 0.0)) {
    throw Error(ErrorCode::kDomainError, "swap operand latency must be positive");
  }
  return (1.5 * std::max(l_left, l_right) + params.t_s + params.t_c) / params.p_s;
}

PurifyOutcome ep_purify(double f_t, double f_s) {
  require_werner(f_t, "target fidelity");
  require_werner(f_s, "sacrificial fidelity");
  const double e_t = (1.0 - f_t) / 3.0;
  const double e_s = (1.0 - f_s) / 3.0;
  const double p = f_t * f_s + f_t * e_s + e_t * f_s + 5.0 * e_t * e_s;
  return {(f_t * f_s + e_t * e_s) / p, p};
}

std::vector<PurifyOutcome> iterated_purify(double f_s, int iterations) {
  if (!(f_s > 0.5 && f_s <= 1.0)) {
    throw Error(ErrorCode::kDomainError,
                "pumping requires sacrificial fidelity in (0.5, 1]");
  }
  if (iterations < 0) {
    throw Error(ErrorCode::kDomainError, "iteration count must be nonnegative");
  }
  std::vector<PurifyOutcome> seq;
  seq.reserve(iterations + 1);
  seq.push_back({f_s, 1.0});
  for (int j = 1; j <= iterations; ++j) {
    seq.push_back(ep_purify(seq.back().fidelity, f_s));
  }
  return seq;
}

double iterated_purify_latency(double l, double f, int iterations,
                               const OperationParams& params) {
  if (!(l > 0.0)) throw Error(ErrorCode::kDomainError, "latency must be positive");
  if (iterations < 1 || iterations > params.i_max) {
    throw Error(ErrorCode::kDomainError, "iterations must lie in [1, i_max]");
  }
  const auto rho = iterated_purify(f, iterations);
  double latency = l;
  for (int i = 1; i <= iterations; ++i) {
    latency = (latency + l + params.t_p + params.t_c) / rho[i - 1].success_prob;
  }
  return latency;
}

GhzPurifyOutcome ghz_purify(int n, int m, double f_t, double f_s) {
  if (n < 2 || m < 2 || m > n) {
    throw Error(ErrorCode::kDomainError, "ghz_purify needs 2 <= m <= n");
  }
  if (!(f_t > 0.0 && f_t <= 1.0) || !(f_s > 0.0 && f_s <= 1.0)) {
    throw Error(ErrorCode::kDomainError, "GHZ fidelities must lie in (0, 1]");
  }
  const double dn = std::ldexp(1.0, n) - 1.0;
  const double dm = std::ldexp(1.0, m) - 1.0;
  const double noise = (1.0 - f_t) * (1.0 - f_s);
  GhzPurifyOutcome out;
  out.case1 = f_t * f_s + noise / (dn * dm);
  out.case2 = f_t * (1.0 - f_s) / dm + f_s * (1.0 - f_t) / dn;
  out.case3 = (std::ldexp(1.0, n + 1) - 4.0) * noise / (dn * dm);
  out.success_prob = out.case1 + out.case2 + out.case3;
  out.fidelity = out.case1 / out.success_prob;
  return out;
}

double decoherent_purify_step(double rate, double fidelity, double gamma) {
  if (!(rate > 0.0)) throw Error(ErrorCode::kDomainError, "rate must be positive");
  require_werner(fidelity, "fidelity");
  if (gamma < 0.0) throw Error(ErrorCode::kDomainError, "gamma must be nonnegative");
  return 0.5 * (1.0 + (2.0 * fidelity - 1.0) * std::exp(-4.0 * gamma / rate));
}

std::vector<RateFidelity> decoherent_pumping_sequence(
    double r1, double f1, double gamma, const std::function<double(double)>& p_p,
    int steps, const RateGrid* rate_grid) {
  if (steps < 1) throw Error(ErrorCode::kDomainError, "steps must be >= 1");
  require_werner(f1, "fidelity");
  std::vector<RateFidelity> seq;
  seq.reserve(steps);
  seq.push_back({r1, f1});
  // One success probability for the whole sequence, evaluated at f_1.
  const double pp = p_p(f1);
  if (!(pp > 0.0 && pp <= 1.0)) {
    throw Error(ErrorCode::kDomainError, "purification probability must lie in (0, 1]");
  }
  for (int i = 1; i < steps; ++i) {
    const RateFidelity cur = seq.back();
    const double fp = decoherent_purify_step(cur.rate, cur.fidelity, gamma);
    double rate = std::pow(pp, i - 1) / static_cast<double>(i) * r1;
    if (rate_grid) {
      if (auto k = rate_grid->ceil_index(rate)) rate = (*rate_grid)[*k];
    }
    const double num = f1 * fp;
    seq.push_back({rate, num / (num + (1.0 - f1) * (1.0 - fp))});
  }
  return seq;
}

double fuse_fidelity(double f1, double f2, const FusionModel& model) {
  if (!(f1 > 0.0 && f1 <= 1.0) || !(f2 > 0.0 && f2 <= 1.0)) {
    throw Error(ErrorCode::kDomainError, "fusion operand fidelity must lie in (0, 1]");
  }
  return model.combine(f1, f2);
}

}  // namespace entroute::entmath

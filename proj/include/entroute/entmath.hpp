#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "entroute/grid.hpp"
#include "entroute/network.hpp"

// Closed-form fidelity, latency and success-probability models for Werner
// pairs and GHZ states. Everything here is a pure function evaluated in
// double precision; grid flooring is the caller's business.
namespace entroute::entmath {

struct PurifyOutcome {
  double fidelity = 1.0;
  double success_prob = 1.0;
};

struct GhzPurifyOutcome {
  double fidelity = 1.0;
  double success_prob = 1.0;
  double case1 = 1.0;  // all outcomes 0, correct phase
  double case2 = 0.0;  // all outcomes 0, phase error
  double case3 = 0.0;  // all outcomes 0, non-GHZ residue
};

// Fidelity after swapping two Werner pairs; inputs in (0.25, 1].
double swap_fidelity(double f_left, double f_right);

// Expected latency of a swap given its operands' latencies (> 0):
// (3/2 * max(l, r) + t_s + t_c) / p_s.
double swap_latency(double l_left, double l_right, const OperationParams& params);

// One Bennett-style purification of target `f_t` with sacrificial `f_s`.
PurifyOutcome ep_purify(double f_t, double f_s);

// Entanglement pumping with identical sacrificial copies of fidelity `f_s`.
// Element j holds the fidelity after j steps and the success probability of
// step j; element 0 is (f_s, 1). Requires f_s in (0.5, 1].
std::vector<PurifyOutcome> iterated_purify(double f_s, int iterations);

// Latency of `iterations` pumping steps over a child of latency `l` and
// fidelity `f`: L_0 = l, L_i = (L_{i-1} + l + t_p + t_c) / rho_{i-1}(f).
double iterated_purify_latency(double l, double f, int iterations,
                               const OperationParams& params);

// Purify an n-GHZ target with an m-GHZ sacrificial state (2 <= m <= n).
GhzPurifyOutcome ghz_purify(int n, int m, double f_t, double f_s);

// Fidelity of a stored pair after waiting 1/r_i under decoherence rate gamma.
double decoherent_purify_step(double rate, double fidelity, double gamma);

struct RateFidelity {
  double rate = 0.0;
  double fidelity = 0.0;
};

// Pumping under decoherence. Element 0 is (r_1, f_1); element i (i >= 1)
// is P_{i+1} = (p_p^{i-1} / i * r_1, f_1 f'_i / (f_1 f'_i + (1-f_1)(1-f'_i)))
// with f'_i = decoherent_purify_step(r_i, f_i, gamma). When `rate_grid` is
// given, each derived rate is raised to the next grid value at or above it.
// The returned sequence has `steps` elements (steps >= 1).
std::vector<RateFidelity> decoherent_pumping_sequence(
    double r1, double f1, double gamma, const std::function<double(double)>& p_p,
    int steps, const RateGrid* rate_grid = nullptr);

// Pluggable GHZ fusion fidelity combiner; default multiplies the operands.
struct FusionModel {
  std::string name = "product";
  std::function<double(double, double)> combine = [](double a, double b) {
    return a * b;
  };
};

double fuse_fidelity(double f1, double f2, const FusionModel& model = {});

}  // namespace entroute::entmath

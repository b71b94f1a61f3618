#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "entroute/entmath.hpp"
#include "entroute/error.hpp"

using namespace entroute;
using namespace entroute::entmath;

namespace {

bool domain_error(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code() == ErrorCode::kDomainError;
  }
  return false;
}

// Bennett purification written out from the Werner-state error terms
// independently of the library's factoring.
double bennett_p(double a, double b) {
  return a * b + a * (1 - b) / 3 + (1 - a) * b / 3 + 5 * (1 - a) * (1 - b) / 9;
}
double bennett_f(double a, double b) {
  return (a * b + (1 - a) * (1 - b) / 9) / bennett_p(a, b);
}

}  // namespace

TEST_CASE("swap fidelity") {
  for (double f = 0.3; f <= 1.0; f += 0.07) CHECK(swap_fidelity(1.0, f) == doctest::Approx(f));
  CHECK(swap_fidelity(0.25, 0.9) == doctest::Approx(0.25));
  CHECK(swap_fidelity(0.9, 0.9) == doctest::Approx(0.8133333333333).epsilon(1e-12));
  CHECK(swap_fidelity(0.6, 0.8) == swap_fidelity(0.8, 0.6));
  for (double a = 0.51; a <= 1.0; a += 0.05)
    for (double b = 0.51; b <= 1.0; b += 0.05)
      CHECK(swap_fidelity(a, b) <= std::min(a, b) + 1e-15);
  CHECK(domain_error([] { swap_fidelity(0.2, 0.9); }));
  CHECK(domain_error([] { swap_fidelity(0.9, 1.01); }));
}

TEST_CASE("swap latency") {
  OperationParams neutral;
  neutral.p_s = 1.0;
  neutral.t_s = 0.0;
  neutral.t_c = 0.0;
  CHECK(swap_latency(1, 1, neutral) == doctest::Approx(1.5));
  OperationParams p;
  p.p_s = 0.4;
  p.t_s = 10e-6;
  p.t_c = 10e-6;
  CHECK(swap_latency(0.01, 0.02, p) == doctest::Approx(0.07505).epsilon(1e-12));
  CHECK(swap_latency(0.02, 0.01, p) == swap_latency(0.01, 0.02, p));
  CHECK(domain_error([&] { swap_latency(0.0, 1.0, p); }));
}

TEST_CASE("Bennett purification") {
  auto one = ep_purify(1, 1);
  CHECK(one.fidelity == doctest::Approx(1.0));
  CHECK(one.success_prob == doctest::Approx(1.0));
  auto mixed = ep_purify(0.25, 0.25);
  CHECK(mixed.fidelity == doctest::Approx(0.25));
  CHECK(mixed.success_prob == doctest::Approx(0.5));
  auto r = ep_purify(0.7, 0.7);
  CHECK(r.success_prob == doctest::Approx(0.68).epsilon(1e-12));
  CHECK(r.fidelity == doctest::Approx(0.5 / 0.68).epsilon(1e-12));
  for (double a = 0.3; a < 1.0; a += 0.061) {
    for (double b = 0.3; b < 1.0; b += 0.047) {
      auto o = ep_purify(a, b);
      CHECK(o.success_prob == doctest::Approx(bennett_p(a, b)).epsilon(1e-12));
      CHECK(o.fidelity == doctest::Approx(bennett_f(a, b)).epsilon(1e-12));
      if (a > 0.5 && b >= a && b < 1.0) CHECK(o.fidelity > a);
    }
  }
}

TEST_CASE("pumping sequence") {
  auto zero = iterated_purify(0.8, 0);
  REQUIRE(zero.size() == 1);
  CHECK(zero[0].fidelity == 0.8);
  CHECK(zero[0].success_prob == 1.0);
  auto one = iterated_purify(0.7, 1);
  REQUIRE(one.size() == 2);
  CHECK(one[1].success_prob == doctest::Approx(0.68));
  CHECK(one[1].fidelity == doctest::Approx(0.735294117647).epsilon(1e-10));
  for (double f = 0.51; f < 1.0; f += 0.02) {
    auto seq = iterated_purify(f, 10);
    for (int j = 1; j <= 10; ++j) {
      CHECK(seq[j].fidelity > seq[j - 1].fidelity);
      CHECK(seq[j].fidelity == doctest::Approx(bennett_f(seq[j - 1].fidelity, f)));
    }
  }
  CHECK(domain_error([] { iterated_purify(0.5, 2); }));
}

TEST_CASE("pumping latency") {
  OperationParams p;
  p.t_p = 0.0;
  p.t_c = 0.0;
  for (double f : {0.6, 0.7, 0.95})
    CHECK(iterated_purify_latency(0.01, f, 1, p) == doctest::Approx(0.02));
  CHECK(iterated_purify_latency(0.01, 0.7, 2, p) == doctest::Approx(0.03 / 0.68));
  double prev = 0.01;
  for (int i = 1; i <= p.i_max; ++i) {
    const double l = iterated_purify_latency(0.01, 0.8, i, p);
    CHECK(l > prev);
    prev = l;
  }
  CHECK(domain_error([&] { iterated_purify_latency(0.01, 0.8, 0, p); }));
  CHECK(domain_error([&] { iterated_purify_latency(0.01, 0.8, p.i_max + 1, p); }));
}

TEST_CASE("GHZ purification") {
  auto perfect = ghz_purify(4, 3, 1, 1);
  CHECK(perfect.fidelity == doctest::Approx(1.0));
  CHECK(perfect.success_prob == doctest::Approx(1.0));

  auto two = ghz_purify(2, 2, 0.7, 0.7);
  CHECK(two.case1 == doctest::Approx(0.5));
  CHECK(two.case2 == doctest::Approx(0.14));
  CHECK(two.case3 == doctest::Approx(0.04));
  CHECK(two.success_prob == doctest::Approx(0.68));
  CHECK(two.fidelity == doctest::Approx(0.735294117647));

  auto r = ghz_purify(3, 2, 0.9, 0.9);
  CHECK(r.case1 == doctest::Approx(0.810476).epsilon(1e-6));
  CHECK(r.case2 == doctest::Approx(0.042857).epsilon(1e-5));
  CHECK(r.case3 == doctest::Approx(0.005714).epsilon(1e-4));
  CHECK(r.success_prob == doctest::Approx(0.859048).epsilon(1e-6));
  CHECK(r.fidelity == doctest::Approx(0.9434589800443459).epsilon(1e-12));

  CHECK(domain_error([] { ghz_purify(3, 4, 0.9, 0.9); }));
  CHECK(domain_error([] { ghz_purify(3, 1, 0.9, 0.9); }));
  CHECK_NOTHROW(ghz_purify(3, 3, 0.2, 0.2));
}

TEST_CASE("GHZ purification reduces to Bennett for equal pairs") {
  for (int c = 51; c <= 99; ++c) {
    const double f = c / 100.0;
    auto g = ghz_purify(2, 2, f, f);
    auto e = ep_purify(f, f);
    CHECK(std::fabs(g.fidelity - e.fidelity) <= 1e-12);
    CHECK(std::fabs(g.success_prob - e.success_prob) <= 1e-12);
  }
}

TEST_CASE("decoherent waiting") {
  CHECK(decoherent_purify_step(3.0, 0.83, 0.0) == doctest::Approx(0.83));
  CHECK(decoherent_purify_step(1.0, 0.9, 1e6) == doctest::Approx(0.5));
  CHECK(decoherent_purify_step(1.0, 0.9, 0.25) ==
        doctest::Approx((1 + 0.8 * std::exp(-1.0)) / 2).epsilon(1e-12));
  CHECK(decoherent_purify_step(1.0, 0.9, 0.25) == doctest::Approx(0.647152).epsilon(1e-6));
  for (double f = 0.5; f <= 1.0; f += 0.05) {
    const double g = decoherent_purify_step(7.0, f, 2.0);
    CHECK(g >= 0.5 - 1e-15);
    CHECK(g <= f + 1e-15);
  }
  CHECK(domain_error([] { decoherent_purify_step(0.0, 0.9, 1.0); }));
}

TEST_CASE("decoherent pumping sequence") {
  auto pp = [](double) { return 0.9; };
  auto base = decoherent_pumping_sequence(100, 0.8, 1.0, pp, 1);
  REQUIRE(base.size() == 1);
  CHECK(base[0].rate == 100);
  CHECK(base[0].fidelity == 0.8);

  auto seq = decoherent_pumping_sequence(100, 0.8, 1.0, pp, 4);
  REQUIRE(seq.size() == 4);
  double f = 0.8;
  for (int i = 1; i < 4; ++i) {
    const double fp = (1 + (2 * f - 1) * std::exp(-4.0 * 1.0 / seq[i - 1].rate)) / 2;
    f = 0.8 * fp / (0.8 * fp + 0.2 * (1 - fp));
    CHECK(seq[i].rate == doctest::Approx(std::pow(0.9, i - 1) / i * 100));
    CHECK(seq[i].fidelity == doctest::Approx(f));
  }

  auto ideal = decoherent_pumping_sequence(10, 0.7, 0.0, pp, 3);
  CHECK(ideal[1].fidelity == doctest::Approx(0.49 / (0.49 + 0.09)));

  RateGrid grid({1, 2, 4, 8, 16, 32, 64, 128});
  auto snapped = decoherent_pumping_sequence(100, 0.8, 1.0, pp, 3, &grid);
  CHECK(snapped[1].rate == 128);
  CHECK(snapped[2].rate == 64);
}

TEST_CASE("fusion fidelity") {
  CHECK(fuse_fidelity(1.0, 0.83) == doctest::Approx(0.83));
  CHECK(fuse_fidelity(0.9, 0.9) == doctest::Approx(0.81));
  CHECK(fuse_fidelity(0.6, 0.7) == fuse_fidelity(0.7, 0.6));
  FusionModel worst{"min", [](double a, double b) { return std::min(a, b); }};
  CHECK(fuse_fidelity(0.6, 0.7, worst) == 0.6);
  CHECK(domain_error([] { fuse_fidelity(0.0, 0.7); }));
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>

#include "entroute/error.hpp"
#include "entroute/sim.hpp"

using namespace entroute;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::kConfigError;
}

OperationTree leaf(NodeIndex a, NodeIndex b, double rate, double f) {
  OperationTree t;
  t.kind = TreeKind::kLeaf;
  t.a = a;
  t.b = b;
  t.rate = rate;
  t.latency = 1.0 / rate;
  t.fidelity = f;
  return t;
}

OperationTree swap(OperationTree l, OperationTree r) {
  OperationTree t;
  t.kind = TreeKind::kSwap;
  t.a = l.a;
  t.b = r.b;
  t.via = l.b;
  t.children = {std::move(l), std::move(r)};
  return t;
}

OperationTree purify(OperationTree c, int i) {
  OperationTree t;
  t.kind = TreeKind::kPurify;
  t.a = c.a;
  t.b = c.b;
  t.iterations = i;
  t.children = {std::move(c)};
  return t;
}

OperationParams ideal() {
  OperationParams p;
  p.p_s = 1.0;
  p.t_s = 0.0;
  p.t_p = 0.0;
  p.t_c = 0.0;
  return p;
}

}  // namespace

TEST_CASE("a single leaf is a Poisson stream") {
  SimConfig cfg;
  cfg.duration = 100.0;
  cfg.seed = 11;
  const auto r = simulate_tree(leaf(0, 1, 100, 0.9), cfg);
  REQUIRE(r.replications.size() == 1);
  const double se = std::sqrt(100.0 / cfg.duration);
  CHECK(std::fabs(r.mean_rate - 100.0) <= 3 * se);
  CHECK(r.root_fidelity == 0.9);
  const auto d = compare_analytic(r, leaf(0, 1, 100, 0.9), 0.05);
  CHECK(d.within);
  CHECK(d.nodes.empty());
}

TEST_CASE("two-link swap tree rate") {
  SimConfig cfg;
  cfg.duration = 100.0;
  cfg.replications = 10;
  cfg.params = ideal();
  const auto tree = swap(leaf(0, 1, 100, 0.95), leaf(1, 2, 100, 0.95));
  const auto r = simulate_tree(tree, cfg);
  CHECK(r.analytic_rate == doctest::Approx(1.0 / 0.015));
  CHECK(std::fabs(r.mean_rate - r.analytic_rate) <= 0.1 * r.analytic_rate);
  CHECK(r.root_fidelity == doctest::Approx(entmath::swap_fidelity(0.95, 0.95)));
  for (const auto& rep : r.replications) CHECK(rep.min_fidelity >= r.root_fidelity - 1e-9);
}

TEST_CASE("purification acceptance fraction") {
  SimConfig cfg;
  cfg.duration = 100.0;
  cfg.replications = 4;
  cfg.params = ideal();
  const auto tree = purify(leaf(0, 1, 100, 0.7), 1);
  const auto r = simulate_tree(tree, cfg);
  std::uint64_t a = 0, s = 0;
  for (const auto& rep : r.replications) {
    a += rep.nodes[0].attempts[0];
    s += rep.nodes[0].successes[0];
  }
  REQUIRE(a > 1000);
  const double frac = static_cast<double>(s) / a;
  CHECK(std::fabs(frac - 0.68) <= 3 * std::sqrt(0.68 * 0.32 / a));
  const auto d = compare_analytic(r, tree, 1.0);
  REQUIRE(d.nodes.size() == 1);
  CHECK(d.nodes[0].analytic == doctest::Approx(0.68));
  CHECK(d.max_z <= 3.0);
  CHECK(r.root_fidelity == doctest::Approx(0.735294117647).epsilon(1e-9));
}

TEST_CASE("pumping steps are tallied separately") {
  SimConfig cfg;
  cfg.duration = 200.0;
  cfg.params = ideal();
  const auto tree = purify(leaf(0, 1, 200, 0.8), 3);
  const auto r = simulate_tree(tree, cfg);
  const auto& n = r.replications[0].nodes[0];
  REQUIRE(n.attempts.size() == 3);
  CHECK(n.attempts[0] > n.attempts[1]);
  CHECK(n.attempts[1] > n.attempts[2]);
  // A step is attempted once per success of the step before it.
  CHECK(n.successes[0] >= n.attempts[1]);
  CHECK(n.successes[0] - n.attempts[1] <= 1);
  CHECK(compare_analytic(r, tree, 1.0).max_z <= 4.0);
  CHECK(r.replications[0].delivered == n.successes[2]);
}

TEST_CASE("stochastic swaps with latency") {
  SimConfig cfg;
  cfg.duration = 50.0;
  cfg.replications = 8;
  cfg.params.p_s = 0.4;
  cfg.params.t_s = 1e-3;
  cfg.params.t_c = 1e-3;
  const auto tree = swap(swap(leaf(0, 1, 300, 0.99), leaf(1, 2, 200, 0.99)),
                         leaf(2, 3, 250, 0.99));
  const auto r = simulate_tree(tree, cfg);
  const auto d = compare_analytic(r, tree, 1.0);
  CHECK(d.max_z <= 4.0);
  CHECK(r.mean_rate > 0.0);
  MESSAGE("deep swap tree rate delta " << d.rate_delta);
}

TEST_CASE("fusion trees") {
  const VirtualStar star{0, {{1, 90, 0.95}, {2, 90, 0.95}}};
  const auto kg = RateGrid::integers(100);
  const auto t = solve_gdp_optimal(star, 0.9, kg, {});
  REQUIRE(t);
  SimConfig cfg;
  cfg.duration = 100.0;
  cfg.replications = 10;
  cfg.params = ideal();
  cfg.params.p_f = 0.4;
  const auto r = simulate_tree(*t, cfg);
  // Leaves at 90, fused with p_f = 0.4: 2/3 * 0.4 * 90 = 24.
  CHECK(r.analytic_rate == doctest::Approx(24.0));
  CHECK(std::fabs(r.mean_rate - 24.0) <= 0.05 * 24.0);
  CHECK(r.root_fidelity == doctest::Approx(0.9025));
  CHECK(compare_analytic(r, *t, 0.05).within);
}

TEST_CASE("identical configuration gives identical reports") {
  const auto tree = swap(purify(leaf(0, 1, 150, 0.8), 2), leaf(1, 2, 120, 0.9));
  SimConfig cfg;
  cfg.duration = 20.0;
  cfg.replications = 6;
  cfg.seed = 99;
  cfg.jobs = 1;
  const auto a = sim_report_to_json(simulate_tree(tree, cfg)).dump();
  cfg.jobs = 4;
  const auto b = sim_report_to_json(simulate_tree(tree, cfg)).dump();
  CHECK(a == b);
  cfg.seed = 100;
  CHECK(sim_report_to_json(simulate_tree(tree, cfg)).dump() != a);
}

TEST_CASE("event budget and configuration guards") {
  SimConfig cfg;
  cfg.duration = 0.0;
  cfg.max_events = 5000;
  const auto r = simulate_tree(leaf(0, 1, 100, 0.9), cfg);
  CHECK(r.replications[0].events == 5000);
  CHECK(r.replications[0].elapsed > 0.0);

  SimConfig none;
  none.duration = 0.0;
  CHECK(code_of([&] { simulate_tree(leaf(0, 1, 1, 0.9), none); }) == ErrorCode::kConfigError);
  SimConfig reps;
  reps.replications = 0;
  CHECK(code_of([&] { simulate_tree(leaf(0, 1, 1, 0.9), reps); }) == ErrorCode::kConfigError);
  CHECK(code_of([&] { simulate_tree(leaf(0, 1, 0, 0.9), SimConfig{}); }) ==
        ErrorCode::kConfigError);

  SimConfig one;
  one.duration = 1.0;
  const auto rep = simulate_tree(leaf(0, 1, 10, 0.9), one);
  CHECK(code_of([&] { compare_analytic(rep, swap(leaf(0, 1, 10, 0.9), leaf(1, 2, 10, 0.9)), 1); }) ==
        ErrorCode::kTreeMismatch);
}

TEST_CASE("delivery timestamps") {
  SimConfig cfg;
  cfg.duration = 1.0;
  cfg.record_timestamps = true;
  cfg.replications = 2;
  const auto r = simulate_tree(leaf(0, 1, 50, 0.9), cfg);
  for (const auto& rep : r.replications) {
    CHECK(rep.timestamps.size() == rep.delivered);
    CHECK(std::is_sorted(rep.timestamps.begin(), rep.timestamps.end()));
  }
  const auto path = std::filesystem::temp_directory_path() / "entroute_sim.csv";
  write_delivery_csv(r, path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "replication,time");
}

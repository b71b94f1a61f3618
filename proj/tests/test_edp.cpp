#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "entroute/brute_force.hpp"
#include "entroute/edp.hpp"
#include "entroute/entmath.hpp"
#include "entroute/error.hpp"
#include "entroute/rng.hpp"

using namespace entroute;

namespace {

OperationParams ideal_swaps() {
  OperationParams p;
  p.p_s = 1.0;
  p.t_s = 0.0;
  p.t_c = 0.0;
  return p;
}

QuantumNetwork random_net(std::uint64_t seed, int n) {
  CounterRng rng(seed, 0);
  std::vector<std::string> ids;
  for (int i = 0; i < n; ++i) ids.push_back("v" + std::to_string(i));
  std::vector<QuantumNetwork::LinkSpec> links;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (rng.uniform() < 0.6) {
        links.push_back({ids[i], ids[j], 10 + 90 * rng.uniform(), 0.8 + 0.19 * rng.uniform()});
      }
    }
  }
  return QuantumNetwork::from_ids(ids, links);
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an entroute::Error");
  return ErrorCode::kDomainError;
}

}  // namespace

TEST_CASE("single link gives a leaf") {
  auto net = QuantumNetwork::from_ids({"s", "d"}, {{"s", "d", 40, 0.93}});
  auto grid = FidelityGrid::standard();
  auto t = solve_edp(net, 0, 1, 0.9, grid, OperationParams{});
  REQUIRE(t);
  CHECK(t->kind == TreeKind::kLeaf);
  CHECK(t->latency == doctest::Approx(1.0 / 40));
  CHECK(t->fidelity == doctest::Approx(0.93));
}

TEST_CASE("two-link swap tree") {
  auto net = QuantumNetwork::from_ids({"s", "m", "d"},
                                      {{"s", "m", 100, 0.95}, {"m", "d", 100, 0.95}});
  auto grid = FidelityGrid::standard();
  auto p = ideal_swaps();
  auto t = solve_edp(net, 0, 2, 0.9, grid, p);
  REQUIRE(t);
  CHECK(t->kind == TreeKind::kSwap);
  CHECK(t->via == 1);
  CHECK(t->a == 0);
  CHECK(t->b == 2);
  CHECK(t->latency == doctest::Approx(0.015));
  CHECK(t->fidelity == doctest::Approx(*grid.floor(entmath::swap_fidelity(0.95, 0.95))));
  CHECK(t->path() == std::vector<NodeIndex>{0, 1, 2});

  TreeEvalOptions exact;
  exact.check_annotations = false;
  auto e = evaluate_tree(*t, p, exact);
  CHECK(e.fidelity == doctest::Approx(0.9033333333333).epsilon(1e-12));
  CHECK(e.latency == doctest::Approx(0.015));

  TreeEvalOptions floored;
  floored.grid = &grid;
  floored.net = &net;
  CHECK_NOTHROW(evaluate_tree(*t, p, floored));

  auto reversed = solve_edp(net, 2, 0, 0.9, grid, p);
  REQUIRE(reversed);
  CHECK(reversed->a == 2);
  CHECK(reversed->latency == doctest::Approx(0.015));
  CHECK(reversed->path() == std::vector<NodeIndex>{2, 1, 0});
  CHECK_NOTHROW(evaluate_tree(*reversed, p, floored));

  auto oracle = brute_force_edp(net, 0, 2, 0.9, grid, p);
  REQUIRE(oracle);
  CHECK(oracle->latency == doctest::Approx(0.015));
}

TEST_CASE("purification over a swap tree evaluates by the closed forms") {
  auto p = ideal_swaps();
  p.t_p = 0.0;
  OperationTree leaf_a{TreeKind::kLeaf, 0, 1, -1, 0, 0.95, 0.01, 100};
  OperationTree leaf_b{TreeKind::kLeaf, 1, 2, -1, 0, 0.95, 0.01, 100};
  OperationTree swap{TreeKind::kSwap, 0, 2, 1, 0, 0, 0, 0, std::nullopt, {leaf_a, leaf_b}};
  OperationTree pur{TreeKind::kPurify, 0, 2, -1, 1, 0, 0, 0, std::nullopt, {swap}};
  auto annotated = annotate_tree(pur, p);
  const double f0 = entmath::swap_fidelity(0.95, 0.95);
  CHECK(annotated.fidelity == doctest::Approx(entmath::ep_purify(f0, f0).fidelity));
  CHECK(annotated.latency == doctest::Approx(0.03));
  CHECK_NOTHROW(evaluate_tree(annotated, p));

  auto broken = annotated;
  broken.children[0].children[1].latency = 0.5;
  try {
    evaluate_tree(broken, p);
    FAIL("expected a mismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kAnnotationMismatch);
    CHECK(std::string(e.what()).find("root/0/1") != std::string::npos);
  }
}

TEST_CASE("tree JSON round trip") {
  auto net = QuantumNetwork::from_ids({"s", "m", "d"},
                                      {{"s", "m", 30, 0.8}, {"m", "d", 50, 0.85}});
  auto grid = FidelityGrid::uniform(0.5, 1.0, 0.01);
  auto t = solve_edp(net, 0, 2, 0.8, grid, OperationParams{});
  REQUIRE(t);
  auto j = tree_to_json(*t, net.nodes());
  std::vector<std::string> names = net.nodes();
  auto back = tree_from_json(j, names);
  CHECK(names == net.nodes());
  CHECK(tree_to_json(back, names) == j);
  std::vector<std::string> fresh;
  CHECK_THROWS_AS(tree_from_json(nlohmann::json{{"kind", "bogus"}}, fresh), Error);
}

TEST_CASE("demand errors") {
  auto net = QuantumNetwork::from_ids({"s", "d"}, {{"s", "d", 40, 0.93}});
  auto grid = FidelityGrid::uniform(0.6, 1.0, 0.01);
  CHECK(code_of([&] { solve_edp(net, 0, 0, 0.9, grid, {}); }) == ErrorCode::kInvalidDemand);
  CHECK(code_of([&] { solve_edp(net, 0, 1, 0.55, grid, {}); }) == ErrorCode::kInvalidDemand);
  CHECK(code_of([&] { solve_edp(net, 0, 5, 0.9, grid, {}); }) == ErrorCode::kInvalidDemand);
  CHECK(code_of([&] {
          brute_force_edp(net, 0, 1, 0.9, grid, {}, OracleLimits{9, 1});
        }) == ErrorCode::kSearchBudgetExceeded);
}

TEST_CASE("unreachable threshold yields no tree") {
  auto net = QuantumNetwork::from_ids({"s", "m", "d", "x"},
                                      {{"s", "m", 30, 0.8}, {"m", "d", 50, 0.85}});
  auto grid = FidelityGrid::standard();
  OperationParams p;
  p.i_max = 1;
  CHECK_FALSE(solve_edp(net, 0, 3, 0.6, grid, p).has_value());
  auto hard = solve_edp(net, 0, 2, 0.999, grid, p);
  auto oracle = brute_force_edp(net, 0, 2, 0.999, grid, p, {4, 2});
  CHECK(hard.has_value() == false);
  CHECK(oracle.has_value() == false);
}

TEST_CASE("purification is chosen when links are too noisy") {
  auto net = QuantumNetwork::from_ids({"s", "d"}, {{"s", "d", 50, 0.8}});
  auto grid = FidelityGrid::uniform(0.5, 1.0, 0.01);
  OperationParams p;
  auto t = solve_edp(net, 0, 1, 0.9, grid, p);
  REQUIRE(t);
  CHECK(t->kind == TreeKind::kPurify);
  CHECK(t->fidelity >= 0.9 - 1e-12);
  TreeEvalOptions opt;
  opt.grid = &grid;
  opt.net = &net;
  CHECK_NOTHROW(evaluate_tree(*t, p, opt));
}

TEST_CASE("table dominance and label-setting order") {
  auto grid = FidelityGrid::uniform(0.5, 1.0, 0.01);
  OperationParams p;
  p.i_max = 3;
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    auto net = random_net(seed, 6);
    auto table = EdpTable::build(net, grid, p);
    const auto& fin = table.finalized_latencies();
    for (std::size_t i = 1; i < fin.size(); ++i) CHECK(fin[i] >= fin[i - 1]);
    for (int u = 0; u < net.node_count(); ++u) {
      for (int v = u + 1; v < net.node_count(); ++v) {
        std::optional<double> prev;
        for (std::size_t k = 0; k < grid.size(); ++k) {
          auto l = table.latency(u, v, grid[k]);
          if (prev && l) CHECK(*prev <= *l);
          prev = l;
          if (!l) continue;
          auto t = table.tree(u, v, grid[k]);
          REQUIRE(t);
          CHECK(t->latency == doctest::Approx(*l));
          TreeEvalOptions opt;
          opt.grid = &grid;
          opt.net = &net;
          auto e = evaluate_tree(*t, p, opt);
          CHECK(e.fidelity >= grid[k] - 1e-12);
        }
      }
    }
  }
}

TEST_CASE("oracle sandwich on random small networks") {
  auto grid = FidelityGrid::uniform(0.5, 1.0, 0.01);
  OperationParams p;
  p.i_max = 2;
  int compared = 0;
  for (std::uint64_t seed = 100; seed < 130; ++seed) {
    auto net = random_net(seed, 5);
    for (double f_min : {0.85, 0.93}) {
      auto dp = solve_edp(net, 0, 4, f_min, grid, p);
      auto lo = brute_force_edp(net, 0, 4, f_min, grid, p, {4, 8}, OracleMode::kExact);
      auto hi = brute_force_edp(net, 0, 4, f_min, grid, p, {4, 8}, OracleMode::kFloored);
      CHECK(dp.has_value() == hi.has_value());
      if (dp) {
        REQUIRE(lo);
        CHECK(dp->max_purify_chain() <= 8);
        CHECK(lo->latency <= dp->latency * (1 + 1e-12));
        CHECK(dp->latency <= hi->latency * (1 + 1e-12));
        ++compared;
      }
    }
  }
  CHECK(compared >= 20);
}

TEST_CASE("decoherence changes only purified fidelities") {
  auto net = QuantumNetwork::from_ids({"s", "d"}, {{"s", "d", 50, 0.8}});
  auto grid = FidelityGrid::uniform(0.5, 1.0, 0.01);
  OperationParams p;
  p.gamma = 2.0;
  auto t = solve_edp(net, 0, 1, 0.82, grid, p);
  REQUIRE(t);
  TreeEvalOptions opt;
  opt.grid = &grid;
  CHECK_NOTHROW(evaluate_tree(*t, p, opt));
  OperationParams ideal;
  auto u = solve_edp(net, 0, 1, 0.82, grid, ideal);
  REQUIRE(u);
  CHECK(u->latency <= t->latency);
}

TEST_CASE("quantity model") {
  auto grid = FidelityGrid::uniform(0.5, 1.0, 0.01);
  OperationParams p;
  auto single = QuantumNetwork::from_ids({"s", "d"}, {{"s", "d", 4, 0.9}});
  auto t = solve_edp_quantity(single, 0, 1, 0.85, grid, p);
  REQUIRE(t);
  CHECK(*t->count == 4);

  CHECK(quantity_purify_yield(4, 0.7, 1) == 1);
  auto noisy = QuantumNetwork::from_ids({"s", "d"}, {{"s", "d", 4, 0.7}});
  auto pur = solve_edp_quantity(noisy, 0, 1, 0.73, grid, p);
  REQUIRE(pur);
  CHECK(pur->kind == TreeKind::kPurify);
  CHECK(*pur->count == 1);
  CHECK(pur->fidelity == doctest::Approx(0.73));

  auto path = QuantumNetwork::from_ids({"s", "m", "d"}, {{"s", "m", 3, 0.95}, {"m", "d", 5, 0.95}});
  auto ideal = ideal_swaps();
  auto sw = solve_edp_quantity(path, 0, 2, 0.9, grid, ideal);
  REQUIRE(sw);
  CHECK(*sw->count == 3);

  auto none = solve_edp_quantity(path, 0, 2, 0.9, grid, p);  // floor(0.4 * 3) = 1
  REQUIRE(none);
  CHECK(*none->count == 1);
  auto zero = QuantumNetwork::from_ids({"s", "m", "d"}, {{"s", "m", 2, 0.95}, {"m", "d", 2, 0.95}});
  CHECK_FALSE(solve_edp_quantity(zero, 0, 2, 0.9, grid, p).has_value());

  auto fractional = QuantumNetwork::from_ids({"s", "d"}, {{"s", "d", 2.5, 0.9}});
  CHECK(code_of([&] { solve_edp_quantity(fractional, 0, 1, 0.8, grid, p); }) ==
        ErrorCode::kDomainError);
}

TEST_CASE("quantity counts do not grow with the threshold") {
  auto grid = FidelityGrid::uniform(0.5, 1.0, 0.01);
  OperationParams p;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    CounterRng rng(seed, 9);
    std::vector<QuantumNetwork::LinkSpec> links;
    const std::vector<std::string> ids{"a", "b", "c", "d", "e"};
    for (int i = 0; i < 5; ++i)
      for (int j = i + 1; j < 5; ++j)
        if (rng.uniform() < 0.6)
          links.push_back({ids[i], ids[j], std::floor(5 + 60 * rng.uniform()),
                           0.75 + 0.24 * rng.uniform()});
    auto net = QuantumNetwork::from_ids(ids, links);
    long prev = std::numeric_limits<long>::max();
    for (std::size_t k = 0; k < grid.size(); ++k) {
      auto t = solve_edp_quantity(net, 0, 4, grid[k], grid, p);
      const long c = t ? *t->count : 0;
      CHECK(c <= prev);
      prev = c;
    }
  }
}

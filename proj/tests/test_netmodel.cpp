#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "entroute/error.hpp"
#include "entroute/grid.hpp"
#include "entroute/netio.hpp"
#include "entroute/network.hpp"
#include "entroute/waxman.hpp"

using namespace entroute;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an entroute::Error");
  return ErrorCode::kDomainError;
}

std::filesystem::path temp_file(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "entroute_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("floor to a uniform grid") {
  auto g = FidelityGrid::uniform(0.5, 1.0, 0.01);
  CHECK(g.size() == 51);
  CHECK(*g.floor(0.913) == doctest::Approx(0.91).epsilon(1e-15));
  CHECK(*g.floor(1.0) == 1.0);
  CHECK_FALSE(g.floor(0.4999).has_value());
  CHECK(*g.ceil_index(0.905) == 41);
  CHECK_FALSE(g.ceil_index(1.01).has_value());
}

TEST_CASE("floor is idempotent and never exceeds its argument") {
  auto g = FidelityGrid::standard();
  CHECK(g.size() == 101);
  for (double x = 0.5; x <= 1.0; x += 0.000731) {
    auto f = *g.floor(x);
    CHECK(f <= x + DiscreteGrid::kSnap);
    CHECK(*g.floor(f) == f);
  }
}

TEST_CASE("grid validation") {
  CHECK(code_of([] { FidelityGrid({}); }) == ErrorCode::kEmptyGrid);
  CHECK(code_of([] { FidelityGrid({0.4, 0.6}); }) == ErrorCode::kInvariantViolation);
  CHECK(code_of([] { FidelityGrid({0.7, 0.6}); }) == ErrorCode::kInvariantViolation);
  CHECK(code_of([] { RateGrid({0.0, 1.0}); }) == ErrorCode::kInvariantViolation);
}

TEST_CASE("rate grid for a network merges link rates into the geometric lattice") {
  auto net = QuantumNetwork::from_ids({"a", "b", "c"}, {{"a", "b", 10, 0.9}, {"b", "c", 3, 0.9}});
  auto g = RateGrid::for_network(net);
  std::vector<double> want{1, 2, 3, 4, 8, 10};
  CHECK(std::vector<double>(g.values().begin(), g.values().end()) == want);
}

TEST_CASE("network invariants") {
  CHECK(code_of([] {
          QuantumNetwork::from_ids({"a", "b"}, {{"a", "b", 1, 1.2}});
        }) == ErrorCode::kInvariantViolation);
  CHECK(code_of([] {
          QuantumNetwork::from_ids({"a", "b"}, {{"a", "a", 1, 0.9}});
        }) == ErrorCode::kInvariantViolation);
  CHECK(code_of([] {
          QuantumNetwork::from_ids({"a", "b"}, {{"a", "b", 1, 0.9}, {"b", "a", 2, 0.9}});
        }) == ErrorCode::kInvariantViolation);
  CHECK(code_of([] {
          QuantumNetwork::from_ids({"a", "b"}, {{"a", "b", 0, 0.9}});
        }) == ErrorCode::kInvariantViolation);
}

TEST_CASE("network file round trip") {
  WaxmanConfig cfg;
  cfg.n_nodes = 12;
  cfg.alpha = 0.6;
  cfg.seed = 5;
  auto net = waxman_generate(cfg);
  auto path = temp_file("roundtrip.json");
  save_network(net, path);
  CHECK(load_network(path) == net);
}

TEST_CASE("network file errors") {
  auto bad_fid = temp_file("bad_fid.json");
  std::ofstream(bad_fid) << R"({"nodes":["a","b"],"links":[{"a":"a","b":"b","rate":1,"fidelity":1.2}]})";
  CHECK(code_of([&] { load_network(bad_fid); }) == ErrorCode::kInvariantViolation);

  auto unknown = temp_file("unknown.json");
  std::ofstream(unknown) << R"({"nodes":["a","b"],"links":[{"a":"a","b":"z","rate":1,"fidelity":0.9}]})";
  CHECK(code_of([&] { load_network(unknown); }) == ErrorCode::kInvariantViolation);

  auto broken = temp_file("broken.json");
  std::ofstream(broken) << "{\"nodes\": [\n  \"a\",\n}";
  try {
    load_network(broken);
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kParseError);
    CHECK(std::string(e.what()).find(":3:") != std::string::npos);
  }

  auto wrong_type = temp_file("wrong_type.json");
  std::ofstream(wrong_type) << R"({"nodes":["a","b"],"links":[{"a":"a","b":"b","rate":"x","fidelity":0.9}]})";
  try {
    load_network(wrong_type);
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kParseError);
    CHECK(std::string(e.what()).find("links[0].rate") != std::string::npos);
  }
}

TEST_CASE("demand validation") {
  auto net = QuantumNetwork::from_ids({"a", "b", "c"}, {{"a", "b", 1, 0.9}});
  DemandSet ok{{{0, 1, 0.8}}, {{{0, 1, 2}, 0.7}}};
  CHECK_NOTHROW(ok.validate(net));
  DemandSet same{{{1, 1, 0.8}}, {}};
  CHECK(code_of([&] { same.validate(net); }) == ErrorCode::kInvalidDemand);
  DemandSet low{{{0, 1, 0.5}}, {}};
  CHECK(code_of([&] { low.validate(net); }) == ErrorCode::kInvalidDemand);
  DemandSet small{{}, {{{0, 1}, 0.7}}};
  CHECK(code_of([&] { small.validate(net); }) == ErrorCode::kInvalidDemand);

  auto j = demands_to_json(ok, net);
  auto back = demands_from_json(j, net);
  CHECK(back.pairs.size() == 1);
  CHECK(back.pairs[0].threshold == 0.8);
  CHECK(back.ghz[0].terminals == std::vector<NodeIndex>{0, 1, 2});
}

TEST_CASE("params overlay rejects unknown keys") {
  auto p = params_from_json({{"p_s", 0.5}, {"i_max", 3}});
  CHECK(p.p_s == 0.5);
  CHECK(p.i_max == 3);
  CHECK(p.t_s == OperationParams{}.t_s);
  CHECK(code_of([] { params_from_json({{"p_x", 1}}); }) == ErrorCode::kParseError);
  CHECK(code_of([] { params_from_json({{"p_s", 1.5}}); }) == ErrorCode::kDomainError);
}

TEST_CASE("waxman single node and determinism") {
  WaxmanConfig one;
  one.n_nodes = 1;
  auto net = waxman_generate(one);
  CHECK(net.node_count() == 1);
  CHECK(net.links().empty());

  WaxmanConfig cfg;
  cfg.seed = 42;
  cfg.alpha = 0.5;
  CHECK(waxman_generate(cfg) == waxman_generate(cfg));
  auto other = cfg;
  other.seed = 43;
  CHECK_FALSE(waxman_generate(cfg) == waxman_generate(other));
}

TEST_CASE("waxman attributes stay in range") {
  WaxmanConfig cfg;
  cfg.alpha = 0.5;
  cfg.seed = 3;
  auto net = waxman_generate(cfg);
  CHECK(net.connected());
  for (const auto& l : net.links()) {
    CHECK(l.rate >= 10.0);
    CHECK(l.rate <= 90.0);
    CHECK(l.fidelity >= 0.7);
    CHECK(l.fidelity <= 0.95);
  }
  for (const auto& p : *net.positions()) {
    CHECK(p.x >= 0.0);
    CHECK(p.x <= 100.0);
  }
}

TEST_CASE("waxman density calibration over seeds") {
  const double alpha = waxman_alpha_for_density(50, 0.4, 0.1, 11);
  CHECK(alpha > 0.0);
  CHECK(alpha <= 1.0);
  WaxmanConfig cfg;
  cfg.alpha = alpha;
  double total = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    cfg.seed = seed;
    auto net = waxman_generate(cfg);
    CHECK(net.edge_density() >= 0.05);
    CHECK(net.edge_density() <= 0.2);
    total += net.edge_density();
  }
  CHECK(total / 20 == doctest::Approx(0.1).epsilon(0.25));
}

TEST_CASE("waxman link frequency does not grow with distance") {
  WaxmanConfig cfg;
  cfg.n_nodes = 40;
  cfg.alpha = 0.8;
  cfg.beta = 0.3;
  constexpr int kBuckets = 4;
  std::array<double, kBuckets> linked{}, pairs{};
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    auto net = waxman_draw(cfg, seed);
    const auto& pos = *net.positions();
    double dmax = 0.0;
    for (int i = 0; i < net.node_count(); ++i)
      for (int j = i + 1; j < net.node_count(); ++j)
        dmax = std::max(dmax, std::hypot(pos[i].x - pos[j].x, pos[i].y - pos[j].y));
    for (int i = 0; i < net.node_count(); ++i) {
      for (int j = i + 1; j < net.node_count(); ++j) {
        const double d = std::hypot(pos[i].x - pos[j].x, pos[i].y - pos[j].y) / dmax;
        const int b = std::min(kBuckets - 1, static_cast<int>(d * kBuckets));
        pairs[b] += 1;
        if (net.link_between(i, j)) linked[b] += 1;
      }
    }
  }
  for (int b = 1; b < kBuckets; ++b) {
    if (pairs[b] < 200) continue;
    CHECK(linked[b] / pairs[b] <= linked[b - 1] / pairs[b - 1] + 0.01);
  }
}

TEST_CASE("waxman connectivity failure") {
  WaxmanConfig cfg;
  cfg.n_nodes = 30;
  cfg.alpha = 0.001;
  cfg.max_attempts = 3;
  CHECK(code_of([&] { waxman_generate(cfg); }) == ErrorCode::kConnectivityFailure);
}

// entroute command-line tool: gen-net, solve, simulate, export-lp.
//
// Exit codes: 0 solved, 3 infeasible, 1 error or usage error.
// stdout carries only the report path, or the report itself with `-o -`.

#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "entroute/edp.hpp"
#include "entroute/error.hpp"
#include "entroute/gedp.hpp"
#include "entroute/ghz.hpp"
#include "entroute/netio.hpp"
#include "entroute/sim.hpp"
#include "entroute/waxman.hpp"

using namespace entroute;
using nlohmann::json;

namespace {

constexpr int kExitSolved = 0;
constexpr int kExitError = 1;
constexpr int kExitInfeasible = 3;

// ---------------------------------------------------------------------------
// Defaults table. Built-in values come from the library structs; a JSON
// object in the file named by ENTROUTE_DEFAULTS overrides any key.

struct DefaultEntry {
  std::string key;
  json value;
  std::string doc;
};

std::vector<DefaultEntry> builtin_defaults() {
  const OperationParams p;
  const WaxmanConfig w;
  const SimConfig s;
  const GdpOptions g;
  return {
      {"grid.lo", 0.5, "lowest fidelity grid value"},
      {"grid.hi", 1.0, "highest fidelity grid value"},
      {"grid.step", 0.005, "fidelity grid step"},
      {"params.p_s", p.p_s, "swap success probability"},
      {"params.t_s", p.t_s, "swap latency (s)"},
      {"params.t_p", p.t_p, "purification latency (s)"},
      {"params.t_c", p.t_c, "classical communication latency (s)"},
      {"params.p_f", p.p_f, "fusion success probability"},
      {"params.i_max", p.i_max, "max pumping iterations per purify node"},
      {"params.gamma", p.gamma, "decoherence rate (1/s)"},
      {"net.nodes", w.n_nodes, "gen-net node count"},
      {"net.area", w.area_km, "gen-net square side (km)"},
      {"net.alpha", w.alpha, "Waxman alpha"},
      {"net.beta", w.beta, "Waxman beta"},
      {"net.rate_lo", w.rate_range.first, "lowest link rate"},
      {"net.rate_hi", w.rate_range.second, "highest link rate"},
      {"net.fid_lo", w.fid_range.first, "lowest link fidelity"},
      {"net.fid_hi", w.fid_range.second, "highest link fidelity"},
      {"seed", w.seed, "random seed"},
      {"ghz.edge_fidelity", 0.95, "stage-1 target fidelity of every star edge"},
      {"ghz.stage1", "dp", "stage-1 method (dp or lp)"},
      {"ghz.approx", "opt", "GHZ DP variant (opt, ss, ot, 2g)"},
      {"ghz.ep_levels", g.ep_levels, "EP consumption levels per edge (0: exact)"},
      {"sim.duration", s.duration, "simulated seconds per replication"},
      {"sim.max_events", s.max_events, "event budget per replication (0: none)"},
      {"sim.replications", s.replications, "replications"},
      {"sim.rate_tolerance", 0.1, "relative rate tolerance of the delta check"},
      {"jobs", s.jobs, "worker threads (0: hardware concurrency)"},
  };
}

class Defaults {
 public:
  Defaults() : entries_(builtin_defaults()) {
    for (std::size_t i = 0; i < entries_.size(); ++i) index_[entries_[i].key] = i;
  }

  void overlay_file(const std::string& path) {
    const json j = read_json_file(path);
    if (!j.is_object()) throw Error(ErrorCode::kConfigError, path + ": expected an object");
    for (const auto& [key, v] : j.items()) {
      auto it = index_.find(key);
      if (it == index_.end()) {
        throw Error(ErrorCode::kConfigError, path + ": unknown default '" + key + "'");
      }
      auto& slot = entries_[it->second].value;
      if (slot.is_string() != v.is_string() || slot.is_number() != v.is_number()) {
        throw Error(ErrorCode::kConfigError, path + ": wrong type for '" + key + "'");
      }
      slot = v;
    }
    source_ = path;
  }

  template <class T>
  T get(const std::string& key) const {
    return entries_.at(index_.at(key)).value.get<T>();
  }

  OperationParams params() const {
    OperationParams p;
    p.p_s = get<double>("params.p_s");
    p.t_s = get<double>("params.t_s");
    p.t_p = get<double>("params.t_p");
    p.t_c = get<double>("params.t_c");
    p.p_f = get<double>("params.p_f");
    p.i_max = get<int>("params.i_max");
    p.gamma = get<double>("params.gamma");
    return p;
  }

  std::string table() const {
    std::ostringstream os;
    os << "Defaults";
    if (!source_.empty()) os << " (with " << source_ << ")";
    os << ":\n";
    for (const auto& e : entries_) {
      std::string k = e.key;
      k.resize(20, ' ');
      std::string v = e.value.dump();
      v.resize(10, ' ');
      os << "  " << k << v << "  " << e.doc << "\n";
    }
    os << "Set ENTROUTE_DEFAULTS to a JSON file of {key: value} to override.\n";
    os << "Exit codes: 0 solved, 3 infeasible, 1 error.\n";
    return os.str();
  }

 private:
  std::vector<DefaultEntry> entries_;
  std::map<std::string, std::size_t> index_;
  std::string source_;
};

// ---------------------------------------------------------------------------

json manifest(const std::string& command, json inputs, json resolved) {
  return {{"tool", "entroute"},
          {"version", ENTROUTE_VERSION},
          {"command", command},
          {"inputs", std::move(inputs)},
          {"resolved", std::move(resolved)}};
}

void emit(const json& report, const std::string& out) {
  const std::string text = report.dump(2) + "\n";
  if (out == "-") {
    std::cout << text;
  } else {
    write_text_file(out, text);
    std::cout << out << "\n";
  }
}

void emit_text(const std::string& text, const std::string& out) {
  if (out == "-") {
    std::cout << text;
  } else {
    write_text_file(out, text);
    std::cout << out << "\n";
  }
}

int resolve_jobs(int jobs) {
  if (jobs > 0) return jobs;
  return std::max(1u, std::thread::hardware_concurrency());
}

// Runs f(0..n-1) on up to `jobs` threads; f writes into its own slot.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& f) {
  const std::size_t workers = std::min<std::size_t>(n, resolve_jobs(jobs));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) {
        try {
          f(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// Operation parameter flags shared by solve, simulate and export-lp.
struct ParamFlags {
  std::string file;
  std::optional<double> p_s, t_s, t_p, t_c, p_f, gamma;
  std::optional<int> i_max;

  void add(CLI::App* app) {
    app->add_option("--params", file, "JSON file of operation parameters");
    app->add_option("--p-s", p_s, "swap success probability");
    app->add_option("--t-s", t_s, "swap latency (s)");
    app->add_option("--t-p", t_p, "purification latency (s)");
    app->add_option("--t-c", t_c, "classical communication latency (s)");
    app->add_option("--p-f", p_f, "fusion success probability");
    app->add_option("--i-max", i_max, "max pumping iterations");
    app->add_option("--gamma", gamma, "decoherence rate (1/s)");
  }

  OperationParams resolve(OperationParams base) const {
    if (!file.empty()) base = params_from_json(read_json_file(file), base);
    if (p_s) base.p_s = *p_s;
    if (t_s) base.t_s = *t_s;
    if (t_p) base.t_p = *t_p;
    if (t_c) base.t_c = *t_c;
    if (p_f) base.p_f = *p_f;
    if (i_max) base.i_max = *i_max;
    if (gamma) base.gamma = *gamma;
    base.validate();
    return base;
  }
};

struct GridFlags {
  std::optional<double> lo, hi, step;

  void add(CLI::App* app) {
    app->add_option("--grid-lo", lo, "lowest fidelity grid value");
    app->add_option("--grid-hi", hi, "highest fidelity grid value");
    app->add_option("--grid-step", step, "fidelity grid step");
  }

  json resolve(const Defaults& d) const {
    return {{"lo", lo.value_or(d.get<double>("grid.lo"))},
            {"hi", hi.value_or(d.get<double>("grid.hi"))},
            {"step", step.value_or(d.get<double>("grid.step"))}};
  }
};

FidelityGrid make_grid(const json& g) {
  return FidelityGrid::uniform(g["lo"].get<double>(), g["hi"].get<double>(),
                               g["step"].get<double>());
}

// Stage-1 flags shared by the GHZ problems.
struct StarFlags {
  std::optional<double> edge_fidelity;
  std::optional<std::string> stage1;
  std::string center;

  void add(CLI::App* app) {
    app->add_option("--edge-fidelity", edge_fidelity, "stage-1 target fidelity per star edge");
    app->add_option("--stage1", stage1, "stage-1 method")->check(CLI::IsMember({"dp", "lp"}));
    app->add_option("--center", center, "fix the star center (node id)");
  }

  json resolve(const Defaults& d) const {
    json j{{"edge_fidelity", edge_fidelity.value_or(d.get<double>("ghz.edge_fidelity"))},
           {"stage1", stage1.value_or(d.get<std::string>("ghz.stage1"))}};
    if (!center.empty()) j["center"] = center;
    return j;
  }
};

VirtualStar build_star(const QuantumNetwork& net, const std::vector<NodeIndex>& terminals,
                       const json& star, const FidelityGrid& grid,
                       const OperationParams& params) {
  std::optional<NodeIndex> center;
  if (star.contains("center")) center = net.index_of(star["center"].get<std::string>());
  const auto method = star["stage1"] == "lp" ? Stage1Method::kLp : Stage1Method::kDp;
  return stage1_virtual_star(net, terminals, star["edge_fidelity"].get<double>(), grid, params,
                             method, center);
}

json star_to_json(const VirtualStar& star, const QuantumNetwork& net) {
  json edges = json::array();
  for (const auto& e : star.edges) {
    edges.push_back({{"leaf", net.node_id(e.leaf)}, {"rate", e.rate}, {"fidelity", e.fidelity}});
  }
  return {{"center", net.node_id(star.center)}, {"edges", std::move(edges)}};
}

json names_of(const QuantumNetwork& net, const std::vector<NodeIndex>& nodes) {
  json j = json::array();
  for (NodeIndex v : nodes) j.push_back(net.node_id(v));
  return j;
}

// ---------------------------------------------------------------------------
// gen-net

struct GenNetFlags {
  std::optional<int> nodes;
  std::optional<double> area, alpha, beta;
  std::vector<double> link_rate, link_fidelity;
  std::optional<std::uint64_t> seed;
  std::string out = "-";
};

int cmd_gen_net(const GenNetFlags& f, const Defaults& d) {
  WaxmanConfig cfg;
  cfg.n_nodes = f.nodes.value_or(d.get<int>("net.nodes"));
  cfg.area_km = f.area.value_or(d.get<double>("net.area"));
  cfg.alpha = f.alpha.value_or(d.get<double>("net.alpha"));
  cfg.beta = f.beta.value_or(d.get<double>("net.beta"));
  cfg.rate_range = f.link_rate.empty()
                       ? std::pair{d.get<double>("net.rate_lo"), d.get<double>("net.rate_hi")}
                       : std::pair{f.link_rate[0], f.link_rate[1]};
  cfg.fid_range = f.link_fidelity.empty()
                      ? std::pair{d.get<double>("net.fid_lo"), d.get<double>("net.fid_hi")}
                      : std::pair{f.link_fidelity[0], f.link_fidelity[1]};
  cfg.seed = f.seed.value_or(d.get<std::uint64_t>("seed"));
  if (cfg.n_nodes < 1) throw Error(ErrorCode::kConfigError, "--nodes must be at least 1");

  const auto net = waxman_generate(cfg);
  json report = network_to_json(net);
  report["manifest"] = manifest(
      "gen-net", json::object(),
      {{"nodes", cfg.n_nodes},
       {"area", cfg.area_km},
       {"alpha", cfg.alpha},
       {"beta", cfg.beta},
       {"link_rate", {cfg.rate_range.first, cfg.rate_range.second}},
       {"link_fidelity", {cfg.fid_range.first, cfg.fid_range.second}},
       {"seed", cfg.seed}});
  emit(report, f.out);
  return kExitSolved;
}

// ---------------------------------------------------------------------------
// solve

struct SolveFlags {
  std::string problem;
  std::string network;
  std::string demands;
  ParamFlags params;
  GridFlags grid;
  StarFlags star;
  bool naive = false;
  bool quantity = false;
  bool max_fidelity = false;
  std::optional<double> rate_min;
  std::optional<std::string> approx;
  std::optional<int> ep_levels;
  std::optional<int> jobs;
  std::string out = "-";
};

GdpVariant variant_of(const std::string& s) {
  if (s == "ss") return GdpVariant::kSS;
  if (s == "ot") return GdpVariant::kOT;
  if (s == "2g") return GdpVariant::k2G;
  return GdpVariant::kOptimal;
}

// Highest grid threshold whose best EDP tree still meets r_min.
std::optional<std::pair<double, OperationTree>> edp_max_fidelity(
    const QuantumNetwork& net, const PairDemand& dm, double r_min, const FidelityGrid& grid,
    const OperationParams& params, bool quantity) {
  if (quantity) {
    for (std::size_t k = grid.size(); k-- > 0;) {
      if (grid[k] < dm.threshold) break;
      auto t = solve_edp_quantity(net, dm.s, dm.d, grid[k], grid, params);
      if (t && t->count && static_cast<double>(*t->count) >= r_min) return std::pair{grid[k], *t};
    }
    return std::nullopt;
  }
  const auto table = EdpTable::build(net, grid, params);
  for (std::size_t k = grid.size(); k-- > 0;) {
    if (grid[k] < dm.threshold) break;
    const auto lat = table.latency(dm.s, dm.d, grid[k]);
    if (lat && 1.0 / *lat >= r_min) return std::pair{grid[k], *table.tree(dm.s, dm.d, grid[k])};
  }
  return std::nullopt;
}

int cmd_solve(const SolveFlags& f, const Defaults& d) {
  const bool ghz = f.problem == "gdp" || f.problem == "ggdp";
  if (f.naive && f.problem != "gedp") {
    throw Error(ErrorCode::kConfigError, "--naive applies to gedp only");
  }
  if (f.quantity && f.problem != "edp") {
    throw Error(ErrorCode::kConfigError, "--quantity applies to edp only");
  }
  if (f.max_fidelity != f.rate_min.has_value()) {
    throw Error(ErrorCode::kConfigError, "--max-fidelity and --rate-min go together");
  }
  if (f.max_fidelity && ghz) {
    throw Error(ErrorCode::kConfigError, "--max-fidelity applies to edp and gedp");
  }
  if (f.approx && f.problem != "gdp") {
    throw Error(ErrorCode::kConfigError, "--ghz-approx applies to gdp only");
  }

  const auto net = load_network(f.network);
  const auto demands = load_demands(f.demands, net);
  const auto params = f.params.resolve(d.params());
  const json grid_j = f.grid.resolve(d);
  const auto grid = make_grid(grid_j);
  const int jobs = f.jobs.value_or(d.get<int>("jobs"));

  json resolved{{"problem", f.problem},
                {"params", params_to_json(params)},
                {"grid", grid_j},
                {"naive", f.naive},
                {"quantity", f.quantity},
                {"max_fidelity", f.max_fidelity}};
  if (f.rate_min) resolved["rate_min"] = *f.rate_min;
  json report;
  bool infeasible = false;
  json results = json::array();

  if (f.problem == "edp") {
    if (demands.pairs.empty()) throw Error(ErrorCode::kNoDemand, "no pair demands in " + f.demands);
    std::vector<json> slots(demands.pairs.size());
    parallel_for(slots.size(), jobs, [&](std::size_t i) {
      const auto& dm = demands.pairs[i];
      json r{{"s", net.node_id(dm.s)}, {"d", net.node_id(dm.d)}, {"threshold", dm.threshold}};
      std::optional<OperationTree> tree;
      if (f.max_fidelity) {
        auto best = edp_max_fidelity(net, dm, *f.rate_min, grid, params, f.quantity);
        if (best) {
          r["max_fidelity"] = best->first;
          tree = std::move(best->second);
        }
      } else if (f.quantity) {
        tree = solve_edp_quantity(net, dm.s, dm.d, dm.threshold, grid, params);
      } else {
        tree = solve_edp(net, dm.s, dm.d, dm.threshold, grid, params);
      }
      if (tree) {
        r["status"] = "solved";
        r["rate"] = tree->rate;
        r["latency"] = tree->latency;
        r["fidelity"] = tree->fidelity;
        if (tree->count) r["count"] = *tree->count;
        r["tree"] = tree_to_json(*tree, net.nodes());
      } else {
        r["status"] = "infeasible";
      }
      slots[i] = std::move(r);
    });
    for (auto& r : slots) {
      infeasible |= r["status"] == "infeasible";
      results.push_back(std::move(r));
    }
  } else if (f.problem == "gedp") {
    const auto mode = f.naive ? GedpMode::kNaive : GedpMode::kFull;
    if (f.max_fidelity) {
      if (demands.pairs.empty()) {
        throw Error(ErrorCode::kNoDemand, "no pair demands in " + f.demands);
      }
      std::vector<json> slots(demands.pairs.size());
      parallel_for(slots.size(), jobs, [&](std::size_t i) {
        const auto& dm = demands.pairs[i];
        const auto search =
            max_fidelity_under_rate(net, dm.s, dm.d, *f.rate_min, grid, params, 0, mode);
        json probes = json::array();
        for (auto [t, v] : search.probes) probes.push_back({t, v});
        json r{{"s", net.node_id(dm.s)}, {"d", net.node_id(dm.d)}, {"probes", probes}};
        if (search.fidelity) {
          r["status"] = "solved";
          r["max_fidelity"] = *search.fidelity;
        } else {
          r["status"] = "infeasible";
        }
        slots[i] = std::move(r);
      });
      for (auto& r : slots) {
        infeasible |= r["status"] == "infeasible";
        results.push_back(std::move(r));
      }
    } else {
      const auto res = solve_gedp(net, demands, grid, params, mode);
      json r{{"objective", res.objective},
             {"delivered", res.delivered},
             {"vertices", res.vertex_count},
             {"arcs", res.arc_count},
             {"lp_variables", res.lp_variables},
             {"lp_rows", res.lp_rows},
             {"iterations", res.iterations},
             {"levels", levels_to_json(res.levels, net)}};
      infeasible = res.objective <= 1e-9;
      r["status"] = infeasible ? "infeasible" : "solved";
      results.push_back(std::move(r));
    }
  } else {
    if (demands.ghz.empty()) throw Error(ErrorCode::kNoDemand, "no GHZ demands in " + f.demands);
    const json star_j = f.star.resolve(d);
    resolved["star"] = star_j;
    GdpOptions gopt;
    gopt.ep_levels = f.ep_levels.value_or(d.get<int>("ghz.ep_levels"));
    report["fusion_model"] = gopt.fusion.name;

    if (f.problem == "gdp") {
      const std::string approx = f.approx.value_or(d.get<std::string>("ghz.approx"));
      resolved["ghz_approx"] = approx;
      resolved["ep_levels"] = gopt.ep_levels;
      std::vector<json> slots(demands.ghz.size());
      parallel_for(slots.size(), jobs, [&](std::size_t i) {
        const auto& dm = demands.ghz[i];
        json r{{"terminals", names_of(net, dm.terminals)}, {"threshold", dm.threshold}};
        try {
          const auto star = build_star(net, dm.terminals, star_j, grid, params);
          r["star"] = star_to_json(star, net);
          const auto res = solve_gdp(star, dm.threshold, rate_grid_for_star(star), params,
                                     variant_of(approx), gopt);
          json frontier = json::array();
          for (auto [rate, fid] : res.frontier) frontier.push_back({rate, fid});
          r["frontier"] = std::move(frontier);
          r["entries"] = res.entries;
          if (res.tree) {
            r["status"] = "solved";
            r["rate"] = res.tree->rate;
            r["fidelity"] = res.tree->fidelity;
            r["tree"] = fusion_tree_to_json(*res.tree, net.nodes());
          } else {
            r["status"] = "infeasible";
          }
        } catch (const Error& e) {
          if (e.code() != ErrorCode::kInfeasibleEdge) throw;
          r["status"] = "infeasible";
          r["reason"] = e.what();
        }
        slots[i] = std::move(r);
      });
      for (auto& r : slots) {
        infeasible |= r["status"] == "infeasible";
        results.push_back(std::move(r));
      }
    } else {
      std::vector<NodeIndex> terminals;
      for (const auto& dm : demands.ghz) {
        for (NodeIndex v : dm.terminals) {
          if (std::find(terminals.begin(), terminals.end(), v) == terminals.end()) {
            terminals.push_back(v);
          }
        }
      }
      json r{{"terminals", names_of(net, terminals)}};
      try {
        const auto star = build_star(net, terminals, star_j, grid, params);
        r["star"] = star_to_json(star, net);
        const auto res = solve_ggdp(star, demands.ghz, grid, params);
        r["objective"] = res.objective;
        r["delivered"] = res.delivered;
        r["vertices"] = res.vertex_count;
        r["arcs"] = res.arc_count;
        r["lp_variables"] = res.lp_variables;
        r["lp_rows"] = res.lp_rows;
        infeasible = res.objective <= 1e-9;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kInfeasibleEdge) throw;
        r["reason"] = e.what();
        infeasible = true;
      }
      r["status"] = infeasible ? "infeasible" : "solved";
      results.push_back(std::move(r));
    }
  }

  report["manifest"] = manifest("solve", {{"network", f.network}, {"demands", f.demands}},
                                std::move(resolved));
  report["status"] = infeasible ? "infeasible" : "solved";
  report["results"] = std::move(results);
  emit(report, f.out);
  if (infeasible) std::cerr << "entroute: infeasible\n";
  return infeasible ? kExitInfeasible : kExitSolved;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateFlags {
  std::string tree;
  std::size_t result = 0;
  ParamFlags params;
  std::optional<double> duration, rate_tolerance;
  std::optional<std::uint64_t> max_events, seed;
  std::optional<int> replications, jobs;
  std::string format = "json";
  std::string out = "-";
};

int cmd_simulate(const SimulateFlags& f, const Defaults& d) {
  const json file = read_json_file(f.tree);
  // Either a bare tree or a solve report, whose parameters become the base.
  OperationParams base = d.params();
  json tree_j = file;
  if (file.contains("results")) {
    const auto& results = file["results"];
    if (f.result >= results.size() || !results[f.result].contains("tree")) {
      throw Error(ErrorCode::kConfigError,
                  f.tree + ": result " + std::to_string(f.result) + " carries no tree");
    }
    tree_j = results[f.result]["tree"];
    if (file.contains("manifest")) {
      base = params_from_json(file["manifest"]["resolved"]["params"], base);
    }
  }

  SimConfig cfg;
  cfg.params = f.params.resolve(base);
  cfg.duration = f.duration.value_or(d.get<double>("sim.duration"));
  cfg.max_events = f.max_events.value_or(d.get<std::uint64_t>("sim.max_events"));
  cfg.seed = f.seed.value_or(d.get<std::uint64_t>("seed"));
  cfg.replications = f.replications.value_or(d.get<int>("sim.replications"));
  cfg.jobs = f.jobs.value_or(d.get<int>("jobs"));
  cfg.record_timestamps = f.format == "csv";
  const double tol = f.rate_tolerance.value_or(d.get<double>("sim.rate_tolerance"));

  std::vector<std::string> names;
  SimReport rep;
  DeltaSummary delta;
  if (tree_j.contains("subset")) {
    const auto tree = fusion_tree_from_json(tree_j, names);
    rep = simulate_tree(tree, cfg);
    delta = compare_analytic(rep, tree, tol);
  } else {
    const auto tree = tree_from_json(tree_j, names);
    rep = simulate_tree(tree, cfg);
    delta = compare_analytic(rep, tree, tol);
  }

  if (f.format == "csv") {
    std::ostringstream os;
    os << "replication,time\n";
    for (std::size_t r = 0; r < rep.replications.size(); ++r) {
      for (double t : rep.replications[r].timestamps) {
        os << r << "," << json(t).dump() << "\n";
      }
    }
    emit_text(os.str(), f.out);
    return kExitSolved;
  }

  json report;
  report["manifest"] = manifest("simulate", {{"tree", f.tree}, {"result", f.result}},
                                {{"params", params_to_json(cfg.params)},
                                 {"duration", cfg.duration},
                                 {"max_events", cfg.max_events},
                                 {"seed", cfg.seed},
                                 {"replications", cfg.replications},
                                 {"rate_tolerance", tol}});
  report["simulation"] = sim_report_to_json(rep);
  report["delta"] = delta_summary_to_json(delta);
  emit(report, f.out);
  return kExitSolved;
}

// ---------------------------------------------------------------------------
// export-lp

struct ExportFlags {
  std::string problem = "gedp";
  std::string network;
  std::string demands;
  ParamFlags params;
  GridFlags grid;
  StarFlags star;
  bool naive = false;
  std::string format = "mps";
  std::string out = "-";
};

int cmd_export_lp(const ExportFlags& f, const Defaults& d) {
  const auto net = load_network(f.network);
  const auto demands = load_demands(f.demands, net);
  const auto params = f.params.resolve(d.params());
  const json grid_j = f.grid.resolve(d);
  const auto grid = make_grid(grid_j);
  json resolved{{"problem", f.problem},
                {"params", params_to_json(params)},
                {"grid", grid_j},
                {"naive", f.naive},
                {"format", f.format}};

  LpModel model;
  if (f.problem == "gedp") {
    const auto hg = build_hypergraph(net, demands, grid);
    model = build_lp(hg, params, f.naive ? GedpMode::kNaive : GedpMode::kFull).model;
  } else {
    if (demands.ghz.empty()) throw Error(ErrorCode::kNoDemand, "no GHZ demands in " + f.demands);
    std::vector<NodeIndex> terminals;
    for (const auto& dm : demands.ghz) {
      for (NodeIndex v : dm.terminals) {
        if (std::find(terminals.begin(), terminals.end(), v) == terminals.end()) {
          terminals.push_back(v);
        }
      }
    }
    const json star_j = f.star.resolve(d);
    resolved["star"] = star_j;
    const auto star = build_star(net, terminals, star_j, grid, params);
    model = build_ggdp_lp(star, demands.ghz, grid, params).model;
  }

  const auto fmt = f.format == "lp" ? LpFormat::kLpText : LpFormat::kMps;
  const json m = manifest("export-lp", {{"network", f.network}, {"demands", f.demands}},
                          std::move(resolved));
  // The manifest rides along as a comment line.
  const std::string comment = (fmt == LpFormat::kMps ? "* " : "\\ ") + m.dump() + "\n";
  emit_text(comment + format_lp(model, fmt), f.out);
  return kExitSolved;
}

}  // namespace

int main(int argc, char** argv) {
  Defaults defaults;
  try {
    if (const char* path = std::getenv("ENTROUTE_DEFAULTS"); path && *path) {
      defaults.overlay_file(path);
    }
  } catch (const std::exception& e) {
    std::cerr << "entroute: " << e.what() << "\n";
    return kExitError;
  }

  CLI::App app{"entroute: entanglement routing solvers and simulator"};
  app.footer(defaults.table());
  app.require_subcommand(1);

  GenNetFlags gen;
  auto* gen_cmd = app.add_subcommand("gen-net", "generate a Waxman network file");
  gen_cmd->add_option("--nodes", gen.nodes, "node count")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--area", gen.area, "square side (km)")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--alpha", gen.alpha, "Waxman alpha");
  gen_cmd->add_option("--beta", gen.beta, "Waxman beta");
  gen_cmd->add_option("--link-rate", gen.link_rate, "link rate range LO HI")->expected(2);
  gen_cmd->add_option("--link-fidelity", gen.link_fidelity, "link fidelity range LO HI")
      ->expected(2);
  gen_cmd->add_option("--seed", gen.seed, "random seed");
  gen_cmd->add_option("-o,--out", gen.out, "output file, - for stdout");

  SolveFlags solve;
  auto* solve_cmd = app.add_subcommand("solve", "solve a routing problem");
  solve_cmd->add_option("problem", solve.problem, "edp, gedp, gdp or ggdp")
      ->required()
      ->check(CLI::IsMember({"edp", "gedp", "gdp", "ggdp"}));
  solve_cmd->add_option("--network", solve.network, "network file")->required();
  solve_cmd->add_option("--demands", solve.demands, "demand file")->required();
  solve.params.add(solve_cmd);
  solve.grid.add(solve_cmd);
  solve.star.add(solve_cmd);
  solve_cmd->add_flag("--naive", solve.naive, "gedp: purify only demanded pairs");
  solve_cmd->add_flag("--quantity", solve.quantity, "edp: integer copy-count model");
  solve_cmd->add_flag("--max-fidelity", solve.max_fidelity,
                      "maximize the threshold subject to --rate-min");
  solve_cmd->add_option("--rate-min", solve.rate_min, "rate floor for --max-fidelity");
  solve_cmd->add_option("--ghz-approx", solve.approx, "gdp variant")
      ->check(CLI::IsMember({"opt", "ss", "ot", "2g"}));
  solve_cmd->add_option("--ep-levels", solve.ep_levels, "gdp EP consumption levels per edge");
  solve_cmd->add_option("--jobs", solve.jobs, "worker threads");
  solve_cmd->add_option("-o,--out", solve.out, "report file, - for stdout");

  SimulateFlags sim;
  auto* sim_cmd = app.add_subcommand("simulate", "simulate a tree");
  sim_cmd->add_option("--tree", sim.tree, "tree file or solve report")->required();
  sim_cmd->add_option("--result", sim.result, "result index within a solve report");
  sim.params.add(sim_cmd);
  sim_cmd->add_option("--duration", sim.duration, "simulated seconds per replication");
  sim_cmd->add_option("--max-events", sim.max_events, "event budget per replication");
  sim_cmd->add_option("--seed", sim.seed, "random seed");
  sim_cmd->add_option("--replications", sim.replications, "replications");
  sim_cmd->add_option("--rate-tolerance", sim.rate_tolerance, "relative rate tolerance");
  sim_cmd->add_option("--jobs", sim.jobs, "worker threads");
  sim_cmd->add_option("--format", sim.format, "json or csv (delivery times)")
      ->check(CLI::IsMember({"json", "csv"}));
  sim_cmd->add_option("-o,--out", sim.out, "report file, - for stdout");

  ExportFlags exp;
  auto* exp_cmd = app.add_subcommand("export-lp", "write the LP of gedp or ggdp");
  exp_cmd->add_option("problem", exp.problem, "gedp or ggdp")
      ->check(CLI::IsMember({"gedp", "ggdp"}));
  exp_cmd->add_option("--network", exp.network, "network file")->required();
  exp_cmd->add_option("--demands", exp.demands, "demand file")->required();
  exp.params.add(exp_cmd);
  exp.grid.add(exp_cmd);
  exp.star.add(exp_cmd);
  exp_cmd->add_flag("--naive", exp.naive, "gedp: purify only demanded pairs");
  exp_cmd->add_option("--format", exp.format, "mps or lp")
      ->check(CLI::IsMember({"mps", "lp"}));
  exp_cmd->add_option("-o,--out", exp.out, "output file, - for stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitError;
  }

  try {
    if (*gen_cmd) return cmd_gen_net(gen, defaults);
    if (*solve_cmd) return cmd_solve(solve, defaults);
    if (*sim_cmd) return cmd_simulate(sim, defaults);
    if (*exp_cmd) return cmd_export_lp(exp, defaults);
  } catch (const std::exception& e) {
    std::cerr << "entroute: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

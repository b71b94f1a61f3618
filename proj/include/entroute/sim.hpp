#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "entroute/ghz.hpp"
#include "entroute/network.hpp"
#include "entroute/tree.hpp"

namespace entroute {

struct SimConfig {
  double duration = 100.0;       // simulated seconds; 0 to rely on max_events
  std::uint64_t max_events = 0;  // 0: no event budget
  std::uint64_t seed = 1;
  OperationParams params;
  int replications = 1;
  int jobs = 0;                  // worker threads; 0: hardware concurrency
  bool record_timestamps = false;

  // CONFIG_ERROR when neither a duration nor an event budget is set, or
  // replications < 1.
  void validate() const;
};

// Counters for one tree node in preorder. Purification nodes report one
// entry per pumping step; other stochastic nodes report a single step.
struct NodeTally {
  std::string kind;
  std::vector<std::uint64_t> attempts;
  std::vector<std::uint64_t> successes;
  std::vector<double> analytic_p;
};

struct ReplicationReport {
  std::uint64_t delivered = 0;
  double elapsed = 0.0;  // simulated seconds covered
  double empirical_rate = 0.0;
  double mean_fidelity = 0.0;
  double min_fidelity = 0.0;
  std::uint64_t events = 0;
  std::vector<NodeTally> nodes;
  std::vector<double> timestamps;  // when recorded
};

struct SimReport {
  std::string tree_signature;  // preorder node kinds
  OperationParams params;
  double analytic_rate = 0.0;
  double root_fidelity = 0.0;  // analytic fidelity of every delivered state
  std::vector<ReplicationReport> replications;
  double mean_rate = 0.0;
  double rate_stderr = 0.0;    // across replications; 0 with one replication
  double rate_delta = 0.0;     // (mean_rate - analytic_rate) / analytic_rate
};

// Waiting-protocol event simulation. Leaves emit Poisson streams at their
// rates; each internal node holds one waiting state per operand and fires
// once all operands are present and its own output slot is free. A
// purification node takes its target and then its sacrificial states from
// the same child. Failed operations discard only their operands.
// Replication r draws from streams keyed by (seed, r, node, purpose).
SimReport simulate_tree(const OperationTree& tree, const SimConfig& cfg);
SimReport simulate_tree(const FusionTree& tree, const SimConfig& cfg);

struct NodeDelta {
  std::size_t node;
  std::size_t step;
  double empirical;
  double analytic;
  double stderr_;
  double z;  // |empirical - analytic| / stderr_
};

struct DeltaSummary {
  double rate_delta = 0.0;
  std::vector<NodeDelta> nodes;
  double max_z = 0.0;
  bool within = true;
};

// Relative rate delta and per-step acceptance fractions pooled over the
// replications. `within` holds when |rate_delta| <= rate_tolerance and every
// step is within z_tolerance standard errors. TREE_MISMATCH when the report
// was produced from a different tree shape.
DeltaSummary compare_analytic(const SimReport& report, const OperationTree& tree,
                              double rate_tolerance, double z_tolerance = 3.0);
DeltaSummary compare_analytic(const SimReport& report, const FusionTree& tree,
                              double rate_tolerance, double z_tolerance = 3.0);

nlohmann::json sim_report_to_json(const SimReport& report);
nlohmann::json delta_summary_to_json(const DeltaSummary& d);
// One row per delivery: replication, time.
void write_delivery_csv(const SimReport& report, const std::filesystem::path& path);

}  // namespace entroute

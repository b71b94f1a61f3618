#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "entroute/grid.hpp"
#include "entroute/network.hpp"

namespace entroute {

enum class TreeKind { kLeaf, kSwap, kPurify };

std::string_view to_string(TreeKind kind);

// Purification-augmented swapping tree. LEAF has no children, PURIFY one
// (producing the same pair), SWAP two producing (a, via) and (via, b).
struct OperationTree {
  TreeKind kind = TreeKind::kLeaf;
  NodeIndex a = 0;
  NodeIndex b = 0;
  NodeIndex via = -1;   // SWAP only
  int iterations = 0;   // PURIFY only
  double fidelity = 0.0;
  double latency = 0.0;
  double rate = 0.0;
  std::optional<long> count;  // quantity model only
  std::vector<OperationTree> children;

  int node_count() const;
  int leaf_count() const;
  // Longest run of directly nested PURIFY nodes.
  int max_purify_chain() const;
  // Node sequence of the underlying path, from a to b.
  std::vector<NodeIndex> path() const;
};

struct PurifyResult {
  double fidelity;
  double latency;
};

// Result of `iterations` pumping steps over an operand with the given
// fidelity/latency. With gamma > 0 the fidelity follows the decoherent pumping
// recursion instead of ideal pumping; latency always follows the iterated
// purification latency model.
PurifyResult purify_step_result(double fidelity, double latency, int iterations,
                                const OperationParams& params);

struct TreeEvalOptions {
  const FidelityGrid* grid = nullptr;    // floor every node's fidelity when set
  const QuantumNetwork* net = nullptr;   // check leaves against link data
  double tolerance = 1e-9;
  bool check_annotations = true;
};

struct TreeEval {
  double fidelity;
  double latency;
};

// Recomputes annotations bottom-up. Throws ANNOTATION_MISMATCH naming the
// offending node path (e.g. "root/0/1") when stored values disagree.
TreeEval evaluate_tree(const OperationTree& tree, const OperationParams& params,
                       const TreeEvalOptions& options = {});

// Returns a copy whose annotations are recomputed from the leaves.
OperationTree annotate_tree(OperationTree tree, const OperationParams& params,
                            const FidelityGrid* grid = nullptr);

nlohmann::json tree_to_json(const OperationTree& tree,
                            const std::vector<std::string>& names);
// Interns node ids into `names`, appending unseen ones.
OperationTree tree_from_json(const nlohmann::json& j, std::vector<std::string>& names);

}  // namespace entroute

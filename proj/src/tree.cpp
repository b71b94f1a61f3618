#include "entroute/tree.hpp"

#include <algorithm>
#include <cmath>

#include "entroute/entmath.hpp"
#include "entroute/error.hpp"

namespace entroute {

using nlohmann::json;

std::string_view to_string(TreeKind kind) {
  switch (kind) {
    case TreeKind::kLeaf: return "leaf";
    case TreeKind::kSwap: return "swap";
    case TreeKind::kPurify: return "purify";
  }
  return "?";
}

int OperationTree::node_count() const {
  int n = 1;
  for (const auto& c : children) n += c.node_count();
  return n;
}

int OperationTree::leaf_count() const {
  if (kind == TreeKind::kLeaf) return 1;
  int n = 0;
  for (const auto& c : children) n += c.leaf_count();
  return n;
}

int OperationTree::max_purify_chain() const {
  int best = 0;
  for (const auto& c : children) best = std::max(best, c.max_purify_chain());
  if (kind == TreeKind::kPurify) {
    int run = 1;
    const OperationTree* t = &children.front();
    while (t->kind == TreeKind::kPurify) {
      ++run;
      t = &t->children.front();
    }
    best = std::max(best, run);
  }
  return best;
}

std::vector<NodeIndex> OperationTree::path() const {
  switch (kind) {
    case TreeKind::kLeaf: return {a, b};
    case TreeKind::kPurify: {
      auto p = children.front().path();
      if (p.front() != a) std::reverse(p.begin(), p.end());
      return p;
    }
    case TreeKind::kSwap: {
      auto left = children[0].path();
      auto right = children[1].path();
      if (left.front() != a) std::reverse(left.begin(), left.end());
      if (right.front() != via) std::reverse(right.begin(), right.end());
      left.insert(left.end(), right.begin() + 1, right.end());
      return left;
    }
  }
  return {};
}

PurifyResult purify_step_result(double fidelity, double latency, int iterations,
                                const OperationParams& params) {
  const double l = entmath::iterated_purify_latency(latency, fidelity, iterations, params);
  if (params.gamma > 0.0) {
    auto seq = entmath::decoherent_pumping_sequence(
        1.0 / latency, fidelity, params.gamma,
        [](double f) { return entmath::ep_purify(f, f).success_prob; }, iterations + 1);
    return {seq.back().fidelity, l};
  }
  return {entmath::iterated_purify(fidelity, iterations).back().fidelity, l};
}

namespace {

struct Evaluator {
  const OperationParams& params;
  const TreeEvalOptions& opt;

  double floor_fid(double f, const std::string& where) const {
    if (!opt.grid) return f;
    auto g = opt.grid->floor(f);
    if (!g) {
      throw Error(ErrorCode::kAnnotationMismatch,
                  where + ": fidelity " + std::to_string(f) + " below grid minimum");
    }
    return *g;
  }

  void check(const OperationTree& t, double fid, double lat, const std::string& where) const {
    if (!opt.check_annotations) return;
    auto off = [&](double stored, double actual) {
      return std::fabs(stored - actual) > opt.tolerance * std::max(1.0, std::fabs(actual));
    };
    if (off(t.fidelity, fid) || off(t.latency, lat) ||
        (t.rate != 0.0 && off(t.rate, 1.0 / lat))) {
      throw Error(ErrorCode::kAnnotationMismatch,
                  where + ": stored (" + std::to_string(t.fidelity) + ", " +
                      std::to_string(t.latency) + ") vs recomputed (" +
                      std::to_string(fid) + ", " + std::to_string(lat) + ")");
    }
  }

  TreeEval operator()(const OperationTree& t, const std::string& where) const {
    double fid = 0.0, lat = 0.0;
    switch (t.kind) {
      case TreeKind::kLeaf: {
        if (!t.children.empty()) {
          throw Error(ErrorCode::kAnnotationMismatch, where + ": leaf with children");
        }
        if (opt.net) {
          const Link* link = opt.net->link_between(t.a, t.b);
          if (!link) {
            throw Error(ErrorCode::kAnnotationMismatch, where + ": leaf is not a link");
          }
          fid = link->fidelity;
          lat = 1.0 / link->rate;
        } else {
          fid = t.fidelity;
          lat = t.latency;
        }
        fid = floor_fid(fid, where);
        break;
      }
      case TreeKind::kSwap: {
        if (t.children.size() != 2) {
          throw Error(ErrorCode::kAnnotationMismatch, where + ": swap needs two children");
        }
        const auto& l = t.children[0];
        const auto& r = t.children[1];
        auto has = [](const OperationTree& c, NodeIndex x, NodeIndex y) {
          return (c.a == x && c.b == y) || (c.a == y && c.b == x);
        };
        if (!has(l, t.a, t.via) || !has(r, t.via, t.b)) {
          throw Error(ErrorCode::kAnnotationMismatch,
                      where + ": swap children do not meet at the swap node");
        }
        auto le = (*this)(l, where + "/0");
        auto re = (*this)(r, where + "/1");
        fid = floor_fid(entmath::swap_fidelity(le.fidelity, re.fidelity), where);
        lat = entmath::swap_latency(le.latency, re.latency, params);
        break;
      }
      case TreeKind::kPurify: {
        if (t.children.size() != 1) {
          throw Error(ErrorCode::kAnnotationMismatch, where + ": purify needs one child");
        }
        const auto& c = t.children[0];
        if (!((c.a == t.a && c.b == t.b) || (c.a == t.b && c.b == t.a))) {
          throw Error(ErrorCode::kAnnotationMismatch,
                      where + ": purify child produces a different pair");
        }
        auto ce = (*this)(c, where + "/0");
        if (!(ce.fidelity > 0.5)) {
          throw Error(ErrorCode::kAnnotationMismatch,
                      where + ": purification operand fidelity must exceed 0.5");
        }
        auto pr = purify_step_result(ce.fidelity, ce.latency, t.iterations, params);
        fid = floor_fid(pr.fidelity, where);
        lat = pr.latency;
        break;
      }
    }
    check(t, fid, lat, where);
    return {fid, lat};
  }
};

OperationTree annotate_impl(OperationTree t, const OperationParams& params,
                            const FidelityGrid* grid) {
  for (auto& c : t.children) c = annotate_impl(std::move(c), params, grid);
  TreeEvalOptions opt;
  opt.grid = grid;
  opt.check_annotations = false;
  OperationTree shallow = t;
  auto e = Evaluator{params, opt}(shallow, "root");
  t.fidelity = e.fidelity;
  t.latency = e.latency;
  t.rate = 1.0 / e.latency;
  return t;
}

}  // namespace

TreeEval evaluate_tree(const OperationTree& tree, const OperationParams& params,
                       const TreeEvalOptions& options) {
  return Evaluator{params, options}(tree, "root");
}

OperationTree annotate_tree(OperationTree tree, const OperationParams& params,
                            const FidelityGrid* grid) {
  return annotate_impl(std::move(tree), params, grid);
}

json tree_to_json(const OperationTree& t, const std::vector<std::string>& names) {
  json j;
  j["kind"] = std::string(to_string(t.kind));
  j["pair"] = {names.at(t.a), names.at(t.b)};
  if (t.kind == TreeKind::kSwap) j["via"] = names.at(t.via);
  if (t.kind == TreeKind::kPurify) j["iterations"] = t.iterations;
  j["fidelity"] = t.fidelity;
  j["latency"] = t.latency;
  j["rate"] = t.rate;
  if (t.count) j["count"] = *t.count;
  if (!t.children.empty()) {
    json kids = json::array();
    for (const auto& c : t.children) kids.push_back(tree_to_json(c, names));
    j["children"] = std::move(kids);
  }
  return j;
}

namespace {

NodeIndex intern(const json& v, std::vector<std::string>& names) {
  if (!v.is_string()) throw Error(ErrorCode::kParseError, "tree node id must be a string");
  const auto id = v.get<std::string>();
  auto it = std::find(names.begin(), names.end(), id);
  if (it != names.end()) return static_cast<NodeIndex>(it - names.begin());
  names.push_back(id);
  return static_cast<NodeIndex>(names.size() - 1);
}

}  // namespace

OperationTree tree_from_json(const json& j, std::vector<std::string>& names) {
  if (!j.is_object()) throw Error(ErrorCode::kParseError, "tree node must be an object");
  OperationTree t;
  try {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "leaf") t.kind = TreeKind::kLeaf;
    else if (kind == "swap") t.kind = TreeKind::kSwap;
    else if (kind == "purify") t.kind = TreeKind::kPurify;
    else throw Error(ErrorCode::kParseError, "unknown tree node kind '" + kind + "'");
    const json& pair = j.at("pair");
    if (!pair.is_array() || pair.size() != 2) {
      throw Error(ErrorCode::kParseError, "tree pair must be [a, b]");
    }
    t.a = intern(pair[0], names);
    t.b = intern(pair[1], names);
    if (t.kind == TreeKind::kSwap) t.via = intern(j.at("via"), names);
    if (t.kind == TreeKind::kPurify) t.iterations = j.at("iterations").get<int>();
    t.fidelity = j.at("fidelity").get<double>();
    t.latency = j.at("latency").get<double>();
    t.rate = j.value("rate", 1.0 / t.latency);
    if (j.contains("count")) t.count = j.at("count").get<long>();
    if (j.contains("children")) {
      for (const auto& c : j.at("children")) t.children.push_back(tree_from_json(c, names));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("tree: ") + e.what());
  }
  const std::size_t want = t.kind == TreeKind::kLeaf ? 0 : t.kind == TreeKind::kPurify ? 1 : 2;
  if (t.children.size() != want) {
    throw Error(ErrorCode::kParseError, "tree node has the wrong number of children");
  }
  return t;
}

}  // namespace entroute

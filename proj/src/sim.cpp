#include "entroute/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <queue>
#include <thread>

#include "entroute/entmath.hpp"
#include "entroute/error.hpp"
#include "entroute/rng.hpp"

namespace entroute {

void SimConfig::validate() const {
  if (!(duration >= 0.0) || !std::isfinite(duration)) {
    throw Error(ErrorCode::kConfigError, "simulation duration must be finite and >= 0");
  }
  if (duration == 0.0 && max_events == 0) {
    throw Error(ErrorCode::kConfigError,
                "simulation needs a positive duration or an event budget");
  }
  if (replications < 1) throw Error(ErrorCode::kConfigError, "replications must be >= 1");
  if (jobs < 0) throw Error(ErrorCode::kConfigError, "jobs must be >= 0");
  params.validate();
}

namespace {

enum class Role { kSource, kPair, kPump };

struct SimNode {
  Role role;
  std::string kind;
  double rate = 0.0;     // sources
  double latency = 0.0;  // operation duration
  std::vector<double> p; // per step
  std::vector<int> kids;
  int parent = -1;
  int slot = 0;          // index among the parent's kids
};

struct Model {
  std::vector<SimNode> nodes;  // preorder, root first
  double analytic_rate = 0.0;
  double root_fidelity = 0.0;
  std::string signature;
};

SimNode make_node(Role role, std::string kind, double rate, double latency = 0.0,
                  std::vector<double> p = {}) {
  SimNode n;
  n.role = role;
  n.kind = std::move(kind);
  n.rate = rate;
  n.latency = latency;
  n.p = std::move(p);
  return n;
}

[[noreturn]] void bad_tree(const std::string& what) {
  throw Error(ErrorCode::kConfigError, "cannot simulate tree: " + what);
}

int add_node(Model& m, SimNode n, int parent) {
  const int id = static_cast<int>(m.nodes.size());
  n.parent = parent;
  if (parent >= 0) {
    n.slot = static_cast<int>(m.nodes[parent].kids.size());
    m.nodes[parent].kids.push_back(id);
  }
  if (!m.signature.empty()) m.signature += ",";
  m.signature += n.kind;
  m.nodes.push_back(std::move(n));
  return id;
}

struct Analytic {
  double fidelity;
  double latency;
};

Analytic build_op(Model& m, const OperationTree& t, const OperationParams& prm, int parent) {
  const double comm = prm.t_c;
  switch (t.kind) {
    case TreeKind::kLeaf: {
      const double rate = t.rate > 0.0 ? t.rate : (t.latency > 0.0 ? 1.0 / t.latency : 0.0);
      if (!(rate > 0.0) || !std::isfinite(rate)) bad_tree("leaf without a positive rate");
      add_node(m, make_node(Role::kSource, "leaf", rate), parent);
      return {t.fidelity, 1.0 / rate};
    }
    case TreeKind::kSwap: {
      if (t.children.size() != 2) bad_tree("swap needs two children");
      const int id =
          add_node(m, make_node(Role::kPair, "swap", 0.0, prm.t_s + comm, {prm.p_s}), parent);
      const auto a = build_op(m, t.children[0], prm, id);
      const auto b = build_op(m, t.children[1], prm, id);
      return {entmath::swap_fidelity(a.fidelity, b.fidelity),
              entmath::swap_latency(a.latency, b.latency, prm)};
    }
    case TreeKind::kPurify: {
      if (t.children.size() != 1) bad_tree("purify needs one child");
      if (t.iterations < 1) bad_tree("purify needs at least one iteration");
      const int id = add_node(m, make_node(Role::kPump, "purify", 0.0, prm.t_p + comm), parent);
      const auto c = build_op(m, t.children[0], prm, id);
      const auto seq = entmath::iterated_purify(c.fidelity, t.iterations);
      for (int j = 1; j <= t.iterations; ++j) m.nodes[id].p.push_back(seq[j].success_prob);
      const auto r = purify_step_result(c.fidelity, c.latency, t.iterations, prm);
      return {r.fidelity, r.latency};
    }
  }
  bad_tree("unknown node");
}

Analytic build_fusion(Model& m, const FusionTree& t, const OperationParams& prm, int parent) {
  const int n = static_cast<int>(t.subset.size());
  switch (t.kind) {
    case FusionKind::kLeaf: {
      if (!(t.rate > 0.0)) bad_tree("leaf without a positive rate");
      add_node(m, make_node(Role::kSource, "leaf", t.rate), parent);
      return {t.fidelity, 1.0 / t.rate};
    }
    case FusionKind::kFuse:
    case FusionKind::kSubsetPurify: {
      if (t.children.size() != 2) bad_tree("binary node needs two children");
      const bool fuse = t.kind == FusionKind::kFuse;
      const int id = add_node(
          m, make_node(Role::kPair, std::string(to_string(t.kind)), 0.0,
                       (fuse ? prm.t_s : prm.t_p) + prm.t_c),
          parent);
      const auto a = build_fusion(m, t.children[0], prm, id);
      const auto b = build_fusion(m, t.children[1], prm, id);
      const double p =
          fuse ? prm.p_f
               : entmath::ghz_purify(n, static_cast<int>(t.children[1].subset.size()),
                                     a.fidelity, b.fidelity)
                     .success_prob;
      m.nodes[id].p = {p};
      return {t.fidelity,
              (1.5 * std::max(a.latency, b.latency) + m.nodes[id].latency) / p};
    }
    case FusionKind::kSelfPurify: {
      if (t.children.size() != 1) bad_tree("self purification needs one child");
      const int id =
          add_node(m, make_node(Role::kPump, "self_purify", 0.0, prm.t_p + prm.t_c), parent);
      const auto c = build_fusion(m, t.children[0], prm, id);
      const double p = entmath::ghz_purify(n, n, c.fidelity, c.fidelity).success_prob;
      m.nodes[id].p = {p};
      return {t.fidelity, (2.0 * c.latency + m.nodes[id].latency) / p};
    }
  }
  bad_tree("unknown node");
}

Model model_of(const OperationTree& t, const OperationParams& prm) {
  Model m;
  const auto a = build_op(m, t, prm, -1);
  m.analytic_rate = 1.0 / a.latency;
  m.root_fidelity = a.fidelity;
  return m;
}

Model model_of(const FusionTree& t, const OperationParams& prm) {
  Model m;
  const auto a = build_fusion(m, t, prm, -1);
  m.analytic_rate = 1.0 / a.latency;
  m.root_fidelity = a.fidelity;
  return m;
}

enum class Purpose : std::uint64_t { kArrival = 0, kOutcome = 1 };

std::uint64_t stream_key(int replication, int node, Purpose purpose) {
  return (static_cast<std::uint64_t>(replication) + 1) << 32 |
         static_cast<std::uint64_t>(node) << 1 | static_cast<std::uint64_t>(purpose);
}

class Replication {
 public:
  Replication(const Model& m, const SimConfig& cfg, int index) : m_(m), cfg_(cfg) {
    const std::size_t N = m.nodes.size();
    state_.resize(N);
    for (std::size_t v = 0; v < N; ++v) {
      const auto& n = m.nodes[v];
      state_[v].slots.assign(n.kids.size(), 0);
      arrivals_.emplace_back(cfg.seed, stream_key(index, static_cast<int>(v), Purpose::kArrival));
      outcomes_.emplace_back(cfg.seed, stream_key(index, static_cast<int>(v), Purpose::kOutcome));
      NodeTally tally{n.kind, {}, {}, n.p};
      const std::size_t steps = n.role == Role::kSource ? 1 : n.p.size();
      tally.attempts.assign(steps, 0);
      tally.successes.assign(steps, 0);
      report_.nodes.push_back(std::move(tally));
    }
  }

  ReplicationReport run() {
    for (std::size_t v = 0; v < m_.nodes.size(); ++v) {
      if (m_.nodes[v].role == Role::kSource) {
        push(arrivals_[v].exponential(m_.nodes[v].rate), static_cast<int>(v), kEmit);
      }
    }
    bool budget_hit = false;
    while (!queue_.empty()) {
      const Event e = queue_.top();
      if (cfg_.duration > 0.0 && e.t > cfg_.duration) break;
      if (cfg_.max_events > 0 && report_.events >= cfg_.max_events) {
        budget_hit = true;
        break;
      }
      queue_.pop();
      now_ = e.t;
      ++report_.events;
      if (e.type == kEmit) {
        emit(e.node);
      } else {
        complete(e.node);
      }
    }
    report_.elapsed = cfg_.duration > 0.0 && !budget_hit ? cfg_.duration : now_;
    report_.empirical_rate = report_.elapsed > 0.0 ? report_.delivered / report_.elapsed : 0.0;
    // Every delivered state carries the same analytic fidelity.
    report_.mean_fidelity = report_.delivered ? m_.root_fidelity : 0.0;
    report_.min_fidelity = report_.mean_fidelity;
    return std::move(report_);
  }

 private:
  static constexpr int kEmit = 0;
  static constexpr int kComplete = 1;

  struct Event {
    double t;
    std::uint64_t seq;
    int node;
    int type;
    bool operator>(const Event& o) const { return t != o.t ? t > o.t : seq > o.seq; }
  };

  struct NodeState {
    std::vector<char> slots;  // one waiting state per operand
    bool busy = false;
    bool has_target = false;
    std::size_t step = 0;     // completed pumping steps on the held target
  };

  void push(double t, int node, int type) { queue_.push(Event{t, seq_++, node, type}); }

  bool out_free(int v) const {
    const int p = m_.nodes[v].parent;
    return p < 0 || !state_[p].slots[m_.nodes[v].slot];
  }

  void output(int v) {
    const int p = m_.nodes[v].parent;
    if (p < 0) {
      ++report_.delivered;
      if (cfg_.record_timestamps) report_.timestamps.push_back(now_);
      return;
    }
    state_[p].slots[m_.nodes[v].slot] = 1;
    try_start(p);
  }

  void emit(int v) {
    push(now_ + arrivals_[v].exponential(m_.nodes[v].rate), v, kEmit);
    ++report_.nodes[v].attempts[0];
    if (!out_free(v)) return;  // memoryless: a dropped arrival is a paused source
    ++report_.nodes[v].successes[0];
    output(v);
  }

  void start(int v, std::size_t step) {
    state_[v].busy = true;
    ++report_.nodes[v].attempts[step];
    push(now_ + m_.nodes[v].latency, v, kComplete);
  }

  void release(int kid) {
    if (m_.nodes[kid].role != Role::kSource) try_start(kid);
  }

  void try_start(int v) {
    const SimNode& n = m_.nodes[v];
    NodeState& s = state_[v];
    if (s.busy) return;
    if (n.role == Role::kPair) {
      if (!out_free(v)) return;
      if (!std::all_of(s.slots.begin(), s.slots.end(), [](char c) { return c != 0; })) return;
      std::fill(s.slots.begin(), s.slots.end(), 0);
      start(v, 0);
      for (int k : n.kids) release(k);
      return;
    }
    if (n.role != Role::kPump) return;
    if (!s.has_target && s.slots[0]) {
      s.slots[0] = 0;
      s.has_target = true;
      s.step = 0;
      release(n.kids[0]);
    }
    if (s.has_target && s.slots[0] && (s.step + 1 < n.p.size() || out_free(v))) {
      s.slots[0] = 0;
      start(v, s.step);
      release(n.kids[0]);
    }
  }

  void complete(int v) {
    const SimNode& n = m_.nodes[v];
    NodeState& s = state_[v];
    s.busy = false;
    const std::size_t step = n.role == Role::kPump ? s.step : 0;
    const bool ok = outcomes_[v].bernoulli(n.p[step]);
    if (ok) ++report_.nodes[v].successes[step];
    if (n.role == Role::kPair) {
      if (ok) output(v);
    } else if (!ok) {
      s.has_target = false;
    } else if (++s.step == n.p.size()) {
      s.has_target = false;
      output(v);
    }
    try_start(v);
  }

  const Model& m_;
  const SimConfig& cfg_;
  std::vector<NodeState> state_;
  std::vector<CounterRng> arrivals_;
  std::vector<CounterRng> outcomes_;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
  std::uint64_t seq_ = 0;
  double now_ = 0.0;
  ReplicationReport report_;
};

SimReport run_model(const Model& m, const SimConfig& cfg) {
  SimReport r;
  r.tree_signature = m.signature;
  r.params = cfg.params;
  r.analytic_rate = m.analytic_rate;
  r.root_fidelity = m.root_fidelity;
  r.replications.resize(cfg.replications);

  const int workers = std::max(
      1, std::min(cfg.replications,
                  cfg.jobs > 0 ? cfg.jobs : static_cast<int>(std::thread::hardware_concurrency())));
  std::atomic<int> next{0};
  auto work = [&] {
    for (int i = next++; i < cfg.replications; i = next++) {
      r.replications[i] = Replication(m, cfg, i).run();
    }
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  double sum = 0.0;
  for (const auto& rep : r.replications) sum += rep.empirical_rate;
  const double n = static_cast<double>(r.replications.size());
  r.mean_rate = sum / n;
  if (r.replications.size() > 1) {
    double ss = 0.0;
    for (const auto& rep : r.replications) ss += std::pow(rep.empirical_rate - r.mean_rate, 2);
    r.rate_stderr = std::sqrt(ss / (n - 1.0) / n);
  }
  r.rate_delta = (r.mean_rate - r.analytic_rate) / r.analytic_rate;
  return r;
}

DeltaSummary compare_model(const SimReport& report, const Model& m, double rate_tol,
                           double z_tol) {
  if (report.tree_signature != m.signature || report.replications.empty()) {
    throw Error(ErrorCode::kTreeMismatch, "report was not produced from this tree");
  }
  DeltaSummary d;
  d.rate_delta = (report.mean_rate - m.analytic_rate) / m.analytic_rate;
  for (std::size_t v = 0; v < m.nodes.size(); ++v) {
    if (m.nodes[v].role == Role::kSource) continue;
    for (std::size_t j = 0; j < m.nodes[v].p.size(); ++j) {
      std::uint64_t a = 0, s = 0;
      for (const auto& rep : report.replications) {
        a += rep.nodes[v].attempts[j];
        s += rep.nodes[v].successes[j];
      }
      if (a == 0) continue;
      const double p = m.nodes[v].p[j];
      const double emp = static_cast<double>(s) / static_cast<double>(a);
      const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(a));
      const double z = se > 0.0 ? std::fabs(emp - p) / se : (emp == p ? 0.0 : INFINITY);
      d.nodes.push_back({v, j, emp, p, se, z});
      d.max_z = std::max(d.max_z, z);
    }
  }
  d.within = std::fabs(d.rate_delta) <= rate_tol && d.max_z <= z_tol;
  return d;
}

}  // namespace

SimReport simulate_tree(const OperationTree& tree, const SimConfig& cfg) {
  cfg.validate();
  return run_model(model_of(tree, cfg.params), cfg);
}

SimReport simulate_tree(const FusionTree& tree, const SimConfig& cfg) {
  cfg.validate();
  return run_model(model_of(tree, cfg.params), cfg);
}

DeltaSummary compare_analytic(const SimReport& report, const OperationTree& tree,
                              double rate_tolerance, double z_tolerance) {
  return compare_model(report, model_of(tree, report.params), rate_tolerance, z_tolerance);
}

DeltaSummary compare_analytic(const SimReport& report, const FusionTree& tree,
                              double rate_tolerance, double z_tolerance) {
  return compare_model(report, model_of(tree, report.params), rate_tolerance, z_tolerance);
}

nlohmann::json sim_report_to_json(const SimReport& r) {
  nlohmann::json reps = nlohmann::json::array();
  for (const auto& rep : r.replications) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : rep.nodes) {
      nodes.push_back({{"kind", n.kind},
                       {"attempts", n.attempts},
                       {"successes", n.successes},
                       {"analytic_p", n.analytic_p}});
    }
    reps.push_back({{"delivered", rep.delivered},
                    {"elapsed", rep.elapsed},
                    {"empirical_rate", rep.empirical_rate},
                    {"mean_fidelity", rep.mean_fidelity},
                    {"min_fidelity", rep.min_fidelity},
                    {"events", rep.events},
                    {"nodes", std::move(nodes)}});
  }
  return {{"tree_signature", r.tree_signature},
          {"analytic_rate", r.analytic_rate},
          {"root_fidelity", r.root_fidelity},
          {"mean_rate", r.mean_rate},
          {"rate_stderr", r.rate_stderr},
          {"rate_delta", r.rate_delta},
          {"replications", std::move(reps)}};
}

nlohmann::json delta_summary_to_json(const DeltaSummary& d) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : d.nodes) {
    nodes.push_back({{"node", n.node},
                     {"step", n.step},
                     {"empirical", n.empirical},
                     {"analytic", n.analytic},
                     {"stderr", n.stderr_},
                     {"z", n.z}});
  }
  return {{"rate_delta", d.rate_delta}, {"max_z", d.max_z}, {"within", d.within},
          {"nodes", std::move(nodes)}};
}

void write_delivery_csv(const SimReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << "replication,time\n";
  out.precision(17);
  for (std::size_t i = 0; i < report.replications.size(); ++i) {
    for (double t : report.replications[i].timestamps) out << i << ',' << t << '\n';
  }
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
}

}  // namespace entroute

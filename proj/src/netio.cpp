#include "entroute/netio.hpp"

#include <fstream>
#include <sstream>

#include "entroute/error.hpp"

namespace entroute {

using nlohmann::json;

namespace {

[[noreturn]] void field_error(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::kParseError, field + ": " + what);
}

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) field_error(where, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) field_error(where + "." + key, "missing");
  return *it;
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) field_error(where, "expected a number");
  return v.get<double>();
}

std::string str(const json& v, const std::string& where) {
  if (!v.is_string()) field_error(where, "expected a string");
  return v.get<std::string>();
}

NodeIndex node_ref(const json& v, const QuantumNetwork& net, const std::string& where) {
  auto id = str(v, where);
  auto idx = net.find_node(id);
  if (!idx) {
    throw Error(ErrorCode::kInvariantViolation, where + ": unknown node '" + id + "'");
  }
  return *idx;
}

}  // namespace

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw Error(ErrorCode::kParseError, path.string() + ":" + std::to_string(line) +
                                            ":" + std::to_string(col) + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

QuantumNetwork network_from_json(const json& j) {
  if (!j.is_object()) field_error("<root>", "expected an object");
  const json& jn = require(j, "nodes", "<root>");
  if (!jn.is_array()) field_error("nodes", "expected an array");
  std::vector<std::string> nodes;
  for (std::size_t i = 0; i < jn.size(); ++i) {
    nodes.push_back(str(jn[i], "nodes[" + std::to_string(i) + "]"));
  }

  // Resolve ids locally so unknown endpoints are reported with their field.
  std::unordered_map<std::string, NodeIndex> idx;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    idx.emplace(nodes[i], static_cast<NodeIndex>(i));
  }
  const json& jl = require(j, "links", "<root>");
  if (!jl.is_array()) field_error("links", "expected an array");
  std::vector<Link> links;
  for (std::size_t i = 0; i < jl.size(); ++i) {
    const std::string where = "links[" + std::to_string(i) + "]";
    Link l;
    for (const char* end : {"a", "b"}) {
      auto id = str(require(jl[i], end, where), where + "." + end);
      auto it = idx.find(id);
      if (it == idx.end()) {
        throw Error(ErrorCode::kInvariantViolation,
                    where + "." + end + ": unknown node '" + id + "'");
      }
      (end[0] == 'a' ? l.a : l.b) = it->second;
    }
    l.rate = number(require(jl[i], "rate", where), where + ".rate");
    l.fidelity = number(require(jl[i], "fidelity", where), where + ".fidelity");
    links.push_back(l);
  }

  std::optional<std::vector<Position>> positions;
  if (auto it = j.find("positions"); it != j.end() && !it->is_null()) {
    if (!it->is_object()) field_error("positions", "expected an object");
    std::vector<Position> pos(nodes.size());
    std::vector<char> seen(nodes.size(), 0);
    for (const auto& [id, xy] : it->items()) {
      auto found = idx.find(id);
      if (found == idx.end()) {
        throw Error(ErrorCode::kInvariantViolation,
                    "positions." + id + ": unknown node");
      }
      if (!xy.is_array() || xy.size() != 2) {
        field_error("positions." + id, "expected [x, y]");
      }
      pos[found->second] = {number(xy[0], "positions." + id + "[0]"),
                            number(xy[1], "positions." + id + "[1]")};
      seen[found->second] = 1;
    }
    for (std::size_t i = 0; i < seen.size(); ++i) {
      if (!seen[i]) {
        throw Error(ErrorCode::kInvariantViolation,
                    "positions: missing node '" + nodes[i] + "'");
      }
    }
    positions = std::move(pos);
  }
  return QuantumNetwork(std::move(nodes), std::move(links), std::move(positions));
}

json network_to_json(const QuantumNetwork& net) {
  json j;
  j["nodes"] = net.nodes();
  json links = json::array();
  for (const auto& l : net.links()) {
    links.push_back({{"a", net.node_id(l.a)},
                     {"b", net.node_id(l.b)},
                     {"rate", l.rate},
                     {"fidelity", l.fidelity}});
  }
  j["links"] = std::move(links);
  if (net.positions()) {
    json pos = json::object();
    const auto& p = *net.positions();
    for (int i = 0; i < net.node_count(); ++i) {
      pos[net.node_id(i)] = {p[i].x, p[i].y};
    }
    j["positions"] = std::move(pos);
  }
  return j;
}

QuantumNetwork load_network(const std::filesystem::path& path) {
  return network_from_json(read_json_file(path));
}

void save_network(const QuantumNetwork& net, const std::filesystem::path& path) {
  write_text_file(path, network_to_json(net).dump(2) + "\n");
}

DemandSet demands_from_json(const json& j, const QuantumNetwork& net) {
  if (!j.is_object()) field_error("<root>", "expected an object");
  DemandSet out;
  if (auto it = j.find("pairs"); it != j.end()) {
    if (!it->is_array()) field_error("pairs", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string where = "pairs[" + std::to_string(i) + "]";
      const json& e = (*it)[i];
      out.pairs.push_back(
          PairDemand{node_ref(require(e, "s", where), net, where + ".s"),
                     node_ref(require(e, "d", where), net, where + ".d"),
                     number(require(e, "f", where), where + ".f")});
    }
  }
  if (auto it = j.find("ghz"); it != j.end()) {
    if (!it->is_array()) field_error("ghz", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string where = "ghz[" + std::to_string(i) + "]";
      const json& e = (*it)[i];
      const json& terms = require(e, "terminals", where);
      if (!terms.is_array()) field_error(where + ".terminals", "expected an array");
      GhzDemand g;
      for (std::size_t k = 0; k < terms.size(); ++k) {
        g.terminals.push_back(
            node_ref(terms[k], net, where + ".terminals[" + std::to_string(k) + "]"));
      }
      g.threshold = number(require(e, "f", where), where + ".f");
      out.ghz.push_back(std::move(g));
    }
  }
  out.validate(net);
  return out;
}

json demands_to_json(const DemandSet& demands, const QuantumNetwork& net) {
  json pairs = json::array();
  for (const auto& p : demands.pairs) {
    pairs.push_back({{"s", net.node_id(p.s)}, {"d", net.node_id(p.d)}, {"f", p.threshold}});
  }
  json ghz = json::array();
  for (const auto& g : demands.ghz) {
    json terms = json::array();
    for (NodeIndex t : g.terminals) terms.push_back(net.node_id(t));
    ghz.push_back({{"terminals", terms}, {"f", g.threshold}});
  }
  return {{"pairs", pairs}, {"ghz", ghz}};
}

DemandSet load_demands(const std::filesystem::path& path, const QuantumNetwork& net) {
  return demands_from_json(read_json_file(path), net);
}

json params_to_json(const OperationParams& p) {
  return {{"p_s", p.p_s}, {"t_s", p.t_s}, {"t_p", p.t_p}, {"t_c", p.t_c},
          {"p_f", p.p_f}, {"i_max", p.i_max}, {"gamma", p.gamma}};
}

OperationParams params_from_json(const json& j, OperationParams base) {
  if (!j.is_object()) field_error("params", "expected an object");
  for (const auto& [key, v] : j.items()) {
    const std::string where = "params." + key;
    if (key == "p_s") base.p_s = number(v, where);
    else if (key == "t_s") base.t_s = number(v, where);
    else if (key == "t_p") base.t_p = number(v, where);
    else if (key == "t_c") base.t_c = number(v, where);
    else if (key == "p_f") base.p_f = number(v, where);
    else if (key == "gamma") base.gamma = number(v, where);
    else if (key == "i_max") {
      if (!v.is_number_integer()) field_error(where, "expected an integer");
      base.i_max = v.get<int>();
    } else {
      field_error(where, "unknown parameter");
    }
  }
  base.validate();
  return base;
}

}  // namespace entroute

#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "entroute/network.hpp"

namespace entroute {

// Network file: {"nodes": [id...], "links": [{"a","b","rate","fidelity"}...],
//                "positions": {id: [x, y]}}   (positions optional)
QuantumNetwork network_from_json(const nlohmann::json& j);
nlohmann::json network_to_json(const QuantumNetwork& net);
QuantumNetwork load_network(const std::filesystem::path& path);
void save_network(const QuantumNetwork& net, const std::filesystem::path& path);

// Demand file: {"pairs": [{"s","d","f"}...], "ghz": [{"terminals": [...], "f"}...]}
DemandSet demands_from_json(const nlohmann::json& j, const QuantumNetwork& net);
nlohmann::json demands_to_json(const DemandSet& demands, const QuantumNetwork& net);
DemandSet load_demands(const std::filesystem::path& path, const QuantumNetwork& net);

nlohmann::json params_to_json(const OperationParams& p);
// Overlays keys present in `j` onto `base`; unknown keys are rejected.
OperationParams params_from_json(const nlohmann::json& j, OperationParams base = {});

// Parses a whole file; PARSE_ERROR carries the line and column.
nlohmann::json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace entroute

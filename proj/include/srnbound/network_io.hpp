#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "srnbound/network.hpp"

namespace srnbound {

/**
 * Parses the network document: species, parameters, and reactions with
 * change vectors and polynomial propensities. Factor species may be given
 * by name or by 0-based index; kind is "falling", "power" or "indicator".
 */
ReactionNetwork network_from_json(const nlohmann::json& doc);
nlohmann::json network_to_json(const ReactionNetwork& network);
ReactionNetwork load_network(const std::filesystem::path& path);

/** Parses "2,1,1". */
std::vector<Count> parse_count_list(const std::string& text);

}  // namespace srnbound

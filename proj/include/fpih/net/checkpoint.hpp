#pragma once

#include <nlohmann/json_fwd.hpp>

#include "fpih/net/adam.hpp"
#include "fpih/net/network.hpp"

namespace fpih::net {

using nlohmann::json;

// JSON (de)serialization for the trainable pieces. Doubles round-trip
// losslessly through nlohmann's shortest-representation formatting, so a
// save/load cycle is exact.
json topology_to_json(const Topology& t);
Topology topology_from_json(const json& j);

json network_to_json(const Network& n);
Network network_from_json(const json& j);

json adam_to_json(const AdamState& s);
AdamState adam_from_json(const json& j);

json vecx_to_json(const VecX& v);
VecX vecx_from_json(const json& j);

}  // namespace fpih::net

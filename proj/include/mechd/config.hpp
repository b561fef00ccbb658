#pragma once

#include <string>

#include "mechd/env.hpp"

namespace mechd {

/// Parses an environment config from JSON text. Keys: theta_min, theta_max,
/// distribution{type,params}, utility{type,params,A}, cost, alpha,
/// welfare_weight{type,params}, correlation ("negative"|"positive"), grid_n.
/// Tabulated weights take params {theta: [...], value: [...]}.
/// Throws InvalidParameter naming the offending key.
EnvConfig parse_config(const std::string& json_text);

/// Reads and parses a config file; an unreadable file is an InvalidParameter too.
EnvConfig load_config(const std::string& path);

}  // namespace mechd

#pragma once

#include "config.hpp"

#include <functional>
#include <map>
#include <string>

namespace lgtsim::cli {

// Reads its parameters from the root section and writes artifacts into ctx.output_dir.
using Command = std::function<void(Section& root, RunContext& ctx)>;

const std::map<std::string, Command>& commands();

}  // namespace lgtsim::cli

#pragma once

// Built-in scenarios. Scenario files may start from one of these with
// `scenario = "<name>"` and override individual keys.

#include <string>
#include <string_view>
#include <vector>

#include "aphi/sim_engine.hpp"

namespace aphi {

/// Throws ValidationError for an unknown name.
Scenario preset_scenario(std::string_view name);

std::vector<std::string> preset_names();

}  // namespace aphi

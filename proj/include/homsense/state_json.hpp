#pragma once

#include <string>

#include "json.hpp"

#include "homsense/statefamilies.hpp"

namespace homsense {

// State-spec JSON. Unknown fields, wrong types and out-of-range values throw
// InvalidSpec. Chirps are objects {"c": <number>, "sign": "+" | "-"}.
PhaseMatchingSpec spec_from_json(const nlohmann::json& j);
// Emits the family, sigma, unit_scale and every field that applies to the
// family; spec_from_json(spec_to_json(s)) reproduces s.
nlohmann::json spec_to_json(const PhaseMatchingSpec& spec);

PhaseMatchingSpec parse_spec(const std::string& text);
PhaseMatchingSpec load_spec(const std::string& path);

}  // namespace homsense

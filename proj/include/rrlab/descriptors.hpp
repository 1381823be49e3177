#pragma once

#include <string>

#include "json.hpp"
#include "rrlab/joinings.hpp"

namespace rrlab {

// System JSON:
//   {"name": "...", "max_stage": 8,
//    "cuts": [2, 3, ...] | {"formula": "const:2" | "affine:a,b", "overrides": {"3": 5}},
//    "spacers": [[stage, column, count], ...],
//    "spacer_rule": "none" | "last:N" | "middle:N"}
// or {"builtin": "odometer" | "rigid-spacered" | "chacon", "max_stage": K}.
// A cuts list shorter than the build repeats its last entry.
ConstructionDescriptor parse_system(const nlohmann::json& doc);

// Joining JSON:
//   {"type": "offdiag", "terms": [{"shift": 0, "weight": "1/2"}, ...]}
//   {"type": "productmix", "alpha": "1/3", "terms": [...]}
//   {"type": "product"}
//   {"type": "twoadic", "gamma": "-1/3"}
//   {"builtin": "mix03"}
Joining parse_joining(const nlohmann::json& doc);

// "builtin:NAME" or a path to a JSON file. Systems take max_stage from the
// file unless overridden.
ConstructionDescriptor load_system(const std::string& source, std::optional<int> max_stage = std::nullopt);
Joining load_joining(const std::string& source);

}  // namespace rrlab

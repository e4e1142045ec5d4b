#pragma once

#include <string>
#include <string_view>

#include "costcode/cost_model.hpp"
#include "costcode/sources.hpp"

namespace costcode {

// {"K": int, "costs": [..], "conditional": {"context": [..]}?, "max_context_depth": int?}
CostModel cost_model_from_json(std::string_view text);
// {"type": "iid", "pmf": [..]} or
// {"type": "mixed", "weights": [w1, w2], "components": [{..}, {..}]}
Source source_from_json(std::string_view text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

CostModel load_cost_model(const std::string& path);
Source load_source(const std::string& path);

} // namespace costcode

#pragma once

#include <nlohmann/json.hpp>

#include "noregret/env.hpp"

namespace noregret {

// {"env_kind", "d", "T", "policy_space": {"kind", "radius"}, "process_kind",
//  "process_params": {...}, "seed"}
nlohmann::json scenario_to_json(const Scenario& s);
Scenario scenario_from_json(const nlohmann::json& j);

nlohmann::json process_params_to_json(const ProcessParams& p);
ProcessParams process_params_from_json(ProcessKind kind, const nlohmann::json& j);

nlohmann::json vec_to_json(const Vec& v);
Vec vec_from_json(const nlohmann::json& j);
nlohmann::json mat_to_json(const Mat& m);  // row-major nested arrays
Mat mat_from_json(const nlohmann::json& j);

}  // namespace noregret

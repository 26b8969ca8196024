#pragma once

#include <string>

#include <json.hpp>

#include "jumpsyn/model.hpp"

namespace jumpsyn {

// Parses and fully validates a scenario document.
Scenario scenario_from_json(const nlohmann::json& doc);

// Loads a scenario file; throws ParseError with location on malformed input.
Scenario load_scenario(const std::string& path);

// Serializes a scenario back to the document form accepted by
// scenario_from_json. load / serialize round-trips bundled files unchanged.
nlohmann::json scenario_to_json(const Scenario& scenario);

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j, const std::string& name);
Vector vector_from_json(const nlohmann::json& j, const std::string& name);

// The section-5 example scenario bundled with the toolkit, as JSON text.
const char* example_scenario_text();

} // namespace jumpsyn

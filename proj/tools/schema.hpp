#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace subeq::app {

/// Checks a document against the JSON Schema keywords the shipped schemas use: type, enum, const,
/// properties, required, additionalProperties, items, minItems, maxItems, minimum, maximum,
/// exclusiveMinimum, oneOf, anyOf and local $ref. Returns one message per violation, "" paths for the root.
std::vector<std::string> validate(const nlohmann::json& schema, const nlohmann::json& doc);

}  // namespace subeq::app

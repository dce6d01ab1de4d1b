#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace normprobe::cli {

// Validates a document against the subset of JSON Schema used by the
// shipped schemas: type, enum, const, properties, required,
// additionalProperties, items, minItems, maxItems, minLength, minimum,
// maximum, exclusiveMinimum, exclusiveMaximum, oneOf and local $ref.
// Returns one message per violation, each prefixed with the field path.
std::vector<std::string> schema_violations(const nlohmann::json& document, const nlohmann::json& schema);

// Throws ConfigError listing every violation.
void check_schema(const nlohmann::json& document, const nlohmann::json& schema, const std::string& what);

const nlohmann::json& run_config_schema();
const nlohmann::json& synth_spec_schema();

}  // namespace normprobe::cli

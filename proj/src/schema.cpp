#include "normprobe/cli/schema.hpp"

#include <cmath>

#include "normprobe/error.hpp"
#include "normprobe/schemas.hpp"

namespace normprobe::cli {
namespace {

using nlohmann::json;

std::string display_path(const std::string& path) { return path.empty() ? "(root)" : path; }

bool has_type(const json& v, const std::string& type) {
  if (type == "object") return v.is_object();
  if (type == "array") return v.is_array();
  if (type == "string") return v.is_string();
  if (type == "boolean") return v.is_boolean();
  if (type == "null") return v.is_null();
  if (type == "number") return v.is_number();
  if (type == "integer") {
    if (v.is_number_integer()) return true;
    if (v.is_number_float()) {
      const double d = v.get<double>();
      return std::isfinite(d) && std::floor(d) == d;
    }
    return false;
  }
  return false;
}

class Validator {
 public:
  explicit Validator(const json& root) : root_(root) {}

  void check(const json& v, const json& schema, const std::string& path, std::vector<std::string>& out) const {
    if (schema.is_boolean()) {
      if (!schema.get<bool>()) out.push_back(display_path(path) + ": not allowed");
      return;
    }
    if (auto it = schema.find("$ref"); it != schema.end()) {
      check(v, resolve(it->get<std::string>()), path, out);
    }
    if (auto it = schema.find("type"); it != schema.end()) {
      bool ok = false;
      std::string expected;
      if (it->is_string()) {
        ok = has_type(v, it->get<std::string>());
        expected = it->get<std::string>();
      } else {
        for (const auto& t : *it) {
          ok = ok || has_type(v, t.get<std::string>());
          expected += (expected.empty() ? "" : " or ") + t.get<std::string>();
        }
      }
      if (!ok) {
        out.push_back(display_path(path) + ": expected " + expected);
        return;
      }
    }
    if (auto it = schema.find("const"); it != schema.end() && v != *it) {
      out.push_back(display_path(path) + ": must be " + it->dump());
    }
    if (auto it = schema.find("enum"); it != schema.end()) {
      bool found = false;
      for (const auto& e : *it) found = found || v == e;
      if (!found) out.push_back(display_path(path) + ": must be one of " + it->dump());
    }
    if (v.is_number()) check_number(v.get<double>(), schema, path, out);
    if (v.is_string()) {
      if (auto it = schema.find("minLength"); it != schema.end() && v.get<std::string>().size() < it->get<std::size_t>()) {
        out.push_back(display_path(path) + ": shorter than " + it->dump() + " characters");
      }
    }
    if (v.is_array()) check_array(v, schema, path, out);
    if (v.is_object()) check_object(v, schema, path, out);
    if (auto it = schema.find("oneOf"); it != schema.end()) {
      std::size_t matches = 0;
      for (const auto& alt : *it) {
        std::vector<std::string> sub;
        check(v, alt, path, sub);
        if (sub.empty()) ++matches;
      }
      if (matches != 1) {
        out.push_back(display_path(path) + ": must match exactly one allowed form (matched " +
                      std::to_string(matches) + ")");
      }
    }
  }

 private:
  const json& resolve(const std::string& ref) const {
    if (!ref.starts_with("#")) throw ConfigError("schema: unsupported $ref '" + ref + "'");
    return root_.at(json::json_pointer(ref.substr(1)));
  }

  static void check_number(double d, const json& schema, const std::string& path, std::vector<std::string>& out) {
    if (auto it = schema.find("minimum"); it != schema.end() && d < it->get<double>()) {
      out.push_back(display_path(path) + ": must be >= " + it->dump());
    }
    if (auto it = schema.find("maximum"); it != schema.end() && d > it->get<double>()) {
      out.push_back(display_path(path) + ": must be <= " + it->dump());
    }
    if (auto it = schema.find("exclusiveMinimum"); it != schema.end() && d <= it->get<double>()) {
      out.push_back(display_path(path) + ": must be > " + it->dump());
    }
    if (auto it = schema.find("exclusiveMaximum"); it != schema.end() && d >= it->get<double>()) {
      out.push_back(display_path(path) + ": must be < " + it->dump());
    }
  }

  void check_array(const json& v, const json& schema, const std::string& path, std::vector<std::string>& out) const {
    if (auto it = schema.find("minItems"); it != schema.end() && v.size() < it->get<std::size_t>()) {
      out.push_back(display_path(path) + ": needs at least " + it->dump() + " items");
    }
    if (auto it = schema.find("maxItems"); it != schema.end() && v.size() > it->get<std::size_t>()) {
      out.push_back(display_path(path) + ": allows at most " + it->dump() + " items");
    }
    if (auto it = schema.find("items"); it != schema.end()) {
      for (std::size_t i = 0; i < v.size(); ++i) {
        check(v[i], *it, path + "[" + std::to_string(i) + "]", out);
      }
    }
  }

  void check_object(const json& v, const json& schema, const std::string& path, std::vector<std::string>& out) const {
    const std::string prefix = path.empty() ? "" : path + ".";
    if (auto it = schema.find("required"); it != schema.end()) {
      for (const auto& key : *it) {
        if (!v.contains(key.get<std::string>())) {
          out.push_back(prefix + key.get<std::string>() + ": required field missing");
        }
      }
    }
    const auto props = schema.find("properties");
    const auto additional = schema.find("additionalProperties");
    for (const auto& [key, value] : v.items()) {
      if (props != schema.end() && props->contains(key)) {
        check(value, (*props)[key], prefix + key, out);
      } else if (additional != schema.end()) {
        if (additional->is_boolean() && !additional->get<bool>()) {
          out.push_back(prefix + key + ": unknown field");
        } else if (additional->is_object()) {
          check(value, *additional, prefix + key, out);
        }
      }
    }
  }

  const json& root_;
};

}  // namespace

std::vector<std::string> schema_violations(const nlohmann::json& document, const nlohmann::json& schema) {
  std::vector<std::string> out;
  Validator(schema).check(document, schema, "", out);
  return out;
}

void check_schema(const nlohmann::json& document, const nlohmann::json& schema, const std::string& what) {
  const auto violations = schema_violations(document, schema);
  if (violations.empty()) return;
  std::string msg = what + ": ";
  for (std::size_t i = 0; i < violations.size(); ++i) {
    if (i) msg += "; ";
    msg += violations[i];
  }
  throw ConfigError(msg);
}

const nlohmann::json& run_config_schema() {
  static const nlohmann::json schema = nlohmann::json::parse(schemas::kRunConfig);
  return schema;
}

const nlohmann::json& synth_spec_schema() {
  static const nlohmann::json schema = nlohmann::json::parse(schemas::kSynthSpec);
  return schema;
}

}  // namespace normprobe::cli

#include "schema.hpp"

#include <stdexcept>

namespace subeq::app {
namespace {

using nlohmann::json;

bool has_type(const json& v, const std::string& t) {
  if (t == "object") return v.is_object();
  if (t == "array") return v.is_array();
  if (t == "string") return v.is_string();
  if (t == "boolean") return v.is_boolean();
  if (t == "null") return v.is_null();
  if (t == "number") return v.is_number();
  if (t == "integer") {
    if (v.is_number_integer()) return true;
    return v.is_number_float() && v.get<double>() == static_cast<double>(static_cast<long long>(v.get<double>()));
  }
  throw std::invalid_argument("schema uses unknown type '" + t + "'");
}

struct Validator {
  const json& root;

  const json& resolve(const std::string& ref) const {
    if (ref.rfind("#/", 0) != 0) throw std::invalid_argument("only local $ref is supported: " + ref);
    return root.at(json::json_pointer(ref.substr(1)));
  }

  void run(const json& s, const json& v, const std::string& path, std::vector<std::string>& out) const {
    if (s.is_boolean()) {
      if (!s.get<bool>()) out.push_back(path + ": not allowed");
      return;
    }
    // siblings of $ref still apply
    if (s.contains("$ref")) run(resolve(s["$ref"].get<std::string>()), v, path, out);
    const std::string at = path.empty() ? "/" : path;
    if (s.contains("type")) {
      bool ok = false;
      if (s["type"].is_array()) {
        for (const auto& t : s["type"]) ok = ok || has_type(v, t.get<std::string>());
      } else {
        ok = has_type(v, s["type"].get<std::string>());
      }
      if (!ok) {
        out.push_back(at + ": expected type " + s["type"].dump());
        return;
      }
    }
    if (s.contains("enum")) {
      bool found = false;
      for (const auto& e : s["enum"]) found = found || e == v;
      if (!found) out.push_back(at + ": " + v.dump() + " not in " + s["enum"].dump());
    }
    if (s.contains("const") && s["const"] != v) out.push_back(at + ": expected " + s["const"].dump());
    if (v.is_number()) {
      const double x = v.get<double>();
      if (s.contains("minimum") && x < s["minimum"].get<double>())
        out.push_back(at + ": below minimum " + s["minimum"].dump());
      if (s.contains("maximum") && x > s["maximum"].get<double>())
        out.push_back(at + ": above maximum " + s["maximum"].dump());
      if (s.contains("exclusiveMinimum") && x <= s["exclusiveMinimum"].get<double>())
        out.push_back(at + ": must exceed " + s["exclusiveMinimum"].dump());
    }
    if (v.is_object()) {
      if (s.contains("required"))
        for (const auto& k : s["required"])
          if (!v.contains(k.get<std::string>())) out.push_back(at + ": missing '" + k.get<std::string>() + "'");
      const json* props = s.contains("properties") ? &s["properties"] : nullptr;
      for (auto it = v.begin(); it != v.end(); ++it) {
        const std::string child = path + "/" + it.key();
        if (props && props->contains(it.key())) {
          run((*props)[it.key()], it.value(), child, out);
        } else if (s.contains("additionalProperties")) {
          const json& extra = s["additionalProperties"];
          if (extra.is_boolean() && !extra.get<bool>())
            out.push_back(child + ": unknown key");
          else
            run(extra, it.value(), child, out);
        }
      }
    }
    if (v.is_array()) {
      if (s.contains("minItems") && v.size() < s["minItems"].get<std::size_t>())
        out.push_back(at + ": fewer than " + s["minItems"].dump() + " items");
      if (s.contains("maxItems") && v.size() > s["maxItems"].get<std::size_t>())
        out.push_back(at + ": more than " + s["maxItems"].dump() + " items");
      if (s.contains("items"))
        for (std::size_t i = 0; i < v.size(); ++i) run(s["items"], v[i], path + "/" + std::to_string(i), out);
    }
    if (s.contains("anyOf")) {
      bool any = false;
      for (const auto& alt : s["anyOf"]) {
        std::vector<std::string> sub;
        run(alt, v, path, sub);
        any = any || sub.empty();
      }
      if (!any) out.push_back(at + ": matches no alternative");
    }
    if (s.contains("oneOf")) {
      int hits = 0;
      std::vector<std::string> closest;
      for (const auto& alt : s["oneOf"]) {
        std::vector<std::string> sub;
        run(alt, v, path, sub);
        if (sub.empty()) ++hits;
        else if (closest.empty() || sub.size() < closest.size()) closest = std::move(sub);
      }
      if (hits == 0) {
        out.push_back(at + ": matches no alternative");
        // the nearest alternative usually names the actual mistake
        for (auto& m : closest) out.push_back("  " + m);
      } else if (hits > 1) {
        out.push_back(at + ": matches " + std::to_string(hits) + " alternatives");
      }
    }
  }
};

}  // namespace

std::vector<std::string> validate(const json& schema, const json& doc) {
  std::vector<std::string> out;
  Validator{schema}.run(schema, doc, "", out);
  return out;
}

}  // namespace subeq::app

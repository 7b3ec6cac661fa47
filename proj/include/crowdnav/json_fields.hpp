#pragma once

// Strict reader for JSON config sections: every key is optional (defaults
// stay in place), unknown keys and wrong types are errors carrying the dotted
// field path.

#include "crowdnav/errors.hpp"

#include <json.hpp>

#include <set>
#include <string>
#include <type_traits>

namespace crowdnav {

using Json = nlohmann::json;

class FieldReader {
 public:
  FieldReader(const Json& j, std::string path) : json_(j), path_(std::move(path)) {
    if (!json_.is_object()) throw ConfigError(path_, "expected an object");
  }

  std::string field_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  bool has(const std::string& key) const { return json_.contains(key); }

  template <class T>
  FieldReader& read(const std::string& key, T& out) {
    seen_.insert(key);
    auto it = json_.find(key);
    if (it == json_.end()) return *this;
    const Json& v = *it;
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError(field_path(key), "expected a boolean");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError(field_path(key), "expected an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0)
          throw ConfigError(field_path(key), "expected a non-negative integer");
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError(field_path(key), "expected a number");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError(field_path(key), "expected a string");
    }
    out = v.get<T>();
    return *this;
  }

  /// Reads a string key and maps it through `parse`, which returns false for unknown names.
  template <class T, class Parse>
  FieldReader& read_enum(const std::string& key, T& out, Parse parse, const char* allowed) {
    std::string name;
    read(key, name);
    if (!has(key)) return *this;
    if (!parse(name, out)) throw ConfigError(field_path(key), "unknown value '" + name + "' (allowed: " + allowed + ")");
    return *this;
  }

  /// Section reader for a nested object; an absent key yields an empty section.
  FieldReader section(const std::string& key) {
    seen_.insert(key);
    static const Json empty = Json::object();
    auto it = json_.find(key);
    return FieldReader(it == json_.end() ? empty : *it, field_path(key));
  }

  /// Throws on the first key that was never read.
  void reject_unknown() const {
    for (auto it = json_.begin(); it != json_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(field_path(it.key()), "unknown field");
    }
  }

 private:
  const Json& json_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace crowdnav

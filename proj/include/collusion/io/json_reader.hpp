#pragma once

// Strict reading of JSON objects: every key must be consumed, and errors name
// the dotted path of the offending field.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "collusion/error.hpp"

namespace collusion::io {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

std::string type_name(const Json& value);

[[noreturn]] void fail_at(const std::string& path, const std::string& message);

double as_number(const Json& value, const std::string& path);
std::int64_t as_integer(const Json& value, const std::string& path);
std::size_t as_count(const Json& value, const std::string& path);
bool as_bool(const Json& value, const std::string& path);
std::string as_string(const Json& value, const std::string& path);
std::vector<double> as_numbers(const Json& value, const std::string& path);
std::vector<std::size_t> as_counts(const Json& value, const std::string& path);

class ObjectReader {
 public:
  ObjectReader(const Json& value, std::string path);

  bool has(const std::string& key) const;
  const Json& at(const std::string& key);  // missing -> error
  const Json* find(const std::string& key);
  std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  const std::string& path() const { return path_; }

  double number(const std::string& key) { return as_number(at(key), child(key)); }
  double number_or(const std::string& key, double fallback);
  std::size_t count(const std::string& key) { return as_count(at(key), child(key)); }
  std::size_t count_or(const std::string& key, std::size_t fallback);
  std::string string(const std::string& key) { return as_string(at(key), child(key)); }
  std::string string_or(const std::string& key, const std::string& fallback);
  bool boolean_or(const std::string& key, bool fallback);

  // Throws for keys that were never looked up.
  void finish() const;

 private:
  const Json& value_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace collusion::io

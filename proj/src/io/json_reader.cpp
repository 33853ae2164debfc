#include "collusion/io/json_reader.hpp"

#include <cmath>
#include <limits>

namespace collusion::io {

std::string type_name(const Json& value) {
  if (value.is_null()) return "null";
  if (value.is_boolean()) return "boolean";
  if (value.is_number_integer() || value.is_number_unsigned()) return "integer";
  if (value.is_number()) return "number";
  if (value.is_string()) return "string";
  if (value.is_array()) return "array";
  return "object";
}

void fail_at(const std::string& path, const std::string& message) {
  throw ValidationError((path.empty() ? std::string("(root)") : path) + ": " + message);
}

double as_number(const Json& value, const std::string& path) {
  if (!value.is_number()) fail_at(path, "expected number, got " + type_name(value));
  const double v = value.get<double>();
  if (!std::isfinite(v)) fail_at(path, "expected a finite number");
  return v;
}

std::int64_t as_integer(const Json& value, const std::string& path) {
  if (value.is_number_unsigned()) {
    const auto u = value.get<std::uint64_t>();
    if (u > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) fail_at(path, "integer too large");
    return static_cast<std::int64_t>(u);
  }
  if (!value.is_number_integer()) fail_at(path, "expected integer, got " + type_name(value));
  return value.get<std::int64_t>();
}

std::size_t as_count(const Json& value, const std::string& path) {
  if (value.is_number_unsigned()) return static_cast<std::size_t>(value.get<std::uint64_t>());
  const auto v = as_integer(value, path);
  if (v < 0) fail_at(path, "expected a nonnegative integer, got " + std::to_string(v));
  return static_cast<std::size_t>(v);
}

bool as_bool(const Json& value, const std::string& path) {
  if (!value.is_boolean()) fail_at(path, "expected boolean, got " + type_name(value));
  return value.get<bool>();
}

std::string as_string(const Json& value, const std::string& path) {
  if (!value.is_string()) fail_at(path, "expected string, got " + type_name(value));
  return value.get<std::string>();
}

std::vector<double> as_numbers(const Json& value, const std::string& path) {
  if (!value.is_array()) fail_at(path, "expected array, got " + type_name(value));
  std::vector<double> out;
  for (std::size_t i = 0; i < value.size(); ++i) out.push_back(as_number(value[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<std::size_t> as_counts(const Json& value, const std::string& path) {
  if (!value.is_array()) fail_at(path, "expected array, got " + type_name(value));
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < value.size(); ++i) out.push_back(as_count(value[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

ObjectReader::ObjectReader(const Json& value, std::string path) : value_(value), path_(std::move(path)) {
  if (!value_.is_object()) fail_at(path_, "expected object, got " + type_name(value_));
}

bool ObjectReader::has(const std::string& key) const { return value_.contains(key); }

const Json& ObjectReader::at(const std::string& key) {
  const Json* v = find(key);
  if (!v) fail_at(child(key), "missing required field");
  return *v;
}

const Json* ObjectReader::find(const std::string& key) {
  auto it = value_.find(key);
  if (it == value_.end()) return nullptr;
  seen_.insert(key);
  return &*it;
}

double ObjectReader::number_or(const std::string& key, double fallback) {
  const Json* v = find(key);
  return v ? as_number(*v, child(key)) : fallback;
}

std::size_t ObjectReader::count_or(const std::string& key, std::size_t fallback) {
  const Json* v = find(key);
  return v ? as_count(*v, child(key)) : fallback;
}

std::string ObjectReader::string_or(const std::string& key, const std::string& fallback) {
  const Json* v = find(key);
  return v ? as_string(*v, child(key)) : fallback;
}

bool ObjectReader::boolean_or(const std::string& key, bool fallback) {
  const Json* v = find(key);
  return v ? as_bool(*v, child(key)) : fallback;
}

void ObjectReader::finish() const {
  for (auto it = value_.begin(); it != value_.end(); ++it)
    if (!seen_.count(it.key())) fail_at(child(it.key()), "unknown field");
}

}  // namespace collusion::io

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "thermpc/building.hpp"
#include "thermpc/errors.hpp"
#include "thermpc/timebase.hpp"

namespace thermpc::fields {

using nlohmann::json;

inline std::string at(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
inline std::string at(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

inline const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw ValidationError(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ValidationError(at(path, key), "required field is missing");
  return *it;
}

inline double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ValidationError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ValidationError(path, "must be finite");
  return v;
}

inline std::string get_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw ValidationError(path, "expected a string");
  return j.get<std::string>();
}

inline const json& get_array(const json& j, const std::string& path) {
  if (!j.is_array()) throw ValidationError(path, "expected an array");
  return j;
}

inline double number_field(const json& obj, const std::string& key, const std::string& path) {
  return get_number(require(obj, key, path), at(path, key));
}

inline std::string string_field(const json& obj, const std::string& key, const std::string& path) {
  return get_string(require(obj, key, path), at(path, key));
}

inline std::string optional_string(const json& obj, const std::string& key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return {};
  return get_string(*it, at(path, key));
}


inline ComfortBand parse_band(const json& j, const std::string& path) {
  get_array(j, path);
  if (j.size() != 2) throw ValidationError(path, "expected [T_min, T_max]");
  return {get_number(j[0], at(path, 0)), get_number(j[1], at(path, 1))};
}

inline std::vector<int> parse_days(const json& obj, const std::string& path) {
  std::vector<int> days;
  auto convert = [&](const json& d, const std::string& p) {
    try {
      return parse_weekday(get_string(d, p));
    } catch (const ValidationError&) {
      throw;
    } catch (const InputError& e) {
      throw ValidationError(p, e.what());
    }
  };
  if (auto it = obj.find("day"); it != obj.end()) days.push_back(convert(*it, at(path, "day")));
  if (auto it = obj.find("days"); it != obj.end()) {
    get_array(*it, at(path, "days"));
    for (std::size_t i = 0; i < it->size(); ++i) days.push_back(convert((*it)[i], at(at(path, "days"), i)));
  }
  if (days.empty()) throw ValidationError(path, "requires 'day' or 'days'");
  return days;
}

inline int clock_field(const json& obj, const std::string& key, const std::string& path) {
  const std::string s = string_field(obj, key, path);
  try {
    return parse_clock(s);
  } catch (const InputError& e) {
    throw ValidationError(at(path, key), e.what());
  }
}


inline json parse_json_document(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw_syntax_error(text, e.byte, "syntax error: " + std::string(e.what()));
  }
}

}  // namespace thermpc::fields

#pragma once

#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace drsync::jsonutil {

using nlohmann::json;

/// Collects problems while walking a JSON document so a caller can report
/// all of them at once.
class Reader {
 public:
  explicit Reader(std::vector<std::string>& errors) : errors_(errors) {}

  /// Flags keys of `obj` that are not in `allowed`. Returns false if `obj`
  /// is not an object.
  bool object(const json& obj, const std::string& path, std::initializer_list<std::string_view> allowed) {
    if (!obj.is_object()) {
      errors_.push_back(path + ": expected an object");
      return false;
    }
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      bool known = false;
      for (auto key : allowed) known = known || key == it.key();
      if (!known) errors_.push_back(path + "." + it.key() + ": unknown key");
    }
    return true;
  }

  template <typename T>
  void get(const json& obj, const std::string& path, const char* key, T& out) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    try {
      if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
        if (!v.is_number_integer()) throw std::invalid_argument("not an integer");
        if constexpr (std::is_unsigned_v<T>) {
          if (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0) {
            throw std::invalid_argument("must be non-negative");
          }
        }
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) throw std::invalid_argument("not a number");
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw std::invalid_argument("not a boolean");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw std::invalid_argument("not a string");
      }
      out = v.get<T>();
    } catch (const std::exception& e) {
      errors_.push_back(path + "." + key + ": " + e.what());
    }
  }

  void error(std::string msg) { errors_.push_back(std::move(msg)); }

 private:
  std::vector<std::string>& errors_;
};

}  // namespace drsync::jsonutil

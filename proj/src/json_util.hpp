#pragma once

// Field access with SchemaError reporting the JSON path of the offending field.

#include <cmath>
#include <initializer_list>
#include <set>
#include <string>

#include "cidx/io.hpp"

namespace cidx::detail {

[[noreturn]] inline void schema(const std::string& path, const std::string& what) {
    fail(ErrorCode::SchemaError, path + ": " + what);
}

inline void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) schema(path, "expected an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [k, v] : j.items())
        if (!ok.count(k)) schema(path + "." + k, "unknown field");
}

inline const json& at(const json& j, const std::string& path, const char* key) {
    if (!j.is_object() || !j.contains(key)) schema(path + "." + key, "missing field");
    return j.at(key);
}

inline double number(const json& j, const std::string& path) {
    if (!j.is_number()) schema(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) schema(path, "expected a finite number");
    return v;
}

inline double number_or(const json& j, const std::string& path, const char* key, double dflt) {
    return j.contains(key) ? number(j.at(key), path + "." + key) : dflt;
}

inline int integer(const json& j, const std::string& path) {
    if (!j.is_number_integer()) schema(path, "expected an integer");
    return j.get<int>();
}

inline std::string string(const json& j, const std::string& path) {
    if (!j.is_string()) schema(path, "expected a string");
    return j.get<std::string>();
}

inline bool boolean_or(const json& j, const std::string& path, const char* key, bool dflt) {
    if (!j.contains(key)) return dflt;
    if (!j.at(key).is_boolean()) schema(path + "." + key, "expected true or false");
    return j.at(key).get<bool>();
}

inline Date date(const json& j, const std::string& path) {
    try {
        return parse_date(string(j, path));
    } catch (const Error& e) {
        schema(path, e.what());
    }
}

inline DayCount day_count(const json& j, const std::string& path) {
    try {
        return parse_day_count(string(j, path));
    } catch (const Error& e) {
        schema(path, e.what());
    }
}

}  // namespace cidx::detail

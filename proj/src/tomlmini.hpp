#pragma once

// Minimal TOML subset used by experiment configs: [tables], key = value with
// strings, integers, floats, booleans and flat arrays, and # comments.
// Dotted keys, inline tables, multi-line strings and dates are not supported.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace hck::toml {

struct Value {
    enum class Type { String, Integer, Float, Boolean, Array } type = Type::String;
    std::string str;
    std::int64_t integer = 0;
    double number = 0.0;
    bool boolean = false;
    std::vector<Value> array;

    double as_number() const;  // integer or float
};

// keys are "table.key" ("key" at top level)
using Document = std::map<std::string, Value>;

Document parse_file(const std::string& path);
Document parse_string(const std::string& text);

const Value* find(const Document& doc, const std::string& key);
std::string get_string(const Document& doc, const std::string& key,
                       const std::string& fallback);
std::int64_t get_int(const Document& doc, const std::string& key, std::int64_t fallback);
double get_double(const Document& doc, const std::string& key, double fallback);
bool get_bool(const Document& doc, const std::string& key, bool fallback);
std::vector<std::int64_t> get_int_array(const Document& doc, const std::string& key);
std::vector<double> get_double_array(const Document& doc, const std::string& key);

}  // namespace hck::toml

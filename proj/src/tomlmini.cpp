#include "tomlmini.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hck::toml {

double Value::as_number() const {
    if (type == Type::Integer) return static_cast<double>(integer);
    if (type == Type::Float) return number;
    throw std::runtime_error("toml: value is not numeric");
}

namespace {

[[noreturn]] void fail(int line, const std::string& msg) {
    throw std::runtime_error("toml: line " + std::to_string(line) + ": " + msg);
}

std::string strip(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

// removes a trailing comment that is not inside a string
std::string drop_comment(const std::string& s) {
    bool in_str = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"') in_str = !in_str;
        if (s[i] == '#' && !in_str) return s.substr(0, i);
    }
    return s;
}

Value parse_scalar(const std::string& tok, int line) {
    Value v;
    if (tok.size() >= 2 && tok.front() == '"' && tok.back() == '"') {
        v.type = Value::Type::String;
        std::string out;
        for (std::size_t i = 1; i + 1 < tok.size(); ++i) {
            if (tok[i] == '\\' && i + 2 < tok.size()) {
                ++i;
                switch (tok[i]) {
                    case 'n': out += '\n'; break;
                    case 't': out += '\t'; break;
                    case '"': out += '"'; break;
                    case '\\': out += '\\'; break;
                    default: fail(line, "unsupported escape");
                }
            } else {
                out += tok[i];
            }
        }
        v.str = out;
        return v;
    }
    if (tok == "true" || tok == "false") {
        v.type = Value::Type::Boolean;
        v.boolean = tok == "true";
        return v;
    }
    const bool looks_float = tok.find_first_of(".eE") != std::string::npos &&
                             tok.find("0x") == std::string::npos;
    if (!looks_float) {
        std::int64_t iv = 0;
        auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), iv);
        if (ec == std::errc() && p == tok.data() + tok.size()) {
            v.type = Value::Type::Integer;
            v.integer = iv;
            return v;
        }
    }
    try {
        std::size_t used = 0;
        const double dv = std::stod(tok, &used);
        if (used == tok.size()) {
            v.type = Value::Type::Float;
            v.number = dv;
            return v;
        }
    } catch (...) {
    }
    fail(line, "cannot parse value '" + tok + "'");
}

std::vector<std::string> split_array_items(const std::string& body, int line) {
    std::vector<std::string> items;
    std::string cur;
    bool in_str = false;
    for (char c : body) {
        if (c == '"') in_str = !in_str;
        if (c == ',' && !in_str) {
            items.push_back(strip(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    const std::string last = strip(cur);
    if (!last.empty()) items.push_back(last);
    for (const auto& it : items)
        if (it.empty()) fail(line, "empty array element");
    return items;
}

}  // namespace

Document parse_string(const std::string& text) {
    Document doc;
    std::istringstream in(text);
    std::string raw, table;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = strip(drop_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail(line_no, "unterminated table header");
            table = strip(line.substr(1, line.size() - 2));
            if (table.empty()) fail(line_no, "empty table name");
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) fail(line_no, "expected key = value");
        const std::string key = strip(line.substr(0, eq));
        const std::string val = strip(line.substr(eq + 1));
        if (key.empty()) fail(line_no, "empty key");
        if (val.empty()) fail(line_no, "missing value");
        Value v;
        if (val.front() == '[') {
            if (val.back() != ']') fail(line_no, "unterminated array");
            v.type = Value::Type::Array;
            for (const auto& item : split_array_items(val.substr(1, val.size() - 2), line_no))
                v.array.push_back(parse_scalar(item, line_no));
        } else {
            v = parse_scalar(val, line_no);
        }
        const std::string full = table.empty() ? key : table + "." + key;
        if (doc.count(full)) fail(line_no, "duplicate key " + full);
        doc[full] = std::move(v);
    }
    return doc;
}

Document parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("toml: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str());
}

const Value* find(const Document& doc, const std::string& key) {
    auto it = doc.find(key);
    return it == doc.end() ? nullptr : &it->second;
}

std::string get_string(const Document& doc, const std::string& key,
                       const std::string& fallback) {
    const Value* v = find(doc, key);
    if (!v) return fallback;
    if (v->type != Value::Type::String) throw std::runtime_error("toml: " + key + " is not a string");
    return v->str;
}

std::int64_t get_int(const Document& doc, const std::string& key, std::int64_t fallback) {
    const Value* v = find(doc, key);
    if (!v) return fallback;
    if (v->type != Value::Type::Integer) throw std::runtime_error("toml: " + key + " is not an integer");
    return v->integer;
}

double get_double(const Document& doc, const std::string& key, double fallback) {
    const Value* v = find(doc, key);
    if (!v) return fallback;
    return v->as_number();
}

bool get_bool(const Document& doc, const std::string& key, bool fallback) {
    const Value* v = find(doc, key);
    if (!v) return fallback;
    if (v->type != Value::Type::Boolean) throw std::runtime_error("toml: " + key + " is not a boolean");
    return v->boolean;
}

std::vector<std::int64_t> get_int_array(const Document& doc, const std::string& key) {
    const Value* v = find(doc, key);
    if (!v) return {};
    if (v->type != Value::Type::Array) throw std::runtime_error("toml: " + key + " is not an array");
    std::vector<std::int64_t> out;
    for (const auto& e : v->array) {
        if (e.type != Value::Type::Integer)
            throw std::runtime_error("toml: " + key + " has non-integer elements");
        out.push_back(e.integer);
    }
    return out;
}

std::vector<double> get_double_array(const Document& doc, const std::string& key) {
    const Value* v = find(doc, key);
    if (!v) return {};
    if (v->type != Value::Type::Array) throw std::runtime_error("toml: " + key + " is not an array");
    std::vector<double> out;
    for (const auto& e : v->array) out.push_back(e.as_number());
    return out;
}

}  // namespace hck::toml

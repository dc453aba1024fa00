// Minimal JSON emission with fixed key order and floats printed at 17
// significant digits, so emitted files are byte-reproducible. Parsing of
// user-supplied JSON goes through nlohmann/json instead.
#pragma once

#include <cstdio>
#include <string>
#include <utility>
#include <vector>

namespace egoact {
namespace json {

inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string num(int v) { return std::to_string(v); }
inline std::string num(long long v) { return std::to_string(v); }
inline std::string num(unsigned long long v) { return std::to_string(v); }
inline std::string boolean(bool b) { return b ? "true" : "false"; }

inline std::string str(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out + "\"";
}

// values are pre-rendered JSON fragments
inline std::string obj(const std::vector<std::pair<std::string, std::string>>& fields) {
  std::string out = "{";
  for (size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ",";
    out += str(fields[i].first) + ":" + fields[i].second;
  }
  return out + "}";
}

inline std::string arr(const std::vector<std::string>& items) {
  std::string out = "[";
  for (size_t i = 0; i < items.size(); ++i) {
    if (i) out += ",";
    out += items[i];
  }
  return out + "]";
}

template <typename T>
std::string num_arr(const std::vector<T>& items) {
  std::vector<std::string> rendered;
  rendered.reserve(items.size());
  for (const T& v : items) rendered.push_back(num(v));
  return arr(rendered);
}

}  // namespace json
}  // namespace egoact

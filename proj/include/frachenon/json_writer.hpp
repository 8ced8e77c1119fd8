#pragma once

// Ordered JSON values with a fixed float format (%.17g) for byte-stable output.
// Non-finite numbers are written as the strings "infinite", "-infinite" and "nan".

#include <cmath>
#include <cstdio>
#include <initializer_list>
#include <ostream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace frachenon::json {

class Value;
using Array = std::vector<Value>;
using Object = std::vector<std::pair<std::string, Value>>;

inline std::string format_number(double x) {
  if (std::isnan(x)) return "\"nan\"";
  if (std::isinf(x)) return x > 0 ? "\"infinite\"" : "\"-infinite\"";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

class Value {
 public:
  Value() : v_(nullptr) {}
  Value(std::nullptr_t) : v_(nullptr) {}
  Value(bool b) : v_(b) {}
  Value(int i) : v_(static_cast<long long>(i)) {}
  Value(long long i) : v_(i) {}
  Value(std::size_t i) : v_(static_cast<long long>(i)) {}
  Value(double d) : v_(d) {}
  Value(const char* s) : v_(std::string(s)) {}
  Value(std::string s) : v_(std::move(s)) {}
  Value(Array a) : v_(std::move(a)) {}
  Value(Object o) : v_(std::move(o)) {}

  static Value object(std::initializer_list<std::pair<std::string, Value>> items) { return Object(items); }

  /// Appends a key to an object value.
  Value& set(std::string key, Value v) {
    std::get<Object>(v_).emplace_back(std::move(key), std::move(v));
    return *this;
  }
  void push(Value v) { std::get<Array>(v_).push_back(std::move(v)); }

  void dump(std::ostream& os, int indent = 0) const {
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, std::nullptr_t>) {
            os << "null";
          } else if constexpr (std::is_same_v<T, bool>) {
            os << (x ? "true" : "false");
          } else if constexpr (std::is_same_v<T, long long>) {
            os << x;
          } else if constexpr (std::is_same_v<T, double>) {
            os << format_number(x);
          } else if constexpr (std::is_same_v<T, std::string>) {
            write_string(os, x);
          } else if constexpr (std::is_same_v<T, Array>) {
            if (x.empty()) {
              os << "[]";
              return;
            }
            os << "[\n";
            for (std::size_t i = 0; i < x.size(); ++i) {
              pad(os, indent + 2);
              x[i].dump(os, indent + 2);
              os << (i + 1 < x.size() ? ",\n" : "\n");
            }
            pad(os, indent);
            os << ']';
          } else {
            if (x.empty()) {
              os << "{}";
              return;
            }
            os << "{\n";
            for (std::size_t i = 0; i < x.size(); ++i) {
              pad(os, indent + 2);
              write_string(os, x[i].first);
              os << ": ";
              x[i].second.dump(os, indent + 2);
              os << (i + 1 < x.size() ? ",\n" : "\n");
            }
            pad(os, indent);
            os << '}';
          }
        },
        v_);
  }

 private:
  static void pad(std::ostream& os, int n) { os << std::string(static_cast<std::size_t>(n), ' '); }
  static void write_string(std::ostream& os, const std::string& s) {
    os << '"';
    for (char c : s) {
      switch (c) {
        case '"': os << "\\\""; break;
        case '\\': os << "\\\\"; break;
        case '\n': os << "\\n"; break;
        case '\t': os << "\\t"; break;
        case '\r': os << "\\r"; break;
        default:
          if (static_cast<unsigned char>(c) < 0x20) {
            char buf[8];
            std::snprintf(buf, sizeof buf, "\\u%04x", c);
            os << buf;
          } else {
            os << c;
          }
      }
    }
    os << '"';
  }

  std::variant<std::nullptr_t, bool, long long, double, std::string, Array, Object> v_;
};

/// Number formatting shared with the CSV writer.
inline std::string csv_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace frachenon::json

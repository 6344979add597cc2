#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>
#include <type_traits>

namespace dasqos::workbench {

/// Fixed-column CSV with 9-significant-digit floats.
class CsvWriter {
public:
  CsvWriter(std::ostream& out, std::initializer_list<std::string_view> columns) : out_(out) {
    bool first = true;
    for (auto c : columns) {
      if (!first) out_ << ',';
      out_ << c;
      first = false;
    }
    out_ << '\n';
  }

  template <class... Ts>
  void row(const Ts&... values) {
    bool first = true;
    ((cell(values, first), first = false), ...);
    out_ << '\n';
  }

  static std::string format(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
  }

private:
  template <class T>
  void cell(const T& v, bool first) {
    if (!first) out_ << ',';
    if constexpr (std::is_floating_point_v<T>)
      out_ << format(static_cast<double>(v));
    else if constexpr (std::is_same_v<T, bool>)
      out_ << (v ? 1 : 0);
    else
      out_ << v;
  }

  std::ostream& out_;
};

}  // namespace dasqos::workbench

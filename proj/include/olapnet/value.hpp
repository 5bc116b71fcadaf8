/*
 * Copyright 2026 The olapnet Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/**
 * @file value.hpp
 * @brief Typed result values and query results with CSV rendering.
 *
 * Money is exact: units at a decimal scale (cents are scale 2). Averages
 * and percentages are kept as exact rationals. Both render with two
 * decimals, rounding half away from zero.
 */

#pragma once

#include <cstdint>
#include <ostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "olapnet/date.hpp"

namespace olapnet {

__extension__ using i128 = __int128;
__extension__ using u128 = unsigned __int128;

struct Money {
  std::int64_t units = 0;
  int scale = 2;
  friend bool operator==(const Money&, const Money&) = default;
};

struct DateValue {
  std::int64_t days = 0;
  friend bool operator==(const DateValue&, const DateValue&) = default;
};

/// num / den, rendered with two decimals. den == 0 renders as 0.
struct Ratio {
  std::int64_t num = 0;
  std::int64_t den = 1;
  friend bool operator==(const Ratio&, const Ratio&) = default;
};

using Value = std::variant<std::int64_t, Money, DateValue, std::string, Ratio>;

namespace detail {

/// round(num / den * 100) half away from zero, formatted as d.dd
inline std::string two_decimals(i128 num, i128 den) {
  if (den == 0) return "0.00";
  if (den < 0) {
    num = -num;
    den = -den;
  }
  bool neg = num < 0;
  i128 a = neg ? -num : num;
  i128 scaled = (a * 100 * 2 + den) / (2 * den);
  auto whole = static_cast<long long>(scaled / 100);
  auto frac = static_cast<int>(scaled % 100);
  std::string s = (neg && scaled != 0 ? "-" : "") + std::to_string(whole) + ".";
  if (frac < 10) s += '0';
  return s + std::to_string(frac);
}

}  // namespace detail

inline std::string render(const Value& v) {
  struct {
    std::string operator()(std::int64_t x) const { return std::to_string(x); }
    std::string operator()(const Money& m) const {
      i128 den = 1;
      for (int i = 0; i < m.scale; ++i) den *= 10;
      return detail::two_decimals(m.units, den);
    }
    std::string operator()(const DateValue& d) const { return date::format(d.days); }
    std::string operator()(const std::string& s) const { return s; }
    std::string operator()(const Ratio& r) const { return detail::two_decimals(r.num, r.den); }
  } visit;
  return std::visit(visit, v);
}

/// RFC 4180: quote fields containing comma, quote, CR or LF; double inner quotes.
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

struct QueryResult {
  std::vector<std::string> columns;
  std::vector<std::vector<Value>> rows;

  std::size_t size() const { return rows.size(); }

  std::string to_csv() const {
    std::ostringstream os;
    write_csv(os);
    return os.str();
  }

  void write_csv(std::ostream& os) const {
    for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << csv_field(columns[i]);
    os << "\r\n";
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << csv_field(render(r[i]));
      os << "\r\n";
    }
  }

  /// Equality after canonical formatting.
  friend bool operator==(const QueryResult& a, const QueryResult& b) { return a.to_csv() == b.to_csv(); }
};

/// First differing line of two results' CSV, for diagnostics.
inline std::string first_difference(const QueryResult& got, const QueryResult& want) {
  std::istringstream a(got.to_csv()), b(want.to_csv());
  std::string la, lb;
  for (int line = 1;; ++line) {
    bool ha = static_cast<bool>(std::getline(a, la)), hb = static_cast<bool>(std::getline(b, lb));
    if (!ha && !hb) return {};
    if (!ha || !hb || la != lb) {
      auto strip = [](std::string s) {
        if (!s.empty() && s.back() == '\r') s.pop_back();
        return s;
      };
      return "line " + std::to_string(line) + ": got '" + (ha ? strip(la) : "<end>") + "', want '" +
             (hb ? strip(lb) : "<end>") + "'";
    }
  }
}

}  // namespace olapnet

#include "zoll/table.hpp"

#include <cstdio>

namespace zoll {

std::string format_cell(const Cell& c) {
  char buf[64];
  if (std::holds_alternative<double>(c)) {
    std::snprintf(buf, sizeof buf, "%.17g", std::get<double>(c));
    return buf;
  }
  if (std::holds_alternative<std::int64_t>(c)) {
    std::snprintf(buf, sizeof buf, "%lld",
                  static_cast<long long>(std::get<std::int64_t>(c)));
    return buf;
  }
  return std::get<std::string>(c);
}

std::string to_csv(const ResultTable& t) {
  std::string out;
  for (size_t i = 0; i < t.columns.size(); ++i) {
    out += t.columns[i];
    out += (i + 1 < t.columns.size()) ? ',' : '\n';
  }
  for (const auto& row : t.rows) {
    for (size_t i = 0; i < row.size(); ++i) {
      out += format_cell(row[i]);
      out += (i + 1 < row.size()) ? ',' : '\n';
    }
  }
  return out;
}

}  // namespace zoll

#pragma once

// Result tables with pinned, locale-independent formatting: doubles are
// written with 17 significant digits so identical runs produce identical
// bytes.

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "zoll/types.hpp"

namespace zoll {

using Cell = std::variant<double, std::int64_t, std::string>;

struct ResultTable {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add_row(std::vector<Cell> row) {
    if (row.size() != columns.size())
      throw Error("ResultTable: row width mismatch");
    rows.push_back(std::move(row));
  }
};

std::string format_cell(const Cell& c);
std::string to_csv(const ResultTable& t);

}  // namespace zoll

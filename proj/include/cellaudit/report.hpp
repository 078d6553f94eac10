#pragma once

#include <string>

#include "cellaudit/eval.hpp"
#include "cellaudit/workbook.hpp"

// Tab-separated tables printed by the command line tool.
namespace cellaudit::report {

// Header row of column numbers, then one row per sheet row of display text.
std::string grid_table(const Workbook& wb, const eval::ValueGrid& grid);

// name TAB =Sheet!target, alphabetical.
std::string names_table(const Workbook& wb);

// address TAB type TAB operator TAB formula1 [TAB formula2], declared order.
std::string validations_table(const Workbook& wb);

// caption TAB normal form, one line per distinct formula of each row.
std::string formula_listing(const Workbook& wb);

// Caption used by the listing for a sheet row.
std::string listing_caption(const Workbook& wb, const Sheet& sheet, int row);

}  // namespace cellaudit::report

#pragma once

#include <map>
#include <string_view>
#include <variant>
#include <vector>

#include "cellaudit/value.hpp"
#include "cellaudit/workbook.hpp"

namespace cellaudit::eval {

using ValueGrid = std::map<CellAddress, Value>;
using Overrides = std::map<CellAddress, Value>;

// Values for every occupied cell. Overridden cells take the given value for
// this run only; members of a dependency cycle are #CIRC!.
ValueGrid recalculate(const Workbook& wb, const Overrides& overrides = {});

// A range argument arrives as the values of its occupied cells.
using FunctionArg = std::variant<Value, std::vector<Value>>;

bool is_known_function(std::string_view name);

// Eager function library. IF here evaluates both branches beforehand; the
// recalculation engine handles IF, ISERROR, ISNA and OFFSET itself.
Value call_function(std::string_view name, const std::vector<FunctionArg>& args);

// Relative tolerance used by ASSERT.
inline constexpr double kAssertTolerance = 1e-13;

// Display text for a cell: its value through its format code.
std::string display_text(const Workbook& wb, const ValueGrid& grid, const CellAddress& a);

}  // namespace cellaudit::eval

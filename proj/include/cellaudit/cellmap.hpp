#pragma once

#include <string>

#include "cellaudit/analyze.hpp"

namespace cellaudit::cellmap {

// One character per cell: . blank, L label, I input, F formula,
// > copy-right, v copy-down, + copy-both.
char class_symbol(analyze::CellClass c);
const char* class_color(analyze::CellClass c);

// Tab-separated map of each sheet's used rectangle with a legend.
std::string render_text(const Workbook& wb);
std::string render_html(const Workbook& wb);
std::string render_svg(const Workbook& wb);

}  // namespace cellaudit::cellmap

#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace cellaudit {

inline constexpr int kMaxRows = 1048576;
inline constexpr int kMaxCols = 16384;

// A cell position. `sheet` is empty when the sheet is implied by context.
struct CellAddress {
    std::string sheet;
    int row = 1;
    int col = 1;

    friend auto operator<=>(const CellAddress&, const CellAddress&) = default;
    friend bool operator==(const CellAddress&, const CellAddress&) = default;
};

inline bool on_grid(int row, int col) {
    return row >= 1 && row <= kMaxRows && col >= 1 && col <= kMaxCols;
}

// Rectangular block of cells on one sheet; first is top-left, last bottom-right.
struct CellRange {
    CellAddress first;
    CellAddress last;

    bool contains(const CellAddress& a) const {
        return a.sheet == first.sheet && a.row >= first.row && a.row <= last.row &&
               a.col >= first.col && a.col <= last.col;
    }
    bool single_cell() const { return first.row == last.row && first.col == last.col; }
    int rows() const { return last.row - first.row + 1; }
    int cols() const { return last.col - first.col + 1; }

    friend bool operator==(const CellRange&, const CellRange&) = default;
};

// Builds a range from two corners in any order.
CellRange make_range(std::string sheet, int r1, int c1, int r2, int c2);

std::string column_letters(int col);
// Returns 0 for an invalid column string.
int column_index(std::string_view letters);

std::string to_r1c1(const CellAddress& a);  // "R2C3" (never sheet-qualified)
std::string to_a1(const CellAddress& a);    // "C2"
std::string qualified_r1c1(const CellAddress& a);  // "Forecast!R2C3" or "R2C3"
std::string to_r1c1(const CellRange& r);    // "R2C3:R2C7" or "R2C3" for one cell

// Stable node id used by DOT output and the HTTP API: "Sheet.RnCm".
std::string node_id(const CellAddress& a);

// Sheet names that are not plain identifiers are single-quoted in references.
std::string quote_sheet_name(std::string_view sheet);

// Parses an absolute address written as R1C1 ("R2C3") or A1 ("C2", "$C$2"),
// optionally sheet-qualified ("Forecast!R2C3"). No relative parts.
std::optional<CellAddress> parse_address(std::string_view text);
// Same, also accepting "first:last".
std::optional<CellRange> parse_range(std::string_view text);

// Error codes shared by formula literals and evaluation results.
enum class ErrorCode { DivZero, Value, Name, Ref, NA, Num, Circ, Assert };

std::string_view error_text(ErrorCode code);
std::optional<ErrorCode> parse_error_code(std::string_view text);

}  // namespace cellaudit

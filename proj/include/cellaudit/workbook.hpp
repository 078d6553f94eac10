#pragma once

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cellaudit/address.hpp"
#include "cellaudit/formula.hpp"

namespace cellaudit {

struct GridPos {
    int row = 1;
    int col = 1;
    friend auto operator<=>(const GridPos&, const GridPos&) = default;
    friend bool operator==(const GridPos&, const GridPos&) = default;
};

struct FormulaContent {
    std::string source;  // exactly as written, R1C1 style
    formula::Expr expr;
    friend bool operator==(const FormulaContent&, const FormulaContent&) = default;
};

struct Cell {
    std::variant<double, std::string, bool, FormulaContent> content;
    bool input = false;
    std::string format;

    bool is_formula() const { return std::holds_alternative<FormulaContent>(content); }
    bool is_text() const { return std::holds_alternative<std::string>(content); }
    bool is_number() const { return std::holds_alternative<double>(content); }
    const FormulaContent* formula() const { return std::get_if<FormulaContent>(&content); }

    static Cell number(double v, std::string format = {}, bool input = false);
    static Cell text(std::string v);
    static Cell boolean(bool v);
    // Parses `source` as an R1C1 formula anchored at `origin`.
    static Cell formula_r1c1(std::string source, const CellAddress& origin, std::string format = {});

    friend bool operator==(const Cell&, const Cell&) = default;
};

struct Sheet {
    std::string name;
    std::map<GridPos, Cell> cells;  // row-major; blank cells are absent

    const Cell* find(GridPos p) const;
    friend bool operator==(const Sheet&, const Sheet&) = default;
};

struct NamedRange {
    std::string name;
    std::string sheet;
    formula::CellRef start;  // sheet qualifier lives in `sheet`
    std::optional<formula::CellRef> end;

    // Anchors relative parts at `origin` and normalises the corners.
    CellRange resolve(const CellAddress& origin) const;
    // "=Forecast!R7C3:R7C7"
    std::string target_text() const;
    friend bool operator==(const NamedRange&, const NamedRange&) = default;
};

enum class ValidationType { InputOnly, WholeNumber, Decimal, List, Date, Time, TextLength, Custom };
enum class ValidationOperator {
    Between, NotBetween, Equal, NotEqual, Greater, Less, GreaterOrEqual, LessOrEqual
};

// WBT spelling ("whole-number") and the display spelling ("Whole Number").
std::string_view wbt_name(ValidationType t);
std::string_view display_name(ValidationType t);
std::string_view wbt_name(ValidationOperator op);
std::string_view display_name(ValidationOperator op);
std::optional<ValidationType> parse_validation_type(std::string_view wbt);
std::optional<ValidationOperator> parse_validation_operator(std::string_view wbt);

struct ValidationRule {
    CellRange target;
    ValidationType type = ValidationType::Decimal;
    ValidationOperator op = ValidationOperator::Between;
    std::string formula1;
    std::optional<std::string> formula2;

    friend bool operator==(const ValidationRule&, const ValidationRule&) = default;
};

class Workbook {
public:
    std::map<std::string, std::string> properties;
    std::vector<Sheet> sheets;
    std::vector<NamedRange> names;  // sorted case-insensitively
    std::vector<ValidationRule> validations;

    const Sheet* find_sheet(std::string_view name) const;
    Sheet* find_sheet(std::string_view name);
    Sheet& add_sheet(std::string name);
    int sheet_index(std::string_view name) const;  // -1 when absent

    const Cell* cell(const CellAddress& a) const;
    // Case-insensitive lookup.
    const NamedRange* find_name(std::string_view name) const;

    // Mutators used when building or deriving workbooks; each keeps the
    // invariants (sheet exists, names sorted and unique).
    void set_cell(const CellAddress& a, Cell c);
    void erase_cell(const CellAddress& a);
    void add_name(NamedRange n);

    // Every occupied cell, sheet order then row-major.
    std::vector<CellAddress> occupied() const;
    std::size_t occupied_count() const;

    std::string property(std::string_view key) const;

    friend bool operator==(const Workbook&, const Workbook&) = default;
};

bool iequals(std::string_view a, std::string_view b);
bool iless(std::string_view a, std::string_view b);

}  // namespace cellaudit

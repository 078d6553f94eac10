#include "cellaudit/workbook.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <stdexcept>

namespace cellaudit {

bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() &&
           std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
               return std::tolower(static_cast<unsigned char>(x)) ==
                      std::tolower(static_cast<unsigned char>(y));
           });
}

bool iless(std::string_view a, std::string_view b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), [](char x, char y) {
        return std::tolower(static_cast<unsigned char>(x)) < std::tolower(static_cast<unsigned char>(y));
    });
}

Cell Cell::number(double v, std::string format, bool input) {
    return Cell{v, input, std::move(format)};
}

Cell Cell::text(std::string v) { return Cell{std::move(v), false, {}}; }

Cell Cell::boolean(bool v) { return Cell{v, false, {}}; }

Cell Cell::formula_r1c1(std::string source, const CellAddress& origin, std::string format) {
    auto expr = formula::parse_formula(source, formula::Style::R1C1, origin);
    return Cell{FormulaContent{std::move(source), std::move(expr)}, false, std::move(format)};
}

const Cell* Sheet::find(GridPos p) const {
    auto it = cells.find(p);
    return it == cells.end() ? nullptr : &it->second;
}

CellRange NamedRange::resolve(const CellAddress& origin) const {
    CellAddress anchor{sheet, origin.row, origin.col};
    auto a = start.resolve(anchor);
    auto b = end ? end->resolve(anchor) : a;
    return make_range(sheet, a.row, a.col, b.row, b.col);
}

std::string NamedRange::target_text() const {
    formula::CellRef qualified = start;
    qualified.sheet = sheet;
    formula::Expr e = end ? formula::Expr(formula::RangeRef{qualified, *end}) : formula::Expr(qualified);
    return formula::render_formula(e, formula::Style::R1C1);
}

namespace {

struct TypeNames {
    ValidationType type;
    std::string_view wbt;
    std::string_view display;
};
constexpr std::array<TypeNames, 8> kTypes{{
    {ValidationType::InputOnly, "input-only", "Input Only"},
    {ValidationType::WholeNumber, "whole-number", "Whole Number"},
    {ValidationType::Decimal, "decimal", "Decimal"},
    {ValidationType::List, "list", "List"},
    {ValidationType::Date, "date", "Date"},
    {ValidationType::Time, "time", "Time"},
    {ValidationType::TextLength, "text-length", "Text Length"},
    {ValidationType::Custom, "custom", "Custom"},
}};

struct OperatorNames {
    ValidationOperator op;
    std::string_view wbt;
    std::string_view display;
};
constexpr std::array<OperatorNames, 8> kOperators{{
    {ValidationOperator::Between, "between", "Between"},
    {ValidationOperator::NotBetween, "not-between", "Not Between"},
    {ValidationOperator::Equal, "equal", "Equal"},
    {ValidationOperator::NotEqual, "not-equal", "Not Equal"},
    {ValidationOperator::Greater, "greater", "Greater"},
    {ValidationOperator::Less, "less", "Less"},
    {ValidationOperator::GreaterOrEqual, "greater-or-equal", "Greater Or Equal"},
    {ValidationOperator::LessOrEqual, "less-or-equal", "Less Or Equal"},
}};

}  // namespace

std::string_view wbt_name(ValidationType t) {
    for (const auto& e : kTypes) if (e.type == t) return e.wbt;
    return {};
}
std::string_view display_name(ValidationType t) {
    for (const auto& e : kTypes) if (e.type == t) return e.display;
    return {};
}
std::string_view wbt_name(ValidationOperator op) {
    for (const auto& e : kOperators) if (e.op == op) return e.wbt;
    return {};
}
std::string_view display_name(ValidationOperator op) {
    for (const auto& e : kOperators) if (e.op == op) return e.display;
    return {};
}
std::optional<ValidationType> parse_validation_type(std::string_view wbt) {
    for (const auto& e : kTypes) if (e.wbt == wbt) return e.type;
    return std::nullopt;
}
std::optional<ValidationOperator> parse_validation_operator(std::string_view wbt) {
    for (const auto& e : kOperators) if (e.wbt == wbt) return e.op;
    return std::nullopt;
}

const Sheet* Workbook::find_sheet(std::string_view name) const {
    for (const auto& s : sheets) if (s.name == name) return &s;
    return nullptr;
}

Sheet* Workbook::find_sheet(std::string_view name) {
    for (auto& s : sheets) if (s.name == name) return &s;
    return nullptr;
}

Sheet& Workbook::add_sheet(std::string name) {
    if (name.empty()) throw std::invalid_argument("sheet name must not be empty");
    if (find_sheet(name)) throw std::invalid_argument("duplicate sheet '" + name + "'");
    sheets.push_back(Sheet{std::move(name), {}});
    return sheets.back();
}

int Workbook::sheet_index(std::string_view name) const {
    for (std::size_t i = 0; i < sheets.size(); ++i) {
        if (sheets[i].name == name) return static_cast<int>(i);
    }
    return -1;
}

const Cell* Workbook::cell(const CellAddress& a) const {
    const Sheet* s = find_sheet(a.sheet);
    return s ? s->find({a.row, a.col}) : nullptr;
}

const NamedRange* Workbook::find_name(std::string_view name) const {
    auto it = std::lower_bound(names.begin(), names.end(), name,
                               [](const NamedRange& n, std::string_view key) { return iless(n.name, key); });
    if (it != names.end() && iequals(it->name, name)) return &*it;
    return nullptr;
}

void Workbook::set_cell(const CellAddress& a, Cell c) {
    if (!on_grid(a.row, a.col)) throw std::invalid_argument("address off the grid");
    if (c.is_formula() && c.input) throw std::invalid_argument("formula cells cannot be inputs");
    Sheet* s = find_sheet(a.sheet);
    if (!s) s = &add_sheet(a.sheet);
    s->cells[{a.row, a.col}] = std::move(c);
}

void Workbook::erase_cell(const CellAddress& a) {
    if (Sheet* s = find_sheet(a.sheet)) s->cells.erase({a.row, a.col});
}

void Workbook::add_name(NamedRange n) {
    if (!formula::is_identifier(n.name)) {
        throw std::invalid_argument("'" + n.name + "' is not a valid name");
    }
    if (find_name(n.name)) throw std::invalid_argument("duplicate name '" + n.name + "'");
    auto it = std::upper_bound(names.begin(), names.end(), n,
                               [](const NamedRange& a, const NamedRange& b) { return iless(a.name, b.name); });
    names.insert(it, std::move(n));
}

std::vector<CellAddress> Workbook::occupied() const {
    std::vector<CellAddress> out;
    for (const auto& s : sheets) {
        for (const auto& [pos, c] : s.cells) out.push_back({s.name, pos.row, pos.col});
    }
    return out;
}

std::size_t Workbook::occupied_count() const {
    std::size_t n = 0;
    for (const auto& s : sheets) n += s.cells.size();
    return n;
}

std::string Workbook::property(std::string_view key) const {
    auto it = properties.find(std::string(key));
    return it == properties.end() ? std::string() : it->second;
}

}  // namespace cellaudit

#include "cellaudit/report.hpp"

#include <algorithm>
#include <set>

namespace cellaudit::report {

namespace {

bool has_relative_part(const NamedRange& n) {
    auto rel = [](const formula::CellRef& r) { return !r.row.is_absolute() || !r.col.is_absolute(); };
    return rel(n.start) || (n.end && rel(*n.end));
}

std::string address_text(const Workbook& wb, const CellRange& r) {
    if (wb.sheets.size() > 1) return quote_sheet_name(r.first.sheet) + "!" + to_r1c1(r);
    return to_r1c1(r);
}

}  // namespace

std::string grid_table(const Workbook& wb, const eval::ValueGrid& grid) {
    std::string out;
    for (const auto& s : wb.sheets) {
        int rows = 0, cols = 0;
        for (const auto& [pos, cell] : s.cells) {
            rows = std::max(rows, pos.row);
            cols = std::max(cols, pos.col);
        }
        if (wb.sheets.size() > 1) out += "sheet " + s.name + "\n";
        for (int c = 1; c <= cols; ++c) out += "\t" + std::to_string(c);
        out += "\n";
        for (int r = 1; r <= rows; ++r) {
            out += std::to_string(r);
            for (int c = 1; c <= cols; ++c) out += "\t" + eval::display_text(wb, grid, {s.name, r, c});
            out += "\n";
        }
    }
    return out;
}

std::string names_table(const Workbook& wb) {
    std::string out;
    for (const auto& n : wb.names) out += n.name + "\t" + n.target_text() + "\n";
    return out;
}

std::string validations_table(const Workbook& wb) {
    std::string out;
    for (const auto& v : wb.validations) {
        out += address_text(wb, v.target) + "\t" + std::string(display_name(v.type)) + "\t" +
               std::string(display_name(v.op)) + "\t" + v.formula1;
        if (v.formula2) out += "\t" + *v.formula2;
        out += "\n";
    }
    return out;
}

std::string listing_caption(const Workbook& wb, const Sheet& sheet, int row) {
    // A fixed name covering the row's first formula wins.
    for (auto it = sheet.cells.lower_bound({row, 0}); it != sheet.cells.end() && it->first.row == row; ++it) {
        if (!it->second.is_formula()) continue;
        CellAddress a{sheet.name, row, it->first.col};
        for (const auto& n : wb.names) {
            if (n.sheet == sheet.name && !has_relative_part(n) && n.resolve(a).contains(a)) return n.name;
        }
        break;
    }
    for (auto it = sheet.cells.lower_bound({row, 0}); it != sheet.cells.end() && it->first.row == row; ++it) {
        if (auto* t = std::get_if<std::string>(&it->second.content); t && !t->empty()) {
            std::string caption = *t;
            std::replace(caption.begin(), caption.end(), ' ', '_');
            return caption;
        }
    }
    return "R" + std::to_string(row);
}

std::string formula_listing(const Workbook& wb) {
    std::string out;
    for (const auto& s : wb.sheets) {
        int current = 0;
        std::set<std::string> seen;
        std::string caption;
        for (const auto& [pos, cell] : s.cells) {
            auto* f = cell.formula();
            if (!f) continue;
            if (pos.row != current) {
                current = pos.row;
                seen.clear();
                caption = listing_caption(wb, s, pos.row);
            }
            std::string nf = formula::normal_form(f->expr);
            if (seen.insert(nf).second) out += caption + "\t" + nf + "\n";
        }
    }
    return out;
}

}  // namespace cellaudit::report

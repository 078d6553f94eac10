#include "cellaudit/cellmap.hpp"

#include <algorithm>
#include <sstream>

namespace cellaudit::cellmap {

using analyze::CellClass;

char class_symbol(CellClass c) {
    switch (c) {
        case CellClass::Blank: return '.';
        case CellClass::Label: return 'L';
        case CellClass::Input: return 'I';
        case CellClass::Formula: return 'F';
        case CellClass::CopyRight: return '>';
        case CellClass::CopyDown: return 'v';
        case CellClass::CopyBoth: return '+';
    }
    return '?';
}

const char* class_color(CellClass c) {
    switch (c) {
        case CellClass::Blank: return "#ffffff";
        case CellClass::Label: return "#e8e8ff";
        case CellClass::Input: return "#ffc8dc";
        case CellClass::Formula: return "#fff3a0";
        case CellClass::CopyRight: return "#c8f0c8";
        case CellClass::CopyDown: return "#c8dcff";
        case CellClass::CopyBoth: return "#c8c8c8";
    }
    return "#ffffff";
}

namespace {

struct Extent {
    int rows = 0;
    int cols = 0;
};

Extent extent(const Sheet& s) {
    Extent e;
    for (const auto& [pos, cell] : s.cells) {
        e.rows = std::max(e.rows, pos.row);
        e.cols = std::max(e.cols, pos.col);
    }
    return e;
}

std::string escape_xml(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

const CellClass kLegend[] = {CellClass::Label,     CellClass::Input,    CellClass::Formula,
                             CellClass::CopyRight, CellClass::CopyDown, CellClass::CopyBoth};

}  // namespace

std::string render_text(const Workbook& wb) {
    auto forms = analyze::normal_forms(wb);
    std::ostringstream os;
    for (const auto& s : wb.sheets) {
        auto e = extent(s);
        os << "sheet " << s.name << "\n";
        for (int c = 1; c <= e.cols; ++c) os << '\t' << c;
        os << '\n';
        for (int r = 1; r <= e.rows; ++r) {
            os << r;
            for (int c = 1; c <= e.cols; ++c) {
                os << '\t' << class_symbol(analyze::classify(wb, forms, {s.name, r, c}));
            }
            os << '\n';
        }
    }
    os << "legend";
    for (auto c : kLegend) os << '\t' << class_symbol(c) << '=' << analyze::class_name(c);
    os << '\n';
    return os.str();
}

std::string render_html(const Workbook& wb) {
    auto forms = analyze::normal_forms(wb);
    std::ostringstream os;
    os << "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>Cell map</title>\n"
       << "<style>table{border-collapse:collapse;font:12px sans-serif}"
       << "td,th{border:1px solid #999;padding:2px 6px;min-width:2em}</style></head><body>\n";
    for (const auto& s : wb.sheets) {
        auto e = extent(s);
        os << "<h2>" << escape_xml(s.name) << "</h2>\n<table>\n<tr><th></th>";
        for (int c = 1; c <= e.cols; ++c) os << "<th>C" << c << "</th>";
        os << "</tr>\n";
        for (int r = 1; r <= e.rows; ++r) {
            os << "<tr><th>R" << r << "</th>";
            for (int c = 1; c <= e.cols; ++c) {
                auto k = analyze::classify(wb, forms, {s.name, r, c});
                os << "<td class=\"" << analyze::class_name(k) << "\" style=\"background:" << class_color(k)
                   << "\">" << (k == CellClass::Blank ? ' ' : class_symbol(k)) << "</td>";
            }
            os << "</tr>\n";
        }
        os << "</table>\n";
    }
    os << "<p>";
    for (auto c : kLegend) {
        os << "<span style=\"background:" << class_color(c) << ";padding:2px 6px\">" << class_symbol(c) << ' '
           << analyze::class_name(c) << "</span> ";
    }
    os << "</p>\n</body></html>\n";
    return os.str();
}

std::string render_svg(const Workbook& wb) {
    constexpr int kCell = 24, kMargin = 30;
    auto forms = analyze::normal_forms(wb);
    int width = 0, height = 0;
    for (const auto& s : wb.sheets) {
        auto e = extent(s);
        width = std::max(width, kMargin + e.cols * kCell);
        height += kMargin + e.rows * kCell;
    }
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width + 10 << "\" height=\"" << height + 10
       << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    int y0 = 0;
    for (const auto& s : wb.sheets) {
        auto e = extent(s);
        os << "  <text x=\"2\" y=\"" << y0 + 18 << "\">" << escape_xml(s.name) << "</text>\n";
        for (int r = 1; r <= e.rows; ++r) {
            for (int c = 1; c <= e.cols; ++c) {
                auto k = analyze::classify(wb, forms, {s.name, r, c});
                int x = kMargin + (c - 1) * kCell, y = y0 + kMargin + (r - 1) * kCell;
                os << "  <rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << kCell << "\" height=\"" << kCell
                   << "\" fill=\"" << class_color(k) << "\" stroke=\"#999\"><title>R" << r << "C" << c << " "
                   << analyze::class_name(k) << "</title></rect>\n";
                if (k != CellClass::Blank) {
                    os << "  <text x=\"" << x + 8 << "\" y=\"" << y + 16 << "\">"
                       << escape_xml(std::string(1, class_symbol(k))) << "</text>\n";
                }
            }
        }
        y0 += kMargin + e.rows * kCell;
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace cellaudit::cellmap

#include "cellaudit/address.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>

namespace cellaudit {

namespace {

bool parse_int(std::string_view s, int& out) {
    if (s.empty()) return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}

std::optional<CellAddress> parse_local(std::string_view s) {
    // R1C1 absolute
    if (s.size() >= 4 && (s[0] == 'R' || s[0] == 'r')) {
        auto cpos = s.find_first_of("Cc", 1);
        if (cpos != std::string_view::npos) {
            int r = 0, c = 0;
            if (parse_int(s.substr(1, cpos - 1), r) && parse_int(s.substr(cpos + 1), c) &&
                on_grid(r, c)) {
                return CellAddress{"", r, c};
            }
        }
    }
    // A1, '$' allowed
    std::size_t i = 0;
    if (i < s.size() && s[i] == '$') ++i;
    std::size_t letters_begin = i;
    while (i < s.size() && std::isalpha(static_cast<unsigned char>(s[i]))) ++i;
    std::string_view letters = s.substr(letters_begin, i - letters_begin);
    if (letters.empty() || letters.size() > 3) return std::nullopt;
    if (i < s.size() && s[i] == '$') ++i;
    int r = 0;
    if (!parse_int(s.substr(i), r)) return std::nullopt;
    int c = column_index(letters);
    if (!on_grid(r, c)) return std::nullopt;
    return CellAddress{"", r, c};
}

}  // namespace

CellRange make_range(std::string sheet, int r1, int c1, int r2, int c2) {
    return CellRange{CellAddress{sheet, std::min(r1, r2), std::min(c1, c2)},
                     CellAddress{sheet, std::max(r1, r2), std::max(c1, c2)}};
}

std::string column_letters(int col) {
    std::string out;
    while (col > 0) {
        int rem = (col - 1) % 26;
        out.insert(out.begin(), static_cast<char>('A' + rem));
        col = (col - 1) / 26;
    }
    return out;
}

int column_index(std::string_view letters) {
    if (letters.empty()) return 0;
    int col = 0;
    for (char ch : letters) {
        if (!std::isalpha(static_cast<unsigned char>(ch))) return 0;
        col = col * 26 + (std::toupper(static_cast<unsigned char>(ch)) - 'A' + 1);
        if (col > kMaxCols) return 0;
    }
    return col;
}

std::string to_r1c1(const CellAddress& a) {
    return "R" + std::to_string(a.row) + "C" + std::to_string(a.col);
}

std::string to_a1(const CellAddress& a) { return column_letters(a.col) + std::to_string(a.row); }

std::string qualified_r1c1(const CellAddress& a) {
    if (a.sheet.empty()) return to_r1c1(a);
    return quote_sheet_name(a.sheet) + "!" + to_r1c1(a);
}

std::string to_r1c1(const CellRange& r) {
    if (r.single_cell()) return to_r1c1(r.first);
    return to_r1c1(r.first) + ":" + to_r1c1(r.last);
}

std::string node_id(const CellAddress& a) { return a.sheet + "." + to_r1c1(a); }

std::string quote_sheet_name(std::string_view sheet) {
    bool plain = !sheet.empty() && is_ident_start(sheet.front()) &&
                 std::all_of(sheet.begin(), sheet.end(), is_ident_char);
    if (plain) return std::string(sheet);
    std::string out = "'";
    for (char c : sheet) {
        if (c == '\'') out += '\'';
        out += c;
    }
    out += '\'';
    return out;
}

std::optional<CellAddress> parse_address(std::string_view text) {
    std::string sheet;
    auto bang = text.rfind('!');
    if (bang != std::string_view::npos) {
        std::string_view s = text.substr(0, bang);
        if (s.size() >= 2 && s.front() == '\'' && s.back() == '\'') {
            s = s.substr(1, s.size() - 2);
            for (std::size_t i = 0; i < s.size(); ++i) {
                sheet += s[i];
                if (s[i] == '\'' && i + 1 < s.size() && s[i + 1] == '\'') ++i;
            }
        } else {
            sheet = std::string(s);
        }
        if (sheet.empty()) return std::nullopt;
        text = text.substr(bang + 1);
    }
    auto local = parse_local(text);
    if (!local) return std::nullopt;
    local->sheet = std::move(sheet);
    return local;
}

std::optional<CellRange> parse_range(std::string_view text) {
    auto colon = text.rfind(':');
    if (colon == std::string_view::npos) {
        auto a = parse_address(text);
        if (!a) return std::nullopt;
        return CellRange{*a, *a};
    }
    auto first = parse_address(text.substr(0, colon));
    auto last = parse_local(text.substr(colon + 1));
    if (!first || !last) return std::nullopt;
    return make_range(first->sheet, first->row, first->col, last->row, last->col);
}

namespace {
constexpr std::array<std::pair<ErrorCode, std::string_view>, 8> kErrorNames{{
    {ErrorCode::DivZero, "#DIV/0!"},
    {ErrorCode::Value, "#VALUE!"},
    {ErrorCode::Name, "#NAME?"},
    {ErrorCode::Ref, "#REF!"},
    {ErrorCode::NA, "#N/A"},
    {ErrorCode::Num, "#NUM!"},
    {ErrorCode::Circ, "#CIRC!"},
    {ErrorCode::Assert, "#ASSERT!"},
}};
}  // namespace

std::string_view error_text(ErrorCode code) {
    for (const auto& [c, name] : kErrorNames) {
        if (c == code) return name;
    }
    return "#VALUE!";
}

std::optional<ErrorCode> parse_error_code(std::string_view text) {
    for (const auto& [c, name] : kErrorNames) {
        if (name == text) return c;
    }
    return std::nullopt;
}

}  // namespace cellaudit

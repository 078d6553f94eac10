#include "cellaudit/wbt.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace cellaudit::wbt {

ParseError::ParseError(int line, std::string token, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ": " + message +
                         (token.empty() ? std::string() : " (at '" + token + "')")),
      line_(line),
      token_(std::move(token)),
      detail_(message) {}

namespace {

struct Token {
    std::string key;  // set for key="value" options
    std::string text;
    bool quoted = false;
};

[[noreturn]] void fail(int line, const std::string& token, const std::string& msg) {
    throw ParseError(line, token, msg);
}

std::string read_quoted(std::string_view s, std::size_t& i, int line) {
    std::string out;
    ++i;  // opening quote
    while (true) {
        if (i >= s.size()) fail(line, std::string(s), "unterminated quoted string");
        char c = s[i];
        if (c == '"') {
            ++i;
            return out;
        }
        if (c == '\\') {
            if (i + 1 >= s.size() || (s[i + 1] != '"' && s[i + 1] != '\\')) {
                fail(line, std::string(s.substr(i, 2)), "bad escape in quoted string");
            }
            out += s[i + 1];
            i += 2;
            continue;
        }
        out += c;
        ++i;
    }
}

std::vector<Token> tokenize(std::string_view s, int line) {
    std::vector<Token> out;
    std::size_t i = 0;
    auto space = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
    while (true) {
        while (i < s.size() && space(s[i])) ++i;
        if (i >= s.size()) break;
        Token t;
        if (s[i] == '"') {
            t.text = read_quoted(s, i, line);
            t.quoted = true;
        } else {
            std::size_t b = i;
            while (i < s.size() && !space(s[i]) && s[i] != '"') ++i;
            t.text = std::string(s.substr(b, i - b));
            if (i < s.size() && s[i] == '"') {
                if (t.text.empty() || t.text.back() != '=') fail(line, t.text, "unexpected quote");
                t.key = t.text.substr(0, t.text.size() - 1);
                t.text = read_quoted(s, i, line);
                t.quoted = true;
            }
        }
        if (i < s.size() && !space(s[i])) fail(line, std::string(s.substr(i)), "expected whitespace");
        out.push_back(std::move(t));
    }
    return out;
}

bool parse_positive(std::string_view s, int& out) {
    if (s.empty()) return false;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && p == s.data() + s.size();
}

GridPos parse_cell_address(const std::string& tok, int line) {
    if (tok.size() < 4 || tok[0] != 'R') fail(line, tok, "malformed cell address, expected RnCm");
    auto c = tok.find('C', 1);
    if (c == std::string::npos) fail(line, tok, "malformed cell address, expected RnCm");
    int row = 0, col = 0;
    std::string_view rs = std::string_view(tok).substr(1, c - 1);
    std::string_view cs = std::string_view(tok).substr(c + 1);
    bool neg_row = !rs.empty() && rs.front() == '-';
    bool neg_col = !cs.empty() && cs.front() == '-';
    if (!parse_positive(neg_row ? rs.substr(1) : rs, row) ||
        !parse_positive(neg_col ? cs.substr(1) : cs, col)) {
        fail(line, tok, "malformed cell address, expected RnCm");
    }
    if (neg_row || row < 1) fail(line, tok, "row must be at least 1");
    if (neg_col || col < 1) fail(line, tok, "column must be at least 1");
    if (row > kMaxRows || col > kMaxCols) fail(line, tok, "address beyond the grid");
    return {row, col};
}

double parse_number(const std::string& tok, int line) {
    std::string body = tok;
    bool percent = !body.empty() && body.back() == '%';
    if (percent) body.pop_back();
    if (body.empty()) fail(line, tok, "expected a number");
    char* end = nullptr;
    double v = std::strtod(body.c_str(), &end);
    if (end != body.c_str() + body.size() || !std::isfinite(v)) fail(line, tok, "expected a number");
    return percent ? v / 100.0 : v;
}

bool bare_safe(std::string_view s) {
    if (s.empty() || s.front() == '#') return false;
    return std::none_of(s.begin(), s.end(), [](char c) {
        return c == ' ' || c == '\t' || c == '"' || c == '\\' || c == '\n' || c == '\r';
    });
}

std::string quote(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + "\"";
}

std::string token_text(std::string_view s) { return bare_safe(s) ? std::string(s) : quote(s); }

class DocumentParser {
public:
    Workbook run(std::string_view text) {
        std::size_t pos = 0;
        while (pos <= text.size()) {
            auto nl = text.find('\n', pos);
            std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
            ++line_no_;
            handle(line);
            if (nl == std::string_view::npos) break;
            pos = nl + 1;
        }
        finish();
        return std::move(wb_);
    }

private:
    void handle(std::string_view line) {
        std::size_t first = line.find_first_not_of(" \t\r");
        if (first == std::string_view::npos || line[first] == '#') return;
        auto toks = tokenize(line, line_no_);
        const Token& d = toks.front();
        if (d.quoted || !d.key.empty()) fail(line_no_, d.text, "expected a directive");
        if (d.text == "%wbt") {
            if (seen_directive_) fail(line_no_, d.text, "header must be the first line");
            if (toks.size() != 2 || toks[1].text != "1") fail(line_no_, toks.size() > 1 ? toks[1].text : "", "unsupported version");
        } else if (d.text == "prop") {
            prop(toks);
        } else if (d.text == "sheet") {
            sheet(toks);
        } else if (d.text == "cell") {
            cell(toks);
        } else if (d.text == "name") {
            name(toks);
        } else if (d.text == "valid") {
            valid(toks);
        } else {
            fail(line_no_, d.text, "unknown directive");
        }
        seen_directive_ = true;
    }

    void expect_count(const std::vector<Token>& t, std::size_t lo, std::size_t hi) {
        if (t.size() < lo) fail(line_no_, t.back().text, "too few fields");
        if (t.size() > hi) fail(line_no_, t[hi].text, "unexpected field");
    }

    void prop(const std::vector<Token>& t) {
        expect_count(t, 3, 3);
        if (t[1].quoted || t[1].text.empty()) fail(line_no_, t[1].text, "expected a property key");
        if (!t[2].quoted || !t[2].key.empty()) fail(line_no_, t[2].text, "property value must be quoted");
        if (wb_.properties.count(t[1].text)) fail(line_no_, t[1].text, "duplicate property");
        wb_.properties[t[1].text] = t[2].text;
    }

    void sheet(const std::vector<Token>& t) {
        expect_count(t, 2, 2);
        if (t[1].text.empty()) fail(line_no_, t[1].text, "sheet name must not be empty");
        if (wb_.find_sheet(t[1].text)) fail(line_no_, t[1].text, "duplicate sheet");
        wb_.add_sheet(t[1].text);
        current_ = t[1].text;
    }

    Sheet& current_sheet() {
        if (current_.empty()) {
            current_ = "Sheet1";
            if (!wb_.find_sheet(current_)) wb_.add_sheet(current_);
        }
        return *wb_.find_sheet(current_);
    }

    void cell(const std::vector<Token>& t) {
        expect_count(t, 4, 6);
        GridPos pos = parse_cell_address(t[1].text, line_no_);
        Sheet& sh = current_sheet();
        if (sh.cells.count(pos)) fail(line_no_, t[1].text, "duplicate cell address");
        const std::string& kind = t[2].text;
        const Token& val = t[3];
        Cell c;
        if (kind == "num") {
            if (val.quoted) fail(line_no_, val.text, "number must not be quoted");
            c.content = parse_number(val.text, line_no_);
        } else if (kind == "text") {
            if (!val.quoted || !val.key.empty()) fail(line_no_, val.text, "text must be quoted");
            c.content = val.text;
        } else if (kind == "bool") {
            if (val.text == "true") c.content = true;
            else if (val.text == "false") c.content = false;
            else fail(line_no_, val.text, "expected true or false");
        } else if (kind == "fml") {
            if (!val.quoted || !val.key.empty()) fail(line_no_, val.text, "formula must be quoted");
            CellAddress origin{sh.name, pos.row, pos.col};
            try {
                c.content = FormulaContent{val.text, formula::parse_formula(val.text, formula::Style::R1C1, origin)};
            } catch (const formula::SyntaxError& e) {
                fail(line_no_, val.text, "formula " + std::string(e.what()));
            }
        } else {
            fail(line_no_, kind, "unknown cell kind");
        }
        bool seen_fmt = false;
        for (std::size_t i = 4; i < t.size(); ++i) {
            if (t[i].key == "fmt" && !seen_fmt) {
                c.format = t[i].text;
                seen_fmt = true;
            } else if (t[i].key.empty() && !t[i].quoted && t[i].text == "input" && !c.input) {
                if (c.is_formula()) fail(line_no_, t[i].text, "formula cells cannot be inputs");
                c.input = true;
            } else {
                fail(line_no_, t[i].text, "unknown cell option");
            }
        }
        sh.cells.emplace(pos, std::move(c));
    }

    void name(const std::vector<Token>& t) {
        expect_count(t, 3, 3);
        const std::string& id = t[1].text;
        if (t[1].quoted || !formula::is_identifier(id)) fail(line_no_, id, "invalid name identifier");
        if (wb_.find_name(id)) fail(line_no_, id, "duplicate name");
        formula::Expr ref;
        try {
            ref = formula::parse_reference(t[2].text, formula::Style::R1C1);
        } catch (const formula::SyntaxError& e) {
            fail(line_no_, t[2].text, "name target " + std::string(e.what()));
        }
        NamedRange n;
        n.name = id;
        if (auto* c = ref.as<formula::CellRef>()) {
            n.start = *c;
        } else {
            auto* r = ref.as<formula::RangeRef>();
            n.start = r->start;
            n.end = r->end;
        }
        if (!n.start.sheet) fail(line_no_, t[2].text, "name target must be sheet-qualified");
        n.sheet = *n.start.sheet;
        n.start.sheet.reset();
        name_lines_.emplace_back(n.sheet, line_no_);
        wb_.add_name(std::move(n));
    }

    void valid(const std::vector<Token>& t) {
        expect_count(t, 5, 6);
        auto range = parse_range(t[1].text);
        if (!range) fail(line_no_, t[1].text, "malformed validation target");
        if (range->first.sheet.empty()) {
            std::string s = current_sheet().name;
            range->first.sheet = s;
            range->last.sheet = s;
        } else {
            range->last.sheet = range->first.sheet;
        }
        ValidationRule rule;
        rule.target = *range;
        auto type = parse_validation_type(t[2].text);
        if (!type) fail(line_no_, t[2].text, "unknown validation type");
        auto op = parse_validation_operator(t[3].text);
        if (!op) fail(line_no_, t[3].text, "unknown validation operator");
        rule.type = *type;
        rule.op = *op;
        rule.formula1 = t[4].text;
        if (t.size() == 6) rule.formula2 = t[5].text;
        bool two = *op == ValidationOperator::Between || *op == ValidationOperator::NotBetween;
        if (two && !rule.formula2) fail(line_no_, t[3].text, "between needs two formulas");
        if (!two && rule.formula2) fail(line_no_, t[5].text, "operator takes one formula");
        valid_lines_.emplace_back(range->first.sheet, line_no_);
        wb_.validations.push_back(std::move(rule));
    }

    void finish() {
        for (const auto& [sheet, line] : name_lines_) {
            if (!wb_.find_sheet(sheet)) fail(line, sheet, "name refers to an unknown sheet");
        }
        for (const auto& [sheet, line] : valid_lines_) {
            if (!wb_.find_sheet(sheet)) fail(line, sheet, "validation refers to an unknown sheet");
        }
    }

    Workbook wb_;
    std::string current_;
    int line_no_ = 0;
    bool seen_directive_ = false;
    std::vector<std::pair<std::string, int>> name_lines_;
    std::vector<std::pair<std::string, int>> valid_lines_;
};

std::string qualified_range_text(const CellRange& r) {
    return quote_sheet_name(r.first.sheet) + "!" + to_r1c1(r);
}

}  // namespace

Workbook parse_workbook(std::string_view text) { return DocumentParser().run(text); }

std::string serialize_workbook(const Workbook& wb) {
    std::ostringstream out;
    out << "%wbt 1\n";
    for (const auto& [k, v] : wb.properties) out << "prop " << k << ' ' << quote(v) << '\n';
    for (const auto& sheet : wb.sheets) {
        out << "sheet " << token_text(sheet.name) << '\n';
        for (const auto& [pos, c] : sheet.cells) {
            out << "cell " << to_r1c1(CellAddress{"", pos.row, pos.col}) << ' ';
            if (auto* d = std::get_if<double>(&c.content)) {
                out << "num " << formula::number_text(*d);
            } else if (auto* s = std::get_if<std::string>(&c.content)) {
                out << "text " << quote(*s);
            } else if (auto* b = std::get_if<bool>(&c.content)) {
                out << "bool " << (*b ? "true" : "false");
            } else {
                out << "fml " << quote(c.formula()->source);
            }
            if (!c.format.empty()) out << " fmt=" << quote(c.format);
            if (c.input) out << " input";
            out << '\n';
        }
    }
    for (const auto& n : wb.names) {
        out << "name " << n.name << ' ' << token_text(n.target_text().substr(1)) << '\n';
    }
    for (const auto& v : wb.validations) {
        out << "valid " << token_text(qualified_range_text(v.target)) << ' ' << wbt_name(v.type) << ' '
            << wbt_name(v.op) << ' ' << token_text(v.formula1);
        if (v.formula2) out << ' ' << token_text(*v.formula2);
        out << '\n';
    }
    return out.str();
}

std::map<std::string, std::string> read_properties(std::string_view text) {
    std::map<std::string, std::string> props;
    std::istringstream in{std::string(text)};
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        std::size_t first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line.compare(first, 5, "prop ") != 0) continue;
        try {
            auto toks = tokenize(line, n);
            if (toks.size() == 3 && toks[2].quoted && !props.count(toks[1].text)) {
                props[toks[1].text] = toks[2].text;
            }
        } catch (const ParseError&) {
            // skip malformed property lines
        }
    }
    return props;
}

std::string fingerprint(const Workbook& wb) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : serialize_workbook(wb)) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

Workbook load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_workbook(ss.str());
}

}  // namespace cellaudit::wbt

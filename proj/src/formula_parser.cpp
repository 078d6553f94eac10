#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>

#include "cellaudit/formula.hpp"

namespace cellaudit::formula {

SyntaxError::SyntaxError(int column, const std::string& message)
    : std::runtime_error("column " + std::to_string(column) + ": " + message),
      column_(column),
      detail_(message) {}

Expr::Expr() : Expr(NumberLit{}) {}

namespace {

bool is_ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '\\';
}
bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

std::string upper(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

enum class Tok {
    Number, Text, Error, Ident, Sheet, Ref, LParen, RParen, Comma, Colon, Op, Percent, End
};

struct Token {
    Tok kind = Tok::End;
    int column = 0;
    std::string text;  // identifier, sheet name, text literal, operator spelling
    double number = 0;
    ErrorCode error = ErrorCode::Ref;
    RefComponent row, col;
};

// Matches "R[-2]C", "R3C[1]", "RC" ... at `pos`. Returns the length consumed.
std::size_t match_r1c1(std::string_view s, std::size_t pos, RefComponent& row, RefComponent& col) {
    auto part = [&](std::size_t& i, char letter, RefComponent& out) -> bool {
        if (i >= s.size() || std::toupper(static_cast<unsigned char>(s[i])) != letter) return false;
        ++i;
        if (i < s.size() && s[i] == '[') {
            std::size_t j = i + 1;
            if (j < s.size() && (s[j] == '-' || s[j] == '+')) ++j;
            std::size_t digits = j;
            while (j < s.size() && is_digit(s[j])) ++j;
            if (j == digits || j >= s.size() || s[j] != ']') return false;
            int v = 0;
            const char* b = s.data() + i + 1;
            if (*b == '+') ++b;
            auto [p, ec] = std::from_chars(b, s.data() + j, v);
            if (ec != std::errc()) return false;
            out = RefComponent::relative(v);
            i = j + 1;
        } else if (i < s.size() && is_digit(s[i])) {
            std::size_t j = i;
            while (j < s.size() && is_digit(s[j])) ++j;
            int v = 0;
            auto [p, ec] = std::from_chars(s.data() + i, s.data() + j, v);
            if (ec != std::errc() || v < 1) return false;
            out = RefComponent::absolute(v);
            i = j;
        } else {
            out = RefComponent::relative(0);
        }
        return true;
    };
    std::size_t i = pos;
    if (!part(i, 'R', row) || !part(i, 'C', col)) return 0;
    if (i < s.size() && (is_ident_char(s[i]) || s[i] == '(' || s[i] == '[')) return 0;
    if (row.is_absolute() && row.value > kMaxRows) return 0;
    if (col.is_absolute() && col.value > kMaxCols) return 0;
    return i - pos;
}

// Matches "$C$7", "C7" ... at `pos`; components come back as absolute
// positions plus flags so the caller can relativise against the origin.
std::size_t match_a1(std::string_view s, std::size_t pos, bool& abs_col, int& col, bool& abs_row,
                     int& row) {
    std::size_t i = pos;
    abs_col = i < s.size() && s[i] == '$';
    if (abs_col) ++i;
    std::size_t lb = i;
    while (i < s.size() && std::isalpha(static_cast<unsigned char>(s[i]))) ++i;
    if (i == lb || i - lb > 3) return 0;
    col = column_index(s.substr(lb, i - lb));
    if (col == 0) return 0;
    abs_row = i < s.size() && s[i] == '$';
    if (abs_row) ++i;
    std::size_t db = i;
    while (i < s.size() && is_digit(s[i])) ++i;
    if (i == db) return 0;
    auto [p, ec] = std::from_chars(s.data() + db, s.data() + i, row);
    if (ec != std::errc() || row < 1 || row > kMaxRows) return 0;
    if (i < s.size() && (is_ident_char(s[i]) || s[i] == '(')) return 0;
    return i - pos;
}

class Lexer {
public:
    Lexer(std::string_view src, Style style, const CellAddress& origin, int column_base)
        : src_(src), style_(style), origin_(origin), base_(column_base) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        while (true) {
            skip_space();
            Token t = next();
            bool end = t.kind == Tok::End;
            out.push_back(std::move(t));
            if (end) break;
        }
        return out;
    }

private:
    int col(std::size_t pos) const { return base_ + static_cast<int>(pos); }

    [[noreturn]] void fail(std::size_t pos, const std::string& msg) const {
        throw SyntaxError(col(pos), msg);
    }

    void skip_space() {
        while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' ||
                                      src_[pos_] == '\n' || src_[pos_] == '\r')) {
            ++pos_;
        }
    }

    Token make(Tok k, std::size_t start) {
        Token t;
        t.kind = k;
        t.column = col(start);
        return t;
    }

    bool try_reference(Token& t) {
        if (style_ == Style::R1C1) {
            RefComponent r, c;
            std::size_t n = match_r1c1(src_, pos_, r, c);
            if (n == 0) return false;
            t = make(Tok::Ref, pos_);
            t.row = r;
            t.col = c;
            pos_ += n;
            return true;
        }
        bool ac = false, ar = false;
        int c = 0, r = 0;
        std::size_t n = match_a1(src_, pos_, ac, c, ar, r);
        if (n == 0) return false;
        t = make(Tok::Ref, pos_);
        t.row = ar ? RefComponent::absolute(r) : RefComponent::relative(r - origin_.row);
        t.col = ac ? RefComponent::absolute(c) : RefComponent::relative(c - origin_.col);
        pos_ += n;
        return true;
    }

    Token next() {
        if (pos_ >= src_.size()) return make(Tok::End, pos_);
        std::size_t start = pos_;
        char c = src_[pos_];

        if (is_digit(c) || (c == '.' && pos_ + 1 < src_.size() && is_digit(src_[pos_ + 1]))) {
            std::size_t i = pos_;
            while (i < src_.size() && is_digit(src_[i])) ++i;
            if (i < src_.size() && src_[i] == '.') {
                ++i;
                while (i < src_.size() && is_digit(src_[i])) ++i;
            }
            if (i < src_.size() && (src_[i] == 'e' || src_[i] == 'E')) {
                std::size_t j = i + 1;
                if (j < src_.size() && (src_[j] == '+' || src_[j] == '-')) ++j;
                if (j < src_.size() && is_digit(src_[j])) {
                    while (j < src_.size() && is_digit(src_[j])) ++j;
                    i = j;
                }
            }
            Token t = make(Tok::Number, start);
            t.text = std::string(src_.substr(pos_, i - pos_));
            t.number = std::strtod(t.text.c_str(), nullptr);
            pos_ = i;
            return t;
        }
        if (c == '"') {
            std::string text;
            std::size_t i = pos_ + 1;
            while (true) {
                if (i >= src_.size()) fail(start, "unterminated text literal");
                if (src_[i] == '"') {
                    if (i + 1 < src_.size() && src_[i + 1] == '"') {
                        text += '"';
                        i += 2;
                        continue;
                    }
                    break;
                }
                text += src_[i++];
            }
            Token t = make(Tok::Text, start);
            t.text = std::move(text);
            pos_ = i + 1;
            return t;
        }
        if (c == '#') {
            static constexpr std::string_view kCodes[] = {"#DIV/0!", "#VALUE!", "#NAME?",
                                                          "#REF!",   "#N/A",    "#NUM!"};
            for (auto code : kCodes) {
                if (src_.substr(pos_, code.size()) == code) {
                    Token t = make(Tok::Error, start);
                    t.error = *parse_error_code(code);
                    pos_ += code.size();
                    return t;
                }
            }
            fail(start, "unknown error literal");
        }
        if (c == '\'') {
            std::string name;
            std::size_t i = pos_ + 1;
            while (true) {
                if (i >= src_.size()) fail(start, "unterminated sheet name");
                if (src_[i] == '\'') {
                    if (i + 1 < src_.size() && src_[i + 1] == '\'') {
                        name += '\'';
                        i += 2;
                        continue;
                    }
                    break;
                }
                name += src_[i++];
            }
            if (i + 1 >= src_.size() || src_[i + 1] != '!') fail(start, "expected '!' after sheet name");
            Token t = make(Tok::Sheet, start);
            t.text = std::move(name);
            pos_ = i + 2;
            return t;
        }
        if (c == '$' || is_ident_start(c)) {
            Token t;
            if (try_reference(t)) return t;
            if (c == '$') fail(start, "unexpected '$'");
            std::size_t i = pos_ + 1;
            while (i < src_.size() && is_ident_char(src_[i])) ++i;
            std::string word(src_.substr(pos_, i - pos_));
            if (i < src_.size() && src_[i] == '!') {
                t = make(Tok::Sheet, start);
                t.text = std::move(word);
                pos_ = i + 1;
                return t;
            }
            t = make(Tok::Ident, start);
            t.text = std::move(word);
            pos_ = i;
            return t;
        }

        ++pos_;
        switch (c) {
            case '(': return make(Tok::LParen, start);
            case ')': return make(Tok::RParen, start);
            case ',': return make(Tok::Comma, start);
            case ':': return make(Tok::Colon, start);
            case '%': return make(Tok::Percent, start);
            case '+': case '-': case '*': case '/': case '^': case '&': case '=': {
                Token t = make(Tok::Op, start);
                t.text = std::string(1, c);
                return t;
            }
            case '<': case '>': {
                Token t = make(Tok::Op, start);
                t.text = std::string(1, c);
                if (pos_ < src_.size() && (src_[pos_] == '=' || (c == '<' && src_[pos_] == '>'))) {
                    t.text += src_[pos_++];
                }
                return t;
            }
            default:
                break;
        }
        fail(start, std::string("unexpected character '") + c + "'");
    }

    std::string_view src_;
    Style style_;
    CellAddress origin_;
    int base_;
    std::size_t pos_ = 0;
};

class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

    Expr formula() {
        Expr e = comparison();
        expect_end();
        return e;
    }

    Expr reference_only() {
        auto r = reference();
        if (!r) fail(peek(), "expected a cell or range reference");
        expect_end();
        return *r;
    }

private:
    const Token& peek(std::size_t ahead = 0) const {
        return toks_[std::min(idx_ + ahead, toks_.size() - 1)];
    }
    const Token& advance() { return toks_[idx_++]; }
    bool at_op(std::string_view op) const { return peek().kind == Tok::Op && peek().text == op; }

    [[noreturn]] static void fail(const Token& t, const std::string& msg) {
        throw SyntaxError(t.column, msg);
    }

    void expect_end() {
        if (peek().kind == Tok::RParen) fail(peek(), "unbalanced parentheses: unexpected ')'");
        if (peek().kind != Tok::End) fail(peek(), "unexpected token");
    }

    Expr comparison() {
        Expr lhs = concat();
        while (peek().kind == Tok::Op) {
            const std::string& t = peek().text;
            BinaryOp op;
            if (t == "=") op = BinaryOp::Eq;
            else if (t == "<>") op = BinaryOp::Ne;
            else if (t == "<") op = BinaryOp::Lt;
            else if (t == "<=") op = BinaryOp::Le;
            else if (t == ">") op = BinaryOp::Gt;
            else if (t == ">=") op = BinaryOp::Ge;
            else break;
            advance();
            lhs = Binary{op, lhs, concat()};
        }
        return lhs;
    }

    Expr concat() {
        Expr lhs = additive();
        while (at_op("&")) {
            advance();
            lhs = Binary{BinaryOp::Concat, lhs, additive()};
        }
        return lhs;
    }

    Expr additive() {
        Expr lhs = multiplicative();
        while (at_op("+") || at_op("-")) {
            BinaryOp op = advance().text == "+" ? BinaryOp::Add : BinaryOp::Sub;
            lhs = Binary{op, lhs, multiplicative()};
        }
        return lhs;
    }

    Expr multiplicative() {
        Expr lhs = power();
        while (at_op("*") || at_op("/")) {
            BinaryOp op = advance().text == "*" ? BinaryOp::Mul : BinaryOp::Div;
            lhs = Binary{op, lhs, power()};
        }
        return lhs;
    }

    Expr power() {
        Expr lhs = unary();
        while (at_op("^")) {
            advance();
            lhs = Binary{BinaryOp::Pow, lhs, unary()};
        }
        return lhs;
    }

    Expr unary() {
        if (at_op("-")) {
            advance();
            return Unary{UnaryOp::Negate, unary()};
        }
        if (at_op("+")) {
            advance();
            return Unary{UnaryOp::Plus, unary()};
        }
        return postfix();
    }

    Expr postfix() {
        bool bare_number = peek().kind == Tok::Number;
        Expr e = primary();
        while (peek().kind == Tok::Percent) {
            advance();
            if (bare_number) {
                e = NumberLit{e.as<NumberLit>()->value / 100.0, true};
                bare_number = false;
            } else {
                e = Unary{UnaryOp::Percent, e};
            }
        }
        return e;
    }

    std::optional<Expr> reference() {
        std::optional<std::string> sheet;
        std::size_t save = idx_;
        if (peek().kind == Tok::Sheet) sheet = advance().text;
        if (peek().kind != Tok::Ref) {
            if (sheet) fail(peek(), "expected a cell reference after sheet name");
            idx_ = save;
            return std::nullopt;
        }
        const Token& a = advance();
        CellRef start{sheet, a.row, a.col};
        if (peek().kind == Tok::Colon) {
            advance();
            if (peek().kind != Tok::Ref) fail(peek(), "expected a cell reference after ':'");
            const Token& b = advance();
            return Expr(RangeRef{start, CellRef{std::nullopt, b.row, b.col}});
        }
        return Expr(start);
    }

    Expr primary() {
        const Token& t = peek();
        switch (t.kind) {
            case Tok::Number:
                advance();
                return NumberLit{t.number, false};
            case Tok::Text:
                advance();
                return TextLit{t.text};
            case Tok::Error:
                advance();
                return ErrorLit{t.error};
            case Tok::LParen: {
                advance();
                Expr inner = comparison();
                if (peek().kind != Tok::RParen) fail(peek(), "unbalanced parentheses: expected ')'");
                advance();
                return inner;
            }
            case Tok::Sheet:
            case Tok::Ref:
                return *reference();
            case Tok::Ident: {
                advance();
                if (peek().kind == Tok::LParen) return call(t);
                std::string up = upper(t.text);
                if (up == "TRUE") return BoolLit{true};
                if (up == "FALSE") return BoolLit{false};
                return NameRef{t.text};
            }
            case Tok::RParen:
                fail(t, "unbalanced parentheses: unexpected ')'");
            case Tok::End:
                fail(t, "unexpected end of formula");
            default:
                fail(t, "unexpected token");
        }
    }

    Expr call(const Token& name) {
        advance();  // (
        Call c{upper(name.text), {}};
        if (peek().kind == Tok::RParen) {
            advance();
            return c;
        }
        while (true) {
            c.args.push_back(comparison());
            if (peek().kind == Tok::Comma) {
                advance();
                continue;
            }
            if (peek().kind == Tok::RParen) {
                advance();
                break;
            }
            if (peek().kind == Tok::End) fail(peek(), "unbalanced parentheses: expected ')'");
            fail(peek(), "expected ',' or ')' in argument list");
        }
        return c;
    }

    std::vector<Token> toks_;
    std::size_t idx_ = 0;
};

}  // namespace

Expr parse_formula(std::string_view src, Style style, const CellAddress& origin) {
    if (src.empty() || src.front() != '=') throw SyntaxError(1, "formula must start with '='");
    Lexer lexer(src.substr(1), style, origin, 2);
    Parser parser(lexer.run());
    return parser.formula();
}

Expr parse_reference(std::string_view src, Style style, const CellAddress& origin) {
    if (!src.empty() && src.front() == '=') src.remove_prefix(1);
    Lexer lexer(src, style, origin, 1);
    Parser parser(lexer.run());
    return parser.reference_only();
}

bool looks_like_reference(std::string_view text) {
    if (text.empty()) return false;
    RefComponent r, c;
    if (match_r1c1(text, 0, r, c) == text.size()) return true;
    bool ac = false, ar = false;
    int col = 0, row = 0;
    return match_a1(text, 0, ac, col, ar, row) == text.size();
}

bool is_identifier(std::string_view text) {
    if (text.empty() || !is_ident_start(text.front()) || text.front() == '\\') return false;
    if (!std::all_of(text.begin(), text.end(), is_ident_char)) return false;
    std::string up = upper(text);
    if (up == "TRUE" || up == "FALSE") return false;
    return !looks_like_reference(text);
}

}  // namespace cellaudit::formula

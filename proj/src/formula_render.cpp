#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "cellaudit/formula.hpp"

namespace cellaudit::formula {

std::string_view op_text(BinaryOp op) {
    switch (op) {
        case BinaryOp::Add: return "+";
        case BinaryOp::Sub: return "-";
        case BinaryOp::Mul: return "*";
        case BinaryOp::Div: return "/";
        case BinaryOp::Pow: return "^";
        case BinaryOp::Concat: return "&";
        case BinaryOp::Eq: return "=";
        case BinaryOp::Ne: return "<>";
        case BinaryOp::Lt: return "<";
        case BinaryOp::Le: return "<=";
        case BinaryOp::Gt: return ">";
        case BinaryOp::Ge: return ">=";
    }
    return "?";
}

namespace {

std::string shortest(double value, auto&& accept) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof buf, value);
    std::string text(buf, res.ptr);
    if (accept(std::strtod(text.c_str(), nullptr))) return text;
    for (int precision = 1; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof buf, "%.*G", precision, value);
        if (accept(std::strtod(buf, nullptr))) return buf;
    }
    std::snprintf(buf, sizeof buf, "%.17G", value);
    return buf;
}

// Binding strength, higher binds tighter.
enum Level { kCompare = 1, kConcat, kAdditive, kMultiplicative, kPower, kPrefix, kPostfix, kAtom };

int binary_level(BinaryOp op) {
    switch (op) {
        case BinaryOp::Add:
        case BinaryOp::Sub: return kAdditive;
        case BinaryOp::Mul:
        case BinaryOp::Div: return kMultiplicative;
        case BinaryOp::Pow: return kPower;
        case BinaryOp::Concat: return kConcat;
        default: return kCompare;
    }
}

int level_of(const Expr& e) {
    if (auto* b = e.as<Binary>()) return binary_level(b->op);
    if (auto* u = e.as<Unary>()) return u->op == UnaryOp::Percent ? kPostfix : kPrefix;
    if (auto* n = e.as<NumberLit>()) return n->was_percent ? kPostfix : kAtom;
    return kAtom;
}

class Renderer {
public:
    Renderer(Style style, const CellAddress& origin) : style_(style), origin_(origin) {}

    std::string operator()(const Expr& e) const { return std::visit(*this, e.node().v); }

    std::string operator()(const NumberLit& n) const {
        if (!n.was_percent) return number_text(n.value);
        double target = n.value;
        return shortest(n.value * 100.0, [&](double v) { return v / 100.0 == target; }) + "%";
    }
    std::string operator()(const TextLit& t) const {
        std::string out = "\"";
        for (char c : t.value) {
            if (c == '"') out += '"';
            out += c;
        }
        return out + "\"";
    }
    std::string operator()(const BoolLit& b) const { return b.value ? "TRUE" : "FALSE"; }
    std::string operator()(const ErrorLit& e) const { return std::string(error_text(e.code)); }
    std::string operator()(const CellRef& r) const {
        std::string out;
        if (r.sheet) out = quote_sheet_name(*r.sheet) + "!";
        return out + local(r);
    }
    std::string operator()(const RangeRef& r) const {
        return (*this)(r.start) + ":" + local(r.end);
    }
    std::string operator()(const NameRef& n) const { return n.name; }
    std::string operator()(const Unary& u) const {
        if (u.op == UnaryOp::Percent) {
            bool wrap = level_of(u.operand) < kPostfix || (u.operand.as<NumberLit>() != nullptr &&
                                                               !u.operand.as<NumberLit>()->was_percent);
            return paren((*this)(u.operand), wrap) + "%";
        }
        std::string sign = u.op == UnaryOp::Negate ? "-" : "+";
        return sign + paren((*this)(u.operand), level_of(u.operand) < kPrefix);
    }
    std::string operator()(const Binary& b) const {
        int lvl = binary_level(b.op);
        return paren((*this)(b.lhs), level_of(b.lhs) < lvl) + std::string(op_text(b.op)) +
               paren((*this)(b.rhs), level_of(b.rhs) <= lvl);
    }
    std::string operator()(const Call& c) const {
        std::string out = c.name + "(";
        for (std::size_t i = 0; i < c.args.size(); ++i) {
            if (i) out += ",";
            out += (*this)(c.args[i]);
        }
        return out + ")";
    }

private:
    static std::string paren(std::string s, bool wrap) { return wrap ? "(" + s + ")" : s; }

    std::string local(const CellRef& r) const {
        if (style_ == Style::R1C1) return r1c1_part('R', r.row) + r1c1_part('C', r.col);
        int row = r.row.resolve(origin_.row);
        int col = r.col.resolve(origin_.col);
        if (!on_grid(row, col)) {
            throw ReferenceUnrepresentable("reference falls off the grid at " + to_a1(origin_));
        }
        return (r.col.is_absolute() ? "$" : "") + column_letters(col) +
               (r.row.is_absolute() ? "$" : "") + std::to_string(row);
    }

    static std::string r1c1_part(char letter, const RefComponent& c) {
        std::string out(1, letter);
        if (c.is_absolute()) return out + std::to_string(c.value);
        if (c.value == 0) return out;
        return out + "[" + std::to_string(c.value) + "]";
    }

    Style style_;
    CellAddress origin_;
};

bool lands(const CellRef& r, const CellAddress& at) {
    return on_grid(r.row.resolve(at.row), r.col.resolve(at.col));
}

Expr translate_node(const Expr& e, const CellAddress& to) {
    if (auto* r = e.as<CellRef>()) return lands(*r, to) ? e : Expr(ErrorLit{ErrorCode::Ref});
    if (auto* r = e.as<RangeRef>()) {
        return lands(r->start, to) && lands(r->end, to) ? e : Expr(ErrorLit{ErrorCode::Ref});
    }
    if (auto* u = e.as<Unary>()) return Unary{u->op, translate_node(u->operand, to)};
    if (auto* b = e.as<Binary>()) {
        return Binary{b->op, translate_node(b->lhs, to), translate_node(b->rhs, to)};
    }
    if (auto* c = e.as<Call>()) {
        Call out{c->name, {}};
        out.args.reserve(c->args.size());
        for (const auto& a : c->args) out.args.push_back(translate_node(a, to));
        return out;
    }
    return e;
}

}  // namespace

std::string number_text(double value) {
    return shortest(value, [&](double v) { return v == value; });
}

std::string render_expr(const Expr& ast, Style style, const CellAddress& origin) {
    return Renderer(style, origin)(ast);
}

std::string render_formula(const Expr& ast, Style style, const CellAddress& origin) {
    return "=" + render_expr(ast, style, origin);
}

std::string normal_form(const Expr& ast) { return render_formula(ast, Style::R1C1); }

Expr translate(const Expr& ast, const CellAddress& /*from*/, const CellAddress& to) {
    // Relative components are stored as offsets, so the tree itself already
    // carries early-binding semantics; only landing positions need checking.
    return translate_node(ast, to);
}

}  // namespace cellaudit::formula

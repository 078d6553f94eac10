#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "cellaudit/address.hpp"

namespace cellaudit::formula {

enum class Style { A1, R1C1 };

// One coordinate of a reference: a fixed index ($C / R3) or an offset from
// the formula's own cell (C / R[-2]).
struct RefComponent {
    enum class Kind { Absolute, Relative };
    Kind kind = Kind::Relative;
    int value = 0;

    static RefComponent absolute(int index) { return {Kind::Absolute, index}; }
    static RefComponent relative(int offset) { return {Kind::Relative, offset}; }

    bool is_absolute() const { return kind == Kind::Absolute; }
    int resolve(int origin) const { return is_absolute() ? value : origin + value; }

    friend bool operator==(const RefComponent&, const RefComponent&) = default;
};

struct NumberLit {
    double value = 0;
    bool was_percent = false;  // written as "10%", value already scaled
    friend bool operator==(const NumberLit&, const NumberLit&) = default;
};

struct TextLit {
    std::string value;
    friend bool operator==(const TextLit&, const TextLit&) = default;
};

struct BoolLit {
    bool value = false;
    friend bool operator==(const BoolLit&, const BoolLit&) = default;
};

struct ErrorLit {
    ErrorCode code = ErrorCode::Ref;
    friend bool operator==(const ErrorLit&, const ErrorLit&) = default;
};

struct CellRef {
    std::optional<std::string> sheet;
    RefComponent row;
    RefComponent col;

    CellAddress resolve(const CellAddress& origin) const {
        return CellAddress{sheet.value_or(origin.sheet), row.resolve(origin.row),
                           col.resolve(origin.col)};
    }
    friend bool operator==(const CellRef&, const CellRef&) = default;
};

// `end.sheet` is always empty; the qualifier lives on `start`.
struct RangeRef {
    CellRef start;
    CellRef end;

    // Corners normalised so first is top-left.
    CellRange resolve(const CellAddress& origin) const {
        auto a = start.resolve(origin);
        auto b = end.resolve(origin);
        return make_range(a.sheet, a.row, a.col, b.row, b.col);
    }
    friend bool operator==(const RangeRef&, const RangeRef&) = default;
};

struct NameRef {
    std::string name;
    friend bool operator==(const NameRef&, const NameRef&) = default;
};

enum class UnaryOp { Negate, Plus, Percent };
enum class BinaryOp { Add, Sub, Mul, Div, Pow, Concat, Eq, Ne, Lt, Le, Gt, Ge };

std::string_view op_text(BinaryOp op);

struct Node;

// Immutable, cheaply copyable expression tree handle.
class Expr {
public:
    Expr();
    template <typename T>
        requires(!std::is_same_v<std::decay_t<T>, Expr>)
    Expr(T node);  // NOLINT(google-explicit-constructor)

    const Node& node() const { return *node_; }

    template <typename T>
    const T* as() const;

    friend bool operator==(const Expr& a, const Expr& b);

private:
    std::shared_ptr<const Node> node_;
};

struct Unary {
    UnaryOp op = UnaryOp::Negate;
    Expr operand;
    friend bool operator==(const Unary&, const Unary&) = default;
};

struct Binary {
    BinaryOp op = BinaryOp::Add;
    Expr lhs;
    Expr rhs;
    friend bool operator==(const Binary&, const Binary&) = default;
};

struct Call {
    std::string name;  // upper-cased
    std::vector<Expr> args;
    friend bool operator==(const Call&, const Call&) = default;
};

using NodeVariant = std::variant<NumberLit, TextLit, BoolLit, ErrorLit, CellRef, RangeRef,
                                 NameRef, Unary, Binary, Call>;

struct Node {
    NodeVariant v;
    friend bool operator==(const Node&, const Node&) = default;
};

template <typename T>
    requires(!std::is_same_v<std::decay_t<T>, Expr>)
Expr::Expr(T node) : node_(std::make_shared<const Node>(Node{NodeVariant(std::move(node))})) {}

template <typename T>
const T* Expr::as() const {
    return std::get_if<T>(&node_->v);
}

inline bool operator==(const Expr& a, const Expr& b) {
    return a.node_ == b.node_ || *a.node_ == *b.node_;
}

class SyntaxError : public std::runtime_error {
public:
    SyntaxError(int column, const std::string& message);
    int column() const { return column_; }
    const std::string& detail() const { return detail_; }

private:
    int column_;
    std::string detail_;
};

class ReferenceUnrepresentable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Parses a formula that starts with '='. In A1 style relative references are
// converted to offsets from `origin`; R1C1 ignores `origin`.
Expr parse_formula(std::string_view src, Style style, const CellAddress& origin = {});

// Parses a bare reference such as "Forecast!R7C3:R7C7" or "RC[-1]".
// Returns a CellRef or RangeRef expression; anything else is a SyntaxError.
Expr parse_reference(std::string_view src, Style style, const CellAddress& origin = {});

// Renders with a leading '=' and minimal parentheses.
std::string render_formula(const Expr& ast, Style style, const CellAddress& origin = {});
std::string render_expr(const Expr& ast, Style style, const CellAddress& origin = {});

// Origin-independent R1C1 text; equal for copy-equivalent cells.
std::string normal_form(const Expr& ast);

// Early-binding copy from `from` to `to`: offsets are kept, references that
// would leave the grid become #REF!.
Expr translate(const Expr& ast, const CellAddress& from, const CellAddress& to);

// True if `text` lexes as a single cell reference in either style.
bool looks_like_reference(std::string_view text);
bool is_identifier(std::string_view text);

// Shortest decimal text that reads back as exactly `value`.
std::string number_text(double value);

// Pre-order traversal.
template <typename F>
void visit_preorder(const Expr& e, F&& f) {
    f(e);
    if (auto* u = e.as<Unary>()) {
        visit_preorder(u->operand, f);
    } else if (auto* b = e.as<Binary>()) {
        visit_preorder(b->lhs, f);
        visit_preorder(b->rhs, f);
    } else if (auto* c = e.as<Call>()) {
        for (const auto& a : c->args) visit_preorder(a, f);
    }
}

}  // namespace cellaudit::formula

#include "cellaudit/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>

#include "cellaudit/graph.hpp"

namespace cellaudit::eval {

using namespace formula;

namespace {

using NumberOrError = std::variant<double, ErrorValue>;

NumberOrError to_number(const Value& v) {
    if (auto* d = std::get_if<double>(&v)) return *d;
    if (auto* b = std::get_if<bool>(&v)) return *b ? 1.0 : 0.0;
    if (is_blank(v)) return 0.0;
    if (auto* e = as_error(v)) return *e;
    return ErrorValue{ErrorCode::Value, {}};
}

std::string to_text(const Value& v) {
    if (auto* d = std::get_if<double>(&v)) return general_number(*d);
    return to_display(v);
}

Value finite(double x) {
    if (!std::isfinite(x)) return make_error(ErrorCode::Num);
    return x;
}

int compare_text(const std::string& a, const std::string& b) {
    if (iequals(a, b)) return 0;
    return iless(a, b) ? -1 : 1;
}

// Type order used by comparisons: numbers < text < booleans.
Value compare(BinaryOp op, Value a, Value b) {
    if (auto* e = as_error(a)) return *e;
    if (auto* e = as_error(b)) return *e;
    auto blank_like = [](const Value& other) -> Value {
        if (std::holds_alternative<std::string>(other)) return std::string();
        if (std::holds_alternative<bool>(other)) return false;
        return 0.0;
    };
    if (is_blank(a)) a = blank_like(b);
    if (is_blank(b)) b = blank_like(a);
    int c;
    if (a.index() != b.index()) {
        c = a.index() < b.index() ? -1 : 1;
    } else if (auto* x = std::get_if<double>(&a)) {
        double y = std::get<double>(b);
        c = *x < y ? -1 : (*x > y ? 1 : 0);
    } else if (auto* s = std::get_if<std::string>(&a)) {
        c = compare_text(*s, std::get<std::string>(b));
    } else {
        c = static_cast<int>(std::get<bool>(a)) - static_cast<int>(std::get<bool>(b));
    }
    switch (op) {
        case BinaryOp::Eq: return c == 0;
        case BinaryOp::Ne: return c != 0;
        case BinaryOp::Lt: return c < 0;
        case BinaryOp::Le: return c <= 0;
        case BinaryOp::Gt: return c > 0;
        default: return c >= 0;
    }
}

Value arithmetic(BinaryOp op, const Value& a, const Value& b) {
    auto x = to_number(a);
    auto y = to_number(b);
    if (auto* e = std::get_if<ErrorValue>(&x)) return *e;
    if (auto* e = std::get_if<ErrorValue>(&y)) return *e;
    double l = std::get<double>(x), r = std::get<double>(y);
    switch (op) {
        case BinaryOp::Add: return finite(l + r);
        case BinaryOp::Sub: return finite(l - r);
        case BinaryOp::Mul: return finite(l * r);
        case BinaryOp::Div:
            if (r == 0) return make_error(ErrorCode::DivZero);
            return finite(l / r);
        default:
            if (l == 0 && r < 0) return make_error(ErrorCode::DivZero);
            return finite(std::pow(l, r));
    }
}

Value truthy(const Value& v) {
    if (auto* e = as_error(v)) return *e;
    if (auto* b = std::get_if<bool>(&v)) return *b;
    if (auto* d = std::get_if<double>(&v)) return *d != 0;
    if (is_blank(v)) return false;
    return make_error(ErrorCode::Value);
}

const Value* scalar(const FunctionArg& a) { return std::get_if<Value>(&a); }

Value numeric_fold(const std::vector<FunctionArg>& args, double init, double (*step)(double, double),
                   bool empty_is_zero) {
    bool any = false;
    double acc = init;
    for (const auto& a : args) {
        if (auto* v = scalar(a)) {
            auto n = to_number(*v);
            if (auto* e = std::get_if<ErrorValue>(&n)) return *e;
            acc = step(acc, std::get<double>(n));
            any = true;
            continue;
        }
        for (const auto& v : std::get<std::vector<Value>>(a)) {
            if (auto* e = as_error(v)) return *e;
            if (auto* d = std::get_if<double>(&v)) {
                acc = step(acc, *d);
                any = true;
            }
        }
    }
    if (!any && empty_is_zero) return 0.0;
    return finite(acc);
}

}  // namespace

bool is_known_function(std::string_view name) {
    static const std::set<std::string_view> known{"SUM", "MIN",  "MAX",   "IF",     "COUNTA", "ISERROR",
                                                  "ISNA", "ABS", "ROUND", "OFFSET", "ASSERT"};
    return known.count(name) > 0;
}

Value call_function(std::string_view name, const std::vector<FunctionArg>& args) {
    if (!is_known_function(name)) return make_error(ErrorCode::Name);
    auto arity = [&](std::size_t lo, std::size_t hi) { return args.size() >= lo && args.size() <= hi; };

    if (name == "SUM") {
        if (args.empty()) return make_error(ErrorCode::Value);
        return numeric_fold(args, 0, [](double a, double b) { return a + b; }, true);
    }
    if (name == "MIN" || name == "MAX") {
        if (args.empty()) return make_error(ErrorCode::Value);
        bool is_min = name == "MIN";
        auto r = is_min ? numeric_fold(args, INFINITY, [](double a, double b) { return std::min(a, b); }, true)
                        : numeric_fold(args, -INFINITY, [](double a, double b) { return std::max(a, b); }, true);
        if (auto* e = as_error(r); e && e->code == ErrorCode::Num) return 0.0;  // no numbers at all
        return r;
    }
    if (name == "COUNTA") {
        if (args.empty()) return make_error(ErrorCode::Value);
        double n = 0;
        for (const auto& a : args) {
            if (auto* v = scalar(a)) {
                n += is_blank(*v) ? 0 : 1;
            } else {
                for (const auto& v : std::get<std::vector<Value>>(a)) n += is_blank(v) ? 0 : 1;
            }
        }
        return n;
    }

    // Remaining functions take scalars only.
    std::vector<Value> v;
    for (const auto& a : args) {
        if (!scalar(a)) return make_error(ErrorCode::Value);
        v.push_back(*scalar(a));
    }

    if (name == "IF") {
        if (!arity(2, 3)) return make_error(ErrorCode::Value);
        Value c = truthy(v[0]);
        if (is_error(c)) return c;
        if (std::get<bool>(c)) return v[1];
        return v.size() == 3 ? v[2] : Value(false);
    }
    if (name == "ISERROR") {
        if (!arity(1, 1)) return make_error(ErrorCode::Value);
        return is_error(v[0]);
    }
    if (name == "ISNA") {
        if (!arity(1, 1)) return make_error(ErrorCode::Value);
        auto* e = as_error(v[0]);
        return e != nullptr && e->code == ErrorCode::NA;
    }
    if (name == "ABS") {
        if (!arity(1, 1)) return make_error(ErrorCode::Value);
        auto x = to_number(v[0]);
        if (auto* e = std::get_if<ErrorValue>(&x)) return *e;
        return std::fabs(std::get<double>(x));
    }
    if (name == "ROUND") {
        if (!arity(2, 2)) return make_error(ErrorCode::Value);
        auto x = to_number(v[0]);
        auto p = to_number(v[1]);
        if (auto* e = std::get_if<ErrorValue>(&x)) return *e;
        if (auto* e = std::get_if<ErrorValue>(&p)) return *e;
        double places = std::trunc(std::get<double>(p));
        if (std::fabs(places) > 300) return make_error(ErrorCode::Num);
        return finite(std::strtod(round_to_places(std::get<double>(x), static_cast<int>(places)).c_str(), nullptr));
    }
    if (name == "ASSERT") {
        if (!arity(3, 3)) return make_error(ErrorCode::Value);
        auto x = to_number(v[0]);
        auto y = to_number(v[1]);
        if (auto* e = std::get_if<ErrorValue>(&x)) return *e;
        if (auto* e = std::get_if<ErrorValue>(&y)) return *e;
        Value ratio = arithmetic(BinaryOp::Div, v[0], v[1]);
        if (auto* e = as_error(ratio)) return *e;
        if (std::fabs(std::get<double>(ratio) - 1) < kAssertTolerance) return std::get<double>(x);
        return make_error(ErrorCode::Assert, to_text(v[2]));
    }
    // OFFSET needs the grid; reached only through the eager entry point.
    return make_error(ErrorCode::Value);
}

namespace {

using RefResult = std::variant<CellRange, ErrorValue>;

class Evaluator {
public:
    Evaluator(const Workbook& wb, const Overrides& overrides, std::set<CellAddress> cyclic)
        : wb_(wb), overrides_(overrides), cyclic_(std::move(cyclic)) {}

    Value cell_value(const CellAddress& a) {
        if (auto it = memo_.find(a); it != memo_.end()) return it->second;
        if (auto it = overrides_.find(a); it != overrides_.end()) return memo_[a] = it->second;
        const Cell* c = wb_.cell(a);
        if (!c) return Blank{};
        Value v;
        if (auto* d = std::get_if<double>(&c->content)) {
            v = *d;
        } else if (auto* s = std::get_if<std::string>(&c->content)) {
            v = *s;
        } else if (auto* b = std::get_if<bool>(&c->content)) {
            v = *b;
        } else if (cyclic_.count(a) || active_.count(a)) {
            return make_error(ErrorCode::Circ);
        } else {
            active_.insert(a);
            v = eval(c->formula()->expr, a);
            active_.erase(a);
            if (is_blank(v)) v = 0.0;
        }
        return memo_[a] = v;
    }

private:
    static bool is_reference(const Expr& e) {
        if (e.as<CellRef>() || e.as<RangeRef>() || e.as<NameRef>()) return true;
        auto* c = e.as<Call>();
        return c && c->name == "OFFSET";
    }

    RefResult eval_ref(const Expr& e, const CellAddress& origin) {
        if (auto* c = e.as<CellRef>()) {
            auto a = c->resolve(origin);
            if (!wb_.find_sheet(a.sheet)) return ErrorValue{ErrorCode::Ref, {}};
            return CellRange{a, a};
        }
        if (auto* r = e.as<RangeRef>()) {
            auto range = r->resolve(origin);
            if (!wb_.find_sheet(range.first.sheet)) return ErrorValue{ErrorCode::Ref, {}};
            return range;
        }
        if (auto* n = e.as<NameRef>()) {
            const NamedRange* nr = wb_.find_name(n->name);
            if (!nr) return ErrorValue{ErrorCode::Name, {}};
            return nr->resolve(origin);
        }
        return offset(*e.as<Call>(), origin);
    }

    RefResult offset(const Call& call, const CellAddress& origin) {
        if (call.args.size() < 3 || call.args.size() > 5) return ErrorValue{ErrorCode::Value, {}};
        if (!is_reference(call.args[0])) return ErrorValue{ErrorCode::Value, {}};
        auto base = eval_ref(call.args[0], origin);
        if (auto* e = std::get_if<ErrorValue>(&base)) return *e;
        const auto& r = std::get<CellRange>(base);
        std::vector<int> k;
        for (std::size_t i = 1; i < call.args.size(); ++i) {
            auto n = to_number(eval(call.args[i], origin));
            if (auto* e = std::get_if<ErrorValue>(&n)) return *e;
            double d = std::trunc(std::get<double>(n));
            if (std::fabs(d) > kMaxRows + kMaxCols) return ErrorValue{ErrorCode::Ref, {}};
            k.push_back(static_cast<int>(d));
        }
        int h = k.size() > 2 ? k[2] : r.rows();
        int w = k.size() > 3 ? k[3] : r.cols();
        int r1 = r.first.row + k[0], c1 = r.first.col + k[1];
        if (h < 1 || w < 1 || !on_grid(r1, c1) || !on_grid(r1 + h - 1, c1 + w - 1)) {
            return ErrorValue{ErrorCode::Ref, {}};
        }
        return make_range(r.first.sheet, r1, c1, r1 + h - 1, c1 + w - 1);
    }

    Value scalar_of(const CellRange& r, const CellAddress& origin) {
        auto res = graph::intersect(r, origin);
        if (res.binding != graph::Binding::Cell) return make_error(ErrorCode::Value);
        return cell_value(res.range.first);
    }

    std::vector<Value> values_in(const CellRange& r) {
        std::set<CellAddress> cells;
        if (const Sheet* s = wb_.find_sheet(r.first.sheet)) {
            for (auto it = s->cells.lower_bound({r.first.row, 0}); it != s->cells.end(); ++it) {
                if (it->first.row > r.last.row) break;
                if (it->first.col >= r.first.col && it->first.col <= r.last.col) {
                    cells.insert({s->name, it->first.row, it->first.col});
                }
            }
        }
        for (const auto& [a, v] : overrides_) if (r.contains(a)) cells.insert(a);
        std::vector<Value> out;
        for (const auto& a : cells) out.push_back(cell_value(a));
        return out;
    }

    Value eval(const Expr& e, const CellAddress& origin) {
        if (auto* n = e.as<NumberLit>()) return n->value;
        if (auto* t = e.as<TextLit>()) return t->value;
        if (auto* b = e.as<BoolLit>()) return b->value;
        if (auto* er = e.as<ErrorLit>()) return make_error(er->code);
        if (is_reference(e)) {
            auto r = eval_ref(e, origin);
            if (auto* err = std::get_if<ErrorValue>(&r)) return *err;
            return scalar_of(std::get<CellRange>(r), origin);
        }
        if (auto* u = e.as<Unary>()) {
            Value v = eval(u->operand, origin);
            if (u->op == UnaryOp::Plus) return v;
            auto x = to_number(v);
            if (auto* err = std::get_if<ErrorValue>(&x)) return *err;
            double d = std::get<double>(x);
            return u->op == UnaryOp::Negate ? Value(-d) : finite(d / 100);
        }
        if (auto* b = e.as<Binary>()) {
            Value l = eval(b->lhs, origin);
            Value r = eval(b->rhs, origin);
            switch (b->op) {
                case BinaryOp::Concat:
                    if (auto* err = as_error(l)) return *err;
                    if (auto* err = as_error(r)) return *err;
                    return to_text(l) + to_text(r);
                case BinaryOp::Eq:
                case BinaryOp::Ne:
                case BinaryOp::Lt:
                case BinaryOp::Le:
                case BinaryOp::Gt:
                case BinaryOp::Ge:
                    return compare(b->op, std::move(l), std::move(r));
                default:
                    return arithmetic(b->op, l, r);
            }
        }
        return call(*e.as<Call>(), origin);
    }

    Value call(const Call& c, const CellAddress& origin) {
        if (c.name == "IF") {
            if (c.args.size() < 2 || c.args.size() > 3) return make_error(ErrorCode::Value);
            Value cond = truthy(eval(c.args[0], origin));
            if (is_error(cond)) return cond;
            if (std::get<bool>(cond)) return eval(c.args[1], origin);
            return c.args.size() == 3 ? eval(c.args[2], origin) : Value(false);
        }
        if (c.name == "ISERROR" || c.name == "ISNA") {
            if (c.args.size() != 1) return make_error(ErrorCode::Value);
            return call_function(c.name, {FunctionArg(eval(c.args[0], origin))});
        }
        if (!is_known_function(c.name)) return make_error(ErrorCode::Name);
        std::vector<FunctionArg> args;
        for (std::size_t i = 0; i < c.args.size(); ++i) {
            const Expr& a = c.args[i];
            if (graph::argument_context(c.name, i) == graph::ArgContext::Range && is_reference(a)) {
                auto r = eval_ref(a, origin);
                if (auto* err = std::get_if<ErrorValue>(&r)) {
                    args.emplace_back(Value(*err));
                } else {
                    args.emplace_back(values_in(std::get<CellRange>(r)));
                }
            } else {
                args.emplace_back(eval(a, origin));
            }
        }
        return call_function(c.name, args);
    }

    const Workbook& wb_;
    const Overrides& overrides_;
    std::set<CellAddress> cyclic_;
    std::set<CellAddress> active_;
    ValueGrid memo_;
};

}  // namespace

ValueGrid recalculate(const Workbook& wb, const Overrides& overrides) {
    std::set<CellAddress> constants;
    for (const auto& [a, v] : overrides) constants.insert(a);
    auto g = graph::DepGraph::build(wb, constants);
    auto order = graph::topological_order(g);

    std::set<CellAddress> placed(order.order.begin(), order.order.end());
    std::set<CellAddress> cyclic;
    for (const auto& n : g.nodes()) if (!placed.count(n)) cyclic.insert(n);

    Evaluator ev(wb, overrides, cyclic);
    ValueGrid grid;
    for (const auto& a : order.order) grid[a] = ev.cell_value(a);
    for (const auto& a : cyclic) grid[a] = ev.cell_value(a);
    return grid;
}

std::string display_text(const Workbook& wb, const ValueGrid& grid, const CellAddress& a) {
    auto it = grid.find(a);
    if (it == grid.end()) return "";
    const Cell* c = wb.cell(a);
    return format_value(it->second, c ? c->format : std::string()).text;
}

}  // namespace cellaudit::eval

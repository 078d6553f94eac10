#include "cellaudit/lint.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "cellaudit/analyze.hpp"
#include "cellaudit/eval.hpp"
#include "cellaudit/graph.hpp"

namespace cellaudit::lint {

using namespace formula;

std::string_view severity_name(Severity s) { return s == Severity::Error ? "error" : "warn"; }

std::string format_finding(const Finding& f) {
    std::string where = f.where.single_cell() ? qualified_r1c1(f.where.first)
                                              : qualified_r1c1(f.where.first) + ":" + to_r1c1(f.where.last);
    return f.code + "\t" + where + "\t" + std::string(severity_name(f.severity)) + "\t" + f.message;
}

namespace {

struct Context {
    const Workbook& wb;
    const Config& config;
    std::map<CellAddress, std::string> forms;
    graph::DepGraph graph;
    eval::ValueGrid values;
    std::vector<Finding> out;

    void add(std::string code, const CellAddress& a, Severity s, std::string message) {
        out.push_back({std::move(code), {a, a}, s, std::move(message)});
    }
    const std::string* form(const CellAddress& a) const {
        auto it = forms.find(a);
        return it == forms.end() ? nullptr : &it->second;
    }
    template <typename F>
    void each_cell(F&& f) const {
        for (const auto& s : wb.sheets) {
            for (const auto& [pos, cell] : s.cells) f(CellAddress{s.name, pos.row, pos.col}, cell);
        }
    }
};

// Neighbours on both sides along a row or column share one normal form.
// Returns that form, or nullptr.
const std::string* flanking_form(const Context& ctx, const CellAddress& a) {
    const std::pair<int, int> axes[] = {{0, 1}, {1, 0}};
    for (auto [dr, dc] : axes) {
        auto* before = ctx.form({a.sheet, a.row - dr, a.col - dc});
        auto* after = ctx.form({a.sheet, a.row + dr, a.col + dc});
        if (before && after && *before == *after) return before;
    }
    return nullptr;
}

// L001: a formula that breaks a run of copies on both sides.
void inconsistent_copy(Context& ctx) {
    ctx.each_cell([&](const CellAddress& a, const Cell& c) {
        if (!c.is_formula()) return;
        const std::string* own = ctx.form(a);
        const std::pair<int, int> axes[] = {{0, 1}, {1, 0}};
        for (auto [dr, dc] : axes) {
            auto* before = ctx.form({a.sheet, a.row - dr, a.col - dc});
            auto* after = ctx.form({a.sheet, a.row + dr, a.col + dc});
            if (before && after && *before == *after && *before != *own) {
                ctx.add("L001", a, Severity::Warn,
                        "formula differs from its " + std::string(dr ? "column" : "row") + " neighbours (" +
                            *before + ")");
                return;
            }
        }
    });
}

// L002: a constant sitting inside a run of copied formulas.
void temporary_fix(Context& ctx) {
    ctx.each_cell([&](const CellAddress& a, const Cell& c) {
        if (!c.is_number()) return;
        if (auto* f = flanking_form(ctx, a)) {
            ctx.add("L002", a, Severity::Warn, "constant " + general_number(std::get<double>(c.content)) +
                                                   " replaces the formula " + *f);
        }
    });
}

// L003: numeric literals other than the allowed identities.
void magic_numbers(Context& ctx) {
    ctx.each_cell([&](const CellAddress& a, const Cell& c) {
        if (!c.is_formula()) return;
        std::vector<std::string> found;
        visit_preorder(c.formula()->expr, [&](const Expr& e) {
            auto* n = e.as<NumberLit>();
            if (!n) return;
            const auto& allowed = ctx.config.allowed_numbers;
            if (std::find(allowed.begin(), allowed.end(), n->value) != allowed.end()) return;
            found.push_back(render_expr(e, Style::R1C1));
        });
        if (found.empty()) return;
        std::string list;
        for (const auto& f : found) list += (list.empty() ? "" : ", ") + f;
        ctx.add("L003", a, Severity::Warn, "numeric literal " + list + " in formula");
    });
}

bool is_aggregate(std::string_view name) {
    return name == "SUM" || name == "MIN" || name == "MAX" || name == "COUNTA";
}

// L004: a one-dimensional aggregate range that stops next to more numbers.
void incomplete_range(Context& ctx) {
    ctx.each_cell([&](const CellAddress& a, const Cell& c) {
        if (!c.is_formula()) return;
        bool reported = false;
        visit_preorder(c.formula()->expr, [&](const Expr& e) {
            auto* call = e.as<Call>();
            if (reported || !call || !is_aggregate(call->name)) return;
            for (const auto& arg : call->args) {
                std::optional<CellRange> r;
                if (auto* rr = arg.as<RangeRef>()) r = rr->resolve(a);
                if (auto* nr = arg.as<NameRef>()) {
                    if (const NamedRange* n = ctx.wb.find_name(nr->name)) r = n->resolve(a);
                }
                if (!r || r->single_cell() || (r->rows() > 1 && r->cols() > 1)) continue;
                bool across = r->rows() == 1;
                CellAddress ends[] = {
                    across ? CellAddress{r->first.sheet, r->first.row, r->first.col - 1}
                           : CellAddress{r->first.sheet, r->first.row - 1, r->first.col},
                    across ? CellAddress{r->first.sheet, r->first.row, r->last.col + 1}
                           : CellAddress{r->first.sheet, r->last.row + 1, r->first.col},
                };
                for (const auto& b : ends) {
                    if (b == a) continue;
                    auto it = ctx.values.find(b);
                    if (it == ctx.values.end() || !std::holds_alternative<double>(it->second)) continue;
                    ctx.add("L004", a, Severity::Warn,
                            call->name + " over " + to_r1c1(*r) + " omits adjacent number at " + to_r1c1(b));
                    reported = true;
                    return;
                }
            }
        });
    });
}

// L005: circular references.
void circular(Context& ctx, const graph::CellOrder& order) {
    for (const auto& cycle : order.cycles) {
        std::string list;
        for (const auto& a : cycle) list += (list.empty() ? "" : " -> ") + to_r1c1(a);
        ctx.add("L005", cycle.front(), Severity::Error, "circular reference " + list + " -> " + to_r1c1(cycle.front()));
    }
}

// L006: cells that evaluate to an error (cycles are L005's business).
void error_values(Context& ctx) {
    for (const auto& [a, v] : ctx.values) {
        auto* e = as_error(v);
        if (!e || e->code == ErrorCode::Circ) continue;
        std::string msg = "evaluates to " + std::string(error_text(e->code));
        if (!e->message.empty()) msg += " (" + e->message + ")";
        ctx.add("L006", a, Severity::Error, msg);
    }
}

bool open_ended(ValidationOperator op) {
    return op != ValidationOperator::Between && op != ValidationOperator::Equal;
}

// L007: referenced input cells without a bounded validation rule.
void unvalidated_inputs(Context& ctx) {
    ctx.each_cell([&](const CellAddress& a, const Cell& c) {
        if (!c.input) return;
        auto i = ctx.graph.index_of(a);
        if (!i || ctx.graph.dependents(*i).empty()) return;
        const ValidationRule* rule = nullptr;
        for (const auto& v : ctx.wb.validations) {
            if (v.target.contains(a)) {
                rule = &v;
                break;
            }
        }
        if (!rule) {
            ctx.add("L007", a, Severity::Warn, "input cell has no validation rule");
        } else if (open_ended(rule->op)) {
            ctx.add("L007", a, Severity::Warn,
                    "validation rule is open-ended (" + std::string(display_name(rule->op)) + ")");
        }
    });
}

// L008: references that name a sheet inside a formula body.
void cross_sheet(Context& ctx) {
    ctx.each_cell([&](const CellAddress& a, const Cell& c) {
        if (!c.is_formula()) return;
        std::set<std::string> sheets;
        visit_preorder(c.formula()->expr, [&](const Expr& e) {
            if (auto* r = e.as<CellRef>(); r && r->sheet) sheets.insert(*r->sheet);
            if (auto* r = e.as<RangeRef>(); r && r->start.sheet) sheets.insert(*r->start.sheet);
        });
        for (const auto& s : sheets) {
            bool known = ctx.wb.find_sheet(s) != nullptr;
            ctx.add("L008", a, Severity::Warn,
                    (known ? "reference to sheet " : "reference to unknown sheet ") + quote_sheet_name(s));
        }
    });
}

// L009: a precedent below or to the right of its dependent.
void upward_left(Context& ctx, const graph::CellOrder& order) {
    std::set<CellAddress> cyclic;
    for (const auto& c : order.cycles) {
        for (const auto& a : c) cyclic.insert(a);
    }
    // Every member of a cyclic component, not just the witness.
    std::set<CellAddress> placed(order.order.begin(), order.order.end());
    for (const auto& n : ctx.graph.nodes()) if (!placed.count(n)) cyclic.insert(n);

    std::map<CellAddress, std::vector<CellAddress>> offending;
    for (const auto& e : ctx.graph.edges()) {
        const auto &p = e.precedent, &d = e.dependent;
        if (p.sheet != d.sheet || p == d) continue;
        if (cyclic.count(p) && cyclic.count(d)) continue;
        if (p.row <= d.row && p.col <= d.col) continue;
        if (ctx.config.allow_column_carry && p.col == d.col - 1 && p.row > d.row) continue;
        offending[d].push_back(p);
    }
    for (const auto& [d, ps] : offending) {
        std::string list;
        for (const auto& p : ps) list += (list.empty() ? "" : ", ") + to_r1c1(p);
        ctx.add("L009", d, Severity::Warn, "depends on cells below or to the right: " + list);
    }
}

}  // namespace

std::vector<Finding> lint(const Workbook& wb, const Config& config) {
    Context ctx{wb, config, analyze::normal_forms(wb), graph::build_graph(wb), eval::recalculate(wb), {}};
    auto order = graph::topological_order(ctx.graph);
    auto enabled = [&](const char* code) { return !config.disabled.count(code); };

    if (enabled("L001")) inconsistent_copy(ctx);
    if (enabled("L002")) temporary_fix(ctx);
    if (enabled("L003")) magic_numbers(ctx);
    if (enabled("L004")) incomplete_range(ctx);
    if (enabled("L005")) circular(ctx, order);
    if (enabled("L006")) error_values(ctx);
    if (enabled("L007")) unvalidated_inputs(ctx);
    if (enabled("L008")) cross_sheet(ctx);
    if (enabled("L009")) upward_left(ctx, order);

    std::stable_sort(ctx.out.begin(), ctx.out.end(), [&](const Finding& a, const Finding& b) {
        if (a.code != b.code) return a.code < b.code;
        int sa = wb.sheet_index(a.where.first.sheet), sb = wb.sheet_index(b.where.first.sheet);
        if (sa != sb) return sa < sb;
        return std::tie(a.where.first.row, a.where.first.col) < std::tie(b.where.first.row, b.where.first.col);
    });
    return std::move(ctx.out);
}

}  // namespace cellaudit::lint

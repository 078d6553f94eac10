#include "cellaudit/graph.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <queue>
#include <sstream>

namespace cellaudit::graph {

using namespace formula;

ArgContext argument_context(std::string_view function, std::size_t index) {
    if (function == "OFFSET") return index == 0 ? ArgContext::Reference : ArgContext::Scalar;
    static const std::set<std::string_view> scalar_fns{"IF", "ISERROR", "ISNA", "ABS", "ROUND", "ASSERT"};
    return scalar_fns.count(function) ? ArgContext::Scalar : ArgContext::Range;
}

Resolution intersect(const CellRange& range, const CellAddress& origin) {
    if (range.single_cell()) return {Binding::Cell, range};
    bool same_sheet = range.first.sheet == origin.sheet;
    if (same_sheet && range.rows() == 1 && origin.col >= range.first.col && origin.col <= range.last.col) {
        CellAddress a{range.first.sheet, range.first.row, origin.col};
        return {Binding::Cell, {a, a}};
    }
    if (same_sheet && range.cols() == 1 && origin.row >= range.first.row && origin.row <= range.last.row) {
        CellAddress a{range.first.sheet, origin.row, range.first.col};
        return {Binding::Cell, {a, a}};
    }
    return {Binding::NoIntersection, range};
}

Resolution resolve_name(std::string_view name, const CellAddress& origin, const Workbook& wb,
                        bool scalar_context) {
    const NamedRange* n = wb.find_name(name);
    if (!n) return {Binding::Undeclared, {}};
    CellRange r = n->resolve(origin);
    if (r.single_cell()) return {Binding::Cell, r};
    if (!scalar_context) return {Binding::Range, r};
    return intersect(r, origin);
}

std::string_view precision_name(Precision p) {
    switch (p) {
        case Precision::Precise: return "precise";
        case Precision::RangeMember: return "range-member";
        case Precision::Approximate: return "approximate";
    }
    return "";
}

namespace {

std::optional<double> constant_value(const Expr& e) {
    if (auto* n = e.as<NumberLit>()) return n->value;
    if (auto* u = e.as<Unary>()) {
        auto v = constant_value(u->operand);
        if (!v) return std::nullopt;
        if (u->op == UnaryOp::Negate) return -*v;
        if (u->op == UnaryOp::Plus) return *v;
        return *v / 100;
    }
    return std::nullopt;
}

class Collector {
public:
    Collector(const CellAddress& origin, const Workbook& wb, std::vector<Reference>& out,
              std::vector<std::string>* dangling)
        : origin_(origin), wb_(wb), out_(out), dangling_(dangling) {}

    void walk(const Expr& e, ArgContext ctx, Precision inherited) {
        if (auto* c = e.as<CellRef>()) {
            emit(c->resolve(origin_), inherited);
        } else if (auto* r = e.as<RangeRef>()) {
            range(r->resolve(origin_), ctx, inherited);
        } else if (auto* n = e.as<NameRef>()) {
            const NamedRange* nr = wb_.find_name(n->name);
            if (!nr) {
                if (dangling_) dangling_->push_back(n->name);
                return;
            }
            range(nr->resolve(origin_), ctx, inherited);
        } else if (auto* u = e.as<Unary>()) {
            walk(u->operand, ArgContext::Scalar, inherited);
        } else if (auto* b = e.as<Binary>()) {
            walk(b->lhs, ArgContext::Scalar, inherited);
            walk(b->rhs, ArgContext::Scalar, inherited);
        } else if (auto* call = e.as<Call>()) {
            if (call->name == "OFFSET") {
                offset(*call, ctx, inherited);
                return;
            }
            for (std::size_t i = 0; i < call->args.size(); ++i) {
                walk(call->args[i], argument_context(call->name, i), inherited);
            }
        }
    }

private:
    static Precision weaker(Precision a, Precision b) { return std::max(a, b); }

    void emit(const CellAddress& a, Precision p) { out_.push_back({a, p}); }

    void range(const CellRange& r, ArgContext ctx, Precision inherited) {
        if (ctx == ArgContext::Scalar) {
            auto res = intersect(r, origin_);
            if (res.binding == Binding::Cell) emit(res.range.first, inherited);
            return;
        }
        Precision p = weaker(inherited, r.single_cell() ? Precision::Precise : Precision::RangeMember);
        const Sheet* s = wb_.find_sheet(r.first.sheet);
        if (!s) return;
        for (int row = r.first.row; row <= r.last.row; ++row) {
            auto it = s->cells.lower_bound({row, r.first.col});
            auto end = s->cells.upper_bound({row, r.last.col});
            for (; it != end; ++it) emit({s->name, it->first.row, it->first.col}, p);
            // Skip empty rows quickly.
            auto next = s->cells.lower_bound({row + 1, 0});
            if (next == s->cells.end()) break;
            if (next->first.row > row + 1) row = next->first.row - 1;
        }
    }

    std::optional<CellRange> base_range(const Expr& e) const {
        if (auto* c = e.as<CellRef>()) {
            auto a = c->resolve(origin_);
            return CellRange{a, a};
        }
        if (auto* r = e.as<RangeRef>()) return r->resolve(origin_);
        if (auto* n = e.as<NameRef>()) {
            if (const NamedRange* nr = wb_.find_name(n->name)) return nr->resolve(origin_);
        }
        return std::nullopt;
    }

    void offset(const Call& call, ArgContext ctx, Precision inherited) {
        if (call.args.empty()) return;
        auto base = base_range(call.args[0]);
        bool constant = call.args.size() >= 3;
        std::vector<double> k;
        for (std::size_t i = 1; i < call.args.size(); ++i) {
            auto v = constant_value(call.args[i]);
            if (!v) constant = false;
            k.push_back(v.value_or(0));
        }
        if (base && constant) {
            int rows = static_cast<int>(k[0]), cols = static_cast<int>(k[1]);
            int h = k.size() > 2 ? static_cast<int>(k[2]) : base->rows();
            int w = k.size() > 3 ? static_cast<int>(k[3]) : base->cols();
            int r1 = base->first.row + rows, c1 = base->first.col + cols;
            if (h >= 1 && w >= 1 && on_grid(r1, c1) && on_grid(r1 + h - 1, c1 + w - 1)) {
                range(make_range(base->first.sheet, r1, c1, r1 + h - 1, c1 + w - 1), ctx, inherited);
            }
            return;
        }
        if (!base) {
            walk(call.args[0], ArgContext::Reference, Precision::Approximate);
        } else {
            range(*base, ArgContext::Range, Precision::Approximate);
        }
        for (std::size_t i = 1; i < call.args.size(); ++i) walk(call.args[i], ArgContext::Scalar, inherited);
    }

    const CellAddress& origin_;
    const Workbook& wb_;
    std::vector<Reference>& out_;
    std::vector<std::string>* dangling_;
};

}  // namespace

void collect_references(const Expr& e, const CellAddress& origin, const Workbook& wb,
                        std::vector<Reference>& out, std::vector<std::string>* dangling) {
    Collector(origin, wb, out, dangling).walk(e, ArgContext::Scalar, Precision::Precise);
}

DepGraph DepGraph::build(const Workbook& wb, const std::set<CellAddress>& as_constants) {
    DepGraph g;
    g.nodes_ = wb.occupied();
    std::sort(g.nodes_.begin(), g.nodes_.end(), [&](const CellAddress& a, const CellAddress& b) {
        int sa = wb.sheet_index(a.sheet), sb = wb.sheet_index(b.sheet);
        if (sa != sb) return sa < sb;
        return std::tie(a.row, a.col) < std::tie(b.row, b.col);
    });
    g.pred_.assign(g.nodes_.size(), {});
    g.succ_.assign(g.nodes_.size(), {});

    std::map<std::pair<std::size_t, std::size_t>, Precision> best;
    for (std::size_t i = 0; i < g.nodes_.size(); ++i) {
        const CellAddress& origin = g.nodes_[i];
        if (as_constants.count(origin)) continue;
        const Cell* c = wb.cell(origin);
        if (!c || !c->is_formula()) continue;
        std::vector<Reference> refs;
        std::vector<std::string> dangling;
        collect_references(c->formula()->expr, origin, wb, refs, &dangling);
        for (auto& d : dangling) g.dangling_.push_back({origin, d});
        for (const auto& r : refs) {
            auto j = g.index_of(r.cell);
            if (!j) continue;
            auto [it, inserted] = best.emplace(std::make_pair(*j, i), r.precision);
            if (!inserted) it->second = std::min(it->second, r.precision);
        }
    }
    for (const auto& [key, p] : best) {
        g.edges_.push_back({g.nodes_[key.first], g.nodes_[key.second], p});
        g.succ_[key.first].push_back(key.second);
        g.pred_[key.second].push_back(key.first);
    }
    for (auto& v : g.pred_) std::sort(v.begin(), v.end());
    return g;
}

std::optional<std::size_t> DepGraph::index_of(const CellAddress& a) const {
    // nodes_ is sorted by (sheet order, row, col); sheets are contiguous.
    for (std::size_t lo = 0; lo < nodes_.size();) {
        if (nodes_[lo].sheet != a.sheet) {
            ++lo;
            continue;
        }
        std::size_t hi = lo;
        while (hi < nodes_.size() && nodes_[hi].sheet == a.sheet) ++hi;
        auto it = std::lower_bound(nodes_.begin() + static_cast<std::ptrdiff_t>(lo),
                                   nodes_.begin() + static_cast<std::ptrdiff_t>(hi), a,
                                   [](const CellAddress& x, const CellAddress& y) {
                                       return std::tie(x.row, x.col) < std::tie(y.row, y.col);
                                   });
        if (it != nodes_.begin() + static_cast<std::ptrdiff_t>(hi) && it->row == a.row && it->col == a.col) {
            return static_cast<std::size_t>(it - nodes_.begin());
        }
        return std::nullopt;
    }
    return std::nullopt;
}

std::vector<CellAddress> DepGraph::precedents_of(const CellAddress& a) const {
    std::vector<CellAddress> out;
    if (auto i = index_of(a)) for (auto j : pred_[*i]) out.push_back(nodes_[j]);
    return out;
}

std::vector<CellAddress> DepGraph::dependents_of(const CellAddress& a) const {
    std::vector<CellAddress> out;
    if (auto i = index_of(a)) for (auto j : succ_[*i]) out.push_back(nodes_[j]);
    return out;
}

std::size_t Digraph::add_node(std::string id, std::string label) {
    ids.push_back(std::move(id));
    labels.push_back(std::move(label));
    out.emplace_back();
    return ids.size() - 1;
}

void Digraph::add_edge(std::size_t from, std::size_t to) {
    auto& v = out[from];
    auto it = std::lower_bound(v.begin(), v.end(), to);
    if (it == v.end() || *it != to) v.insert(it, to);
}

std::size_t Digraph::edge_count() const {
    std::size_t n = 0;
    for (const auto& v : out) n += v.size();
    return n;
}

Digraph cell_digraph(const DepGraph& g) {
    Digraph d;
    bool multi_sheet = false;
    for (const auto& n : g.nodes()) multi_sheet |= n.sheet != g.nodes().front().sheet;
    for (const auto& n : g.nodes()) d.add_node(node_id(n), multi_sheet ? qualified_r1c1(n) : to_r1c1(n));
    for (std::size_t i = 0; i < g.nodes().size(); ++i) {
        for (auto j : g.dependents(i)) d.add_edge(i, j);
    }
    return d;
}

std::string row_caption(const Workbook& wb, std::string_view sheet, int row) {
    if (const Sheet* s = wb.find_sheet(sheet)) {
        for (auto it = s->cells.lower_bound({row, 0}); it != s->cells.end() && it->first.row == row; ++it) {
            if (auto* t = std::get_if<std::string>(&it->second.content); t && !t->empty()) return *t;
        }
    }
    return "Row " + std::to_string(row);
}

Digraph row_digraph(const DepGraph& g, const Workbook& wb) {
    Digraph d;
    std::map<std::pair<std::string, int>, std::size_t> index;
    std::vector<std::size_t> row_of(g.nodes().size());
    for (std::size_t i = 0; i < g.nodes().size(); ++i) {
        const auto& n = g.nodes()[i];
        auto key = std::make_pair(n.sheet, n.row);
        auto it = index.find(key);
        if (it == index.end()) {
            std::string id = n.sheet + ".R" + std::to_string(n.row);
            it = index.emplace(key, d.add_node(id, row_caption(wb, n.sheet, n.row))).first;
        }
        row_of[i] = it->second;
    }
    for (std::size_t i = 0; i < g.nodes().size(); ++i) {
        for (auto j : g.dependents(i)) {
            if (row_of[i] != row_of[j]) d.add_edge(row_of[i], row_of[j]);
        }
    }
    return d;
}

namespace {

// Tarjan's strongly connected components.
std::vector<std::vector<std::size_t>> strongly_connected(const Digraph& g) {
    std::size_t n = g.size(), counter = 0;
    std::vector<std::size_t> index(n, SIZE_MAX), low(n, 0);
    std::vector<bool> on_stack(n, false);
    std::vector<std::size_t> stack;
    std::vector<std::vector<std::size_t>> comps;

    // Iterative DFS to survive long chains.
    for (std::size_t root = 0; root < n; ++root) {
        if (index[root] != SIZE_MAX) continue;
        std::vector<std::pair<std::size_t, std::size_t>> work{{root, 0}};
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = true;
        while (!work.empty()) {
            auto& [v, pos] = work.back();
            if (pos < g.out[v].size()) {
                std::size_t w = g.out[v][pos++];
                if (index[w] == SIZE_MAX) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    work.emplace_back(w, 0);
                } else if (on_stack[w]) {
                    low[v] = std::min(low[v], index[w]);
                }
                continue;
            }
            std::size_t done = v;
            work.pop_back();
            if (!work.empty()) low[work.back().first] = std::min(low[work.back().first], low[done]);
            if (low[done] == index[done]) {
                std::vector<std::size_t> comp;
                std::size_t w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    comp.push_back(w);
                } while (w != done);
                std::sort(comp.begin(), comp.end());
                comps.push_back(std::move(comp));
            }
        }
    }
    return comps;
}

// A cycle through the smallest member of `comp`, found by BFS inside it.
std::vector<std::size_t> witness_cycle(const Digraph& g, const std::vector<std::size_t>& comp) {
    std::size_t start = comp.front();
    std::set<std::size_t> members(comp.begin(), comp.end());
    std::map<std::size_t, std::size_t> parent;
    std::queue<std::size_t> q;
    q.push(start);
    while (!q.empty()) {
        std::size_t v = q.front();
        q.pop();
        for (auto w : g.out[v]) {
            if (!members.count(w)) continue;
            if (w == start) {
                std::vector<std::size_t> cycle{v};
                while (cycle.back() != start) cycle.push_back(parent[cycle.back()]);
                std::reverse(cycle.begin(), cycle.end());
                return cycle;
            }
            if (!parent.count(w)) {
                parent[w] = v;
                q.push(w);
            }
        }
    }
    return comp;
}

}  // namespace

TopoResult topological_order(const Digraph& g) {
    TopoResult result;
    std::vector<bool> cyclic(g.size(), false);
    auto comps = strongly_connected(g);
    std::sort(comps.begin(), comps.end());
    for (const auto& comp : comps) {
        bool self_loop = comp.size() == 1 &&
                         std::binary_search(g.out[comp[0]].begin(), g.out[comp[0]].end(), comp[0]);
        if (comp.size() > 1 || self_loop) {
            for (auto v : comp) cyclic[v] = true;
            result.cycles.push_back(witness_cycle(g, comp));
        }
    }
    std::vector<std::size_t> indegree(g.size(), 0);
    for (std::size_t v = 0; v < g.size(); ++v) {
        if (cyclic[v]) continue;
        for (auto w : g.out[v]) if (!cyclic[w]) ++indegree[w];
    }
    std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
    for (std::size_t v = 0; v < g.size(); ++v) if (!cyclic[v] && indegree[v] == 0) ready.push(v);
    while (!ready.empty()) {
        std::size_t v = ready.top();
        ready.pop();
        result.order.push_back(v);
        for (auto w : g.out[v]) {
            if (!cyclic[w] && --indegree[w] == 0) ready.push(w);
        }
    }
    // Cells downstream of a cycle still need a place in the order.
    std::vector<bool> placed(g.size(), false);
    for (auto v : result.order) placed[v] = true;
    for (std::size_t v = 0; v < g.size(); ++v) {
        if (!cyclic[v] && !placed[v]) result.order.push_back(v);
    }
    return result;
}

CellOrder topological_order(const DepGraph& g) {
    auto t = topological_order(cell_digraph(g));
    CellOrder out;
    for (auto v : t.order) out.order.push_back(g.nodes()[v]);
    for (const auto& c : t.cycles) {
        std::vector<CellAddress> cycle;
        for (auto v : c) cycle.push_back(g.nodes()[v]);
        out.cycles.push_back(std::move(cycle));
    }
    return out;
}

namespace {

std::string dot_quote(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + '"';
}

}  // namespace

std::string export_dot(const Digraph& g, std::string_view name) {
    std::ostringstream os;
    os << "digraph " << dot_quote(name) << " {\n";
    os << "  node [shape=box];\n";
    for (std::size_t i = 0; i < g.size(); ++i) {
        os << "  " << dot_quote(g.ids[i]) << " [label=" << dot_quote(g.labels[i]) << "];\n";
    }
    for (std::size_t i = 0; i < g.size(); ++i) {
        for (auto j : g.out[i]) os << "  " << dot_quote(g.ids[i]) << " -> " << dot_quote(g.ids[j]) << ";\n";
    }
    os << "}\n";
    return os.str();
}

std::string export_dot(const DepGraph& g, const Workbook& wb, DotLevel level) {
    if (level == DotLevel::RowLabel) return export_dot(row_digraph(g, wb));
    // Cell level keeps the precision of each edge as a style.
    Digraph d = cell_digraph(g);
    std::ostringstream os;
    os << "digraph \"dependencies\" {\n";
    os << "  node [shape=box];\n";
    for (std::size_t i = 0; i < d.size(); ++i) {
        os << "  " << dot_quote(d.ids[i]) << " [label=" << dot_quote(d.labels[i]) << "];\n";
    }
    for (const auto& e : g.edges()) {
        os << "  " << dot_quote(node_id(e.precedent)) << " -> " << dot_quote(node_id(e.dependent));
        if (e.precision == Precision::RangeMember) os << " [style=dotted]";
        if (e.precision == Precision::Approximate) os << " [style=dashed]";
        os << ";\n";
    }
    os << "}\n";
    return os.str();
}

std::vector<Area> areas(const Sheet& sheet) {
    std::set<GridPos> seen;
    struct Box {
        int r1, c1, r2, c2;
    };
    std::vector<Box> boxes;
    for (const auto& [pos, cell] : sheet.cells) {
        if (seen.count(pos)) continue;
        Box b{pos.row, pos.col, pos.row, pos.col};
        std::vector<GridPos> todo{pos};
        seen.insert(pos);
        while (!todo.empty()) {
            GridPos p = todo.back();
            todo.pop_back();
            b.r1 = std::min(b.r1, p.row);
            b.r2 = std::max(b.r2, p.row);
            b.c1 = std::min(b.c1, p.col);
            b.c2 = std::max(b.c2, p.col);
            for (int dr = -1; dr <= 1; ++dr) {
                for (int dc = -1; dc <= 1; ++dc) {
                    GridPos q{p.row + dr, p.col + dc};
                    if (sheet.cells.count(q) && seen.insert(q).second) todo.push_back(q);
                }
            }
        }
        boxes.push_back(b);
    }
    // Components whose bounding boxes touch or overlap form one area.
    for (bool merged = true; merged;) {
        merged = false;
        for (std::size_t i = 0; i < boxes.size() && !merged; ++i) {
            for (std::size_t j = i + 1; j < boxes.size(); ++j) {
                const Box &a = boxes[i], &b = boxes[j];
                if (a.r1 <= b.r2 + 1 && b.r1 <= a.r2 + 1 && a.c1 <= b.c2 + 1 && b.c1 <= a.c2 + 1) {
                    Box m{std::min(a.r1, b.r1), std::min(a.c1, b.c1), std::max(a.r2, b.r2), std::max(a.c2, b.c2)};
                    boxes[i] = m;
                    boxes.erase(boxes.begin() + static_cast<std::ptrdiff_t>(j));
                    merged = true;
                    break;
                }
            }
        }
    }
    std::sort(boxes.begin(), boxes.end(), [](const Box& a, const Box& b) {
        return std::tie(a.r1, a.c1) < std::tie(b.r1, b.c1);
    });
    std::vector<Area> out;
    for (const auto& b : boxes) out.push_back({{sheet.name, b.r1, b.c1}, {sheet.name, b.r2, b.c2}});
    return out;
}

}  // namespace cellaudit::graph

#include "cellaudit/analyze.hpp"

#include <cmath>
#include <functional>
#include <numeric>
#include <set>
#include <stdexcept>

namespace cellaudit::analyze {

double cascade_risk(double e, long long n) {
    if (!(e >= 0 && e <= 1)) throw std::domain_error("error rate must lie in [0, 1]");
    if (n < 0) throw std::domain_error("cascade length must be non-negative");
    if (e == 1) return n == 0 ? 0.0 : 1.0;
    return -std::expm1(static_cast<double>(n) * std::log1p(-e));
}

namespace {

std::vector<std::size_t> weak_components(const graph::Digraph& g) {
    std::vector<std::size_t> parent(g.size());
    std::iota(parent.begin(), parent.end(), 0);
    std::function<std::size_t(std::size_t)> find = [&](std::size_t v) {
        while (parent[v] != v) v = parent[v] = parent[parent[v]];
        return v;
    };
    for (std::size_t v = 0; v < g.size(); ++v) {
        for (auto w : g.out[v]) parent[find(v)] = find(w);
    }
    // Number components by their smallest node.
    std::map<std::size_t, std::size_t> id;
    std::vector<std::size_t> out(g.size());
    for (std::size_t v = 0; v < g.size(); ++v) {
        auto root = find(v);
        auto it = id.emplace(root, id.size()).first;
        out[v] = it->second;
    }
    return out;
}

}  // namespace

CascadeCensus enumerate_cascades(const graph::Digraph& g, const CascadeOptions& options) {
    CascadeCensus census;
    census.component = weak_components(g);
    std::size_t ncomp = 0;
    for (auto c : census.component) ncomp = std::max(ncomp, c + 1);
    census.component_histograms.resize(ncomp);

    auto topo = graph::topological_order(g);
    census.excluded_cycles = topo.cycles;
    // The order holds every node except cycle members.
    std::vector<bool> live(g.size(), false);
    for (auto v : topo.order) live[v] = true;

    std::vector<std::size_t> indegree(g.size(), 0);
    for (std::size_t v = 0; v < g.size(); ++v) {
        if (!live[v]) continue;
        for (auto w : g.out[v]) if (live[w]) ++indegree[w];
    }

    std::vector<std::size_t> path;
    std::function<void(std::size_t)> dfs = [&](std::size_t v) {
        if (census.truncated) return;
        path.push_back(v);
        bool sink = true;
        for (auto w : g.out[v]) {
            if (!live[w]) continue;
            sink = false;
            dfs(w);
            if (census.truncated) break;
        }
        if (sink && !census.truncated) {
            if (census.total >= options.cap) {
                census.truncated = true;
            } else {
                ++census.total;
                ++census.histogram[path.size()];
                ++census.component_histograms[census.component[path.front()]][path.size()];
                if (options.keep_paths) census.paths.push_back(path);
            }
        }
        path.pop_back();
    };
    for (std::size_t v = 0; v < g.size() && !census.truncated; ++v) {
        if (live[v] && indegree[v] == 0) dfs(v);
    }
    return census;
}

std::string_view class_name(CellClass c) {
    switch (c) {
        case CellClass::Blank: return "blank";
        case CellClass::Label: return "label";
        case CellClass::Input: return "input";
        case CellClass::Formula: return "formula";
        case CellClass::CopyRight: return "copy-right";
        case CellClass::CopyDown: return "copy-down";
        case CellClass::CopyBoth: return "copy-both";
    }
    return "";
}

std::map<CellAddress, std::string> normal_forms(const Workbook& wb) {
    std::map<CellAddress, std::string> out;
    for (const auto& s : wb.sheets) {
        for (const auto& [pos, cell] : s.cells) {
            if (auto* f = cell.formula()) out[{s.name, pos.row, pos.col}] = formula::normal_form(f->expr);
        }
    }
    return out;
}

CellClass classify(const Workbook& wb, const std::map<CellAddress, std::string>& forms,
                   const CellAddress& a) {
    const Cell* c = wb.cell(a);
    if (!c) return CellClass::Blank;
    if (c->is_text()) return CellClass::Label;
    if (!c->is_formula()) return CellClass::Input;
    const std::string& nf = forms.at(a);
    auto same = [&](int row, int col) {
        auto it = forms.find({a.sheet, row, col});
        return it != forms.end() && it->second == nf;
    };
    bool right = same(a.row, a.col - 1);
    bool down = same(a.row - 1, a.col);
    if (right && down) return CellClass::CopyBoth;
    if (right) return CellClass::CopyRight;
    if (down) return CellClass::CopyDown;
    return CellClass::Formula;
}

std::map<CellAddress, CellClass> classify_cells(const Workbook& wb) {
    auto forms = normal_forms(wb);
    std::map<CellAddress, CellClass> out;
    for (const auto& a : wb.occupied()) out[a] = classify(wb, forms, a);
    return out;
}

namespace {

std::vector<CellAddress> input_cells(const Workbook& wb) {
    std::vector<CellAddress> out;
    for (const auto& s : wb.sheets) {
        for (const auto& [pos, cell] : s.cells) {
            if (cell.input) out.push_back({s.name, pos.row, pos.col});
        }
    }
    return out;
}

}  // namespace

ZeroTestResult zero_test(const Workbook& wb, const CellRange& outputs) {
    eval::Overrides zeros;
    for (const auto& a : input_cells(wb)) zeros[a] = 0.0;
    auto grid = eval::recalculate(wb, zeros);
    ZeroTestResult r;
    for (const auto& [a, v] : grid) {
        if (!outputs.contains(a)) continue;
        bool bad = is_error(v) || (std::holds_alternative<double>(v) && std::get<double>(v) != 0);
        if (bad) r.failures.push_back({a, v});
    }
    r.pass = r.failures.empty();
    return r;
}

std::map<CellAddress, Value> sensitivity(const Workbook& wb, const CellAddress& input, double delta,
                                         const std::vector<CellAddress>& watch) {
    const Cell* c = wb.cell(input);
    if (!c || !c->input) throw std::invalid_argument(qualified_r1c1(input) + " is not an input cell");
    auto* base = std::get_if<double>(&c->content);
    if (!base) throw std::domain_error(qualified_r1c1(input) + " does not hold a number");

    auto before = eval::recalculate(wb);
    auto after = eval::recalculate(wb, {{input, *base + delta}});
    std::map<CellAddress, Value> out;
    for (const auto& w : watch) {
        auto get = [&](const eval::ValueGrid& g) -> Value {
            auto it = g.find(w);
            return it == g.end() ? Value(Blank{}) : it->second;
        };
        Value a = get(before), b = get(after);
        if (is_error(a)) {
            out[w] = a;
        } else if (is_error(b)) {
            out[w] = b;
        } else {
            auto x = as_number(a), y = as_number(b);
            out[w] = (x && y) ? Value(*y - *x) : make_error(ErrorCode::Value);
        }
    }
    return out;
}

std::vector<AssertionResult> check_assertions(const Workbook& wb, const eval::ValueGrid& grid) {
    std::vector<AssertionResult> out;
    for (const auto& a : wb.occupied()) {
        const Cell* c = wb.cell(a);
        if (!c->is_formula()) continue;
        bool has_assert = false;
        formula::visit_preorder(c->formula()->expr, [&](const formula::Expr& e) {
            if (auto* call = e.as<formula::Call>(); call && call->name == "ASSERT") has_assert = true;
        });
        if (!has_assert) continue;
        AssertionResult r{a, true, {}};
        auto it = grid.find(a);
        if (it != grid.end()) {
            if (auto* e = as_error(it->second)) {
                r.ok = false;
                r.detail = std::string(error_text(e->code));
                if (!e->message.empty()) r.detail += " " + e->message;
            }
        }
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace cellaudit::analyze

#pragma once

#include <cstddef>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cellaudit/wbt.hpp"

namespace testsupport {

inline std::string source_path(const std::string& rel) { return std::string(CELLAUDIT_TEST_DIR) + "/" + rel; }

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string golden(const std::string& name) { return read_file(source_path("golden/" + name)); }

inline std::string sample_path() { return source_path("data/sample_forecast.wbt"); }
inline cellaudit::Workbook sample() { return cellaudit::wbt::load_file(sample_path()); }

inline cellaudit::CellAddress at(int row, int col, const std::string& sheet = "Forecast") {
    return {sheet, row, col};
}

inline void set_formula(cellaudit::Workbook& wb, int row, int col, const std::string& src,
                        const std::string& sheet = "Forecast") {
    auto a = at(row, col, sheet);
    wb.set_cell(a, cellaudit::Cell::formula_r1c1(src, a));
}

// A single-column workbook whose formula cells reference random earlier rows
// with absolute references. `deps[i]` lists the rows cell i+1 reads.
struct RandomDag {
    cellaudit::Workbook wb;
    std::vector<std::set<int>> deps;
};

inline RandomDag random_dag(std::mt19937& rng, int n, double edge_p = 0.3) {
    RandomDag out;
    out.wb.add_sheet("S");
    out.deps.resize(n);
    std::bernoulli_distribution edge(edge_p);
    for (int i = 1; i <= n; ++i) {
        std::set<int> d;
        for (int j = 1; j < i; ++j) {
            if (edge(rng)) d.insert(j);
        }
        cellaudit::CellAddress a{"S", i, 1};
        if (d.empty()) {
            out.wb.set_cell(a, cellaudit::Cell::number(i, {}, true));
        } else {
            std::string src = "=";
            for (int j : d) src += (src.size() > 1 ? "+R" : "R") + std::to_string(j) + "C1";
            out.wb.set_cell(a, cellaudit::Cell::formula_r1c1(src, a));
        }
        out.deps[i - 1] = std::move(d);
    }
    return out;
}

// Brute-force path census: every path from a node without predecessors to a
// node without successors, counted by length in nodes.
inline void count_paths(const std::vector<std::vector<bool>>& adj, std::size_t v, std::size_t len,
                        std::map<std::size_t, std::size_t>& hist) {
    bool sink = true;
    for (std::size_t w = 0; w < adj.size(); ++w) {
        if (adj[v][w]) {
            sink = false;
            count_paths(adj, w, len + 1, hist);
        }
    }
    if (sink) ++hist[len];
}

inline std::map<std::size_t, std::size_t> brute_force_census(const std::vector<std::vector<bool>>& adj) {
    std::map<std::size_t, std::size_t> hist;
    for (std::size_t v = 0; v < adj.size(); ++v) {
        bool source = true;
        for (std::size_t u = 0; u < adj.size(); ++u) source = source && !adj[u][v];
        if (source) count_paths(adj, v, 1, hist);
    }
    return hist;
}

}  // namespace testsupport

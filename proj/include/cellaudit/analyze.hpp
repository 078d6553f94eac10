#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "cellaudit/eval.hpp"
#include "cellaudit/graph.hpp"

namespace cellaudit::analyze {

// Chance that at least one of n cells, each wrong with probability e, is wrong.
double cascade_risk(double e, long long n);

struct CascadeOptions {
    std::size_t cap = 1000000;  // stop enumerating after this many paths
    bool keep_paths = true;
};

struct CascadeCensus {
    std::vector<std::vector<std::size_t>> paths;  // node indices, source first
    std::map<std::size_t, std::size_t> histogram;  // length in cells -> count
    std::size_t total = 0;
    bool truncated = false;
    // Weakly connected component of each node; per-component histograms.
    std::vector<std::size_t> component;
    std::vector<std::map<std::size_t, std::size_t>> component_histograms;
    // Nodes on cycles are left out of the census.
    std::vector<std::vector<std::size_t>> excluded_cycles;
};

// All source-to-sink paths; a node with no edges is a one-cell path.
CascadeCensus enumerate_cascades(const graph::Digraph& g, const CascadeOptions& options = {});

enum class CellClass { Blank, Label, Input, Formula, CopyRight, CopyDown, CopyBoth };
std::string_view class_name(CellClass c);

// Normal form of every formula cell.
std::map<CellAddress, std::string> normal_forms(const Workbook& wb);

CellClass classify(const Workbook& wb, const std::map<CellAddress, std::string>& forms,
                   const CellAddress& a);
std::map<CellAddress, CellClass> classify_cells(const Workbook& wb);

struct ZeroFailure {
    CellAddress cell;
    Value value;
};

struct ZeroTestResult {
    bool pass = true;
    std::vector<ZeroFailure> failures;
};

// Recalculates with every input-flagged cell set to 0 and requires every
// numeric cell of `outputs` to be exactly 0. Errors count as failures.
ZeroTestResult zero_test(const Workbook& wb, const CellRange& outputs);

// Value change of each watched cell when `input` moves by `delta`.
// Errors: input not input-flagged (invalid_argument), non-numeric (domain_error).
std::map<CellAddress, Value> sensitivity(const Workbook& wb, const CellAddress& input, double delta,
                                         const std::vector<CellAddress>& watch);

struct AssertionResult {
    CellAddress cell;
    bool ok = true;
    std::string detail;  // error code and message when failing
};

// Cells whose formula calls ASSERT, with their recalculated outcome.
std::vector<AssertionResult> check_assertions(const Workbook& wb, const eval::ValueGrid& grid);

}  // namespace cellaudit::analyze

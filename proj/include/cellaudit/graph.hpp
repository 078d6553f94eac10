#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "cellaudit/workbook.hpp"

namespace cellaudit::graph {

// How a function consumes each argument.
enum class ArgContext { Scalar, Range, Reference };
ArgContext argument_context(std::string_view function, std::size_t index);

enum class Binding { Cell, Range, NoIntersection, Undeclared };

struct Resolution {
    Binding binding = Binding::Undeclared;
    CellRange range;  // one cell for Binding::Cell
};

// Implicit intersection: a row range meets the origin's column, a column
// range meets the origin's row. Other shapes do not intersect.
Resolution intersect(const CellRange& range, const CellAddress& origin);

Resolution resolve_name(std::string_view name, const CellAddress& origin, const Workbook& wb,
                        bool scalar_context = true);

enum class Precision { Precise, RangeMember, Approximate };
std::string_view precision_name(Precision p);

struct Edge {
    CellAddress precedent;
    CellAddress dependent;
    Precision precision = Precision::Precise;
};

struct DanglingName {
    CellAddress cell;
    std::string name;
};

// Nodes are the occupied cells in sheet order, then row-major.
class DepGraph {
public:
    // Cells in `as_constants` contribute no outgoing references.
    static DepGraph build(const Workbook& wb, const std::set<CellAddress>& as_constants = {});

    const std::vector<CellAddress>& nodes() const { return nodes_; }
    const std::vector<Edge>& edges() const { return edges_; }
    const std::vector<DanglingName>& dangling() const { return dangling_; }

    std::optional<std::size_t> index_of(const CellAddress& a) const;
    const std::vector<std::size_t>& precedents(std::size_t node) const { return pred_[node]; }
    const std::vector<std::size_t>& dependents(std::size_t node) const { return succ_[node]; }

    std::vector<CellAddress> precedents_of(const CellAddress& a) const;
    std::vector<CellAddress> dependents_of(const CellAddress& a) const;

private:
    std::vector<CellAddress> nodes_;
    std::vector<Edge> edges_;
    std::vector<DanglingName> dangling_;
    std::vector<std::vector<std::size_t>> pred_;
    std::vector<std::vector<std::size_t>> succ_;
};

inline DepGraph build_graph(const Workbook& wb) { return DepGraph::build(wb); }

// Every reference a formula makes, with precision, before the occupancy
// filter. Used by the graph and by lint.
struct Reference {
    CellAddress cell;
    Precision precision = Precision::Precise;
};
void collect_references(const formula::Expr& e, const CellAddress& origin, const Workbook& wb,
                        std::vector<Reference>& out, std::vector<std::string>* dangling = nullptr);

// Plain labelled digraph used for row-level views and path enumeration.
struct Digraph {
    std::vector<std::string> ids;
    std::vector<std::string> labels;
    std::vector<std::vector<std::size_t>> out;  // sorted, unique

    std::size_t size() const { return ids.size(); }
    std::size_t add_node(std::string id, std::string label);
    void add_edge(std::size_t from, std::size_t to);
    std::size_t edge_count() const;
};

Digraph cell_digraph(const DepGraph& g);
// One node per row that holds a graph node; intra-row edges are dropped.
Digraph row_digraph(const DepGraph& g, const Workbook& wb);

// Leftmost text cell of the row, or "Row n".
std::string row_caption(const Workbook& wb, std::string_view sheet, int row);

struct TopoResult {
    std::vector<std::size_t> order;               // acyclic part, precedents first
    std::vector<std::vector<std::size_t>> cycles;  // one witness per cyclic SCC
    bool acyclic() const { return cycles.empty(); }
};
// Kahn's algorithm, smallest index first; cyclic SCC members are excluded.
TopoResult topological_order(const Digraph& g);

struct CellOrder {
    std::vector<CellAddress> order;
    std::vector<std::vector<CellAddress>> cycles;
    bool acyclic() const { return cycles.empty(); }
};
CellOrder topological_order(const DepGraph& g);

enum class DotLevel { Cell, RowLabel };
std::string export_dot(const DepGraph& g, const Workbook& wb, DotLevel level);
std::string export_dot(const Digraph& g, std::string_view name = "dependencies");

struct Area {
    CellAddress top_left;
    CellAddress bottom_right;
    friend bool operator==(const Area&, const Area&) = default;
};
std::vector<Area> areas(const Sheet& sheet);

}  // namespace cellaudit::graph

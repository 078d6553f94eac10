#include <doctest.h>

#include <algorithm>
#include <random>

#include "cellaudit/graph.hpp"
#include "cellaudit/wbt.hpp"
#include "support.hpp"

using namespace cellaudit;
using namespace cellaudit::graph;
using testsupport::at;

namespace {

std::set<CellAddress> as_set(const std::vector<CellAddress>& v) { return {v.begin(), v.end()}; }

Workbook parse(const std::string& body) { return wbt::parse_workbook("%wbt 1\nsheet S\n" + body); }

const Edge* find_edge(const DepGraph& g, const CellAddress& p, const CellAddress& d) {
    for (const auto& e : g.edges()) {
        if (e.precedent == p && e.dependent == d) return &e;
    }
    return nullptr;
}

}  // namespace

TEST_CASE("sample graph") {
    auto wb = testsupport::sample();
    auto g = build_graph(wb);
    CHECK(g.nodes().size() == 71);
    CHECK(g.edges().size() == 96);
    CHECK(as_set(g.precedents_of(at(9, 3))) == std::set<CellAddress>{at(5, 3), at(6, 3), at(7, 3)});
    CHECK(as_set(g.precedents_of(at(2, 4))) == std::set<CellAddress>{at(2, 1), at(2, 3)});
    CHECK(as_set(g.precedents_of(at(10, 5))) == std::set<CellAddress>{at(9, 5), at(10, 1)});
    CHECK(g.dependents_of(at(8, 3)).empty());
    CHECK(g.precedents_of(at(1, 3)).empty());  // Prior_Year of Year 1 is blank
    CHECK(g.dangling().empty());
    auto topo = topological_order(g);
    CHECK(topo.acyclic());
    CHECK(topo.order.size() == 71);
}

TEST_CASE("implicit intersection") {
    auto row = make_range("S", 2, 3, 2, 7);
    auto r = intersect(row, {"S", 9, 5});
    CHECK(r.binding == Binding::Cell);
    CHECK(r.range.first == CellAddress{"S", 2, 5});
    CHECK(intersect(row, {"S", 9, 8}).binding == Binding::NoIntersection);
    auto col = make_range("S", 2, 1, 5, 1);
    CHECK(intersect(col, {"S", 4, 6}).range.first == CellAddress{"S", 4, 1});
    CHECK(intersect(make_range("S", 1, 1, 2, 2), {"S", 1, 1}).binding == Binding::NoIntersection);
}

TEST_CASE("names resolve relative to the consuming cell") {
    auto wb = testsupport::sample();
    auto r = resolve_name("prior_year", at(3, 6), wb);
    CHECK(r.binding == Binding::Cell);
    CHECK(r.range.first == at(3, 5));
    auto s = resolve_name("Sales", at(9, 4), wb);
    CHECK(s.range.first == at(6, 4));
    auto whole = resolve_name("Sales", at(9, 4), wb, false);
    CHECK(whole.binding == Binding::Range);
    CHECK(whole.range.cols() == 5);
    CHECK(resolve_name("Nope", at(1, 1), wb).binding == Binding::Undeclared);
}

TEST_CASE("argument contexts") {
    CHECK(argument_context("SUM", 0) == ArgContext::Range);
    CHECK(argument_context("OFFSET", 0) == ArgContext::Reference);
    CHECK(argument_context("OFFSET", 1) == ArgContext::Scalar);
    CHECK(argument_context("IF", 0) == ArgContext::Scalar);
    CHECK(argument_context("ABS", 0) == ArgContext::Scalar);
}

TEST_CASE("precision labels") {
    auto wb = parse(
        "cell R1C1 num 1\ncell R2C1 num 2\ncell R3C1 num 3\n"
        "cell R1C2 fml \"=SUM(R1C1:R3C1)\"\n"
        "cell R2C2 fml \"=R1C1+SUM(R1C1:R2C1)\"\n"
        "cell R3C2 fml \"=SUM(OFFSET(R1C1,R2C1,0))\"\n"
        "cell R4C2 fml \"=OFFSET(R1C1,1,0)\"\n");
    auto g = build_graph(wb);
    CHECK(find_edge(g, {"S", 3, 1}, {"S", 1, 2})->precision == Precision::RangeMember);
    CHECK(find_edge(g, {"S", 1, 1}, {"S", 2, 2})->precision == Precision::Precise);  // strongest wins
    CHECK(find_edge(g, {"S", 1, 1}, {"S", 3, 2})->precision == Precision::Approximate);
    CHECK(find_edge(g, {"S", 2, 1}, {"S", 3, 2})->precision == Precision::Precise);
    CHECK(find_edge(g, {"S", 2, 1}, {"S", 4, 2})->precision == Precision::Precise);  // constant offset
    CHECK_FALSE(find_edge(g, {"S", 1, 1}, {"S", 4, 2}));
    CHECK(precision_name(Precision::RangeMember) == "range-member");
}

TEST_CASE("undeclared names are reported") {
    auto wb = parse("cell R1C1 fml \"=Missing*2\"\n");
    auto g = build_graph(wb);
    REQUIRE(g.dangling().size() == 1);
    CHECK(g.dangling()[0].name == "Missing");
}

TEST_CASE("cycles and topological order") {
    auto wb = parse(
        "cell R1C1 num 1\n"
        "cell R1C2 fml \"=R1C1+R1C4\"\n"
        "cell R1C3 fml \"=R1C2\"\n"
        "cell R1C4 fml \"=R1C3\"\n"
        "cell R1C5 fml \"=R1C4\"\n"
        "cell R2C1 fml \"=R2C1\"\n");
    auto g = build_graph(wb);
    auto t = topological_order(g);
    CHECK_FALSE(t.acyclic());
    REQUIRE(t.cycles.size() == 2);
    CHECK(t.cycles[0] == std::vector<CellAddress>{{"S", 1, 2}, {"S", 1, 3}, {"S", 1, 4}});
    CHECK(t.cycles[1] == std::vector<CellAddress>{{"S", 2, 1}});
    CHECK(t.order == std::vector<CellAddress>{{"S", 1, 1}, {"S", 1, 5}});
}

TEST_CASE("topological order respects every edge") {
    auto wb = testsupport::sample();
    auto g = build_graph(wb);
    auto t = topological_order(g);
    std::map<CellAddress, std::size_t> pos;
    for (std::size_t i = 0; i < t.order.size(); ++i) pos[t.order[i]] = i;
    for (const auto& e : g.edges()) CHECK(pos.at(e.precedent) < pos.at(e.dependent));
}

TEST_CASE("property: edges match the generating references") {
    std::mt19937 rng(42);
    for (int trial = 0; trial < 200; ++trial) {
        int n = 1 + static_cast<int>(rng() % 15);
        auto dag = testsupport::random_dag(rng, n, 0.35);
        auto g = build_graph(dag.wb);
        std::set<std::pair<int, int>> expected, actual;
        for (int i = 0; i < n; ++i) {
            for (int j : dag.deps[i]) expected.insert({j, i + 1});
        }
        for (const auto& e : g.edges()) {
            CHECK(e.precision == Precision::Precise);
            actual.insert({e.precedent.row, e.dependent.row});
        }
        CHECK(actual == expected);
        CHECK(topological_order(g).acyclic());
    }
}

TEST_CASE("row digraph of the sample") {
    auto wb = testsupport::sample();
    auto d = row_digraph(build_graph(wb), wb);
    CHECK(d.size() == 11);
    CHECK(d.edge_count() == 11);
    CHECK(d.labels[0] == "Growth Rate");
    CHECK(d.out[0].empty());
    CHECK(d.labels[8] == "Pretax Earnings");
    CHECK(d.out[8].size() == 2);
    CHECK(row_caption(wb, "Forecast", 12) == "Row 12");
}

TEST_CASE("DOT export") {
    auto wb = parse(
        "cell R1C1 num 1\ncell R2C1 num 2\n"
        "cell R1C2 fml \"=SUM(R1C1:R2C1)\"\n"
        "cell R2C2 fml \"=R1C2*2\"\n"
        "cell R3C2 fml \"=SUM(OFFSET(R1C1,R2C1,0))\"\n");
    auto dot = export_dot(build_graph(wb), wb, DotLevel::Cell);
    CHECK(dot.rfind("digraph", 0) == 0);
    CHECK(dot.find("\"S.R1C2\" [label=\"R1C2\"]") != std::string::npos);
    CHECK(dot.find("\"S.R1C1\" -> \"S.R1C2\" [style=dotted]") != std::string::npos);
    CHECK(dot.find("\"S.R1C2\" -> \"S.R2C2\";") != std::string::npos);
    CHECK(dot.find("\"S.R1C1\" -> \"S.R3C2\" [style=dashed]") != std::string::npos);
    CHECK(dot.back() == '\n');

    auto sample = testsupport::sample();
    auto rows = export_dot(build_graph(sample), sample, DotLevel::RowLabel);
    CHECK(rows.find("label=\"Pretax Earnings\"") != std::string::npos);
    CHECK(std::count(rows.begin(), rows.end(), '>') == 11);
}

TEST_CASE("areas") {
    auto wb = testsupport::sample();
    auto a = areas(wb.sheets[0]);
    REQUIRE(a.size() == 1);
    CHECK(a[0].top_left == at(1, 1));
    CHECK(a[0].bottom_right == at(11, 7));

    auto two = parse("cell R1C1 num 1\ncell R2C2 num 1\ncell R5C5 num 1\ncell R5C6 num 1\n");
    auto b = areas(two.sheets[0]);
    REQUIRE(b.size() == 2);
    CHECK(b[0].bottom_right == CellAddress{"S", 2, 2});
    CHECK(b[1].top_left == CellAddress{"S", 5, 5});
}

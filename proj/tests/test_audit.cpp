#include <doctest.h>

#include <random>

#include "cellaudit/audit.hpp"
#include "support.hpp"

using namespace cellaudit;
using namespace cellaudit::audit;
using testsupport::at;

namespace {

// Independent frontier check straight from the definitions.
void check_frontier(const AuditContext& ctx, const AuditState& s) {
    auto colors = ctx.colors(s);
    REQUIRE(colors.size() == s.scope.size());
    for (const auto& [cell, color] : colors) {
        bool checked = s.checked.count(cell) > 0;
        bool ready = true;
        for (const auto& p : ctx.graph().precedents_of(cell)) {
            if (s.scope.count(p) && !s.checked.count(p)) ready = false;
        }
        Color expected = checked ? Color::Green : ready ? Color::Yellow : Color::Red;
        CHECK(color == expected);
    }
}

int rank(Color c) { return c == Color::Green ? 2 : c == Color::Red ? 0 : 1; }

}  // namespace

TEST_CASE("sample session starts with inputs and labels ready") {
    AuditContext ctx(testsupport::sample());
    auto s = ctx.new_session();
    CHECK(s.scope.size() == 71);
    auto c = ctx.colors(s);
    CHECK(c.at(at(2, 3)) == Color::Yellow);
    CHECK(c.at(at(1, 1)) == Color::Yellow);
    CHECK(c.at(at(1, 3)) == Color::Yellow);  // no occupied precedents
    CHECK(c.at(at(2, 4)) == Color::Red);
    auto p = ctx.progress(s);
    CHECK(p.green == 0);
    CHECK(p.total == 71);
    CHECK_FALSE(p.complete);
}

TEST_CASE("marking walks the frontier") {
    AuditContext ctx(testsupport::sample());
    auto s = ctx.new_session();
    auto r = ctx.mark(s, at(2, 4), true, "amy", "2026-01-01T00:00:00Z");
    CHECK(r.warning);  // red cell
    s = ctx.mark(s, at(2, 1), true, "amy", "t").state;
    CHECK_FALSE(ctx.mark(s, at(2, 3), true, "amy", "t").warning);
    s = ctx.mark(s, at(2, 3), true, "amy", "t").state;
    CHECK(ctx.colors(s).at(at(2, 4)) == Color::Yellow);
    s = ctx.mark(s, at(2, 4), true, "amy", "t").state;
    CHECK(ctx.colors(s).at(at(2, 4)) == Color::Green);
    s = ctx.mark(s, at(2, 3), false, "amy", "t").state;
    CHECK(ctx.colors(s).at(at(2, 3)) == Color::Yellow);
    CHECK(s.checked.size() == 2);
}

TEST_CASE("dark yellow marks copy-equivalent ready neighbours of the focus") {
    AuditContext ctx(testsupport::sample());
    auto s = ctx.new_session();
    for (int r = 2; r <= 5; ++r) {
        s = ctx.mark(s, at(r, 1), true, "amy", "t").state;
        s = ctx.mark(s, at(r, 3), true, "amy", "t").state;
    }
    auto focus = ctx.colors(s, at(3, 4));
    CHECK(focus.at(at(2, 4)) == Color::DarkYellow);
    CHECK(focus.at(at(4, 4)) == Color::DarkYellow);
    CHECK(focus.at(at(3, 4)) == Color::Yellow);
    CHECK(focus.at(at(3, 5)) == Color::Red);
    CHECK(ctx.progress(s).yellow + ctx.progress(s).green + ctx.progress(s).red == 71);
}

TEST_CASE("stale sessions and scope") {
    AuditContext ctx(testsupport::sample());
    auto s = ctx.new_session();
    auto changed = testsupport::sample();
    changed.set_cell(at(2, 3), Cell::number(12500, "#,##0", true));
    AuditContext other(changed);
    CHECK_THROWS_AS(other.mark(s, at(2, 3), true, "amy", "t"), StaleSession);
    CHECK_THROWS_AS(other.replay(ctx.log_header(s)), StaleSession);

    auto scoped = ctx.new_session(std::set<CellAddress>{at(2, 3), at(2, 4)});
    CHECK(ctx.colors(scoped).at(at(2, 4)) == Color::Red);
    CHECK_THROWS_AS(ctx.mark(scoped, at(3, 3), true, "amy", "t"), OutOfScope);
    CHECK_THROWS_AS(ctx.new_session(std::set<CellAddress>{at(20, 20)}), OutOfScope);
    auto back = ctx.replay(ctx.save(scoped));
    CHECK(back == scoped);
}

TEST_CASE("log format") {
    AuditContext ctx(testsupport::sample());
    CHECK(AuditContext::log_line(true, at(2, 3), "amy", "2026-01-01T00:00:00Z") ==
          "mark Forecast!R2C3 amy 2026-01-01T00:00:00Z\n");
    CHECK_THROWS_AS(AuditContext::log_line(true, at(2, 3), "amy lee", "t"), std::invalid_argument);
    CHECK_THROWS_AS(ctx.replay("garbage\n"), std::invalid_argument);
    CHECK_THROWS_AS(ctx.replay(""), std::invalid_argument);
    auto header = ctx.log_header(ctx.new_session());
    CHECK(header == "%audit 1 fingerprint=" + ctx.fingerprint() + "\n");
    CHECK_THROWS_AS(ctx.replay(header + "mark Forecast!R2C3 amy\n"), std::invalid_argument);
    CHECK(now_rfc3339().size() == 20);
}

TEST_CASE("quoted sheet names survive the log") {
    Workbook wb;
    wb.add_sheet("Q1 Plan");
    wb.set_cell({"Q1 Plan", 1, 1}, Cell::number(1, {}, true));
    wb.set_cell({"Q1 Plan", 1, 2}, Cell::formula_r1c1("=RC[-1]*2", {"Q1 Plan", 1, 2}));
    AuditContext ctx(wb);
    auto s = ctx.new_session(std::set<CellAddress>{{"Q1 Plan", 1, 1}, {"Q1 Plan", 1, 2}});
    s = ctx.mark(s, {"Q1 Plan", 1, 1}, true, "amy", "t").state;
    CHECK(ctx.replay(ctx.save(s)) == s);
}

TEST_CASE("property: frontier soundness, monotonicity and replay") {
    std::mt19937 rng(77);
    for (int trial = 0; trial < 1000; ++trial) {
        int n = 2 + static_cast<int>(rng() % 10);
        auto dag = testsupport::random_dag(rng, n, 0.4);
        AuditContext ctx(dag.wb);
        auto s = ctx.new_session();
        std::string log = ctx.log_header(s);
        int steps = 1 + static_cast<int>(rng() % 20);
        for (int k = 0; k < steps; ++k) {
            CellAddress cell{"S", 1 + static_cast<int>(rng() % n), 1};
            bool checked = rng() % 3 != 0;
            auto before = ctx.colors(s);
            auto r = ctx.mark(s, cell, checked, "amy", "t" + std::to_string(k));
            CHECK(r.warning.has_value() == (checked && before.at(cell) == Color::Red));
            auto after = ctx.colors(r.state);
            for (const auto& [other, color] : after) {
                if (other == cell) continue;
                if (checked) {
                    CHECK(rank(color) >= rank(before.at(other)));
                } else {
                    CHECK(rank(color) <= rank(before.at(other)));
                }
            }
            CHECK((after.at(cell) == Color::Green) == checked);
            log += AuditContext::log_line(checked, cell, "amy", "t" + std::to_string(k));
            s = r.state;
            check_frontier(ctx, s);
        }
        auto replayed = ctx.replay(log);
        CHECK(replayed == s);
        auto loaded = ctx.replay(ctx.save(s));
        CHECK(ctx.colors(loaded) == ctx.colors(s));
        CHECK(ctx.progress(loaded).green == s.checked.size());
    }
}

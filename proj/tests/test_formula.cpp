#include <doctest.h>

#include <random>

#include "cellaudit/formula.hpp"

using namespace cellaudit;
using namespace cellaudit::formula;

namespace {

Expr r1c1(const std::string& s) { return parse_formula(s, Style::R1C1); }

RefComponent random_component(std::mt19937& rng) {
    if (rng() % 2) return RefComponent::absolute(1 + static_cast<int>(rng() % 20));
    return RefComponent::relative(static_cast<int>(rng() % 9) - 4);
}

CellRef random_cell(std::mt19937& rng) {
    CellRef c{std::nullopt, random_component(rng), random_component(rng)};
    if (rng() % 6 == 0) c.sheet = "Data";
    return c;
}

Expr random_expr(std::mt19937& rng, int depth) {
    int pick = static_cast<int>(rng() % (depth > 0 ? 10 : 5));
    switch (pick) {
        case 0: return NumberLit{static_cast<double>(rng() % 1000) / 8.0};
        case 1: return TextLit{rng() % 2 ? "abc" : "say \"hi\""};
        case 2: return random_cell(rng);
        case 3: {
            auto s = random_cell(rng);
            auto e = random_cell(rng);
            e.sheet.reset();
            return RangeRef{s, e};
        }
        case 4: return NameRef{rng() % 2 ? "Growth_Rate" : "Prior_Year"};
        case 5: return Unary{UnaryOp::Negate, random_expr(rng, depth - 1)};
        case 6:
        case 7: {
            auto op = static_cast<BinaryOp>(rng() % 12);
            return Binary{op, random_expr(rng, depth - 1), random_expr(rng, depth - 1)};
        }
        case 8: return BoolLit{rng() % 2 == 0};
        default: {
            Call c{rng() % 2 ? "SUM" : "IF", {}};
            int n = 1 + static_cast<int>(rng() % 3);
            for (int i = 0; i < n; ++i) c.args.push_back(random_expr(rng, depth - 1));
            return c;
        }
    }
}

}  // namespace

TEST_CASE("R1C1 and A1 references") {
    CellAddress origin{"Forecast", 2, 4};
    auto e = parse_formula("=RC[-1]*R2C1", Style::R1C1);
    CHECK(render_formula(e, Style::R1C1) == "=RC[-1]*R2C1");
    CHECK(render_formula(e, Style::A1, origin) == "=C2*$A$2");
    auto a1 = parse_formula("=C2*$A$2", Style::A1, origin);
    CHECK(a1 == e);
    CHECK(normal_form(a1) == "=RC[-1]*R2C1");
}

TEST_CASE("precedence and minimal parentheses") {
    CHECK(render_formula(r1c1("=(1+R1C1)*R2C1"), Style::R1C1) == "=(1+R1C1)*R2C1");
    CHECK(render_formula(r1c1("=1+(R1C1*R2C1)"), Style::R1C1) == "=1+R1C1*R2C1");
    CHECK(render_formula(r1c1("=R1C1-(R2C1-R3C1)"), Style::R1C1) == "=R1C1-(R2C1-R3C1)");
    CHECK(render_formula(r1c1("=(R1C1-R2C1)-R3C1"), Style::R1C1) == "=R1C1-R2C1-R3C1");
    CHECK(render_formula(r1c1("=-R1C1^2"), Style::R1C1) == "=-R1C1^2");
    auto pct = r1c1("=10%*R1C1");
    CHECK(render_formula(pct, Style::R1C1) == "=10%*R1C1");
    auto* b = pct.as<Binary>();
    REQUIRE(b);
    REQUIRE(b->lhs.as<NumberLit>());
    CHECK(b->lhs.as<NumberLit>()->value == doctest::Approx(0.1));
}

TEST_CASE("functions, names, literals") {
    auto e = r1c1("=sum(Sales, R1C1:R1C5, \"a\"\"b\", TRUE, #N/A)");
    auto* c = e.as<Call>();
    REQUIRE(c);
    CHECK(c->name == "SUM");
    CHECK(c->args.size() == 5);
    CHECK(c->args[0].as<NameRef>());
    CHECK(c->args[1].as<RangeRef>());
    CHECK(c->args[2].as<TextLit>()->value == "a\"b");
    CHECK(c->args[3].as<BoolLit>()->value);
    CHECK(c->args[4].as<ErrorLit>()->code == ErrorCode::NA);
    CHECK(render_formula(e, Style::R1C1) == "=SUM(Sales,R1C1:R1C5,\"a\"\"b\",TRUE,#N/A)");
}

TEST_CASE("sheet-qualified references") {
    auto e = r1c1("='Q1 Plan'!R1C1+Data!R[1]C");
    CHECK(render_formula(e, Style::R1C1) == "='Q1 Plan'!R1C1+Data!R[1]C");
}

TEST_CASE("syntax errors carry a column") {
    CHECK_THROWS_AS(r1c1("=1+"), SyntaxError);
    CHECK_THROWS_AS(r1c1("1+2"), SyntaxError);
    CHECK_THROWS_AS(r1c1("=SUM(1,2"), SyntaxError);
    try {
        r1c1("=1+)");
        FAIL("expected a syntax error");
    } catch (const SyntaxError& e) {
        CHECK(e.column() >= 3);
    }
}

TEST_CASE("translate keeps offsets and produces #REF! off the grid") {
    auto e = r1c1("=R[-1]C+R1C1");
    auto moved = translate(e, {"S", 2, 2}, {"S", 5, 3});
    CHECK(normal_form(moved) == normal_form(e));
    auto off = translate(r1c1("=R[-1]C"), {"S", 2, 1}, {"S", 1, 1});
    CHECK(render_formula(off, Style::R1C1) == "=#REF!");
}

TEST_CASE("number text is the shortest round trip") {
    CHECK(number_text(0.1) == "0.1");
    CHECK(number_text(12000) == "12000");
    CHECK(std::stod(number_text(1e-20)) == 1e-20);
    for (double d : {0.3, 1.0 / 3.0, 2.5e10, 123456.789}) CHECK(std::stod(number_text(d)) == d);
}

TEST_CASE("property: render then parse is the identity") {
    std::mt19937 rng(1234);
    CellAddress origin{"S", 10, 10};
    for (int i = 0; i < 2000; ++i) {
        Expr e = random_expr(rng, 4);
        std::string text = render_formula(e, Style::R1C1);
        Expr back = parse_formula(text, Style::R1C1);
        CHECK_MESSAGE(back == e, text);
        CHECK(render_formula(back, Style::R1C1) == text);
        std::string a1;
        try {
            a1 = render_formula(e, Style::A1, origin);
        } catch (const ReferenceUnrepresentable&) {
            continue;
        }
        CHECK_MESSAGE(parse_formula(a1, Style::A1, origin) == e, a1);
    }
}

TEST_CASE("identifier and reference lexing") {
    CHECK(is_identifier("Growth_Rate"));
    CHECK_FALSE(is_identifier("1abc"));
    CHECK(looks_like_reference("R2C3"));
    CHECK(looks_like_reference("C2"));
    CHECK_FALSE(looks_like_reference("Sales"));
}

#include <doctest.h>

#include "cellaudit/lint.hpp"
#include "support.hpp"

using namespace cellaudit;
using testsupport::at;

namespace {

Workbook fixture(const std::string& name) { return wbt::load_file(testsupport::source_path("data/lint/" + name)); }

std::set<std::string> codes(const std::vector<lint::Finding>& fs) {
    std::set<std::string> out;
    for (const auto& f : fs) out.insert(f.code);
    return out;
}

std::vector<lint::Finding> only(const std::vector<lint::Finding>& fs, const std::string& code) {
    std::vector<lint::Finding> out;
    for (const auto& f : fs) {
        if (f.code == code) out.push_back(f);
    }
    return out;
}

}  // namespace

TEST_CASE("clean fixture has no findings") {
    CHECK(lint::lint(fixture("clean.wbt")).empty());
    CHECK(lint::lint(testsupport::sample()).empty());
}

TEST_CASE("mutation fixtures yield exactly their code") {
    const std::vector<std::pair<std::string, std::string>> cases{
        {"l001_hole.wbt", "L001"},  {"l002_constant.wbt", "L002"}, {"l003_magic.wbt", "L003"},
        {"l004_range.wbt", "L004"}, {"l005_cycle.wbt", "L005"},    {"l007_validation.wbt", "L007"},
    };
    for (const auto& [file, code] : cases) {
        auto fs = lint::lint(fixture(file));
        CHECK_MESSAGE(codes(fs) == std::set<std::string>{code}, file);
    }
}

TEST_CASE("finding locations") {
    auto l001 = lint::lint(fixture("l001_hole.wbt"));
    REQUIRE(l001.size() == 1);
    CHECK(l001[0].where.first == at(2, 6));
    auto l004 = lint::lint(fixture("l004_range.wbt"));
    REQUIRE(l004.size() == 1);
    CHECK(l004[0].where.first == at(12, 7));
    CHECK(l004[0].message.find("R6C7") != std::string::npos);
    auto l005 = lint::lint(fixture("l005_cycle.wbt"));
    REQUIRE(l005.size() == 1);
    CHECK(l005[0].severity == lint::Severity::Error);
    CHECK(lint::lint(fixture("l003_magic.wbt")).size() == 5);
}

TEST_CASE("error values, sheet-qualified references, forward references") {
    auto wb = testsupport::sample();
    testsupport::set_formula(wb, 12, 3, "=R9C3/0");
    auto fs = lint::lint(wb);
    CHECK(codes(fs) == std::set<std::string>{"L006"});
    CHECK(fs[0].severity == lint::Severity::Error);

    wb = testsupport::sample();
    testsupport::set_formula(wb, 12, 3, "=Forecast!R9C3");
    CHECK(codes(lint::lint(wb)) == std::set<std::string>{"L008"});

    wb = testsupport::sample();
    testsupport::set_formula(wb, 12, 3, "=R13C3");
    wb.set_cell(at(13, 3), Cell::number(5));
    CHECK(codes(lint::lint(wb)) == std::set<std::string>{"L009"});
}

TEST_CASE("column carry carve-out") {
    auto wb = testsupport::sample();
    testsupport::set_formula(wb, 12, 4, "=R13C3");
    wb.set_cell(at(13, 3), Cell::number(5));
    CHECK(codes(lint::lint(wb)) == std::set<std::string>{"L009"});
    lint::Config cfg;
    cfg.allow_column_carry = true;
    CHECK(lint::lint(wb, cfg).empty());
}

TEST_CASE("open-ended validation is flagged") {
    auto wb = testsupport::sample();
    wb.validations[0].op = ValidationOperator::Greater;
    wb.validations[0].formula2.reset();
    auto fs = lint::lint(wb);
    REQUIRE(fs.size() == 1);
    CHECK(fs[0].code == "L007");
}

TEST_CASE("config disables detectors and extends the allowlist") {
    auto wb = fixture("l003_magic.wbt");
    lint::Config cfg;
    cfg.disabled.insert("L003");
    CHECK(lint::lint(wb, cfg).empty());
    lint::Config allow;
    allow.allowed_numbers.push_back(0.4);
    CHECK(lint::lint(wb, allow).empty());
}

TEST_CASE("findings are sorted and formatted") {
    auto wb = fixture("l003_magic.wbt");
    testsupport::set_formula(wb, 12, 3, "=R9C3/0");
    auto fs = lint::lint(wb);
    REQUIRE(fs.size() == 6);
    CHECK(fs[0].code == "L003");
    CHECK(fs[5].code == "L006");
    CHECK(only(fs, "L003")[0].where.first == at(10, 3));
    CHECK(lint::format_finding(fs[0]) == "L003\tForecast!R10C3\twarn\tnumeric literal 0.4 in formula");
}

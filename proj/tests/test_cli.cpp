#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cellaudit/cli.hpp"
#include "support.hpp"

using namespace cellaudit;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

const std::string kStamp = "# generated by - from - at -\n";

std::string sample() { return testsupport::sample_path(); }

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("cellaudit_cli_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("stamp line") {
    CHECK(cli::stamp_line("amy", "a.wbt", "2026-01-01T00:00:00Z") ==
          "# generated by amy from a.wbt at 2026-01-01T00:00:00Z");
    auto r = run({"names", sample()});
    CHECK(r.code == 0);
    auto last = r.out.substr(r.out.rfind("# generated by"));
    CHECK(last.find(" from " + sample() + " at ") != std::string::npos);
}

TEST_CASE("report commands reproduce the golden tables") {
    for (auto [cmd, file] : std::vector<std::pair<std::string, std::string>>{
             {"eval", "grid.tsv"}, {"names", "names.tsv"}, {"validations", "validations.tsv"}, {"listing", "listing.tsv"}}) {
        auto r = run({cmd, sample(), "--no-stamp"});
        CHECK(r.code == 0);
        CHECK_MESSAGE(r.out == testsupport::golden(file) + kStamp, cmd);
    }
}

TEST_CASE("eval overrides") {
    auto r = run({"eval", sample(), "--set", "R2C3=0", "--set", "Forecast!R3C3=4", "--no-stamp"});
    CHECK(r.code == 0);
    CHECK(r.out.find("2\t15%\tUnit Sales\t0\t0\t0\t0\t0\n") != std::string::npos);
    CHECK(run({"eval", sample(), "--set", "R2C3"}).code == cli::kUsage);
    CHECK(run({"eval", sample(), "--set", "nonsense=1"}).code == cli::kUsage);
}

TEST_CASE("graph output") {
    auto dot = run({"graph", sample(), "--dot", "--no-stamp"});
    CHECK(dot.code == 0);
    CHECK(dot.out.rfind("digraph", 0) == 0);
    auto rows = run({"graph", sample(), "--dot", "--rows", "--no-stamp"});
    CHECK(rows.out.find("Pretax Earnings") != std::string::npos);
    auto tsv = run({"graph", sample(), "--no-stamp"});
    CHECK(tsv.out.rfind("precedent\tdependent\tprecision\n", 0) == 0);
    CHECK(std::count(tsv.out.begin(), tsv.out.end(), '\n') == 98);  // header, 96 edges, stamp
}

TEST_CASE("cascades") {
    auto r = run({"cascades", sample(), "--error-rate", "0.05", "--no-stamp"});
    CHECK(r.code == 0);
    CHECK(r.out.rfind("length\tpaths\trisk\n", 0) == 0);
    auto pos = r.out.find("\n6\t");
    REQUIRE(pos != std::string::npos);
    auto line = r.out.substr(pos + 1, r.out.find('\n', pos + 1) - pos - 1);
    CHECK(line.substr(line.rfind('\t') + 1) == "0.2649");
    CHECK(r.out.find("\ntotal\t") != std::string::npos);
    auto rows = run({"cascades", sample(), "--rows", "--paths", "--no-stamp"});
    CHECK(rows.out.find("path\tUnit Sales\tSales\tPretax Earnings\tIncome Tax\tNet Income\n") != std::string::npos);
    CHECK(run({"cascades", sample(), "--error-rate", "2"}).code == cli::kUsage);
}

TEST_CASE("map") {
    auto text = run({"map", sample(), "--no-stamp"});
    CHECK(text.code == 0);
    CHECK(text.out.find("sheet Forecast") != std::string::npos);
    auto html = run({"map", sample(), "--html", "--no-stamp"});
    CHECK(html.out.find("<table") != std::string::npos);
    CHECK(html.out.ends_with("\n<!-- # generated by - from - at - -->\n"));
    CHECK(run({"map", sample(), "--html", "--svg"}).code == cli::kUsage);
}

TEST_CASE("lint exit codes") {
    CHECK(run({"lint", sample()}).code == cli::kOk);
    auto magic = testsupport::source_path("data/lint/l003_magic.wbt");
    auto r = run({"lint", magic, "--no-stamp"});
    CHECK(r.code == cli::kFindings);
    CHECK(r.out.rfind("L003\tForecast!R10C3\twarn\t", 0) == 0);
    CHECK(run({"lint", magic, "--disable", "L003"}).code == cli::kOk);
    CHECK(run({"lint", magic, "--allow-number", "0.4"}).code == cli::kOk);
    TempDir t;
    auto cfg = (t.path / "lint.json").string();
    std::ofstream(cfg) << R"({"disabled": ["L003"]})";
    CHECK(run({"lint", magic, "--config", cfg}).code == cli::kOk);
    std::ofstream(cfg) << "{not json";
    CHECK(run({"lint", magic, "--config", cfg}).code == cli::kUsage);
}

TEST_CASE("check") {
    TempDir t;
    auto cfg = (t.path / "check.json").string();
    std::ofstream(cfg) << R"({
      "zero_test": {"outputs": "R6C3:R11C7"},
      "sensitivity": [{"input": "R2C3", "delta": 1, "watch": ["R9C3", "R10C3", "R11C3"],
                       "expect": {"R9C3": 1, "R10C3": 0.4, "R11C3": 0.6}}]
    })";
    auto r = run({"check", sample(), "--config", cfg, "--no-stamp"});
    CHECK(r.code == cli::kOk);
    CHECK(r.out.find("zero-test\tR6C3:R11C7\tPASS\n") != std::string::npos);
    CHECK(r.out.find("sensitivity\tR2C3\t1\tR9C3\t1\tPASS\n") != std::string::npos);

    std::ofstream(cfg) << R"({"sensitivity": [{"input": "R2C3", "watch": ["R9C3"], "expect": {"R9C3": 2}}]})";
    CHECK(run({"check", sample(), "--config", cfg}).code == cli::kFindings);
    std::ofstream(cfg) << R"({"sensitivity": [{"input": "R2C4", "watch": ["R9C3"]}]})";
    CHECK(run({"check", sample(), "--config", cfg}).code == cli::kUsage);
    CHECK(run({"check", sample()}).code == cli::kUsage);
}

TEST_CASE("audit session through the command line") {
    TempDir t;
    auto wb = (t.path / "s.wbt").string();
    fs::copy_file(sample(), wb);
    auto init = run({"audit", "init", wb});
    CHECK(init.code == 0);
    CHECK(fs::exists(wb + ".audit"));
    CHECK(run({"audit", "init", wb}).code == cli::kUsage);  // refuses to overwrite
    CHECK(run({"audit", "init", wb, "--force"}).code == 0);

    auto m = run({"audit", "mark", wb, "R2C1", "R2C3", "--auditor", "amy", "--no-stamp"});
    CHECK(m.code == 0);
    CHECK(m.err.empty());
    CHECK(m.out.rfind("green\t2\n", 0) == 0);
    auto red = run({"audit", "mark", wb, "R11C7", "--auditor", "amy"});
    CHECK(red.code == 0);
    CHECK(red.err.find("warning:") != std::string::npos);
    CHECK(run({"audit", "unmark", wb, "R11C7", "--auditor", "amy"}).code == 0);
    CHECK(run({"audit", "mark", wb, "R2C3", "--auditor", "two words"}).code == cli::kUsage);

    auto st = run({"audit", "status", wb, "--cells", "--focus", "R2C5", "--no-stamp"});
    CHECK(st.code == 0);
    CHECK(st.out.find("Forecast!R2C1\tgreen\tamy\t") == std::string::npos);  // single sheet: unqualified
    CHECK(st.out.find("R2C1\tgreen\tamy\t") != std::string::npos);
    CHECK(st.out.find("R2C4\tdark-yellow\n") != std::string::npos);
    CHECK(st.out.find("R3C4\tred\n") != std::string::npos);

    std::string log = testsupport::read_file(wb + ".audit");
    CHECK(std::count(log.begin(), log.end(), '\n') == 5);

    std::ofstream(wb, std::ios::app) << "cell R20C1 num 1\n";
    auto stale = run({"audit", "status", wb});
    CHECK(stale.code == cli::kUsage);
    CHECK(stale.err.find("stale session") != std::string::npos);

    auto scoped = (t.path / "scoped.audit").string();
    CHECK(run({"audit", "init", sample(), "--log", scoped, "--scope", "R2C3:R2C7"}).code == 0);
    auto ss = run({"audit", "status", sample(), "--log", scoped, "--no-stamp"});
    CHECK(ss.out.find("total\t5\n") != std::string::npos);
    CHECK(run({"audit", "mark", sample(), "R3C3", "--log", scoped}).code == cli::kUsage);
}

TEST_CASE("crawl") {
    auto r = run({"crawl", testsupport::source_path("data/inventory"), "--no-stamp"});
    CHECK(r.code == 0);
    CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 7);
    auto flat = run({"crawl", testsupport::source_path("data/inventory"), "--no-recurse", "--no-stamp"});
    CHECK(std::count(flat.out.begin(), flat.out.end(), '\n') == 3);
    CHECK(run({"crawl", "/definitely/missing"}).code == cli::kUsage);
}

TEST_CASE("usage errors and help") {
    CHECK(run({}).code == cli::kUsage);
    CHECK(run({"frobnicate"}).code == cli::kUsage);
    CHECK(run({"eval"}).code == cli::kUsage);
    CHECK(run({"eval", "/no/such/file.wbt"}).code == cli::kUsage);
    auto help = run({"--help"});
    CHECK(help.code == 0);
    CHECK(help.out.find("cascades") != std::string::npos);
    auto version = run({"--version"});
    CHECK(version.code == 0);
    CHECK(version.out == std::string(CELLAUDIT_VERSION) + "\n");

    TempDir t;
    auto bad = (t.path / "bad.wbt").string();
    std::ofstream(bad) << "%wbt 1\nsheet S\ncell R1C1 fml \"=1+\"\n";
    auto r = run({"eval", bad});
    CHECK(r.code == cli::kUsage);
    CHECK(r.err.find("line 3") != std::string::npos);
}

#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>

#include "cellaudit/inventory.hpp"
#include "support.hpp"

using namespace cellaudit::inventory;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("cellaudit_inv_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::permissions(path / "locked", fs::perms::owner_all, ec);
        fs::remove_all(path, ec);
    }
};

void write(const fs::path& p, const std::string& text) {
    fs::create_directories(p.parent_path());
    std::ofstream(p, std::ios::binary) << text;
}

// Restores the working directory when the test ends.
struct Chdir {
    fs::path saved = fs::current_path();
    explicit Chdir(const fs::path& p) { fs::current_path(p); }
    ~Chdir() { fs::current_path(saved); }
};

}  // namespace

TEST_CASE("fixture tree matches the golden log") {
    Chdir cd(testsupport::source_path("data"));
    auto rows = crawl("inventory");
    CHECK(rows.size() == 5);
    CHECK(to_tsv(rows) == testsupport::golden("inventory.tsv"));
    CHECK(to_tsv(crawl("inventory")) == to_tsv(rows));
}

TEST_CASE("walk order, properties and sizes") {
    TempDir t;
    const std::string a = "%wbt 1\nprop author \"Ann\"\nprop purpose \"Top\"\n";
    write(t.path / "b.wbt", a);
    write(t.path / "a.wbt", "%wbt 1\nprop comments \"tab\there\"\nprop checked-by \"Bo\"\n");
    write(t.path / "sub" / "c.wbt", "garbage that is not WBT\nprop author \"Cy\"\n");
    write(t.path / "sub" / "deeper" / "d.wbt", "");
    write(t.path / "sub" / "skip.txt", "x");
    auto rows = crawl(t.path);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].file == "a.wbt");
    CHECK(rows[0].checked_by == "Bo");
    CHECK(rows[1].file == "b.wbt");
    CHECK(rows[1].author == "Ann");
    CHECK(rows[1].purpose == "Top");
    CHECK(rows[1].size == a.size());
    CHECK(rows[1].directory == t.path.generic_string());
    CHECK(rows[2].file == "c.wbt");
    CHECK(rows[2].author == "Cy");
    CHECK(rows[2].directory == (t.path / "sub").generic_string());
    CHECK(rows[3].file == "d.wbt");
    CHECK(rows[3].size == 0);

    auto tsv = to_tsv(rows);
    CHECK(tsv.rfind("Directory Name\tFile Name\tFile Size\tAuthor\tComments\tChecked By\tPurpose\n", 0) == 0);
    CHECK(tsv.find("tab here") != std::string::npos);  // tabs inside fields are flattened

    CHECK(crawl(t.path, "*.wbt", false).size() == 2);
    CHECK(crawl(t.path, "*.txt").size() == 1);
    CHECK(crawl(t.path, "c.*").size() == 1);
}

TEST_CASE("errors") {
    TempDir t;
    CHECK_THROWS_AS(crawl(t.path / "missing"), std::runtime_error);
    write(t.path / "file.wbt", "");
    CHECK_THROWS_AS(crawl(t.path / "file.wbt"), std::runtime_error);
    if (::geteuid() != 0) {
        fs::create_directories(t.path / "locked");
        fs::permissions(t.path / "locked", fs::perms::none);
        auto rows = crawl(t.path);
        REQUIRE(rows.size() == 2);
        CHECK(rows[1].comments.rfind("error: ", 0) == 0);
    }
}

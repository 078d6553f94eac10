#include "cellaudit/inventory.hpp"

#include <fnmatch.h>

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "cellaudit/wbt.hpp"

namespace cellaudit::inventory {

namespace fs = std::filesystem;

namespace {

void visit(const fs::path& dir, const std::string& pattern, bool recurse, std::vector<LogRow>& rows) {
    std::error_code ec;
    std::vector<fs::directory_entry> entries;
    for (fs::directory_iterator it(dir, ec), end; !ec && it != end; it.increment(ec)) entries.push_back(*it);
    if (ec) {
        rows.push_back({dir.generic_string(), "", 0, "", "error: " + ec.message(), "", ""});
        return;
    }
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return a.path().filename() < b.path().filename(); });

    std::vector<fs::path> subdirs;
    for (const auto& e : entries) {
        std::error_code type_ec;
        if (e.is_directory(type_ec)) {
            subdirs.push_back(e.path());
            continue;
        }
        if (!e.is_regular_file(type_ec)) continue;
        std::string name = e.path().filename().string();
        if (fnmatch(pattern.c_str(), name.c_str(), 0) != 0) continue;

        LogRow row{dir.generic_string(), name, 0, "", "", "", ""};
        std::error_code size_ec;
        row.size = fs::file_size(e.path(), size_ec);
        if (size_ec) row.size = 0;
        std::ifstream in(e.path(), std::ios::binary);
        if (in) {
            std::stringstream ss;
            ss << in.rdbuf();
            auto props = wbt::read_properties(ss.str());
            row.author = props["author"];
            row.comments = props["comments"];
            row.checked_by = props["checked-by"];
            row.purpose = props["purpose"];
        }
        rows.push_back(std::move(row));
    }
    if (recurse) {
        for (const auto& d : subdirs) visit(d, pattern, recurse, rows);
    }
}

std::string field(std::string s) {
    std::replace_if(s.begin(), s.end(), [](char c) { return c == '\t' || c == '\n' || c == '\r'; }, ' ');
    return s;
}

}  // namespace

std::vector<LogRow> crawl(const fs::path& root, std::string_view pattern, bool recurse) {
    std::error_code ec;
    if (!fs::is_directory(root, ec)) throw std::runtime_error("not a directory: " + root.string());
    std::vector<LogRow> rows;
    visit(root, std::string(pattern), recurse, rows);
    return rows;
}

std::string to_tsv(const std::vector<LogRow>& rows) {
    std::string out = "Directory Name\tFile Name\tFile Size\tAuthor\tComments\tChecked By\tPurpose\n";
    for (const auto& r : rows) {
        out += field(r.directory) + "\t" + field(r.file) + "\t" + std::to_string(r.size) + "\t" + field(r.author) +
               "\t" + field(r.comments) + "\t" + field(r.checked_by) + "\t" + field(r.purpose) + "\n";
    }
    return out;
}

}  // namespace cellaudit::inventory

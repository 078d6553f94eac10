#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace cellaudit::inventory {

struct LogRow {
    std::string directory;
    std::string file;
    std::uintmax_t size = 0;
    std::string author;
    std::string comments;
    std::string checked_by;
    std::string purpose;
    friend bool operator==(const LogRow&, const LogRow&) = default;
};

// Depth-first walk in lexicographic order. Unreadable files keep blank
// properties; an unreadable directory yields a row whose comments carry
// the error. Throws std::runtime_error when `root` is not a directory.
std::vector<LogRow> crawl(const std::filesystem::path& root, std::string_view pattern = "*.wbt",
                          bool recurse = true);

// Header "Directory Name  File Name  File Size  Author  Comments  Checked By  Purpose".
std::string to_tsv(const std::vector<LogRow>& rows);

}  // namespace cellaudit::inventory

#pragma once

#include <set>
#include <string>
#include <vector>

#include "cellaudit/workbook.hpp"

namespace cellaudit::lint {

enum class Severity { Warn, Error };
std::string_view severity_name(Severity s);

struct Finding {
    std::string code;  // L001..L009
    CellRange where;
    Severity severity = Severity::Warn;
    std::string message;
};

struct Config {
    std::set<std::string> disabled;             // detector codes to skip
    std::vector<double> allowed_numbers{0, 1};  // L003 allowlist
    bool allow_column_carry = false;            // L009 carve-out
};

// Sorted by code, then sheet order and row-major address.
std::vector<Finding> lint(const Workbook& wb, const Config& config = {});

// CODE<TAB>address<TAB>severity<TAB>message
std::string format_finding(const Finding& f);

}  // namespace cellaudit::lint

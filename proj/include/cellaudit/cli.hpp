#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cellaudit::cli {

enum ExitCode { kOk = 0, kFindings = 1, kUsage = 2 };

// Runs one command line (without the program name). Reports go to `out`,
// diagnostics and usage text to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Auditor / report user: CELLAUDIT_USER, then USER, then "unknown".
std::string current_user();

// "# generated by <user> from <file> at <timestamp>"
std::string stamp_line(const std::string& user, const std::string& file, const std::string& timestamp);

}  // namespace cellaudit::cli

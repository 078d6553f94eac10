#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

#include "cellaudit/workbook.hpp"

// WBT: the line-oriented plain-text workbook format.
//
//   %wbt 1
//   prop <key> "<value>"
//   sheet <Name>
//   cell <RnCm> num <literal> [fmt="<code>"] [input]
//   cell <RnCm> text "<value>" | cell <RnCm> bool true|false
//   cell <RnCm> fml "=<R1C1 formula>" [fmt="<code>"]
//   name <Identifier> <Sheet>!<ref>
//   valid [<Sheet>!]<addr-or-range> <value-type> <operator> <formula1> [<formula2>]
//
// '#' starts a comment line. Quoted strings escape '"' as \" and '\' as \\.
namespace cellaudit::wbt {

class ParseError : public std::runtime_error {
public:
    ParseError(int line, std::string token, const std::string& message);
    int line() const { return line_; }
    const std::string& token() const { return token_; }
    const std::string& detail() const { return detail_; }

private:
    int line_;
    std::string token_;
    std::string detail_;
};

Workbook parse_workbook(std::string_view text);
std::string serialize_workbook(const Workbook& wb);

// Reads only `prop` lines; never throws on malformed content elsewhere.
std::map<std::string, std::string> read_properties(std::string_view text);

// FNV-1a 64 of the canonical serialization, as 16 hex digits.
std::string fingerprint(const Workbook& wb);

Workbook load_file(const std::string& path);

}  // namespace cellaudit::wbt

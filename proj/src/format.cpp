#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <optional>
#include <utility>

#include "cellaudit/value.hpp"

namespace cellaudit {

namespace {

void increment(std::string& digits) {
    for (std::size_t i = digits.size(); i-- > 0;) {
        if (digits[i] == '9') {
            digits[i] = '0';
        } else {
            ++digits[i];
            return;
        }
    }
    digits.insert(digits.begin(), '1');
}

// Integer digits of round(|x| * 10^places) where |x| is taken from its
// 15-significant-digit decimal rendering.
std::string scaled_digits(double ax, int places) {
    if (ax == 0) return "0";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.14e", ax);
    std::string d;
    d += buf[0];
    d.append(buf + 2, 14);
    int exponent = std::atoi(std::strchr(buf, 'e') + 1);
    int keep = exponent + 1 + places;
    std::string kept;
    if (keep >= 15) {
        kept = d + std::string(static_cast<std::size_t>(keep - 15), '0');
    } else if (keep < 0) {
        return "0";
    } else {
        kept = d.substr(0, static_cast<std::size_t>(keep));
        if (d[static_cast<std::size_t>(keep)] >= '5') increment(kept);
    }
    auto nz = kept.find_first_not_of('0');
    return nz == std::string::npos ? "0" : kept.substr(nz);
}

// Splits the scaled integer digits into integer and fraction parts.
std::pair<std::string, std::string> split_places(std::string digits, int places) {
    if (places <= 0) {
        if (digits != "0") digits += std::string(static_cast<std::size_t>(-places), '0');
        return {digits, ""};
    }
    auto p = static_cast<std::size_t>(places);
    if (digits.size() <= p) digits.insert(0, p + 1 - digits.size(), '0');
    return {digits.substr(0, digits.size() - p), digits.substr(digits.size() - p)};
}

std::string group_thousands(const std::string& integer) {
    std::string out;
    int n = static_cast<int>(integer.size());
    for (int i = 0; i < n; ++i) {
        out += integer[static_cast<std::size_t>(i)];
        int left = n - 1 - i;
        if (left > 0 && left % 3 == 0) out += ',';
    }
    return out;
}

struct NumberFormat {
    std::string prefix;
    std::string suffix;
    bool thousands = false;
    bool percent = false;
    bool force_integer_zero = true;  // '0' in the integer part (vs only '#')
    int decimals = 0;
};

std::optional<std::string> read_literal(std::string_view code, std::size_t& i) {
    if (code[i] == '"') {
        auto close = code.find('"', i + 1);
        if (close == std::string_view::npos) return std::nullopt;
        std::string lit(code.substr(i + 1, close - i - 1));
        i = close + 1;
        return lit;
    }
    if (code[i] == '\\' && i + 1 < code.size()) {
        i += 2;
        return std::string(1, code[i - 1]);
    }
    return std::nullopt;
}

std::optional<NumberFormat> parse_code(std::string_view code) {
    NumberFormat f;
    std::size_t i = 0;
    while (i < code.size() && (code[i] == '"' || code[i] == '\\')) {
        auto lit = read_literal(code, i);
        if (!lit) return std::nullopt;
        f.prefix += *lit;
    }
    bool any_digit = false, zero_in_int = false, after_point = false;
    while (i < code.size() && (code[i] == '#' || code[i] == '0' || code[i] == ',' || code[i] == '.')) {
        char c = code[i++];
        if (c == '.') {
            if (after_point) return std::nullopt;
            after_point = true;
        } else if (c == ',') {
            if (after_point) return std::nullopt;
            f.thousands = true;
        } else {
            any_digit = true;
            if (after_point) {
                if (c != '0') return std::nullopt;
                ++f.decimals;
            } else if (c == '0') {
                zero_in_int = true;
            }
        }
    }
    if (!any_digit) return std::nullopt;
    f.force_integer_zero = zero_in_int;
    if (i < code.size() && code[i] == '%') {
        f.percent = true;
        ++i;
    }
    while (i < code.size() && (code[i] == '"' || code[i] == '\\')) {
        auto lit = read_literal(code, i);
        if (!lit) return std::nullopt;
        f.suffix += *lit;
    }
    if (i != code.size()) return std::nullopt;
    return f;
}

std::string apply(const NumberFormat& f, double x) {
    int scale = f.decimals + (f.percent ? 2 : 0);
    std::string digits = scaled_digits(std::fabs(x), scale);
    auto [integer, fraction] = split_places(digits, f.decimals);
    bool zero = digits == "0";
    if (integer == "0" && !f.force_integer_zero) integer.clear();
    std::string out;
    if (x < 0 && !zero) out += '-';
    out += f.thousands ? group_thousands(integer) : integer;
    if (f.decimals > 0) out += "." + fraction;
    if (f.percent) out += '%';
    return f.prefix + out + f.suffix;
}

}  // namespace

std::string round_to_places(double x, int places) {
    std::string digits = scaled_digits(std::fabs(x), places);
    auto [integer, fraction] = split_places(digits, places);
    std::string out = (x < 0 && digits != "0") ? "-" : "";
    out += integer;
    if (!fraction.empty()) out += "." + fraction;
    return out;
}

std::string general_number(double x) {
    if (x == 0) return "0";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.15G", x);
    return buf;
}

std::string to_display(const Value& v) {
    if (auto* d = std::get_if<double>(&v)) return general_number(*d);
    if (auto* s = std::get_if<std::string>(&v)) return *s;
    if (auto* b = std::get_if<bool>(&v)) return *b ? "TRUE" : "FALSE";
    if (auto* e = std::get_if<ErrorValue>(&v)) return std::string(error_text(e->code));
    return "";
}

std::string_view type_name(const Value& v) {
    switch (v.index()) {
        case 0: return "blank";
        case 1: return "number";
        case 2: return "text";
        case 3: return "boolean";
        default: return "error";
    }
}

Formatted format_value(const Value& v, std::string_view code) {
    auto* d = std::get_if<double>(&v);
    if (code.empty() || code == "General") return {to_display(v), true};
    auto f = parse_code(code);
    if (!f) return {to_display(v), false};
    if (!d) return {to_display(v), true};
    return {apply(*f, *d), true};
}

}  // namespace cellaudit

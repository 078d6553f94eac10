#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "cellaudit/address.hpp"

namespace cellaudit {

struct Blank {
    friend bool operator==(const Blank&, const Blank&) = default;
};

struct ErrorValue {
    ErrorCode code = ErrorCode::Value;
    std::string message;  // set by ASSERT, otherwise usually empty
    friend bool operator==(const ErrorValue&, const ErrorValue&) = default;
};

// Evaluation result. Numbers are always finite.
using Value = std::variant<Blank, double, std::string, bool, ErrorValue>;

inline bool is_error(const Value& v) { return std::holds_alternative<ErrorValue>(v); }
inline bool is_blank(const Value& v) { return std::holds_alternative<Blank>(v); }
inline const ErrorValue* as_error(const Value& v) { return std::get_if<ErrorValue>(&v); }
inline std::optional<double> as_number(const Value& v) {
    if (auto* d = std::get_if<double>(&v)) return *d;
    return std::nullopt;
}

inline Value make_error(ErrorCode code, std::string message = {}) {
    return ErrorValue{code, std::move(message)};
}

// Debug/API rendering: numbers in general format, errors as their code.
std::string to_display(const Value& v);
// "number", "text", "boolean", "blank", "error".
std::string_view type_name(const Value& v);

// Display formatting with decimal-string rounding: the number is first
// rendered to 15 significant digits, then rounded half away from zero.
struct Formatted {
    std::string text;
    bool supported = true;  // false: unknown code, text is general format
};

Formatted format_value(const Value& v, std::string_view code);

// Up to 15 significant digits, trailing zeros dropped.
std::string general_number(double x);

// `x` rounded to `places` decimals (negative = tens, hundreds...) using the
// 15-significant-digit rule; plain digits with optional '-' and '.'.
std::string round_to_places(double x, int places);

}  // namespace cellaudit

#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace dforge::engine {

// SQL cell value. monostate is NULL; dates are ISO-8601 text.
using Value = std::variant<std::monostate, std::int64_t, double, std::string>;

inline bool is_null(const Value& v) { return std::holds_alternative<std::monostate>(v); }
inline bool is_int(const Value& v) { return std::holds_alternative<std::int64_t>(v); }
inline bool is_float(const Value& v) { return std::holds_alternative<double>(v); }
inline bool is_text(const Value& v) { return std::holds_alternative<std::string>(v); }
inline bool is_numeric(const Value& v) { return is_int(v) || is_float(v); }

double as_double(const Value& v);

// Equality used for DISTINCT/grouping/IN: nulls compare equal to each other,
// ints and floats compare numerically, text compares exactly.
bool value_equal(const Value& a, const Value& b);

// Total order used for sorting: null < numeric < text.
// Numeric values compare by magnitude, text lexicographically (byte order,
// which is what makes ISO-8601 date text sort correctly).
int value_order(const Value& a, const Value& b);

std::string value_to_display(const Value& v);

struct ResultTable {
    std::vector<std::string> columns;
    std::vector<std::vector<Value>> rows;

    bool operator==(const ResultTable&) const = default;
};

enum class ColumnType { integer, floating, text, date };

const char* column_type_tag(ColumnType t);
ColumnType parse_column_type(const std::string& tag);

}  // namespace dforge::engine

#include "dforge/engine/value.hpp"

#include <cmath>
#include <sstream>

#include "dforge/core.hpp"

namespace dforge::engine {

double as_double(const Value& v) {
    if (is_int(v)) return static_cast<double>(std::get<std::int64_t>(v));
    if (is_float(v)) return std::get<double>(v);
    return 0.0;
}

bool value_equal(const Value& a, const Value& b) {
    if (is_null(a) || is_null(b)) return is_null(a) && is_null(b);
    if (is_numeric(a) && is_numeric(b)) {
        if (is_int(a) && is_int(b)) return std::get<std::int64_t>(a) == std::get<std::int64_t>(b);
        return as_double(a) == as_double(b);
    }
    if (is_text(a) && is_text(b)) return std::get<std::string>(a) == std::get<std::string>(b);
    return false;
}

int value_order(const Value& a, const Value& b) {
    auto rank = [](const Value& v) { return is_null(v) ? 0 : (is_numeric(v) ? 1 : 2); };
    int ra = rank(a), rb = rank(b);
    if (ra != rb) return ra < rb ? -1 : 1;
    if (ra == 0) return 0;
    if (ra == 1) {
        if (is_int(a) && is_int(b)) {
            auto x = std::get<std::int64_t>(a), y = std::get<std::int64_t>(b);
            return x < y ? -1 : (x > y ? 1 : 0);
        }
        double x = as_double(a), y = as_double(b);
        return x < y ? -1 : (x > y ? 1 : 0);
    }
    const auto& x = std::get<std::string>(a);
    const auto& y = std::get<std::string>(b);
    return x < y ? -1 : (x > y ? 1 : 0);
}

std::string value_to_display(const Value& v) {
    if (is_null(v)) return "NULL";
    if (is_int(v)) return std::to_string(std::get<std::int64_t>(v));
    if (is_float(v)) {
        std::ostringstream os;
        os.precision(15);
        os << std::get<double>(v);
        return os.str();
    }
    return std::get<std::string>(v);
}

const char* column_type_tag(ColumnType t) {
    switch (t) {
        case ColumnType::integer: return "integer";
        case ColumnType::floating: return "float";
        case ColumnType::text: return "text";
        case ColumnType::date: return "date";
    }
    return "text";
}

ColumnType parse_column_type(const std::string& tag) {
    if (tag == "integer") return ColumnType::integer;
    if (tag == "float") return ColumnType::floating;
    if (tag == "text") return ColumnType::text;
    if (tag == "date") return ColumnType::date;
    throw FormatError("unknown column type '" + tag + "' (valid: integer, float, text, date)");
}

}  // namespace dforge::engine

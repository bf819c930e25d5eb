#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace dforge::engine::ast {

enum class BinOp { eq, ne, lt, le, gt, ge, add, sub, mul, div, logical_and, logical_or, like, ilike };
enum class AggFunc { count, sum, avg, min, max };
enum class WindowFunc { rank, row_number };
enum class CastTarget { to_integer, to_float };

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;
struct SelectStmt;
using SelectPtr = std::unique_ptr<SelectStmt>;

struct OrderItem {
    ExprPtr expr;
    bool desc = false;
};

struct Expr {
    enum class Kind {
        null_literal,
        int_literal,
        float_literal,
        string_literal,
        column,
        star,             // bare * inside count(*)
        unary_not,
        unary_neg,
        binary,
        cast,             // CAST(x AS t) or x::t
        aggregate,
        window,
        in_list,
        in_subquery,
        between,
        is_null,
        scalar_subquery,
    };

    Kind kind;

    std::int64_t int_value = 0;
    double float_value = 0.0;
    std::string string_value;

    std::string table;   // qualifier, may be empty
    std::string column;

    BinOp op = BinOp::eq;
    ExprPtr lhs, rhs;

    CastTarget cast_target = CastTarget::to_integer;
    bool cast_postfix = false;  // printed as :: rather than CAST()

    AggFunc agg = AggFunc::count;
    bool agg_star = false;
    bool agg_distinct = false;
    ExprPtr agg_arg;
    ExprPtr agg_filter;  // FILTER (WHERE ...), parsed, not executable

    WindowFunc window_func = WindowFunc::row_number;
    std::vector<ExprPtr> partition_by;
    std::vector<OrderItem> window_order;

    std::vector<ExprPtr> list;  // IN (v1, v2, ...)
    SelectPtr subquery;
    bool negated = false;  // NOT IN / NOT BETWEEN / IS NOT NULL / NOT LIKE

    ExprPtr between_low, between_high;

    explicit Expr(Kind k) : kind(k) {}
    ExprPtr clone() const;
};

ExprPtr make_expr(Expr::Kind k);
ExprPtr int_literal(std::int64_t v);
ExprPtr float_literal(double v);
ExprPtr string_literal(std::string v);
ExprPtr column_ref(std::string table, std::string column);
ExprPtr binary(BinOp op, ExprPtr lhs, ExprPtr rhs);

struct TableRef {
    std::string table;   // empty when subquery
    std::string alias;   // may be empty for plain tables
    SelectPtr subquery;

    TableRef clone() const;
    const std::string& binding_name() const { return alias.empty() ? table : alias; }
};

struct Join {
    enum class Type { inner, left };
    Type type = Type::inner;
    TableRef ref;
    ExprPtr on;  // mandatory
};

struct SelectItem {
    ExprPtr expr;
    std::string alias;
};

struct SelectStmt {
    bool distinct = false;
    bool select_star = false;  // SELECT * (sole item)
    std::vector<SelectItem> items;
    bool has_from = false;
    TableRef from;
    std::vector<Join> joins;
    ExprPtr where;
    std::vector<ExprPtr> group_by;
    ExprPtr having;
    std::vector<OrderItem> order_by;
    std::optional<std::int64_t> limit;
    std::optional<std::int64_t> offset;
    bool fetch_first_style = false;  // oracle FETCH FIRST n ROWS ONLY

    SelectPtr clone() const;
};

bool expr_equal(const Expr& a, const Expr& b);
bool select_equal(const SelectStmt& a, const SelectStmt& b);

// True when the expression subtree contains an aggregate call outside any
// window specification (the condition that switches execution to grouped mode).
bool contains_aggregate(const Expr& e);
bool contains_window(const Expr& e);

}  // namespace dforge::engine::ast

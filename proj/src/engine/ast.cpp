#include "dforge/engine/ast.hpp"

namespace dforge::engine::ast {

ExprPtr make_expr(Expr::Kind k) { return std::make_unique<Expr>(k); }

ExprPtr int_literal(std::int64_t v) {
    auto e = make_expr(Expr::Kind::int_literal);
    e->int_value = v;
    return e;
}

ExprPtr float_literal(double v) {
    auto e = make_expr(Expr::Kind::float_literal);
    e->float_value = v;
    return e;
}

ExprPtr string_literal(std::string v) {
    auto e = make_expr(Expr::Kind::string_literal);
    e->string_value = std::move(v);
    return e;
}

ExprPtr column_ref(std::string table, std::string column) {
    auto e = make_expr(Expr::Kind::column);
    e->table = std::move(table);
    e->column = std::move(column);
    return e;
}

ExprPtr binary(BinOp op, ExprPtr lhs, ExprPtr rhs) {
    auto e = make_expr(Expr::Kind::binary);
    e->op = op;
    e->lhs = std::move(lhs);
    e->rhs = std::move(rhs);
    return e;
}

namespace {
ExprPtr clone_opt(const ExprPtr& p) { return p ? p->clone() : nullptr; }
}

ExprPtr Expr::clone() const {
    auto e = make_expr(kind);
    e->int_value = int_value;
    e->float_value = float_value;
    e->string_value = string_value;
    e->table = table;
    e->column = column;
    e->op = op;
    e->lhs = clone_opt(lhs);
    e->rhs = clone_opt(rhs);
    e->cast_target = cast_target;
    e->cast_postfix = cast_postfix;
    e->agg = agg;
    e->agg_star = agg_star;
    e->agg_distinct = agg_distinct;
    e->agg_arg = clone_opt(agg_arg);
    e->agg_filter = clone_opt(agg_filter);
    e->window_func = window_func;
    for (const auto& p : partition_by) e->partition_by.push_back(p->clone());
    for (const auto& o : window_order) e->window_order.push_back({o.expr->clone(), o.desc});
    for (const auto& p : list) e->list.push_back(p->clone());
    e->subquery = subquery ? subquery->clone() : nullptr;
    e->negated = negated;
    e->between_low = clone_opt(between_low);
    e->between_high = clone_opt(between_high);
    return e;
}

TableRef TableRef::clone() const {
    TableRef r;
    r.table = table;
    r.alias = alias;
    r.subquery = subquery ? subquery->clone() : nullptr;
    return r;
}

SelectPtr SelectStmt::clone() const {
    auto s = std::make_unique<SelectStmt>();
    s->distinct = distinct;
    s->select_star = select_star;
    for (const auto& it : items) s->items.push_back({it.expr->clone(), it.alias});
    s->has_from = has_from;
    s->from = from.clone();
    for (const auto& j : joins) {
        Join nj;
        nj.type = j.type;
        nj.ref = j.ref.clone();
        nj.on = j.on ? j.on->clone() : nullptr;
        s->joins.push_back(std::move(nj));
    }
    s->where = where ? where->clone() : nullptr;
    for (const auto& g : group_by) s->group_by.push_back(g->clone());
    s->having = having ? having->clone() : nullptr;
    for (const auto& o : order_by) s->order_by.push_back({o.expr->clone(), o.desc});
    s->limit = limit;
    s->offset = offset;
    s->fetch_first_style = fetch_first_style;
    return s;
}

namespace {

bool expr_equal_opt(const ExprPtr& a, const ExprPtr& b) {
    if (!a || !b) return !a && !b;
    return expr_equal(*a, *b);
}

bool order_equal(const std::vector<OrderItem>& a, const std::vector<OrderItem>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i].desc != b[i].desc || !expr_equal(*a[i].expr, *b[i].expr)) return false;
    return true;
}

bool expr_list_equal(const std::vector<ExprPtr>& a, const std::vector<ExprPtr>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!expr_equal(*a[i], *b[i])) return false;
    return true;
}

}  // namespace

bool expr_equal(const Expr& a, const Expr& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case Expr::Kind::null_literal:
        case Expr::Kind::star:
            return true;
        case Expr::Kind::int_literal:
            return a.int_value == b.int_value;
        case Expr::Kind::float_literal:
            return a.float_value == b.float_value;
        case Expr::Kind::string_literal:
            return a.string_value == b.string_value;
        case Expr::Kind::column:
            return a.table == b.table && a.column == b.column;
        case Expr::Kind::unary_not:
        case Expr::Kind::unary_neg:
            return expr_equal_opt(a.lhs, b.lhs);
        case Expr::Kind::binary:
            return a.op == b.op && expr_equal_opt(a.lhs, b.lhs) && expr_equal_opt(a.rhs, b.rhs);
        case Expr::Kind::cast:
            return a.cast_target == b.cast_target && a.cast_postfix == b.cast_postfix &&
                   expr_equal_opt(a.lhs, b.lhs);
        case Expr::Kind::aggregate:
            return a.agg == b.agg && a.agg_star == b.agg_star && a.agg_distinct == b.agg_distinct &&
                   expr_equal_opt(a.agg_arg, b.agg_arg) && expr_equal_opt(a.agg_filter, b.agg_filter);
        case Expr::Kind::window:
            return a.window_func == b.window_func && expr_list_equal(a.partition_by, b.partition_by) &&
                   order_equal(a.window_order, b.window_order);
        case Expr::Kind::in_list:
            return a.negated == b.negated && expr_equal_opt(a.lhs, b.lhs) && expr_list_equal(a.list, b.list);
        case Expr::Kind::in_subquery:
            return a.negated == b.negated && expr_equal_opt(a.lhs, b.lhs) &&
                   select_equal(*a.subquery, *b.subquery);
        case Expr::Kind::between:
            return a.negated == b.negated && expr_equal_opt(a.lhs, b.lhs) &&
                   expr_equal_opt(a.between_low, b.between_low) &&
                   expr_equal_opt(a.between_high, b.between_high);
        case Expr::Kind::is_null:
            return a.negated == b.negated && expr_equal_opt(a.lhs, b.lhs);
        case Expr::Kind::scalar_subquery:
            return select_equal(*a.subquery, *b.subquery);
    }
    return false;
}

namespace {

bool table_ref_equal(const TableRef& a, const TableRef& b) {
    if (a.table != b.table || a.alias != b.alias) return false;
    if (!a.subquery || !b.subquery) return !a.subquery && !b.subquery;
    return select_equal(*a.subquery, *b.subquery);
}

}  // namespace

bool select_equal(const SelectStmt& a, const SelectStmt& b) {
    if (a.distinct != b.distinct || a.select_star != b.select_star || a.has_from != b.has_from ||
        a.limit != b.limit || a.offset != b.offset || a.fetch_first_style != b.fetch_first_style)
        return false;
    if (a.items.size() != b.items.size() || a.joins.size() != b.joins.size()) return false;
    for (std::size_t i = 0; i < a.items.size(); ++i)
        if (a.items[i].alias != b.items[i].alias || !expr_equal(*a.items[i].expr, *b.items[i].expr))
            return false;
    if (a.has_from && !table_ref_equal(a.from, b.from)) return false;
    for (std::size_t i = 0; i < a.joins.size(); ++i) {
        if (a.joins[i].type != b.joins[i].type) return false;
        if (!table_ref_equal(a.joins[i].ref, b.joins[i].ref)) return false;
        if (!expr_equal_opt(a.joins[i].on, b.joins[i].on)) return false;
    }
    if (!expr_equal_opt(a.where, b.where)) return false;
    if (!expr_list_equal(a.group_by, b.group_by)) return false;
    if (!expr_equal_opt(a.having, b.having)) return false;
    if (!order_equal(a.order_by, b.order_by)) return false;
    return true;
}

bool contains_aggregate(const Expr& e) {
    if (e.kind == Expr::Kind::aggregate) return true;
    if (e.kind == Expr::Kind::window) return false;  // aggregates inside OVER stay inside
    auto check = [](const ExprPtr& p) { return p && contains_aggregate(*p); };
    if (check(e.lhs) || check(e.rhs) || check(e.agg_arg) || check(e.between_low) || check(e.between_high))
        return true;
    for (const auto& p : e.list)
        if (contains_aggregate(*p)) return true;
    return false;
}

bool contains_window(const Expr& e) {
    if (e.kind == Expr::Kind::window) return true;
    auto check = [](const ExprPtr& p) { return p && contains_window(*p); };
    if (check(e.lhs) || check(e.rhs) || check(e.agg_arg) || check(e.between_low) || check(e.between_high))
        return true;
    for (const auto& p : e.list)
        if (contains_window(*p)) return true;
    return false;
}

}  // namespace dforge::engine::ast

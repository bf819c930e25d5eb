#include "dforge/engine/printer.hpp"

#include <cctype>
#include <sstream>

namespace dforge::engine {

namespace {

using namespace ast;

bool needs_quoting(const std::string& ident) {
    if (ident.empty()) return true;
    if (!std::isalpha(static_cast<unsigned char>(ident[0])) && ident[0] != '_') return true;
    for (char c : ident)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return true;
    return false;
}

struct Printer {
    const DialectMode& mode;
    std::ostringstream out;

    void ident(const std::string& name) {
        if (!needs_quoting(name)) {
            out << name;
            return;
        }
        char q = mode.identifier_quote == IdentifierQuote::backquote ? '`' : '"';
        out << q;
        for (char c : name) {
            out << c;
            if (c == q) out << c;  // doubled quote escape
        }
        out << q;
    }

    void string_lit(const std::string& s) {
        out << '\'';
        for (char c : s) {
            out << c;
            if (c == '\'') out << c;
        }
        out << '\'';
    }

    static int prec(const Expr& e) {
        switch (e.kind) {
            case Expr::Kind::binary:
                switch (e.op) {
                    case BinOp::logical_or: return 1;
                    case BinOp::logical_and: return 2;
                    case BinOp::eq: case BinOp::ne: case BinOp::lt: case BinOp::le:
                    case BinOp::gt: case BinOp::ge: case BinOp::like: case BinOp::ilike:
                        return 4;
                    case BinOp::add: case BinOp::sub: return 5;
                    case BinOp::mul: case BinOp::div: return 6;
                }
                return 4;
            case Expr::Kind::unary_not: return 3;
            case Expr::Kind::in_list:
            case Expr::Kind::in_subquery:
            case Expr::Kind::between:
            case Expr::Kind::is_null:
                return 4;
            case Expr::Kind::unary_neg: return 7;
            case Expr::Kind::cast: return e.cast_postfix ? 8 : 9;
            default: return 9;
        }
    }

    static const char* op_text(BinOp op) {
        switch (op) {
            case BinOp::eq: return "=";
            case BinOp::ne: return "<>";
            case BinOp::lt: return "<";
            case BinOp::le: return "<=";
            case BinOp::gt: return ">";
            case BinOp::ge: return ">=";
            case BinOp::add: return "+";
            case BinOp::sub: return "-";
            case BinOp::mul: return "*";
            case BinOp::div: return "/";
            case BinOp::logical_and: return "AND";
            case BinOp::logical_or: return "OR";
            case BinOp::like: return "LIKE";
            case BinOp::ilike: return "ILIKE";
        }
        return "=";
    }

    void expr(const Expr& e, int parent_prec = 0) {
        bool parens = prec(e) < parent_prec;
        if (parens) out << '(';
        expr_body(e);
        if (parens) out << ')';
    }

    void expr_body(const Expr& e) {
        switch (e.kind) {
            case Expr::Kind::null_literal:
                out << "NULL";
                break;
            case Expr::Kind::int_literal:
                out << e.int_value;
                break;
            case Expr::Kind::float_literal: {
                std::ostringstream f;
                f.precision(17);
                f << e.float_value;
                std::string s = f.str();
                out << s;
                if (s.find('.') == std::string::npos && s.find('e') == std::string::npos)
                    out << ".0";
                break;
            }
            case Expr::Kind::string_literal:
                string_lit(e.string_value);
                break;
            case Expr::Kind::star:
                out << '*';
                break;
            case Expr::Kind::column:
                if (!e.table.empty()) {
                    ident(e.table);
                    out << '.';
                }
                ident(e.column);
                break;
            case Expr::Kind::unary_not:
                out << "NOT ";
                expr(*e.lhs, 3);
                break;
            case Expr::Kind::unary_neg:
                out << '-';
                expr(*e.lhs, 7);
                break;
            case Expr::Kind::binary: {
                int p = prec(e);
                expr(*e.lhs, p);
                out << ' ' << op_text(e.op) << ' ';
                expr(*e.rhs, p + 1);
                break;
            }
            case Expr::Kind::cast:
                if (e.cast_postfix) {
                    expr(*e.lhs, 8);
                    out << "::" << (e.cast_target == CastTarget::to_integer ? "INTEGER" : "FLOAT");
                } else {
                    out << "CAST(";
                    expr(*e.lhs);
                    out << " AS " << (e.cast_target == CastTarget::to_integer ? "INTEGER" : "FLOAT")
                        << ')';
                }
                break;
            case Expr::Kind::aggregate: {
                static const char* names[] = {"count", "sum", "avg", "min", "max"};
                out << names[static_cast<int>(e.agg)] << '(';
                if (e.agg_star) {
                    out << '*';
                } else {
                    if (e.agg_distinct) out << "DISTINCT ";
                    expr(*e.agg_arg);
                }
                out << ')';
                if (e.agg_filter) {
                    out << " FILTER (WHERE ";
                    expr(*e.agg_filter);
                    out << ')';
                }
                break;
            }
            case Expr::Kind::window: {
                out << (e.window_func == WindowFunc::rank ? "rank" : "row_number") << "() OVER (";
                bool space = false;
                if (!e.partition_by.empty()) {
                    out << "PARTITION BY ";
                    for (std::size_t i = 0; i < e.partition_by.size(); ++i) {
                        if (i) out << ", ";
                        expr(*e.partition_by[i]);
                    }
                    space = true;
                }
                if (!e.window_order.empty()) {
                    if (space) out << ' ';
                    out << "ORDER BY ";
                    order_items(e.window_order);
                }
                out << ')';
                break;
            }
            case Expr::Kind::in_list: {
                expr(*e.lhs, 5);
                out << (e.negated ? " NOT IN (" : " IN (");
                for (std::size_t i = 0; i < e.list.size(); ++i) {
                    if (i) out << ", ";
                    expr(*e.list[i]);
                }
                out << ')';
                break;
            }
            case Expr::Kind::in_subquery:
                expr(*e.lhs, 5);
                out << (e.negated ? " NOT IN (" : " IN (");
                select(*e.subquery);
                out << ')';
                break;
            case Expr::Kind::between:
                expr(*e.lhs, 5);
                out << (e.negated ? " NOT BETWEEN " : " BETWEEN ");
                expr(*e.between_low, 5);
                out << " AND ";
                expr(*e.between_high, 5);
                break;
            case Expr::Kind::is_null:
                expr(*e.lhs, 5);
                out << (e.negated ? " IS NOT NULL" : " IS NULL");
                break;
            case Expr::Kind::scalar_subquery:
                out << '(';
                select(*e.subquery);
                out << ')';
                break;
        }
    }

    void order_items(const std::vector<OrderItem>& items) {
        for (std::size_t i = 0; i < items.size(); ++i) {
            if (i) out << ", ";
            expr(*items[i].expr);
            if (items[i].desc) out << " DESC";
        }
    }

    void table_ref(const TableRef& ref) {
        if (ref.subquery) {
            out << '(';
            select(*ref.subquery);
            out << ") AS ";
            ident(ref.alias);
            return;
        }
        ident(ref.table);
        if (!ref.alias.empty()) {
            out << " AS ";
            ident(ref.alias);
        }
    }

    void select(const SelectStmt& s) {
        out << "SELECT ";
        if (s.distinct) out << "DISTINCT ";
        if (s.select_star) {
            out << '*';
        } else {
            for (std::size_t i = 0; i < s.items.size(); ++i) {
                if (i) out << ", ";
                expr(*s.items[i].expr);
                if (!s.items[i].alias.empty()) {
                    out << " AS ";
                    ident(s.items[i].alias);
                }
            }
        }
        if (s.has_from) {
            out << " FROM ";
            table_ref(s.from);
            for (const auto& j : s.joins) {
                out << (j.type == Join::Type::left ? " LEFT JOIN " : " JOIN ");
                table_ref(j.ref);
                out << " ON ";
                expr(*j.on);
            }
        }
        if (s.where) {
            out << " WHERE ";
            expr(*s.where);
        }
        if (!s.group_by.empty()) {
            out << " GROUP BY ";
            for (std::size_t i = 0; i < s.group_by.size(); ++i) {
                if (i) out << ", ";
                expr(*s.group_by[i]);
            }
        }
        if (s.having) {
            out << " HAVING ";
            expr(*s.having);
        }
        if (!s.order_by.empty()) {
            out << " ORDER BY ";
            order_items(s.order_by);
        }
        if (s.fetch_first_style) {
            if (s.offset) out << " OFFSET " << *s.offset << " ROWS";
            if (s.limit) out << " FETCH FIRST " << *s.limit << " ROWS ONLY";
        } else {
            if (s.limit) out << " LIMIT " << *s.limit;
            if (s.offset) out << " OFFSET " << *s.offset;
        }
    }
};

}  // namespace

std::string print_sql(const ast::SelectStmt& stmt, const DialectMode& mode) {
    Printer p{mode};
    p.select(stmt);
    return p.out.str();
}

std::string print_expr(const ast::Expr& e, const DialectMode& mode) {
    Printer p{mode};
    p.expr(e);
    return p.out.str();
}

}  // namespace dforge::engine

#include "dforge/engine/parser.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <set>

#include "dforge/engine/printer.hpp"

namespace dforge::engine {

namespace {

using namespace ast;

std::string upper(const std::string& s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return out;
}

// Words that terminate an implicit alias or select item.
const std::set<std::string>& reserved_words() {
    static const std::set<std::string> words = {
        "SELECT", "DISTINCT", "FROM",  "WHERE", "GROUP",   "HAVING", "ORDER",  "BY",
        "LIMIT",  "OFFSET",   "FETCH", "JOIN",  "INNER",   "LEFT",   "OUTER",  "CROSS",
        "ON",     "AND",      "OR",    "NOT",   "AS",      "IN",     "IS",     "NULL",
        "LIKE",   "ILIKE",    "BETWEEN", "ASC", "DESC",    "UNION",  "ROWS",   "ROW",
        "ONLY",   "FILTER",   "OVER",  "PARTITION", "CASE", "WHEN",  "THEN",   "ELSE",
        "END",    "EXISTS",   "CAST",
    };
    return words;
}

class Parser {
public:
    Parser(const std::string& sql, const DialectMode& mode, ViolationSink* sink)
        : src_(sql), mode_(mode), sink_(sink), tokens_(tokenize(sql, mode, sink)) {}

    SelectPtr parse_statement() {
        auto stmt = parse_select();
        accept_symbol(";");
        if (!at_end()) fail("unexpected trailing input");
        return stmt;
    }

private:
    const std::string& src_;
    const DialectMode& mode_;
    ViolationSink* sink_;
    std::vector<Token> tokens_;
    std::size_t pos_ = 0;

    const Token& cur() const { return tokens_[pos_]; }
    bool at_end() const { return cur().kind == Token::Kind::end; }

    [[noreturn]] void fail(const std::string& msg) const {
        throw EngineError(EngineErrorClass::parse,
                          msg + " at position " + std::to_string(cur().position), cur().position);
    }

    void violation(const char* construct, std::size_t position, std::size_t length,
                   const std::string& msg) {
        if (sink_) {
            sink_->report({construct, mode_.dialect, position, length, msg});
        } else {
            throw EngineError(EngineErrorClass::dialect_violation, msg, position);
        }
    }

    bool is_word(const char* w) const {
        return cur().kind == Token::Kind::word && upper(cur().text) == w;
    }

    bool accept_word(const char* w) {
        if (is_word(w)) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect_word(const char* w) {
        if (!accept_word(w)) fail(std::string("expected ") + w);
    }

    bool is_symbol(const char* s) const {
        return cur().kind == Token::Kind::symbol && cur().text == s;
    }

    bool accept_symbol(const char* s) {
        if (is_symbol(s)) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect_symbol(const char* s) {
        if (!accept_symbol(s)) fail(std::string("expected '") + s + "'");
    }

    bool looking_at_select() const {
        return cur().kind == Token::Kind::word && upper(cur().text) == "SELECT";
    }

    std::string parse_identifier(const char* what) {
        if (cur().kind == Token::Kind::quoted_ident) {
            std::string t = cur().text;
            ++pos_;
            return t;
        }
        if (cur().kind == Token::Kind::word && !reserved_words().count(upper(cur().text))) {
            std::string t = cur().text;
            ++pos_;
            return t;
        }
        fail(std::string("expected ") + what);
    }

    std::optional<std::string> try_alias() {
        if (accept_word("AS")) return parse_identifier("alias after AS");
        if (cur().kind == Token::Kind::quoted_ident ||
            (cur().kind == Token::Kind::word && !reserved_words().count(upper(cur().text)))) {
            std::string t = cur().text;
            ++pos_;
            return t;
        }
        return std::nullopt;
    }

    std::int64_t parse_int_token(const char* what) {
        if (cur().kind != Token::Kind::int_lit) fail(std::string("expected ") + what);
        std::int64_t v = std::strtoll(cur().text.c_str(), nullptr, 10);
        ++pos_;
        return v;
    }

    // ---- statement -------------------------------------------------------

    SelectPtr parse_select() {
        expect_word("SELECT");
        auto stmt = std::make_unique<SelectStmt>();
        stmt->distinct = accept_word("DISTINCT");

        if (is_symbol("*")) {
            ++pos_;
            stmt->select_star = true;
        } else {
            do {
                SelectItem item;
                item.expr = parse_expr();
                if (auto a = try_alias()) item.alias = *a;
                stmt->items.push_back(std::move(item));
            } while (accept_symbol(","));
        }

        if (accept_word("FROM")) {
            stmt->has_from = true;
            stmt->from = parse_table_ref();
            while (true) {
                Join join;
                if (accept_word("JOIN")) {
                    join.type = Join::Type::inner;
                } else if (is_word("INNER")) {
                    ++pos_;
                    expect_word("JOIN");
                    join.type = Join::Type::inner;
                } else if (is_word("LEFT")) {
                    ++pos_;
                    accept_word("OUTER");
                    expect_word("JOIN");
                    join.type = Join::Type::left;
                } else if (is_word("CROSS")) {
                    fail("CROSS JOIN is not supported; use JOIN ... ON");
                } else {
                    break;
                }
                join.ref = parse_table_ref();
                if (!accept_word("ON")) fail("expected ON condition after JOIN");
                join.on = parse_expr();
                stmt->joins.push_back(std::move(join));
            }
        }

        if (accept_word("WHERE")) stmt->where = parse_expr();

        if (is_word("GROUP")) {
            ++pos_;
            expect_word("BY");
            do {
                stmt->group_by.push_back(parse_expr());
            } while (accept_symbol(","));
        }

        if (accept_word("HAVING")) stmt->having = parse_expr();

        if (is_word("ORDER")) {
            ++pos_;
            expect_word("BY");
            stmt->order_by = parse_order_items();
        }

        parse_limit_clause(*stmt);
        check_distinct_order_by(*stmt);
        return stmt;
    }

    TableRef parse_table_ref() {
        TableRef ref;
        if (accept_symbol("(")) {
            if (!looking_at_select()) fail("expected SELECT in derived table");
            ref.subquery = parse_select();
            expect_symbol(")");
            auto alias = try_alias();
            if (!alias) fail("derived table requires an alias");
            ref.alias = *alias;
            return ref;
        }
        ref.table = parse_identifier("table name");
        if (auto a = try_alias()) ref.alias = *a;
        return ref;
    }

    std::vector<OrderItem> parse_order_items() {
        std::vector<OrderItem> items;
        do {
            OrderItem item;
            item.expr = parse_expr();
            if (accept_word("DESC"))
                item.desc = true;
            else
                accept_word("ASC");
            items.push_back(std::move(item));
        } while (accept_symbol(","));
        return items;
    }

    void parse_limit_clause(SelectStmt& stmt) {
        if (is_word("LIMIT")) {
            std::size_t at = cur().position;
            ++pos_;
            if (mode_.limit_style != LimitStyle::limit)
                violation("limit-style", at, 5,
                          std::string("LIMIT is not ") + dialect_tag(mode_.dialect) +
                              " syntax (limit style; use FETCH FIRST n ROWS ONLY)");
            stmt.limit = parse_int_token("LIMIT count");
            if (accept_word("OFFSET")) {
                stmt.offset = parse_int_token("OFFSET count");
                accept_word("ROWS");
            }
            return;
        }
        bool saw_offset = false;
        if (accept_word("OFFSET")) {
            stmt.offset = parse_int_token("OFFSET count");
            accept_word("ROWS");
            saw_offset = true;
        }
        if (is_word("FETCH")) {
            std::size_t at = cur().position;
            ++pos_;
            if (!accept_word("FIRST")) expect_word("NEXT");
            if (mode_.limit_style != LimitStyle::fetch_first)
                violation("limit-style", at, 5,
                          std::string("FETCH FIRST is not ") + dialect_tag(mode_.dialect) +
                              " syntax (limit style; use LIMIT)");
            stmt.limit = parse_int_token("FETCH count");
            accept_word("ROWS") || accept_word("ROW");
            expect_word("ONLY");
            stmt.fetch_first_style = true;
        } else if (saw_offset && mode_.limit_style == LimitStyle::fetch_first) {
            stmt.fetch_first_style = true;
        }
    }

    // Postgres requires ORDER BY expressions to appear in the select list
    // when DISTINCT is present (one of the translation prompt's rules).
    void check_distinct_order_by(const SelectStmt& stmt) {
        if (mode_.dialect != Dialect::postgres) return;
        if (!stmt.distinct || stmt.order_by.empty() || stmt.select_star) return;
        for (const auto& o : stmt.order_by) {
            bool found = false;
            for (const auto& item : stmt.items) {
                if (expr_equal(*o.expr, *item.expr)) {
                    found = true;
                    break;
                }
                if (o.expr->kind == Expr::Kind::column && o.expr->table.empty() &&
                    !item.alias.empty() && item.alias == o.expr->column) {
                    found = true;
                    break;
                }
            }
            if (!found)
                violation("distinct-order-by", 0, 0,
                          "for SELECT DISTINCT, ORDER BY expressions must appear in select list");
        }
    }

    // ---- expressions -----------------------------------------------------

    ExprPtr parse_expr() { return parse_or(); }

    ExprPtr parse_or() {
        auto lhs = parse_and();
        while (accept_word("OR")) lhs = binary(BinOp::logical_or, std::move(lhs), parse_and());
        return lhs;
    }

    ExprPtr parse_and() {
        auto lhs = parse_not();
        while (accept_word("AND")) lhs = binary(BinOp::logical_and, std::move(lhs), parse_not());
        return lhs;
    }

    ExprPtr parse_not() {
        if (accept_word("NOT")) {
            auto e = make_expr(Expr::Kind::unary_not);
            e->lhs = parse_not();
            return e;
        }
        return parse_predicate();
    }

    ExprPtr parse_predicate() {
        auto lhs = parse_additive();
        static const std::array<std::pair<const char*, BinOp>, 6> cmps = {{
            {"=", BinOp::eq}, {"<>", BinOp::ne}, {"!=", BinOp::ne},
            {"<=", BinOp::le}, {">=", BinOp::ge}, {"<", BinOp::lt},
        }};
        for (const auto& [sym, op] : cmps) {
            if (is_symbol(sym)) {
                ++pos_;
                return binary(op, std::move(lhs), parse_additive());
            }
        }
        if (is_symbol(">")) {
            ++pos_;
            return binary(BinOp::gt, std::move(lhs), parse_additive());
        }

        bool negated = false;
        if (is_word("NOT")) {
            // lookahead for NOT LIKE / NOT ILIKE / NOT IN / NOT BETWEEN
            const Token& next = tokens_[pos_ + 1];
            if (next.kind == Token::Kind::word) {
                std::string u = upper(next.text);
                if (u == "LIKE" || u == "ILIKE" || u == "IN" || u == "BETWEEN") {
                    ++pos_;
                    negated = true;
                }
            }
        }

        if (is_word("LIKE") || is_word("ILIKE")) {
            bool ilike = is_word("ILIKE");
            std::size_t at = cur().position;
            ++pos_;
            if (ilike && !mode_.allow_ilike)
                violation("ilike", at, 5,
                          std::string("ILIKE is not ") + dialect_tag(mode_.dialect) +
                              " syntax (case-insensitive LIKE is postgres-only)");
            auto e = binary(ilike ? BinOp::ilike : BinOp::like, std::move(lhs), parse_additive());
            if (negated) {
                auto n = make_expr(Expr::Kind::unary_not);
                n->lhs = std::move(e);
                return n;
            }
            return e;
        }

        if (accept_word("IN")) {
            expect_symbol("(");
            ExprPtr e;
            if (looking_at_select()) {
                e = make_expr(Expr::Kind::in_subquery);
                e->subquery = parse_select();
            } else {
                e = make_expr(Expr::Kind::in_list);
                do {
                    e->list.push_back(parse_expr());
                } while (accept_symbol(","));
            }
            expect_symbol(")");
            e->lhs = std::move(lhs);
            e->negated = negated;
            return e;
        }

        if (accept_word("BETWEEN")) {
            auto e = make_expr(Expr::Kind::between);
            e->lhs = std::move(lhs);
            e->between_low = parse_additive();
            expect_word("AND");
            e->between_high = parse_additive();
            e->negated = negated;
            return e;
        }

        if (negated) fail("expected LIKE, IN or BETWEEN after NOT");

        if (accept_word("IS")) {
            auto e = make_expr(Expr::Kind::is_null);
            e->negated = accept_word("NOT");
            expect_word("NULL");
            e->lhs = std::move(lhs);
            return e;
        }

        return lhs;
    }

    ExprPtr parse_additive() {
        auto lhs = parse_multiplicative();
        while (true) {
            if (accept_symbol("+"))
                lhs = binary(BinOp::add, std::move(lhs), parse_multiplicative());
            else if (accept_symbol("-"))
                lhs = binary(BinOp::sub, std::move(lhs), parse_multiplicative());
            else
                break;
        }
        return lhs;
    }

    ExprPtr parse_multiplicative() {
        auto lhs = parse_unary();
        while (true) {
            if (accept_symbol("*"))
                lhs = binary(BinOp::mul, std::move(lhs), parse_unary());
            else if (accept_symbol("/"))
                lhs = binary(BinOp::div, std::move(lhs), parse_unary());
            else
                break;
        }
        return lhs;
    }

    ExprPtr parse_unary() {
        if (accept_symbol("-")) {
            auto e = make_expr(Expr::Kind::unary_neg);
            e->lhs = parse_unary();
            return e;
        }
        return parse_postfix();
    }

    ExprPtr parse_postfix() {
        auto e = parse_primary();
        while (is_symbol("::")) {
            std::size_t at = cur().position;
            ++pos_;
            if (!mode_.allow_double_colon_cast)
                violation("double-colon-cast", at, 2,
                          std::string("'::' casts are not ") + dialect_tag(mode_.dialect) +
                              " syntax (explicit type casting is postgres-only)");
            auto cast = make_expr(Expr::Kind::cast);
            cast->cast_target = parse_cast_target();
            cast->cast_postfix = true;
            cast->lhs = std::move(e);
            e = std::move(cast);
        }
        return e;
    }

    CastTarget parse_cast_target() {
        if (cur().kind != Token::Kind::word) fail("expected type name");
        std::string t = upper(cur().text);
        std::size_t at = cur().position;
        ++pos_;
        if (t == "INTEGER" || t == "INT" || t == "BIGINT") return CastTarget::to_integer;
        if (t == "FLOAT" || t == "REAL" || t == "DOUBLE" || t == "NUMERIC" || t == "DECIMAL")
            return CastTarget::to_float;
        throw EngineError(EngineErrorClass::unsupported_feature,
                          "unsupported cast target '" + t + "' (supported: INTEGER, FLOAT)", at);
    }

    std::optional<AggFunc> agg_func_from_word(const std::string& u) const {
        if (u == "COUNT") return AggFunc::count;
        if (u == "SUM") return AggFunc::sum;
        if (u == "AVG") return AggFunc::avg;
        if (u == "MIN") return AggFunc::min;
        if (u == "MAX") return AggFunc::max;
        return std::nullopt;
    }

    ExprPtr parse_primary() {
        const Token& t = cur();
        switch (t.kind) {
            case Token::Kind::int_lit: {
                std::int64_t v = std::strtoll(t.text.c_str(), nullptr, 10);
                ++pos_;
                return int_literal(v);
            }
            case Token::Kind::float_lit: {
                double v = std::strtod(t.text.c_str(), nullptr);
                ++pos_;
                return float_literal(v);
            }
            case Token::Kind::string_lit: {
                std::string v = t.text;
                ++pos_;
                return string_literal(std::move(v));
            }
            case Token::Kind::symbol:
                if (t.text == "(") {
                    ++pos_;
                    if (looking_at_select()) {
                        auto e = make_expr(Expr::Kind::scalar_subquery);
                        e->subquery = parse_select();
                        expect_symbol(")");
                        return e;
                    }
                    auto inner = parse_expr();
                    expect_symbol(")");
                    return inner;
                }
                fail("unexpected symbol '" + t.text + "'");
            case Token::Kind::quoted_ident:
                return parse_column_or_call();
            case Token::Kind::word: {
                std::string u = upper(t.text);
                if (u == "NULL") {
                    ++pos_;
                    return make_expr(Expr::Kind::null_literal);
                }
                if (u == "CAST") {
                    ++pos_;
                    expect_symbol("(");
                    auto inner = parse_expr();
                    expect_word("AS");
                    auto cast = make_expr(Expr::Kind::cast);
                    cast->cast_target = parse_cast_target();
                    cast->cast_postfix = false;
                    cast->lhs = std::move(inner);
                    expect_symbol(")");
                    return cast;
                }
                return parse_column_or_call();
            }
            case Token::Kind::end:
                fail("unexpected end of input");
        }
        fail("unexpected token");
    }

    ExprPtr parse_column_or_call() {
        const Token& t = cur();
        bool callable = t.kind == Token::Kind::word;
        std::string name = t.text;
        std::string u = upper(name);

        if (callable && tokens_[pos_ + 1].kind == Token::Kind::symbol &&
            tokens_[pos_ + 1].text == "(") {
            if (auto agg = agg_func_from_word(u)) {
                ++pos_;
                return parse_aggregate(*agg);
            }
            if (u == "RANK" || u == "ROW_NUMBER") {
                ++pos_;
                return parse_window(u == "RANK" ? WindowFunc::rank : WindowFunc::row_number);
            }
            fail("unknown function '" + name + "'");
        }

        // plain (possibly qualified) column reference
        if (callable && reserved_words().count(u)) fail("unexpected keyword " + u);
        ++pos_;
        std::string table, column;
        if (accept_symbol(".")) {
            table = name;
            if (cur().kind == Token::Kind::quoted_ident ||
                (cur().kind == Token::Kind::word && !reserved_words().count(upper(cur().text)))) {
                column = cur().text;
                ++pos_;
            } else {
                fail("expected column name after '.'");
            }
        } else {
            column = name;
        }
        return column_ref(std::move(table), std::move(column));
    }

    ExprPtr parse_aggregate(AggFunc fn) {
        expect_symbol("(");
        auto e = make_expr(Expr::Kind::aggregate);
        e->agg = fn;
        if (is_symbol("*")) {
            ++pos_;
            e->agg_star = true;
            if (fn != AggFunc::count) fail("'*' argument is only valid in count(*)");
        } else {
            e->agg_distinct = accept_word("DISTINCT");
            e->agg_arg = parse_expr();
        }
        expect_symbol(")");
        if (is_word("FILTER")) {
            std::size_t at = cur().position;
            ++pos_;
            if (mode_.dialect != Dialect::postgres)
                violation("filter-clause", at, 6,
                          std::string("aggregate FILTER clauses are not ") +
                              dialect_tag(mode_.dialect) + " syntax");
            expect_symbol("(");
            expect_word("WHERE");
            e->agg_filter = parse_expr();
            expect_symbol(")");
        }
        return e;
    }

    ExprPtr parse_window(WindowFunc fn) {
        expect_symbol("(");
        expect_symbol(")");
        auto e = make_expr(Expr::Kind::window);
        e->window_func = fn;
        expect_word("OVER");
        expect_symbol("(");
        if (is_word("PARTITION")) {
            ++pos_;
            expect_word("BY");
            do {
                e->partition_by.push_back(parse_expr());
            } while (accept_symbol(","));
        }
        if (is_word("ORDER")) {
            ++pos_;
            expect_word("BY");
            e->window_order = parse_order_items();
        }
        expect_symbol(")");
        return e;
    }
};

}  // namespace

ast::SelectPtr parse_sql(const std::string& sql, const DialectMode& mode) {
    Parser p(sql, mode, nullptr);
    return p.parse_statement();
}

ast::SelectPtr parse_sql_collecting(const std::string& sql, const DialectMode& mode,
                                    ViolationSink& sink) {
    Parser p(sql, mode, &sink);
    return p.parse_statement();
}

DialectMode DialectMode::for_dialect(Dialect d) {
    DialectMode m;
    m.dialect = d;
    m.strict_group_by = (d == Dialect::mysql);
    m.allow_double_colon_cast = (d == Dialect::postgres);
    m.allow_ilike = (d == Dialect::postgres);
    m.identifier_quote =
        (d == Dialect::mysql) ? IdentifierQuote::backquote : IdentifierQuote::double_quote;
    m.limit_style = (d == Dialect::oracle) ? LimitStyle::fetch_first : LimitStyle::limit;
    return m;
}

const char* engine_error_class_tag(EngineErrorClass c) {
    switch (c) {
        case EngineErrorClass::parse: return "parse";
        case EngineErrorClass::unknown_relation: return "unknown-relation";
        case EngineErrorClass::unknown_column: return "unknown-column";
        case EngineErrorClass::type_mismatch: return "type-mismatch";
        case EngineErrorClass::strict_group_by: return "strict-group-by";
        case EngineErrorClass::dialect_violation: return "dialect-violation";
        case EngineErrorClass::unsupported_feature: return "unsupported-feature";
    }
    return "parse";
}

}  // namespace dforge::engine

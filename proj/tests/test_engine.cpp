#include <algorithm>
#include <random>

#include "doctest.h"
#include "dforge/engine/conformance.hpp"
#include "dforge/engine/database.hpp"
#include "dforge/engine/executor.hpp"
#include "dforge/engine/parser.hpp"
#include "dforge/engine/printer.hpp"

using namespace dforge;
using namespace dforge::engine;

namespace {

DialectMode mode_for(Dialect d) { return DialectMode::for_dialect(d); }

std::shared_ptr<const InMemoryDb> toy_db() {
    return load_database_from_json(R"({
      "tables": [
        {"name": "t",
         "columns": [{"name":"a","type":"integer"},{"name":"b","type":"integer"},{"name":"c","type":"text"}],
         "rows": [[1, 10, "x"], [5, 20, "y"], [3, 30, "z"]]}
      ]})", "toy");
}

std::shared_ptr<const InMemoryDb> movie_db() {
    return load_database_from_json(R"({
      "tables": [
        {"name": "ratings",
         "columns": [{"name":"rating_id","type":"integer"},{"name":"movie_id","type":"integer"},{"name":"rating_score","type":"integer"}],
         "rows": [[1, 1, 4], [2, 1, 5], [3, 2, 3]]},
        {"name": "movies",
         "columns": [{"name":"movie_id","type":"integer"},{"name":"movie_title","type":"text"},{"name":"director_name","type":"text"},{"name":"release_year","type":"integer"}],
         "rows": [[1, "When Will I Be Loved", "James Toback", 2004], [2, "Other Film", "Jane Doe", 1999]]}
      ]})", "movie_platform");
}

ResultTable run_sql(const std::string& sql, const InMemoryDb& db, Dialect d) {
    DialectMode m = mode_for(d);
    auto ast = parse_sql(sql, m);
    return execute(*ast, db, m);
}

}  // namespace

// ---- parse_sql ------------------------------------------------------------

TEST_CASE("postgres mode parses :: casts into cast nodes") {
    auto m = mode_for(Dialect::postgres);
    auto ast = parse_sql("SELECT count(*) FROM head WHERE head.age::INTEGER > 56", m);
    REQUIRE(ast->where);
    REQUIRE(ast->where->kind == ast::Expr::Kind::binary);
    REQUIRE(ast->where->lhs->kind == ast::Expr::Kind::cast);
    CHECK(ast->where->lhs->cast_postfix);
    CHECK(ast->where->lhs->cast_target == ast::CastTarget::to_integer);
}

TEST_CASE("mysql mode rejects :: casts as a dialect violation") {
    auto m = mode_for(Dialect::mysql);
    try {
        parse_sql("SELECT count(*) FROM head WHERE head.age::INTEGER > 56", m);
        FAIL("expected dialect violation");
    } catch (const EngineError& e) {
        CHECK(e.error_class() == EngineErrorClass::dialect_violation);
        CHECK(std::string(e.what()).find("::") != std::string::npos);
    }
}

TEST_CASE("mysql mode rejects ILIKE as a dialect violation") {
    auto m = mode_for(Dialect::mysql);
    try {
        parse_sql("SELECT keyword_name FROM keyword WHERE keyword_name ILIKE 'x'", m);
        FAIL("expected dialect violation");
    } catch (const EngineError& e) {
        CHECK(e.error_class() == EngineErrorClass::dialect_violation);
        CHECK(std::string(e.what()).find("ILIKE") != std::string::npos);
    }
}

TEST_CASE("postgres mode accepts ILIKE") {
    auto m = mode_for(Dialect::postgres);
    auto ast = parse_sql("SELECT keyword_name FROM keyword WHERE keyword_name ILIKE 'x%'", m);
    CHECK(ast->where->op == ast::BinOp::ilike);
}

TEST_CASE("backquoted identifiers are mysql-only") {
    CHECK_NOTHROW(parse_sql("SELECT `a` FROM `t`", mode_for(Dialect::mysql)));
    for (Dialect d : {Dialect::postgres, Dialect::sqlite, Dialect::oracle}) {
        try {
            parse_sql("SELECT `a` FROM `t`", mode_for(d));
            FAIL("expected dialect violation");
        } catch (const EngineError& e) {
            CHECK(e.error_class() == EngineErrorClass::dialect_violation);
        }
    }
}

TEST_CASE("joins require an explicit ON condition") {
    auto m = mode_for(Dialect::sqlite);
    CHECK_THROWS_AS(parse_sql("SELECT a FROM t JOIN u", m), EngineError);
    CHECK_THROWS_AS(parse_sql("SELECT a FROM t, u", m), EngineError);
}

TEST_CASE("parse errors carry a position") {
    auto m = mode_for(Dialect::sqlite);
    try {
        parse_sql("SELECT FROM t", m);
        FAIL("expected parse error");
    } catch (const EngineError& e) {
        CHECK(e.error_class() == EngineErrorClass::parse);
        CHECK(e.position() != EngineError::no_position);
    }
}

TEST_CASE("oracle uses FETCH FIRST, not LIMIT") {
    CHECK_THROWS_AS(parse_sql("SELECT a FROM t LIMIT 5", mode_for(Dialect::oracle)), EngineError);
    CHECK_NOTHROW(parse_sql("SELECT a FROM t FETCH FIRST 5 ROWS ONLY", mode_for(Dialect::oracle)));
    CHECK_THROWS_AS(parse_sql("SELECT a FROM t FETCH FIRST 5 ROWS ONLY", mode_for(Dialect::mysql)),
                    EngineError);
}

TEST_CASE("postgres DISTINCT requires ORDER BY expressions in the select list") {
    auto m = mode_for(Dialect::postgres);
    CHECK_THROWS_AS(parse_sql("SELECT DISTINCT a FROM t ORDER BY b", m), EngineError);
    CHECK_NOTHROW(parse_sql("SELECT DISTINCT a FROM t ORDER BY a", m));
    // sqlite and mysql both allow it
    CHECK_NOTHROW(parse_sql("SELECT DISTINCT a FROM t ORDER BY b", mode_for(Dialect::sqlite)));
    CHECK_NOTHROW(parse_sql("SELECT DISTINCT a FROM t ORDER BY b", mode_for(Dialect::mysql)));
}

TEST_CASE("window functions and FILTER clauses parse in postgres mode") {
    auto m = mode_for(Dialect::postgres);
    auto ast = parse_sql(
        "SELECT director_name, rank() OVER (PARTITION BY director_id ORDER BY "
        "count(rating_id) FILTER (WHERE rating_score::FLOAT > 5) DESC) AS rnk FROM movies",
        m);
    CHECK(ast->items.size() == 2);
    CHECK(ast->items[1].expr->kind == ast::Expr::Kind::window);
    // FILTER is postgres syntax only
    CHECK_THROWS_AS(
        parse_sql("SELECT count(a) FILTER (WHERE b > 1) FROM t GROUP BY c", mode_for(Dialect::mysql)),
        EngineError);
}

// ---- load_database ---------------------------------------------------------

TEST_CASE("fixture loads with matching counts") {
    auto db = load_database_from_json(R"({
      "tables": [{"name":"t","columns":[{"name":"a","type":"integer"},{"name":"b","type":"text"}],
                  "rows":[[1,"x"],[2,"y"],[3,"z"]]}]})", "fx");
    CHECK(db->table_count() == 1);
    CHECK(db->tables()[0].columns.size() == 2);
    CHECK(db->total_rows() == 3);
}

TEST_CASE("row with wrong arity names table and row index") {
    CHECK_THROWS_WITH_AS(
        load_database_from_json(R"({
          "tables": [{"name":"t","columns":[{"name":"a","type":"integer"}],"rows":[[1],[2,3]]}]})",
                                "fx"),
        "table 't' row 1: arity mismatch (expected 1 cells)", LoadError);
}

TEST_CASE("empty database is valid and any FROM is unknown-relation") {
    auto db = load_database_from_json(R"({"tables": []})", "empty");
    CHECK(db->table_count() == 0);
    try {
        run_sql("SELECT a FROM missing", *db, Dialect::sqlite);
        FAIL("expected unknown relation");
    } catch (const EngineError& e) {
        CHECK(e.error_class() == EngineErrorClass::unknown_relation);
    }
}

TEST_CASE("malformed cells skip the row with a count") {
    auto db = load_database_from_json(R"({
      "tables": [{"name":"t","columns":[{"name":"a","type":"integer"}],
                  "rows":[[1],[""],["oops"],[2]]}]})", "fx");
    CHECK(db->total_rows() == 2);
    CHECK(db->skipped_rows() == 2);
}

TEST_CASE("duplicate table name fails the load") {
    CHECK_THROWS_AS(load_database_from_json(R"({
      "tables": [{"name":"t","columns":[{"name":"a","type":"integer"}],"rows":[]},
                 {"name":"t","columns":[{"name":"b","type":"integer"}],"rows":[]}]})",
                                            "fx"),
                    LoadError);
}

// ---- execute ----------------------------------------------------------------

TEST_CASE("count over three rows") {
    auto db = toy_db();
    auto result = run_sql("SELECT count(*) FROM t", *db, Dialect::sqlite);
    REQUIRE(result.rows.size() == 1);
    CHECK(result.rows[0][0] == Value{std::int64_t{3}});
    CHECK(result.columns[0] == "count(*)");
}

TEST_CASE("order by desc with limit") {
    auto db = toy_db();
    auto result = run_sql("SELECT a FROM t ORDER BY a DESC LIMIT 2", *db, Dialect::sqlite);
    REQUIRE(result.rows.size() == 2);
    CHECK(result.rows[0][0] == Value{std::int64_t{5}});
    CHECK(result.rows[1][0] == Value{std::int64_t{3}});
}

TEST_CASE("appendix aggregate query without GROUP BY errors under mysql strict mode") {
    auto db = movie_db();
    std::string sql =
        "SELECT avg(T1.rating_score), T2.director_name FROM ratings AS T1 "
        "JOIN movies AS T2 ON T1.movie_id = T2.movie_id "
        "WHERE T2.movie_title = 'When Will I Be Loved'";
    DialectMode strict = mode_for(Dialect::mysql);
    REQUIRE(strict.strict_group_by);
    auto ast = parse_sql(sql, strict);
    try {
        execute(*ast, *db, strict);
        FAIL("expected strict-group-by error");
    } catch (const EngineError& e) {
        CHECK(e.error_class() == EngineErrorClass::strict_group_by);
        CHECK(std::string(e.what()).find("only_full_group_by") != std::string::npos);
        CHECK(std::string(e.what()).find("movie_platform.T2.director_name") != std::string::npos);
    }

    // the corrected query with GROUP BY succeeds
    std::string fixed =
        "SELECT avg(T1.rating_score) AS average_rating, T2.director_name FROM ratings AS T1 "
        "JOIN movies AS T2 ON T1.movie_id = T2.movie_id "
        "WHERE T2.movie_title = 'When Will I Be Loved' GROUP BY T2.director_name";
    auto fixed_ast = parse_sql(fixed, strict);
    auto result = execute(*fixed_ast, *db, strict);
    REQUIRE(result.rows.size() == 1);
    CHECK(result.rows[0][0] == Value{4.5});
    CHECK(result.rows[0][1] == Value{std::string("James Toback")});
}

TEST_CASE("strict-mode soundness: disabling strict_group_by lets the query run") {
    auto db = movie_db();
    std::string sql =
        "SELECT T1.rating_score, T2.director_name FROM ratings AS T1 "
        "JOIN movies AS T2 ON T1.movie_id = T2.movie_id GROUP BY T2.director_name";
    DialectMode lax = mode_for(Dialect::mysql);
    lax.strict_group_by = false;
    auto ast = parse_sql(sql, lax);
    auto result = execute(*ast, *db, lax);
    CHECK(result.rows.size() == 2);  // one row per director, first-row values
}

TEST_CASE("joins, grouping, having, order by") {
    auto db = movie_db();
    auto result = run_sql(
        "SELECT T2.director_name, count(*) AS n FROM ratings AS T1 "
        "JOIN movies AS T2 ON T1.movie_id = T2.movie_id "
        "GROUP BY T2.director_name HAVING count(*) >= 1 ORDER BY n DESC, T2.director_name",
        *db, Dialect::sqlite);
    REQUIRE(result.rows.size() == 2);
    CHECK(result.rows[0][1] == Value{std::int64_t{2}});
    CHECK(result.rows[0][0] == Value{std::string("James Toback")});
}

TEST_CASE("left join null-extends") {
    auto db = load_database_from_json(R"({
      "tables": [
        {"name":"l","columns":[{"name":"id","type":"integer"}],"rows":[[1],[2]]},
        {"name":"r","columns":[{"name":"id","type":"integer"},{"name":"v","type":"text"}],"rows":[[1,"a"]]}
      ]})", "fx");
    auto result = run_sql("SELECT l.id, r.v FROM l LEFT JOIN r ON l.id = r.id ORDER BY l.id", *db,
                          Dialect::sqlite);
    REQUIRE(result.rows.size() == 2);
    CHECK(result.rows[0][1] == Value{std::string("a")});
    CHECK(is_null(result.rows[1][1]));
}

TEST_CASE("scalar subquery and IN subquery") {
    auto db = toy_db();
    auto r1 = run_sql("SELECT a FROM t WHERE b = (SELECT max(b) FROM t)", *db, Dialect::sqlite);
    REQUIRE(r1.rows.size() == 1);
    CHECK(r1.rows[0][0] == Value{std::int64_t{3}});
    auto r2 = run_sql("SELECT a FROM t WHERE a IN (SELECT a FROM t WHERE b > 15) ORDER BY a", *db,
                      Dialect::sqlite);
    REQUIRE(r2.rows.size() == 2);
}

TEST_CASE("derived table in FROM") {
    auto db = toy_db();
    auto r = run_sql(
        "SELECT sub.a FROM (SELECT a, b FROM t WHERE b > 15) AS sub WHERE sub.a < 4 ORDER BY sub.a",
        *db, Dialect::sqlite);
    REQUIRE(r.rows.size() == 1);
    CHECK(r.rows[0][0] == Value{std::int64_t{3}});
}

TEST_CASE("postgres cast of non-numeric text is a type mismatch at runtime") {
    auto db = toy_db();
    try {
        run_sql("SELECT c::FLOAT FROM t", *db, Dialect::postgres);
        FAIL("expected type mismatch");
    } catch (const EngineError& e) {
        CHECK(e.error_class() == EngineErrorClass::type_mismatch);
        CHECK(std::string(e.what()).find("invalid input syntax") != std::string::npos);
    }
}

TEST_CASE("cross-type comparison is a type mismatch") {
    auto db = toy_db();
    CHECK_THROWS_AS(run_sql("SELECT a FROM t WHERE c > 5", *db, Dialect::postgres), EngineError);
    // with a cast it works
    auto db2 = load_database_from_json(R"({
      "tables": [{"name":"w","columns":[{"name":"pts","type":"text"}],"rows":[["24"],["30"]]}]})",
                                       "fx");
    auto r = run_sql("SELECT pts FROM w WHERE pts::FLOAT = 24", *db2, Dialect::postgres);
    REQUIRE(r.rows.size() == 1);
}

TEST_CASE("date text compares lexicographically with BETWEEN") {
    auto db = load_database_from_json(R"({
      "tables": [{"name":"movie","columns":[{"name":"movie_id","type":"integer"},{"name":"release_date","type":"date"}],
                  "rows":[[1,"2006-03-01"],[2,"2005-12-31"],[3,"2006-12-31"]]}]})", "fx");
    auto r = run_sql(
        "SELECT movie_id FROM movie WHERE release_date BETWEEN '2006-01-01' AND '2006-12-31' "
        "ORDER BY movie_id",
        *db, Dialect::postgres);
    REQUIRE(r.rows.size() == 2);
    CHECK(r.rows[0][0] == Value{std::int64_t{1}});
    CHECK(r.rows[1][0] == Value{std::int64_t{3}});
}

TEST_CASE("aggregates over empty input follow null semantics") {
    auto db = load_database_from_json(
        R"({"tables": [{"name":"e","columns":[{"name":"a","type":"integer"}],"rows":[]}]})", "fx");
    auto r = run_sql("SELECT count(*), sum(a), avg(a), min(a) FROM e", *db, Dialect::sqlite);
    REQUIRE(r.rows.size() == 1);
    CHECK(r.rows[0][0] == Value{std::int64_t{0}});
    CHECK(is_null(r.rows[0][1]));
    CHECK(is_null(r.rows[0][2]));
    CHECK(is_null(r.rows[0][3]));
    // grouped over empty input: no rows
    auto g = run_sql("SELECT a, count(*) FROM e GROUP BY a", *db, Dialect::sqlite);
    CHECK(g.rows.empty());
}

TEST_CASE("nulls are excluded from aggregates except count(*)") {
    auto db = load_database_from_json(R"({
      "tables": [{"name":"n","columns":[{"name":"a","type":"integer"}],"rows":[[1],[null],[3]]}]})",
                                      "fx");
    auto r = run_sql("SELECT count(*), count(a), sum(a), avg(a) FROM n", *db, Dialect::sqlite);
    CHECK(r.rows[0][0] == Value{std::int64_t{3}});
    CHECK(r.rows[0][1] == Value{std::int64_t{2}});
    CHECK(r.rows[0][2] == Value{std::int64_t{4}});
    CHECK(r.rows[0][3] == Value{2.0});
}

TEST_CASE("comparisons with null are false, IS NULL works") {
    auto db = load_database_from_json(R"({
      "tables": [{"name":"n","columns":[{"name":"a","type":"integer"}],"rows":[[1],[null],[3]]}]})",
                                      "fx");
    CHECK(run_sql("SELECT a FROM n WHERE a = 1", *db, Dialect::sqlite).rows.size() == 1);
    CHECK(run_sql("SELECT a FROM n WHERE a <> 1", *db, Dialect::sqlite).rows.size() == 1);
    CHECK(run_sql("SELECT a FROM n WHERE a IS NULL", *db, Dialect::sqlite).rows.size() == 1);
    CHECK(run_sql("SELECT a FROM n WHERE a IS NOT NULL", *db, Dialect::sqlite).rows.size() == 2);
}

TEST_CASE("window row_number and rank over a single key") {
    auto db = load_database_from_json(R"({
      "tables": [{"name":"s","columns":[{"name":"grp","type":"text"},{"name":"v","type":"integer"}],
                  "rows":[["a",10],["a",30],["a",30],["b",5]]}]})", "fx");
    auto r = run_sql(
        "SELECT grp, v, row_number() OVER (PARTITION BY grp ORDER BY v DESC) AS rn, "
        "rank() OVER (PARTITION BY grp ORDER BY v DESC) AS rk FROM s ORDER BY grp, v DESC",
        *db, Dialect::postgres);
    REQUIRE(r.rows.size() == 4);
    // group a sorted desc: 30,30,10 -> rn 1,2,3 rk 1,1,3
    CHECK(r.rows[0][3] == Value{std::int64_t{1}});
    CHECK(r.rows[1][3] == Value{std::int64_t{1}});
    CHECK(r.rows[2][3] == Value{std::int64_t{3}});
    CHECK(r.rows[2][2] == Value{std::int64_t{3}});
    CHECK(r.rows[3][2] == Value{std::int64_t{1}});
}

TEST_CASE("FILTER clause execution is flagged unsupported") {
    auto db = toy_db();
    auto m = mode_for(Dialect::postgres);
    auto ast = parse_sql("SELECT count(a) FILTER (WHERE b > 1) FROM t", m);
    try {
        execute(*ast, *db, m);
        FAIL("expected unsupported-feature");
    } catch (const EngineError& e) {
        CHECK(e.error_class() == EngineErrorClass::unsupported_feature);
    }
}

TEST_CASE("mysql table names are case-sensitive, others are not") {
    auto db = load_database_from_json(
        R"({"tables": [{"name":"Campuses","columns":[{"name":"id","type":"integer"}],"rows":[[1]]}]})",
        "fx");
    CHECK_NOTHROW(run_sql("SELECT id FROM campuses", *db, Dialect::sqlite));
    CHECK_NOTHROW(run_sql("SELECT id FROM CAMPUSES", *db, Dialect::postgres));
    CHECK_NOTHROW(run_sql("SELECT id FROM Campuses", *db, Dialect::mysql));
    CHECK_THROWS_AS(run_sql("SELECT id FROM campuses", *db, Dialect::mysql), EngineError);
}

TEST_CASE("distinct dedupes and unknown column errors") {
    auto db = load_database_from_json(R"({
      "tables": [{"name":"d","columns":[{"name":"x","type":"integer"}],"rows":[[1],[1],[2]]}]})",
                                      "fx");
    auto r = run_sql("SELECT DISTINCT x FROM d ORDER BY x", *db, Dialect::sqlite);
    CHECK(r.rows.size() == 2);
    try {
        run_sql("SELECT missing FROM d", *db, Dialect::sqlite);
        FAIL("expected unknown column");
    } catch (const EngineError& e) {
        CHECK(e.error_class() == EngineErrorClass::unknown_column);
    }
}

// ---- check_conformance -------------------------------------------------------

TEST_CASE("conformance: backquotes in postgres mode are one violation") {
    auto v = check_conformance("SELECT `a` FROM `t`", mode_for(Dialect::postgres));
    REQUIRE(!v.empty());
    CHECK(v[0].construct == "backquote-identifier");
    CHECK(v[0].dialect == Dialect::postgres);
    CHECK(v[0].length > 0);
}

TEST_CASE("conformance: LIMIT in oracle mode is a limit-style violation") {
    auto v = check_conformance("SELECT a FROM t LIMIT 5", mode_for(Dialect::oracle));
    REQUIRE(v.size() == 1);
    CHECK(v[0].construct == "limit-style");
}

TEST_CASE("conformance: conforming sqlite query yields an empty list") {
    auto v = check_conformance("SELECT a, count(*) FROM t WHERE b > 1 GROUP BY a ORDER BY a LIMIT 3",
                               mode_for(Dialect::sqlite));
    CHECK(v.empty());
}

TEST_CASE("conformance: syntax errors surface as a violation entry") {
    auto v = check_conformance("SELEC a FROM t", mode_for(Dialect::sqlite));
    REQUIRE(!v.empty());
    CHECK(v[0].construct == "parse");
}

TEST_CASE("conformance matches parse_sql acceptance on a construct matrix") {
    const std::string queries[] = {
        "SELECT a FROM t WHERE b::INTEGER > 1",
        "SELECT a FROM t WHERE c ILIKE 'x%'",
        "SELECT `a` FROM t",
        "SELECT a FROM t LIMIT 3",
        "SELECT a FROM t FETCH FIRST 3 ROWS ONLY",
        "SELECT DISTINCT a FROM t ORDER BY b",
        "SELECT count(a) FILTER (WHERE b > 1) FROM t",
        "SELECT a FROM t",
    };
    for (Dialect d : all_dialects()) {
        auto m = mode_for(d);
        for (const auto& q : queries) {
            bool accepted = true;
            try {
                parse_sql(q, m);
            } catch (const EngineError&) {
                accepted = false;
            }
            auto v = check_conformance(q, m);
            CHECK_MESSAGE(v.empty() == accepted,
                          "conformance/parse disagree on '" << q << "' for " << dialect_tag(d));
        }
    }
}

// ---- invariants & properties ----------------------------------------------

TEST_CASE("execution is deterministic") {
    auto db = movie_db();
    std::string sql =
        "SELECT T2.director_name, avg(T1.rating_score) FROM ratings AS T1 "
        "JOIN movies AS T2 ON T1.movie_id = T2.movie_id GROUP BY T2.director_name "
        "ORDER BY T2.director_name";
    auto a = run_sql(sql, *db, Dialect::sqlite);
    auto b = run_sql(sql, *db, Dialect::sqlite);
    CHECK(a == b);
}

TEST_CASE("property: ORDER BY agrees with an independent sort oracle") {
    std::mt19937_64 rng(0x5eed0002);
    for (int iter = 0; iter < 60; ++iter) {
        std::vector<std::int64_t> values;
        int n = 1 + static_cast<int>(rng() % 40);
        std::string rows;
        for (int i = 0; i < n; ++i) {
            std::int64_t v = static_cast<std::int64_t>(rng() % 100) - 50;
            values.push_back(v);
            if (i) rows += ",";
            rows += "[" + std::to_string(v) + "]";
        }
        auto db = load_database_from_json(
            R"({"tables": [{"name":"t","columns":[{"name":"a","type":"integer"}],"rows":[)" + rows +
                "]}]}",
            "fx");
        bool desc = rng() % 2 == 0;
        auto result = run_sql(std::string("SELECT a FROM t ORDER BY a ") + (desc ? "DESC" : "ASC"),
                              *db, Dialect::sqlite);
        // independent oracle
        std::vector<std::int64_t> expected = values;
        std::stable_sort(expected.begin(), expected.end());
        if (desc) std::reverse(expected.begin(), expected.end());
        REQUIRE(result.rows.size() == expected.size());
        for (std::size_t i = 0; i < expected.size(); ++i)
            CHECK(result.rows[i][0] == Value{expected[i]});
    }
}

namespace {

// Generates dialect-neutral ASTs for grammar-subset and round-trip properties.
ast::SelectPtr random_neutral_select(std::mt19937_64& rng, int depth = 0) {
    using namespace ast;
    auto stmt = std::make_unique<SelectStmt>();
    auto col = [&]() {
        static const char* names[] = {"a", "b", "c"};
        return column_ref(rng() % 2 ? "t" : "", names[rng() % 3]);
    };
    auto literal = [&]() -> ExprPtr {
        if (rng() % 2) return int_literal(static_cast<std::int64_t>(rng() % 100));
        return string_literal("s" + std::to_string(rng() % 5));
    };
    auto simple_expr = [&]() -> ExprPtr {
        switch (rng() % 4) {
            case 0: return col();
            case 1: return literal();
            case 2: return binary(BinOp::add, col(), int_literal(static_cast<std::int64_t>(rng() % 9)));
            default: {
                auto agg = make_expr(Expr::Kind::aggregate);
                agg->agg = AggFunc::count;
                agg->agg_star = true;
                return agg;
            }
        }
    };
    int items = 1 + static_cast<int>(rng() % 3);
    bool any_agg = false;
    for (int i = 0; i < items; ++i) {
        auto e = simple_expr();
        if (contains_aggregate(*e)) any_agg = true;
        std::string alias = (rng() % 3 == 0) ? "al" + std::to_string(i) : "";
        stmt->items.push_back({std::move(e), alias});
    }
    stmt->has_from = true;
    stmt->from.table = "t";
    if (rng() % 2) stmt->from.alias = "t";
    if (rng() % 2) {
        auto cmp = binary(static_cast<BinOp>(rng() % 6), col(),
                          int_literal(static_cast<std::int64_t>(rng() % 50)));
        stmt->where = std::move(cmp);
    }
    if (any_agg && rng() % 2) stmt->group_by.push_back(col());
    if (rng() % 2 && !any_agg) {
        OrderItem o;
        o.expr = col();
        o.desc = rng() % 2;
        stmt->order_by.push_back(std::move(o));
    }
    if (rng() % 3 == 0) stmt->limit = static_cast<std::int64_t>(rng() % 10 + 1);
    (void)depth;
    return stmt;
}

}  // namespace

TEST_CASE("property: queries without mysql-only constructs parse in both mysql and sqlite") {
    std::mt19937_64 rng(0x5eed0003);
    auto mysql = mode_for(Dialect::mysql);
    auto sqlite = mode_for(Dialect::sqlite);
    for (int i = 0; i < 300; ++i) {
        auto stmt = random_neutral_select(rng);
        std::string printed = print_sql(*stmt, mysql);
        ast::SelectPtr in_mysql, in_sqlite;
        REQUIRE_NOTHROW(in_mysql = parse_sql(printed, mysql));
        REQUIRE_NOTHROW(in_sqlite = parse_sql(printed, sqlite));
        CHECK(ast::select_equal(*in_mysql, *in_sqlite));
    }
}

TEST_CASE("property: print-then-parse is the identity on the AST") {
    std::mt19937_64 rng(0x5eed0004);
    for (int i = 0; i < 300; ++i) {
        for (Dialect d : all_dialects()) {
            auto m = mode_for(d);
            auto stmt = random_neutral_select(rng);
            if (d == Dialect::oracle && stmt->limit) stmt->fetch_first_style = true;
            if (d == Dialect::postgres && rng() % 2) {
                // decorate with a postgres-only postfix cast
                auto cast = ast::make_expr(ast::Expr::Kind::cast);
                cast->cast_postfix = true;
                cast->cast_target = ast::CastTarget::to_float;
                cast->lhs = std::move(stmt->items[0].expr);
                stmt->items[0].expr = std::move(cast);
            }
            std::string printed = print_sql(*stmt, m);
            auto back = parse_sql(printed, m);
            REQUIRE_MESSAGE(ast::select_equal(*stmt, *back), "round-trip failed for: " << printed);
            CHECK(print_sql(*back, m) == printed);
        }
    }
}

TEST_CASE("property: strict-group-by failures run clean with strict mode off") {
    std::mt19937_64 rng(0x5eed0005);
    auto db = movie_db();
    DialectMode strict = mode_for(Dialect::mysql);
    DialectMode lax = strict;
    lax.strict_group_by = false;
    const std::string queries[] = {
        "SELECT director_name, count(*) FROM movies GROUP BY release_year",
        "SELECT movie_title, avg(movie_id) FROM movies",
        "SELECT release_year, movie_title FROM movies GROUP BY release_year",
        "SELECT director_name, release_year, count(*) FROM movies GROUP BY director_name",
    };
    for (const auto& q : queries) {
        auto ast_strict = parse_sql(q, strict);
        bool strict_failed_with_group_error = false;
        try {
            execute(*ast_strict, *db, strict);
        } catch (const EngineError& e) {
            if (e.error_class() == EngineErrorClass::strict_group_by)
                strict_failed_with_group_error = true;
            else
                throw;
        }
        REQUIRE(strict_failed_with_group_error);
        auto ast_lax = parse_sql(q, lax);
        CHECK_NOTHROW(execute(*ast_lax, *db, lax));
    }
    (void)rng;
}

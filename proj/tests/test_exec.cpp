#include <random>

#include "doctest.h"
#include "dforge/exec/gateway.hpp"
#include "dforge/exec/pgwire.hpp"

using namespace dforge;
using namespace dforge::exec;
using engine::ResultTable;
using engine::Value;

namespace {

ExecutorGateway embedded_gateway(Dialect d) {
    ExecutorGateway gw;
    gw.register_backend(
        std::make_unique<EmbeddedBackend>("fixtures/db", engine::DialectMode::for_dialect(d)));
    return gw;
}

ResultTable table_of(std::vector<std::vector<Value>> rows) {
    ResultTable t;
    if (!rows.empty())
        for (std::size_t i = 0; i < rows[0].size(); ++i) t.columns.push_back("c" + std::to_string(i));
    t.rows = std::move(rows);
    return t;
}

}  // namespace

TEST_CASE("valid count query returns ok with one row") {
    auto gw = embedded_gateway(Dialect::sqlite);
    auto r = gw.run("SELECT count(*) FROM head", Dialect::sqlite, "department_management");
    CHECK(r.status == ExecStatus::ok);
    REQUIRE(r.result);
    CHECK(r.result->rows.size() == 1);
    CHECK(r.result->rows[0][0] == Value{std::int64_t{6}});
    CHECK(r.elapsed_s >= 0.0);
    CHECK(r.error_class.empty());
}

TEST_CASE("missing table reports unknown-object") {
    auto gw = embedded_gateway(Dialect::sqlite);
    auto r = gw.run("SELECT count(*) FROM nowhere", Dialect::sqlite, "department_management");
    CHECK(r.status == ExecStatus::error);
    CHECK(r.error_class == "unknown-object");
    CHECK(!r.raw_error.empty());
    CHECK(!r.result);
}

TEST_CASE("unknown backend and unknown db_ref fail at the gateway") {
    auto gw = embedded_gateway(Dialect::sqlite);
    CHECK_THROWS_AS(gw.run("SELECT 1", Dialect::oracle, "department_management"), GatewayError);
    auto r = gw.run("SELECT 1", Dialect::sqlite, "no_such_db");
    CHECK(r.status == ExecStatus::error);
    CHECK(r.error_class == "unknown-object");
}

TEST_CASE("subprocess sleep stub times out") {
    ExecutorGateway gw;
    gw.register_backend(
        std::make_unique<SubprocessBackend>(Dialect::mysql, "sleep 5; echo done"));
    auto r = gw.run("SELECT 1", Dialect::mysql, "ignored", 0.05);
    CHECK(r.status == ExecStatus::timeout);
    CHECK(r.error_class == "timeout");
}

TEST_CASE("subprocess backend parses tab-separated rows and classifies errors") {
    SubprocessBackend ok(Dialect::mysql, "printf 'a\\t1\\nb\\t2\\n'");
    auto r = ok.run("SELECT 1", "db", 5.0);
    CHECK(r.status == ExecStatus::ok);
    REQUIRE(r.result);
    REQUIRE(r.result->rows.size() == 2);
    CHECK(r.result->rows[0][0] == Value{std::string("a")});
    CHECK(r.result->rows[0][1] == Value{std::int64_t{1}});

    SubprocessBackend bad(Dialect::mysql,
                          "echo \"ERROR 1146 (42S02): Table 'd.t' doesn't exist\" >&2; exit 1");
    auto e = bad.run("SELECT 1", "db", 5.0);
    CHECK(e.status == ExecStatus::error);
    CHECK(e.error_class == "unknown-object");
    CHECK(e.raw_error.find("1146") != std::string::npos);
}

TEST_CASE("classify_error maps the appendix mysql strict message") {
    std::string raw =
        "Error 1140 (42000): In aggregated query without GROUP BY, expression #2 of SELECT list "
        "contains nonaggregated column 'movie_platform.T2.director_name'; this is incompatible "
        "with sql_mode=only_full_group_by";
    CHECK(classify_error(raw, Dialect::mysql) == "strict-group-by");
}

TEST_CASE("classify_error maps documented postgres messages") {
    CHECK(classify_error("ERROR:  relation \"heads\" does not exist", Dialect::postgres) ==
          "unknown-object");
    CHECK(classify_error("ERROR:  column \"agee\" does not exist", Dialect::postgres) ==
          "unknown-object");
    CHECK(classify_error("ERROR:  operator does not exist: text > integer", Dialect::postgres) ==
          "type");
    CHECK(classify_error("ERROR:  syntax error at or near \"FORM\"", Dialect::postgres) == "syntax");
    CHECK(classify_error("ERROR:  invalid input syntax for type integer: \"abc\"",
                         Dialect::postgres) == "type");
    CHECK(classify_error(
              "ERROR:  column \"t.b\" must appear in the GROUP BY clause or be used in an "
              "aggregate function",
              Dialect::postgres) == "strict-group-by");
}

TEST_CASE("classify_error maps oracle and sqlite codes and falls back to runtime") {
    CHECK(classify_error("ORA-00942: table or view does not exist", Dialect::oracle) ==
          "unknown-object");
    CHECK(classify_error("ORA-00933: SQL command not properly ended", Dialect::oracle) == "syntax");
    CHECK(classify_error("ORA-01722: invalid number", Dialect::oracle) == "type");
    CHECK(classify_error("no such table: heads", Dialect::sqlite) == "unknown-object");
    CHECK(classify_error("complete gibberish nobody can place", Dialect::mysql) == "runtime");
    CHECK(classify_error("complete gibberish nobody can place", Dialect::sqlite) == "runtime");
}

TEST_CASE("classify_error is deterministic") {
    std::string raw = "ERROR:  relation \"x\" does not exist";
    for (int i = 0; i < 10; ++i)
        CHECK(classify_error(raw, Dialect::postgres) == classify_error(raw, Dialect::postgres));
}

TEST_CASE("reward follows policy") {
    ExecReport ok;
    ok.status = ExecStatus::ok;
    ok.result = table_of({{Value{std::int64_t{1}}}});
    ExecReport err;
    err.status = ExecStatus::error;
    err.error_class = "syntax";

    auto gold = table_of({{Value{std::int64_t{2}}}});
    CHECK(reward(ok, std::nullopt, RewardMode::exec_only) == 1);
    CHECK(reward(err, std::nullopt, RewardMode::exec_only) == 0);
    CHECK(reward(err, gold, RewardMode::exec_and_match) == 0);
    CHECK(reward(ok, gold, RewardMode::exec_and_match) == 0);  // result differs from gold
    CHECK(reward(ok, ok.result, RewardMode::exec_and_match) == 1);
    CHECK_THROWS_AS(reward(ok, std::nullopt, RewardMode::exec_and_match), GatewayError);
}

TEST_CASE("compare_results handles order sensitivity and tolerance") {
    auto a = table_of({{Value{std::int64_t{1}}}, {Value{std::int64_t{2}}}});
    auto b = table_of({{Value{std::int64_t{2}}}, {Value{std::int64_t{1}}}});
    ComparePolicy insensitive;
    ComparePolicy sensitive;
    sensitive.order_sensitive = true;
    CHECK(compare_results(a, b, insensitive));
    CHECK(!compare_results(a, b, sensitive));

    auto x = table_of({{Value{0.30000000000000004}}});
    auto y = table_of({{Value{0.3}}});
    CHECK(compare_results(x, y, insensitive));

    // empty result sets compare equal
    CHECK(compare_results(table_of({}), table_of({}), insensitive));

    // int and float cells compare numerically
    CHECK(compare_results(table_of({{Value{std::int64_t{24}}}}), table_of({{Value{24.0}}}),
                          insensitive));
}

TEST_CASE("policy_for_query derives order sensitivity from top-level ORDER BY") {
    CHECK(policy_for_query("SELECT a FROM t ORDER BY a").order_sensitive);
    CHECK(!policy_for_query("SELECT a FROM t").order_sensitive);
    CHECK(!policy_for_query("SELECT a FROM (SELECT a FROM t ORDER BY a) AS s").order_sensitive);
    CHECK(!policy_for_query("SELECT a FROM t WHERE c = 'ORDER BY'").order_sensitive);
}

TEST_CASE("profile_execution aggregates import and exec timing") {
    auto gw = embedded_gateway(Dialect::sqlite);
    std::vector<std::pair<std::string, std::string>> batch;
    for (int i = 0; i < 10; ++i) batch.push_back({"SELECT count(*) FROM head", "department_management"});
    auto stats = gw.profile_execution(batch, Dialect::sqlite);
    CHECK(stats.executions == 10);
    CHECK(stats.imports == 1);
    CHECK(stats.avg_import_s > 0.0);
    CHECK(stats.avg_exec_s > 0.0);
    CHECK(stats.total_s >= stats.avg_exec_s * 10);
    CHECK_THROWS_AS(gw.profile_execution({}, Dialect::sqlite), GatewayError);
}

TEST_CASE("embedded reports are identical across runs except elapsed") {
    auto gw = embedded_gateway(Dialect::mysql);
    auto a = gw.run("SELECT avg(rating_score), director_name FROM ratings JOIN movies ON "
                    "ratings.movie_id = movies.movie_id",
                    Dialect::mysql, "movie_platform");
    auto b = gw.run("SELECT avg(rating_score), director_name FROM ratings JOIN movies ON "
                    "ratings.movie_id = movies.movie_id",
                    Dialect::mysql, "movie_platform");
    CHECK(a.status == b.status);
    CHECK(a.error_class == b.error_class);
    CHECK(a.raw_error == b.raw_error);
    CHECK(a.result == b.result);
}

TEST_CASE("property: reward is binary and exec-and-match never exceeds exec-only") {
    std::mt19937_64 rng(0x5eed0011);
    for (int i = 0; i < 1200; ++i) {
        ExecReport r;
        switch (rng() % 3) {
            case 0:
                r.status = ExecStatus::ok;
                r.result = table_of({{Value{static_cast<std::int64_t>(rng() % 3)}}});
                break;
            case 1:
                r.status = ExecStatus::error;
                r.error_class = "runtime";
                break;
            default:
                r.status = ExecStatus::timeout;
                r.error_class = "timeout";
                break;
        }
        auto gold = table_of({{Value{static_cast<std::int64_t>(rng() % 3)}}});
        int only = reward(r, gold, RewardMode::exec_only);
        int match = reward(r, gold, RewardMode::exec_and_match);
        CHECK((only == 0 || only == 1));
        CHECK((match == 0 || match == 1));
        CHECK(match <= only);
    }
}

TEST_CASE("property: order-sensitive compare at tolerance 0 is an equivalence relation") {
    std::mt19937_64 rng(0x5eed0012);
    ComparePolicy strict;
    strict.order_sensitive = true;
    strict.float_tolerance = 0.0;
    auto random_table = [&]() {
        int rows = static_cast<int>(rng() % 4);
        std::vector<std::vector<Value>> data;
        for (int r = 0; r < rows; ++r) {
            std::vector<Value> row;
            for (int c = 0; c < 2; ++c) {
                switch (rng() % 4) {
                    case 0: row.push_back(std::monostate{}); break;
                    case 1: row.push_back(static_cast<std::int64_t>(rng() % 3)); break;
                    case 2: row.push_back(static_cast<double>(rng() % 3) / 2.0); break;
                    default: row.push_back(std::string(1, static_cast<char>('a' + rng() % 3)));
                }
            }
            data.push_back(std::move(row));
        }
        return table_of(std::move(data));
    };
    for (int i = 0; i < 400; ++i) {
        auto a = random_table(), b = random_table(), c = random_table();
        CHECK(compare_results(a, a, strict));                       // reflexive
        CHECK(compare_results(a, b, strict) == compare_results(b, a, strict));  // symmetric
        if (compare_results(a, b, strict) && compare_results(b, c, strict))
            CHECK(compare_results(a, c, strict));                   // transitive
    }
}

// ---- postgres wire codec ----------------------------------------------------

TEST_CASE("pgwire codec frames startup, query and password messages") {
    using namespace pgwire;
    std::string s = encode_startup("alice", "db1");
    // length prefix covers the whole message
    REQUIRE(s.size() >= 8);
    CHECK(static_cast<unsigned char>(s[3]) == s.size());
    CHECK(s.find("user") != std::string::npos);
    CHECK(s.find("alice") != std::string::npos);
    CHECK(s.find("database") != std::string::npos);

    std::string q = encode_query("SELECT 1");
    CHECK(q[0] == 'Q');
    CHECK(q.back() == '\0');
    CHECK(q.substr(5, 8) == "SELECT 1");

    std::string p = encode_password("hunter2");
    CHECK(p[0] == 'p');
    CHECK(p.substr(5, 7) == "hunter2");
}

TEST_CASE("pgwire codec decodes framed messages incrementally") {
    using namespace pgwire;
    // 'Z' ReadyForQuery with payload "I"
    std::string wire;
    wire += 'Z';
    wire += '\0';
    wire += '\0';
    wire += '\0';
    wire += static_cast<char>(5);
    wire += 'I';
    std::string buffer = wire.substr(0, 3);
    CHECK(!try_decode(buffer));
    buffer += wire.substr(3);
    auto msg = try_decode(buffer);
    REQUIRE(msg);
    CHECK(msg->type == 'Z');
    CHECK(msg->payload == "I");
    CHECK(buffer.empty());
}

TEST_CASE("pgwire codec parses error responses and data rows") {
    using namespace pgwire;
    std::string err;
    err += 'S';
    err += "ERROR";
    err += '\0';
    err += 'C';
    err += "42P01";
    err += '\0';
    err += 'M';
    err += "relation \"missing\" does not exist";
    err += '\0';
    err += '\0';
    CHECK(parse_error_message(err) == "42P01: relation \"missing\" does not exist");

    // DataRow: 2 columns, "7" and NULL
    std::string row;
    row += '\0';
    row += static_cast<char>(2);
    row += '\0'; row += '\0'; row += '\0'; row += static_cast<char>(1);
    row += '7';
    row += '\xFF'; row += '\xFF'; row += '\xFF'; row += '\xFF';
    auto cells = parse_data_row(row);
    REQUIRE(cells.size() == 2);
    CHECK(*cells[0] == "7");
    CHECK(!cells[1]);
}

TEST_CASE("pgwire dsn parser handles quoting") {
    auto params = pgwire::parse_dsn("host=db.example port=5433 user=bob password='p w' dbname={db}");
    CHECK(params["host"] == "db.example");
    CHECK(params["port"] == "5433");
    CHECK(params["password"] == "p w");
    CHECK(params["dbname"] == "{db}");
}

TEST_CASE("pgwire backend reports a connection error against a closed port") {
    PgWireBackend backend("host=127.0.0.1 port=1 user=x");
    auto r = backend.run("SELECT 1", "db", 0.5);
    CHECK(r.status == ExecStatus::error);
    CHECK(!r.raw_error.empty());
}

#include <random>

#include "doctest.h"
#include "dforge/core.hpp"

using namespace dforge;

TEST_CASE("dialect tags parse case-insensitively") {
    CHECK(parse_dialect("PostgreSQL") == Dialect::postgres);
    CHECK(parse_dialect("postgres") == Dialect::postgres);
    CHECK(parse_dialect("MYSQL") == Dialect::mysql);
    CHECK(parse_dialect("SQLite") == Dialect::sqlite);
    CHECK(parse_dialect("Oracle") == Dialect::oracle);
    CHECK_THROWS_WITH_AS(parse_dialect("duckdb"),
                         "unknown dialect 'duckdb' (valid: sqlite, postgres, mysql, oracle)",
                         FormatError);
}

TEST_CASE("record parses a minimal valid line") {
    std::string line =
        R"({"db_id":"d1","dialect":"postgres","id":"r1","provenance":"translated",)"
        R"("question_id":"q1","round":0,"sql":"SELECT 1","status":"untested"})";
    DatasetRecord r = parse_record(line);
    CHECK(r.id == "r1");
    CHECK(r.status == RecordStatus::untested);
    CHECK(r.dialect == Dialect::postgres);
    // canonical re-serialization is byte-identical
    CHECK(serialize_record(r) == line);
}

TEST_CASE("record line missing sql fails naming the field") {
    std::string line =
        R"({"db_id":"d1","dialect":"postgres","id":"r1","provenance":"manual",)"
        R"("question_id":"q1","round":0,"status":"untested"})";
    CHECK_THROWS_WITH_AS(parse_record(line), "missing field sql", FormatError);
}

TEST_CASE("negative round is rejected") {
    std::string line =
        R"({"db_id":"d1","dialect":"mysql","id":"r1","provenance":"manual",)"
        R"("question_id":"q1","round":-1,"sql":"SELECT 1","status":"untested"})";
    CHECK_THROWS_AS(parse_record(line), FormatError);
}

TEST_CASE("two records differing only in id differ only at the id field") {
    DatasetRecord a{"a", "q1", "d1", Dialect::mysql, "SELECT 1", 0, RecordStatus::valid,
                    Provenance::sampled};
    DatasetRecord b = a;
    b.id = "b";
    std::string la = serialize_record(a), lb = serialize_record(b);
    CHECK(la != lb);
    // exactly one maximal differing span, and it covers the id value
    std::size_t prefix = 0;
    while (prefix < la.size() && la[prefix] == lb[prefix]) ++prefix;
    std::size_t sa = la.size(), sb = lb.size();
    while (sa > prefix && sb > prefix && la[sa - 1] == lb[sb - 1]) {
        --sa;
        --sb;
    }
    CHECK(la.substr(prefix, sa - prefix) == "a");
    CHECK(lb.substr(prefix, sb - prefix) == "b");
}

TEST_CASE("unicode question text serializes to a single escaped line") {
    NLQuestion q{"q1", "Combien de têtes ont plus de 56 ans?\nDeux lignes", "db",
                 QuestionSource::seed};
    std::string line = serialize_question(q);
    CHECK(line.find('\n') == std::string::npos);
    NLQuestion back = parse_question(line);
    CHECK(back == q);
}

namespace {

DatasetRecord random_record(std::mt19937_64& rng) {
    auto pick = [&](std::int64_t n) { return static_cast<std::int64_t>(rng() % n); };
    static const char* snippets[] = {
        "SELECT count(*) FROM head",
        "SELECT a, b FROM t WHERE a > 3 ORDER BY b DESC",
        "SELECT 'quoted ''text''' FROM t",
        "SELECT x FROM t WHERE note LIKE '%\n" "escaped%'",
        "SELECT élève FROM table_2",
    };
    DatasetRecord r;
    r.id = "rec-" + std::to_string(rng());
    r.question_id = "q-" + std::to_string(pick(1000));
    r.db_id = "db-" + std::to_string(pick(50));
    r.dialect = all_dialects()[static_cast<std::size_t>(pick(4))];
    r.sql = snippets[pick(5)];
    r.round = static_cast<int>(pick(5));
    r.status = static_cast<RecordStatus>(pick(3));
    r.provenance = static_cast<Provenance>(pick(4));
    return r;
}

}  // namespace

TEST_CASE("property: parse ∘ serialize is identity over generated records") {
    std::mt19937_64 rng(0x5eed0001);
    for (int i = 0; i < 1200; ++i) {
        DatasetRecord r = random_record(rng);
        std::string line = serialize_record(r);
        CHECK(line.find('\n') == std::string::npos);
        DatasetRecord back = parse_record(line);
        REQUIRE(back == r);
        // serialized form is canonical: a second round trip is byte-identical
        REQUIRE(serialize_record(back) == line);
    }
}

TEST_CASE("record writer rejects duplicate ids") {
    std::string path = "/tmp/dforge_test_records.jsonl";
    RecordWriter w(path);
    DatasetRecord r{"dup", "q", "d", Dialect::sqlite, "SELECT 1", 0, RecordStatus::untested,
                    Provenance::manual};
    w.write(r);
    CHECK_THROWS_AS(w.write(r), FormatError);
}

TEST_CASE("preference record invariants are validated") {
    PreferenceRecord p;
    p.id = "p1";
    p.question_id = "q1";
    p.db_id = "d1";
    p.dialect = Dialect::postgres;
    p.chosen = "SELECT a FROM t WHERE x = 24";
    p.rejected = "SELECT a FROM t WHERE x > 24";
    p.chosen_status = "ok";
    p.rejected_status = "ok";
    p.rejected_error_class = "wrong-result";
    CHECK_NOTHROW(p.validate());
    std::string line = serialize_preference(p);
    CHECK(parse_preference(line) == p);

    PreferenceRecord bad = p;
    bad.rejected = bad.chosen;
    CHECK_THROWS_AS(bad.validate(), FormatError);

    PreferenceRecord bad2 = p;
    bad2.chosen_status = "error";
    CHECK_THROWS_AS(bad2.validate(), FormatError);
}

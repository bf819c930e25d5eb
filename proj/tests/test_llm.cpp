#include <atomic>

#include "doctest.h"
#include "dforge/llm/gateway.hpp"

using namespace dforge;
using namespace dforge::llm;

namespace {

SchemaInfo head_schema() {
    SchemaInfo s;
    s.tables.push_back({"head", {{"head_id", "integer"}, {"name", "text"}, {"age", "integer"}}});
    return s;
}

PromptLibrary library() { return PromptLibrary("templates"); }

}  // namespace

TEST_CASE("translation prompt carries the postgres rule list") {
    auto prompt = library().render_translation("SELECT count(*) FROM head WHERE age > 56",
                                               "How many heads are older than 56?", head_schema(),
                                               "department_management", Dialect::postgres, {});
    CHECK(prompt.find("add the table name before each column") != std::string::npos);
    CHECK(prompt.find("SELECT count(*) FROM head WHERE age > 56") != std::string::npos);
    CHECK(prompt.find("How many heads are older than 56?") != std::string::npos);
    CHECK(prompt.find("head: head_id, name, age") != std::string::npos);
    CHECK(prompt.find("{{") == std::string::npos);  // every placeholder filled
}

TEST_CASE("mysql translation prompt carries the backquote rule") {
    auto prompt = library().render_translation("SELECT 1", "q", head_schema(), "db", Dialect::mysql, {});
    CHECK(prompt.find("Use backquotes for table name") != std::string::npos);
}

TEST_CASE("a prior error appears in the prompt exactly once") {
    std::string error_text = "ERROR:  relation \"heads\" does not exist";
    auto prompt = library().render_translation(
        "SELECT 1", "q", head_schema(), "db", Dialect::postgres,
        {{"SELECT count(*) FROM heads", error_text}});
    std::size_t first = prompt.find(error_text);
    REQUIRE(first != std::string::npos);
    CHECK(prompt.find(error_text, first + 1) == std::string::npos);
    CHECK(prompt.find("SELECT count(*) FROM heads") != std::string::npos);
}

TEST_CASE("translation to the source dialect is rejected") {
    CHECK_THROWS_AS(
        library().render_translation("SELECT 1", "q", head_schema(), "db", Dialect::sqlite, {}),
        FormatError);
}

TEST_CASE("rendered prompts are pure functions of their inputs") {
    auto a = library().render_translation("SELECT 1", "q", head_schema(), "db", Dialect::mysql, {});
    auto b = library().render_translation("SELECT 1", "q", head_schema(), "db", Dialect::mysql, {});
    CHECK(a == b);
    CHECK(!library().template_digest("translate_mysql").empty());
}

TEST_CASE("question-gen prompt embeds all rows when fewer than the cap") {
    auto db = engine::load_database_from_json(R"({
      "tables": [{"name":"t","columns":[{"name":"a","type":"integer"},{"name":"b","type":"text"}],
                  "rows":[[1,"alpha"],[2,"beta"],[3,"gamma"]]}]})", "qdb");
    auto prompt = library().render_question_gen(*db, 4, 5);
    CHECK(prompt.find("alpha") != std::string::npos);
    CHECK(prompt.find("beta") != std::string::npos);
    CHECK(prompt.find("gamma") != std::string::npos);
    CHECK(prompt.find("Write 4 diverse questions") != std::string::npos);
}

TEST_CASE("question-gen prompt caps sample rows at K per table") {
    std::string rows;
    for (int i = 0; i < 10; ++i) {
        if (i) rows += ",";
        rows += "[" + std::to_string(i) + ",\"val" + std::to_string(i) + "\"]";
    }
    auto db = engine::load_database_from_json(
        R"({"tables": [{"name":"t","columns":[{"name":"a","type":"integer"},{"name":"b","type":"text"}],"rows":[)" +
            rows + "]}]}",
        "qdb");
    auto prompt = library().render_question_gen(*db, 3, 5);
    CHECK(prompt.find("val4") != std::string::npos);
    CHECK(prompt.find("val5") == std::string::npos);
}

TEST_CASE("question-gen on an empty database errors") {
    auto db = engine::load_database_from_json(
        R"({"tables": [{"name":"t","columns":[{"name":"a","type":"integer"}],"rows":[]}]})", "qdb");
    CHECK_THROWS_AS(library().render_question_gen(*db, 3), FormatError);
}

TEST_CASE("scripted model returns canned completions in order") {
    auto model = ScriptedModel::from_json_text(R"({
      "entries": [
        {"match": "first", "responses": [["a1","a2"],["b1","b2"]]},
        {"match": "", "responses": [["fallback"]]}
      ]})");
    GenRequest req;
    req.prompt = "the first prompt";
    req.n = 2;
    auto r1 = model->generate_once(req);
    CHECK(r1 == std::vector<std::string>{"a1", "a2"});
    auto r2 = model->generate_once(req);
    CHECK(r2 == std::vector<std::string>{"b1", "b2"});
    GenRequest other;
    other.prompt = "unmatched";
    other.n = 1;
    CHECK(model->generate_once(other) == std::vector<std::string>{"fallback"});
}

TEST_CASE("scripted model underrun is an explicit error, never recycling") {
    auto model = ScriptedModel::from_json_text(
        R"({"entries": [{"match": "x", "responses": [["only"]]}]})");
    GenRequest req;
    req.prompt = "x";
    req.n = 1;
    CHECK(model->generate_once(req) == std::vector<std::string>{"only"});
    try {
        model->generate_once(req);
        FAIL("expected underrun");
    } catch (const ModelError& e) {
        CHECK(e.kind() == ModelError::Kind::script_underrun);
    }
}

TEST_CASE("generate validates requests") {
    auto model =
        ScriptedModel::from_json_text(R"({"entries": [{"match": "", "responses": [["c"]]}]})");
    GenRequest bad;
    bad.prompt = "p";
    bad.n = 0;
    CHECK_THROWS_AS(generate(*model, bad), ModelError);
    GenRequest bad2;
    bad2.prompt = "p";
    bad2.top_p = 1.5;
    CHECK_THROWS_AS(generate(*model, bad2), ModelError);
}

namespace {

class FlakyModel : public GenerationModel {
public:
    explicit FlakyModel(int failures) : failures_(failures) {}
    std::vector<std::string> generate_once(const GenRequest& req) override {
        if (calls_++ < failures_)
            throw ModelError(ModelError::Kind::transport, "transient transport failure");
        return std::vector<std::string>(static_cast<std::size_t>(req.n), "ok");
    }
    std::string identity() const override { return "flaky"; }
    int calls() const { return calls_; }

private:
    int failures_;
    std::atomic<int> calls_{0};
};

}  // namespace

TEST_CASE("generate retries transient transport failures with bounded attempts") {
    FlakyModel recovers(2);
    GenRequest req;
    req.prompt = "p";
    req.n = 3;
    auto out = generate(recovers, req, 3, 0.001);
    CHECK(out.size() == 3);
    CHECK(recovers.calls() == 3);

    FlakyModel hopeless(10);
    CHECK_THROWS_AS(generate(hopeless, req, 3, 0.001), ModelError);
    CHECK(hopeless.calls() == 3);
}

TEST_CASE("scripted scores feed preference checks") {
    auto model = ScriptedModel::from_json_text(R"({
      "entries": [],
      "scores": [
        {"question": "opponent", "sql": "SELECT a", "score": -1.2},
        {"question": "", "sql": "SELECT b", "score": -3.4}
      ]})");
    CHECK(model->supports_score());
    CHECK(model->score("who is the opponent?", "SELECT a") == -1.2);
    CHECK(model->score("anything", "SELECT b") == -3.4);
    CHECK_THROWS_AS(model->score("who", "SELECT nope"), ModelError);
}

// ---- extract_sql ------------------------------------------------------------

TEST_CASE("extract_sql takes the last fenced code block") {
    std::string raw = "Here is the query:\n```sql\nSELECT 1\n```";
    CHECK(extract_sql(raw) == "SELECT 1");
    std::string two = "```sql\nSELECT old\n```\ntext\n```sql\nSELECT new\n```";
    CHECK(extract_sql(two) == "SELECT new");
}

TEST_CASE("extract_sql finds the first statement line in plain text") {
    std::string raw =
        "Who is the opponent on January 16?\nSELECT a FROM t;\nHope that helps!";
    CHECK(extract_sql(raw) == "SELECT a FROM t");
}

TEST_CASE("extract_sql errors when no SQL is present") {
    CHECK_THROWS_AS(extract_sql("I cannot answer."), ExtractError);
    CHECK_THROWS_AS(extract_sql(""), ExtractError);
}

TEST_CASE("extract_sql strips trailing semicolons and whitespace") {
    CHECK(extract_sql("SELECT a FROM t;   ") == "SELECT a FROM t");
    CHECK(extract_sql("  select a from t  ") == "select a from t");
    CHECK(extract_sql("WITH x AS (SELECT 1) SELECT 2;") == "WITH x AS (SELECT 1) SELECT 2");
}

TEST_CASE("extract_sql keeps semicolons inside string literals") {
    CHECK(extract_sql("SELECT a FROM t WHERE s = 'a;b';") == "SELECT a FROM t WHERE s = 'a;b'");
}

TEST_CASE("property: extract_sql is idempotent whenever it succeeds") {
    const std::string samples[] = {
        "```sql\nSELECT 1\n```",
        "Sure!\n```\nSELECT a\nFROM t\nWHERE x = 1\n```\nexplanation",
        "The answer:\nSELECT a FROM t;",
        "SELECT a FROM t WHERE s = 'x;y'",
        "noise\nmore noise\nselect 42\n\ntrailing",
        "```sql\nSELECT a\n\nFROM t\n```",
        "text before\n```sql\nno sql here\n```\nSELECT fallback FROM t;",
    };
    for (const auto& raw : samples) {
        std::string once = extract_sql(raw);
        std::string twice = extract_sql(once);
        CHECK_MESSAGE(once == twice, "not idempotent for: " << raw);
    }
}

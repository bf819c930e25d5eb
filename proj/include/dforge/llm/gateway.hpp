#pragma once

// Generation-model abstraction: prompt templating, sampled generation with
// decoding parameters, a deterministic scripted model for tests and desk
// runs, and SQL extraction from raw model output.

#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dforge/core.hpp"
#include "dforge/engine/database.hpp"

namespace dforge::llm {

struct GenRequest {
    std::string prompt;
    int n = 1;
    double temperature = 0.7;
    double top_p = 0.9;
    int top_k = 50;
    int max_tokens = 1024;
    std::vector<std::string> stop;

    void validate() const;  // n >= 1, 0 <= top_p <= 1, temperature >= 0
};

class ModelError : public std::runtime_error {
public:
    enum class Kind { transport, script_underrun, invalid_request, scorer_unavailable };
    ModelError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

class GenerationModel {
public:
    virtual ~GenerationModel() = default;
    // One transport attempt; retry policy lives in generate().
    virtual std::vector<std::string> generate_once(const GenRequest& req) = 0;
    // Log-probability surrogate for preference checks; throws
    // ModelError{scorer_unavailable} when the model exposes none.
    virtual double score(const std::string& question, const std::string& sql);
    virtual std::string identity() const = 0;
    virtual bool deterministic() const { return false; }
    virtual bool supports_score() const { return false; }
};

// Retrying front door: exactly req.n completions or a transport error after
// bounded exponential-backoff attempts.
std::vector<std::string> generate(GenerationModel& model, const GenRequest& req,
                                  int max_attempts = 3, double backoff_base_s = 0.25);

// Deterministic test double driven by a script file:
//   {"entries": [{"match": "<prompt substring>", "responses": [["c1","c2"], ...]}],
//    "scores":  [{"question": "<substring or empty>", "sql": "...", "score": -1.2}]}
// "match" may also be an array of substrings that must all appear in the
// prompt. Each matching call consumes the entry's next response list; an
// exhausted script raises script_underrun rather than silently recycling.
class ScriptedModel : public GenerationModel {
public:
    static std::shared_ptr<ScriptedModel> from_file(const std::string& path);
    static std::shared_ptr<ScriptedModel> from_json_text(const std::string& text,
                                                         const std::string& name = "scripted");

    std::vector<std::string> generate_once(const GenRequest& req) override;
    double score(const std::string& question, const std::string& sql) override;
    std::string identity() const override { return identity_; }
    bool deterministic() const override { return true; }
    bool supports_score() const override { return !scores_.empty(); }

private:
    struct Entry {
        std::vector<std::string> match;  // all must be substrings of the prompt
        std::vector<std::vector<std::string>> responses;
        std::size_t next = 0;
    };
    struct ScoreRow {
        std::string question;
        std::string sql;
        double score;
    };
    std::string identity_;
    std::vector<Entry> entries_;
    std::vector<ScoreRow> scores_;
    std::mutex mutex_;
};

// Token-bucket limiter shared by live-model transports.
class RateLimiter {
public:
    explicit RateLimiter(double requests_per_minute);
    void acquire();

private:
    double capacity_;
    double tokens_;
    double refill_per_s_;
    std::chrono::steady_clock::time_point last_;
    std::mutex mutex_;
};

struct HttpModelConfig {
    std::string endpoint;  // e.g. http://host:8000/v1/chat/completions
    std::string model;
    std::string key_env_var;  // environment variable holding the API key
    double rpm = 60.0;
};

// Chat-completion-style transport over HTTP.
class HttpModel : public GenerationModel {
public:
    explicit HttpModel(HttpModelConfig config);
    std::vector<std::string> generate_once(const GenRequest& req) override;
    std::string identity() const override { return "http:" + config_.model; }

private:
    HttpModelConfig config_;
    RateLimiter limiter_;
};

class ExtractError : public std::runtime_error {
public:
    explicit ExtractError(const std::string& what) : std::runtime_error(what) {}
};

// Pulls the SQL statement out of raw model output. Precedence: content of the
// last fenced code block that holds SQL, then the first line starting with
// SELECT/WITH through the end of the statement (terminating semicolon or
// blank line), then the whole trimmed text when it is itself a statement.
// Idempotent whenever it succeeds. Throws ExtractError when no SQL is found.
std::string extract_sql(const std::string& raw);

// ---- prompt templates --------------------------------------------------------

// Human-readable dialect name used inside prompts.
const char* dialect_display(Dialect d);

// Renders "table: col1, col2" lines for prompt embedding.
std::string format_schema(const SchemaInfo& schema);

class PromptLibrary {
public:
    explicit PromptLibrary(std::string template_dir);

    // Template files: translate_postgres.txt, translate_mysql.txt,
    // translate_oracle.txt, question_gen.txt, text2sql.txt
    std::string render_translation(const std::string& source_sql, const std::string& question,
                                   const SchemaInfo& schema, const std::string& db_id,
                                   Dialect target,
                                   const std::vector<std::pair<std::string, std::string>>& prior_errors,
                                   Dialect source = Dialect::sqlite) const;

    std::string render_question_gen(const engine::InMemoryDb& db, int questions, int rows_per_table = 5) const;

    std::string render_text2sql(const std::string& question, const SchemaInfo& schema,
                                Dialect dialect) const;

    std::string template_text(const std::string& name) const;   // raw file content
    std::string template_digest(const std::string& name) const;  // stable content hash
    std::vector<std::string> template_names() const;

private:
    std::string dir_;
};

}  // namespace dforge::llm

#include "dforge/llm/gateway.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "json.hpp"

using nlohmann::json;

namespace dforge::llm {

void GenRequest::validate() const {
    if (n < 1) throw ModelError(ModelError::Kind::invalid_request, "n must be >= 1");
    if (top_p < 0.0 || top_p > 1.0)
        throw ModelError(ModelError::Kind::invalid_request, "top_p must be in [0, 1]");
    if (temperature < 0.0)
        throw ModelError(ModelError::Kind::invalid_request, "temperature must be >= 0");
}

double GenerationModel::score(const std::string&, const std::string&) {
    throw ModelError(ModelError::Kind::scorer_unavailable,
                     identity() + " exposes no scoring interface");
}

std::vector<std::string> generate(GenerationModel& model, const GenRequest& req, int max_attempts,
                                  double backoff_base_s) {
    req.validate();
    double backoff = backoff_base_s;
    for (int attempt = 1;; ++attempt) {
        try {
            auto completions = model.generate_once(req);
            if (static_cast<int>(completions.size()) != req.n)
                throw ModelError(ModelError::Kind::transport,
                                 model.identity() + " returned " +
                                     std::to_string(completions.size()) + " completions, expected " +
                                     std::to_string(req.n));
            return completions;
        } catch (const ModelError& e) {
            if (e.kind() != ModelError::Kind::transport || attempt >= max_attempts) throw;
            std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
            backoff *= 2.0;
        }
    }
}

// ---- ScriptedModel ------------------------------------------------------------

std::shared_ptr<ScriptedModel> ScriptedModel::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ModelError(ModelError::Kind::invalid_request, "cannot open script file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str(), std::filesystem::path(path).stem().string());
}

std::shared_ptr<ScriptedModel> ScriptedModel::from_json_text(const std::string& text,
                                                             const std::string& name) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw ModelError(ModelError::Kind::invalid_request, "script is not a JSON object");
    auto model = std::make_shared<ScriptedModel>();
    model->identity_ = "scripted:" + name;
    for (const auto& ej : j.value("entries", json::array())) {
        Entry e;
        if (ej.contains("match")) {
            if (ej["match"].is_array())
                for (const auto& m : ej["match"]) e.match.push_back(m.get<std::string>());
            else
                e.match.push_back(ej["match"].get<std::string>());
        }
        for (const auto& rj : ej.at("responses")) {
            std::vector<std::string> completions;
            for (const auto& c : rj) completions.push_back(c.get<std::string>());
            e.responses.push_back(std::move(completions));
        }
        model->entries_.push_back(std::move(e));
    }
    for (const auto& sj : j.value("scores", json::array())) {
        ScoreRow row;
        row.question = sj.value("question", std::string());
        row.sql = sj.at("sql").get<std::string>();
        row.score = sj.at("score").get<double>();
        model->scores_.push_back(std::move(row));
    }
    return model;
}

std::vector<std::string> ScriptedModel::generate_once(const GenRequest& req) {
    req.validate();
    std::lock_guard<std::mutex> lock(mutex_);
    for (auto& entry : entries_) {
        bool matches = true;
        for (const auto& m : entry.match)
            if (!m.empty() && req.prompt.find(m) == std::string::npos) matches = false;
        if (!matches) continue;
        if (entry.next >= entry.responses.size()) continue;  // exhausted; try a later entry
        const auto& completions = entry.responses[entry.next];
        if (static_cast<int>(completions.size()) != req.n)
            throw ModelError(ModelError::Kind::invalid_request,
                             identity_ + ": script entry '" +
                                 (entry.match.empty() ? "" : entry.match.front()) + "' provides " +
                                 std::to_string(completions.size()) + " completions but n=" +
                                 std::to_string(req.n));
        ++entry.next;
        return completions;
    }
    throw ModelError(ModelError::Kind::script_underrun,
                     identity_ + ": script underrun, no entry matches the prompt (or all matching "
                                 "entries are exhausted)");
}

double ScriptedModel::score(const std::string& question, const std::string& sql) {
    std::lock_guard<std::mutex> lock(mutex_);
    for (const auto& row : scores_) {
        if (row.sql != sql) continue;
        if (!row.question.empty() && question.find(row.question) == std::string::npos) continue;
        return row.score;
    }
    throw ModelError(ModelError::Kind::scorer_unavailable,
                     identity_ + ": no scripted score for the given (question, sql)");
}

// ---- RateLimiter ----------------------------------------------------------------

RateLimiter::RateLimiter(double requests_per_minute)
    : capacity_(std::max(1.0, requests_per_minute)),
      tokens_(capacity_),
      refill_per_s_(capacity_ / 60.0),
      last_(std::chrono::steady_clock::now()) {}

void RateLimiter::acquire() {
    std::unique_lock<std::mutex> lock(mutex_);
    while (true) {
        auto now = std::chrono::steady_clock::now();
        tokens_ = std::min(capacity_,
                           tokens_ + refill_per_s_ * std::chrono::duration<double>(now - last_).count());
        last_ = now;
        if (tokens_ >= 1.0) {
            tokens_ -= 1.0;
            return;
        }
        double wait_s = (1.0 - tokens_) / refill_per_s_;
        lock.unlock();
        std::this_thread::sleep_for(std::chrono::duration<double>(wait_s));
        lock.lock();
    }
}

// ---- extract_sql -----------------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

bool starts_with_sql_keyword(const std::string& line) {
    std::string t = trim(line);
    if (t.size() < 4) return false;
    auto upper = [&](std::size_t i) {
        return static_cast<char>(std::toupper(static_cast<unsigned char>(t[i])));
    };
    std::string head;
    for (std::size_t i = 0; i < std::min<std::size_t>(t.size(), 6); ++i) head.push_back(upper(i));
    if (head.rfind("SELECT", 0) == 0) return true;
    if (head.rfind("WITH", 0) == 0 &&
        (t.size() == 4 || std::isspace(static_cast<unsigned char>(t[4]))))
        return true;
    return false;
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t nl = text.find('\n', start);
        if (nl == std::string::npos) {
            lines.push_back(text.substr(start));
            break;
        }
        lines.push_back(text.substr(start, nl - start));
        start = nl + 1;
    }
    return lines;
}

// Joins statement lines from `from`, stopping at a blank line or an
// unquoted semicolon.
std::optional<std::string> statement_from(const std::vector<std::string>& lines, std::size_t from) {
    std::string sql;
    for (std::size_t i = from; i < lines.size(); ++i) {
        const std::string& line = lines[i];
        if (trim(line).empty()) break;
        std::string piece = line;
        bool in_string = false;
        for (std::size_t c = 0; c < piece.size(); ++c) {
            if (piece[c] == '\'') in_string = !in_string;
            if (piece[c] == ';' && !in_string) {
                piece = piece.substr(0, c);
                sql += (sql.empty() ? "" : "\n") + piece;
                return trim(sql);
            }
        }
        sql += (sql.empty() ? "" : "\n") + piece;
    }
    std::string t = trim(sql);
    if (t.empty()) return std::nullopt;
    return t;
}

std::optional<std::string> sql_from_text(const std::string& text) {
    auto lines = split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (starts_with_sql_keyword(lines[i])) {
            auto stmt = statement_from(lines, i);
            if (stmt) {
                // strip a trailing semicolon left by single-line statements
                std::string s = *stmt;
                while (!s.empty() && (s.back() == ';' || std::isspace(static_cast<unsigned char>(s.back()))))
                    s.pop_back();
                if (!s.empty()) return s;
            }
        }
    }
    return std::nullopt;
}

}  // namespace

std::string extract_sql(const std::string& raw) {
    // fenced code blocks, scanned last to first
    auto lines = split_lines(raw);
    std::vector<std::pair<std::size_t, std::size_t>> blocks;  // [open, close) line indexes
    std::optional<std::size_t> open;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (trim(lines[i]).rfind("```", 0) == 0) {
            if (!open) {
                open = i;
            } else {
                blocks.push_back({*open + 1, i});
                open.reset();
            }
        }
    }
    for (auto it = blocks.rbegin(); it != blocks.rend(); ++it) {
        std::string content;
        for (std::size_t i = it->first; i < it->second; ++i) {
            if (trim(lines[i]).empty()) continue;  // keep extraction idempotent
            if (!content.empty()) content += "\n";
            content += lines[i];
        }
        if (auto sql = sql_from_text(content)) return *sql;
    }
    if (auto sql = sql_from_text(raw)) return *sql;
    throw ExtractError("no SQL found in model output");
}

// ---- prompt templates --------------------------------------------------------------

const char* dialect_display(Dialect d) {
    switch (d) {
        case Dialect::sqlite: return "SQLite";
        case Dialect::postgres: return "Postgres";
        case Dialect::mysql: return "MySQL";
        case Dialect::oracle: return "Oracle";
    }
    return "SQLite";
}

std::string format_schema(const SchemaInfo& schema) {
    std::string out;
    for (const auto& t : schema.tables) {
        if (!out.empty()) out += "\n";
        out += t.name + ": ";
        for (std::size_t i = 0; i < t.columns.size(); ++i) {
            if (i) out += ", ";
            out += t.columns[i].name;
        }
    }
    return out;
}

namespace {

std::string replace_all(std::string text, const std::string& key, const std::string& value) {
    std::size_t pos = 0;
    while ((pos = text.find(key, pos)) != std::string::npos) {
        text.replace(pos, key.size(), value);
        pos += value.size();
    }
    return text;
}

std::uint64_t fnv1a(const std::string& data) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace

PromptLibrary::PromptLibrary(std::string template_dir) : dir_(std::move(template_dir)) {}

std::string PromptLibrary::template_text(const std::string& name) const {
    auto path = std::filesystem::path(dir_) / (name + ".txt");
    std::ifstream in(path);
    if (!in) throw FormatError("missing prompt template: " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string PromptLibrary::template_digest(const std::string& name) const {
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx",
                  static_cast<unsigned long long>(fnv1a(template_text(name))));
    return hex;
}

std::vector<std::string> PromptLibrary::template_names() const {
    std::vector<std::string> names;
    if (!std::filesystem::is_directory(dir_)) return names;
    for (const auto& entry : std::filesystem::directory_iterator(dir_))
        if (entry.path().extension() == ".txt") names.push_back(entry.path().stem().string());
    std::sort(names.begin(), names.end());
    return names;
}

std::string PromptLibrary::render_translation(
    const std::string& source_sql, const std::string& question, const SchemaInfo& schema,
    const std::string& db_id, Dialect target,
    const std::vector<std::pair<std::string, std::string>>& prior_errors, Dialect source) const {
    if (target == source)
        throw FormatError(std::string("translation target must differ from source dialect (") +
                          dialect_tag(target) + ")");
    std::string tmpl = template_text(std::string("translate_") + dialect_tag(target));
    std::string feedback;
    if (!prior_errors.empty()) {
        feedback =
            "\nPrevious attempts failed when executed. Use each database error message to produce "
            "a corrected query.\n";
        for (std::size_t i = 0; i < prior_errors.size(); ++i) {
            feedback += "Attempt " + std::to_string(i + 1) + " SQL: " + prior_errors[i].first + "\n";
            feedback += "Attempt " + std::to_string(i + 1) + " error: " + prior_errors[i].second + "\n";
        }
    }
    std::string out = tmpl;
    out = replace_all(out, "{{question}}", question);
    out = replace_all(out, "{{source_sql}}", source_sql);
    out = replace_all(out, "{{schema}}", format_schema(schema));
    out = replace_all(out, "{{db_id}}", db_id);
    out = replace_all(out, "{{prior_errors}}", feedback);
    return out;
}

std::string PromptLibrary::render_question_gen(const engine::InMemoryDb& db, int questions,
                                               int rows_per_table) const {
    bool any_rows = false;
    for (const auto& t : db.tables())
        if (!t.rows.empty()) any_rows = true;
    if (!any_rows)
        throw FormatError("question generation requires a database with at least one populated table");

    std::string rows_text;
    for (const auto& t : db.tables()) {
        std::size_t take = std::min<std::size_t>(t.rows.size(), static_cast<std::size_t>(rows_per_table));
        for (std::size_t r = 0; r < take; ++r) {
            rows_text += t.name + "(";
            for (std::size_t c = 0; c < t.columns.size(); ++c) {
                if (c) rows_text += ", ";
                rows_text += t.columns[c] + "=" + engine::value_to_display(t.rows[r][c]);
            }
            rows_text += ")\n";
        }
    }
    std::string out = template_text("question_gen");
    out = replace_all(out, "{{db_id}}", db.db_id());
    out = replace_all(out, "{{schema}}", format_schema(db.schema()));
    out = replace_all(out, "{{sample_rows}}", rows_text);
    out = replace_all(out, "{{k}}", std::to_string(questions));
    return out;
}

std::string PromptLibrary::render_text2sql(const std::string& question, const SchemaInfo& schema,
                                           Dialect dialect) const {
    std::string out = template_text("text2sql");
    out = replace_all(out, "{{dialect}}", dialect_display(dialect));
    out = replace_all(out, "{{question}}", question);
    out = replace_all(out, "{{schema}}", format_schema(schema));
    return out;
}

}  // namespace dforge::llm

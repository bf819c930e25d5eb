#include "dforge/exec/gateway.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <filesystem>

#include "dforge/engine/error.hpp"
#include "dforge/engine/executor.hpp"
#include "dforge/engine/parser.hpp"

namespace dforge::exec {

const char* exec_status_tag(ExecStatus s) {
    switch (s) {
        case ExecStatus::ok: return "ok";
        case ExecStatus::error: return "error";
        case ExecStatus::timeout: return "timeout";
    }
    return "error";
}

ExecStatus parse_exec_status(const std::string& tag) {
    if (tag == "ok") return ExecStatus::ok;
    if (tag == "error") return ExecStatus::error;
    if (tag == "timeout") return ExecStatus::timeout;
    throw FormatError("invalid exec status '" + tag + "'");
}

RewardMode parse_reward_mode(const std::string& tag) {
    if (tag == "exec-only") return RewardMode::exec_only;
    if (tag == "exec-and-match") return RewardMode::exec_and_match;
    throw FormatError("invalid reward policy '" + tag + "' (valid: exec-only, exec-and-match)");
}

const char* reward_mode_tag(RewardMode m) {
    return m == RewardMode::exec_only ? "exec-only" : "exec-and-match";
}

namespace {

struct Pattern {
    const char* needle;
    const char* cls;
};

bool contains_ci(const std::string& haystack, const char* needle) {
    std::string h(haystack), n(needle);
    auto lower = [](std::string& s) {
        std::transform(s.begin(), s.end(), s.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    };
    lower(h);
    lower(n);
    return h.find(n) != std::string::npos;
}

// Ordered per-dialect tables; first match wins, fallback is "runtime".
// Messages produced by the embedded engine are covered alongside the
// documented server message shapes.
const std::vector<Pattern>& patterns_for(Dialect d) {
    static const std::vector<Pattern> mysql = {
        {"timed out", "timeout"},
        {"timeout", "timeout"},
        {"only_full_group_by", "strict-group-by"},
        {"error 1140", "strict-group-by"},
        {"error 1055", "strict-group-by"},
        {"is not mysql syntax", "dialect-violation"},
        {"are not mysql syntax", "dialect-violation"},
        {"you have an error in your sql syntax", "syntax"},
        {"error 1064", "syntax"},
        {"parse error", "syntax"},
        {" at position ", "syntax"},
        {"doesn't exist", "unknown-object"},
        {"error 1146", "unknown-object"},
        {"unknown column", "unknown-object"},
        {"error 1054", "unknown-object"},
        {"unknown table", "unknown-object"},
        {"incorrect comparison", "type"},
        {"incorrect ", "type"},
        {"error 1366", "type"},
        {"truncated incorrect", "type"},
    };
    static const std::vector<Pattern> postgres = {
        {"statement timeout", "timeout"},
        {"timed out", "timeout"},
        {"must appear in the group by clause", "strict-group-by"},
        {"only_full_group_by", "strict-group-by"},
        {"is not postgres syntax", "dialect-violation"},
        {"are not postgres syntax", "dialect-violation"},
        {"must appear in select list", "dialect-violation"},
        {"syntax error at or near", "syntax"},
        {"parse error", "syntax"},
        {" at position ", "syntax"},
        {"operator does not exist", "type"},
        {"invalid input syntax", "type"},
        {"cannot cast", "type"},
        {"does not exist", "unknown-object"},
        {"missing from-clause entry", "unknown-object"},
        {"ambiguous column", "unknown-object"},
    };
    static const std::vector<Pattern> oracle = {
        {"ora-01013", "timeout"},
        {"timed out", "timeout"},
        {"ora-00979", "strict-group-by"},
        {"is not oracle syntax", "dialect-violation"},
        {"are not oracle syntax", "dialect-violation"},
        {"ora-00933", "syntax"},
        {"ora-00936", "syntax"},
        {"ora-00907", "syntax"},
        {"ora-00900", "syntax"},
        {"parse error", "syntax"},
        {" at position ", "syntax"},
        {"ora-00942", "unknown-object"},
        {"ora-00904", "unknown-object"},
        {"ora-01722", "type"},
        {"invalid number", "type"},
    };
    static const std::vector<Pattern> sqlite = {
        {"timed out", "timeout"},
        {"only_full_group_by", "strict-group-by"},
        {"is not sqlite syntax", "dialect-violation"},
        {"are not sqlite syntax", "dialect-violation"},
        {"syntax error", "syntax"},
        {"parse error", "syntax"},
        {" at position ", "syntax"},
        {"no such table", "unknown-object"},
        {"no such column", "unknown-object"},
        {"ambiguous column", "unknown-object"},
        {"datatype mismatch", "type"},
        {"cannot compare", "type"},
        {"invalid input syntax", "type"},
    };
    switch (d) {
        case Dialect::mysql: return mysql;
        case Dialect::postgres: return postgres;
        case Dialect::oracle: return oracle;
        case Dialect::sqlite: return sqlite;
    }
    return sqlite;
}

}  // namespace

std::string classify_error(const std::string& raw, Dialect dialect) {
    for (const auto& p : patterns_for(dialect))
        if (contains_ci(raw, p.needle)) return p.cls;
    return "runtime";
}

namespace {

bool cell_matches(const engine::Value& a, const engine::Value& b, const ComparePolicy& policy) {
    using namespace engine;
    if (is_null(a) || is_null(b)) return policy.null_equals_null && is_null(a) && is_null(b);
    if (is_numeric(a) && is_numeric(b)) {
        if (is_int(a) && is_int(b))
            return std::get<std::int64_t>(a) == std::get<std::int64_t>(b);
        double x = as_double(a), y = as_double(b);
        if (x == y) return true;
        double scale = std::max(std::fabs(x), std::fabs(y));
        return std::fabs(x - y) <= policy.float_tolerance * scale;
    }
    if (is_text(a) && is_text(b)) return std::get<std::string>(a) == std::get<std::string>(b);
    return false;
}

bool row_matches(const std::vector<engine::Value>& a, const std::vector<engine::Value>& b,
                 const ComparePolicy& policy) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!cell_matches(a[i], b[i], policy)) return false;
    return true;
}

struct RowLess {
    bool operator()(const std::vector<engine::Value>& a, const std::vector<engine::Value>& b) const {
        for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
            int c = engine::value_order(a[i], b[i]);
            if (c != 0) return c < 0;
        }
        return a.size() < b.size();
    }
};

}  // namespace

bool compare_results(const engine::ResultTable& actual, const engine::ResultTable& expected,
                     const ComparePolicy& policy) {
    if (actual.rows.size() != expected.rows.size()) return false;
    // column labels are ignored; comparison is positional
    if (!actual.rows.empty() && actual.rows[0].size() != expected.rows[0].size()) return false;
    if (policy.order_sensitive) {
        for (std::size_t i = 0; i < actual.rows.size(); ++i)
            if (!row_matches(actual.rows[i], expected.rows[i], policy)) return false;
        return true;
    }
    auto a = actual.rows;
    auto b = expected.rows;
    std::sort(a.begin(), a.end(), RowLess{});
    std::sort(b.begin(), b.end(), RowLess{});
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!row_matches(a[i], b[i], policy)) return false;
    return true;
}

int reward(const ExecReport& report, const std::optional<engine::ResultTable>& gold,
           RewardMode mode, const ComparePolicy& policy) {
    if (mode == RewardMode::exec_and_match && !gold)
        throw GatewayError("reward policy exec-and-match requires a gold result");
    if (report.status != ExecStatus::ok) return 0;
    if (mode == RewardMode::exec_only) return 1;
    if (!report.result) return 0;
    return compare_results(*report.result, *gold, policy) ? 1 : 0;
}

ComparePolicy policy_for_query(const std::string& sql) {
    ComparePolicy policy;
    // top-level ORDER BY: an ORDER BY token outside any parentheses
    int depth = 0;
    std::string upper;
    upper.reserve(sql.size());
    for (char c : sql) upper.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    for (std::size_t i = 0; i + 5 < upper.size(); ++i) {
        char c = upper[i];
        if (c == '(') ++depth;
        if (c == ')') --depth;
        if (c == '\'') {  // skip string literal
            ++i;
            while (i < upper.size() && upper[i] != '\'') ++i;
            continue;
        }
        if (depth == 0 && upper.compare(i, 5, "ORDER") == 0 &&
            (i == 0 || !std::isalnum(static_cast<unsigned char>(upper[i - 1])))) {
            std::size_t j = i + 5;
            while (j < upper.size() && std::isspace(static_cast<unsigned char>(upper[j]))) ++j;
            if (upper.compare(j, 2, "BY") == 0) {
                policy.order_sensitive = true;
                break;
            }
        }
    }
    return policy;
}

// ---- EmbeddedBackend --------------------------------------------------------

EmbeddedBackend::EmbeddedBackend(std::string fixture_dir, engine::DialectMode mode)
    : fixture_dir_(std::move(fixture_dir)),
      mode_(mode),
      id_(std::string("embedded:") + dialect_tag(mode.dialect)) {}

std::shared_ptr<const engine::InMemoryDb> EmbeddedBackend::database(const std::string& db_ref) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = cache_.find(db_ref);
    if (it != cache_.end()) return it->second;
    auto path = std::filesystem::path(fixture_dir_) / (db_ref + ".json");
    auto t0 = std::chrono::steady_clock::now();
    auto db = engine::load_database(path.string());
    auto t1 = std::chrono::steady_clock::now();
    load_seconds_[db_ref] = std::chrono::duration<double>(t1 - t0).count();
    cache_.emplace(db_ref, db);
    return db;
}

double EmbeddedBackend::import_time(const std::string& db_ref) {
    database(db_ref);
    std::lock_guard<std::mutex> lock(mutex_);
    return load_seconds_[db_ref];
}

ExecReport EmbeddedBackend::run(const std::string& sql, const std::string& db_ref,
                                double timeout_s) {
    ExecReport report;
    report.backend = id_;
    auto start = std::chrono::steady_clock::now();
    auto finish = [&] {
        report.elapsed_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };
    try {
        auto db = database(db_ref);
        auto ast = engine::parse_sql(sql, mode_);
        std::optional<engine::Deadline> deadline;
        if (timeout_s > 0)
            deadline = std::chrono::steady_clock::now() +
                       std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                           std::chrono::duration<double>(timeout_s));
        report.result = engine::execute(*ast, *db, mode_, deadline);
        report.status = ExecStatus::ok;
    } catch (const engine::ExecTimeout&) {
        report.status = ExecStatus::timeout;
        report.error_class = "timeout";
        report.raw_error = "execution timed out";
    } catch (const engine::EngineError& e) {
        report.status = ExecStatus::error;
        report.raw_error = e.what();
        switch (e.error_class()) {
            case engine::EngineErrorClass::parse: report.error_class = "syntax"; break;
            case engine::EngineErrorClass::dialect_violation:
                report.error_class = "dialect-violation";
                break;
            case engine::EngineErrorClass::unknown_relation:
            case engine::EngineErrorClass::unknown_column:
                report.error_class = "unknown-object";
                break;
            case engine::EngineErrorClass::type_mismatch: report.error_class = "type"; break;
            case engine::EngineErrorClass::strict_group_by:
                report.error_class = "strict-group-by";
                break;
            case engine::EngineErrorClass::unsupported_feature:
                report.error_class = "runtime";
                break;
        }
    } catch (const engine::LoadError& e) {
        report.status = ExecStatus::error;
        report.error_class = "unknown-object";
        report.raw_error = e.what();
    }
    finish();
    return report;
}

// ---- gateway ----------------------------------------------------------------

void ExecutorGateway::register_backend(std::unique_ptr<Backend> backend) {
    Dialect d = backend->dialect();
    if (timeouts_.find(d) == timeouts_.end())
        timeouts_[d] = dynamic_cast<EmbeddedBackend*>(backend.get()) ? 1.0 : 30.0;
    backends_[d] = std::move(backend);
}

bool ExecutorGateway::has_backend(Dialect d) const { return backends_.count(d) > 0; }

Backend& ExecutorGateway::backend_for(Dialect d) const {
    auto it = backends_.find(d);
    if (it == backends_.end())
        throw GatewayError(std::string("no backend registered for dialect ") + dialect_tag(d));
    return *it->second;
}

void ExecutorGateway::set_default_timeout(Dialect d, double seconds) { timeouts_[d] = seconds; }

ExecReport ExecutorGateway::run(const std::string& sql, Dialect dialect, const std::string& db_ref,
                                double timeout_s) const {
    Backend& b = backend_for(dialect);
    double timeout = timeout_s > 0 ? timeout_s : timeouts_.at(dialect);
    return b.run(sql, db_ref, timeout);
}

TimingStats ExecutorGateway::profile_execution(
    const std::vector<std::pair<std::string, std::string>>& batch, Dialect dialect) const {
    if (batch.empty()) throw GatewayError("profile_execution requires a non-empty batch");
    Backend& b = backend_for(dialect);
    TimingStats stats;
    std::map<std::string, double> imports;
    double exec_total = 0.0;
    for (const auto& [sql, db_ref] : batch) {
        if (!imports.count(db_ref)) imports[db_ref] = b.import_time(db_ref);
        ExecReport r = b.run(sql, db_ref, timeouts_.at(dialect));
        exec_total += r.elapsed_s;
        ++stats.executions;
    }
    double import_total = 0.0;
    for (const auto& [_, t] : imports) import_total += t;
    stats.imports = imports.size();
    stats.avg_import_s = import_total / static_cast<double>(imports.size());
    stats.avg_exec_s = exec_total / static_cast<double>(stats.executions);
    stats.total_s = import_total + exec_total;
    return stats;
}

}  // namespace dforge::exec

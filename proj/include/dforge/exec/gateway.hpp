#pragma once

// Uniform execution interface over backends: the embedded dialect engine and
// live adapters (postgres wire protocol, generic subprocess client). Produces
// classified ExecReports, the binary execution reward, and result comparisons.

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "dforge/core.hpp"
#include "dforge/engine/database.hpp"
#include "dforge/engine/mode.hpp"
#include "dforge/engine/value.hpp"

namespace dforge::exec {

enum class ExecStatus { ok, error, timeout };

// status=ok <=> result present <=> error_class absent
struct ExecReport {
    ExecStatus status = ExecStatus::error;
    std::string error_class;  // syntax | dialect-violation | unknown-object | type |
                              // strict-group-by | runtime | timeout; empty when ok
    std::string raw_error;    // backend error text, preserved verbatim
    std::optional<engine::ResultTable> result;
    double elapsed_s = 0.0;
    std::string backend;
};

const char* exec_status_tag(ExecStatus s);
ExecStatus parse_exec_status(const std::string& tag);

struct ComparePolicy {
    // auto-derived default: order sensitive iff the query has a top-level ORDER BY
    bool order_sensitive = false;
    double float_tolerance = 1e-6;  // relative
    bool null_equals_null = true;
};

enum class RewardMode { exec_only, exec_and_match };

RewardMode parse_reward_mode(const std::string& tag);
const char* reward_mode_tag(RewardMode m);

class GatewayError : public std::runtime_error {
public:
    explicit GatewayError(const std::string& what) : std::runtime_error(what) {}
};

// Deterministic first-match classification of a backend error message.
std::string classify_error(const std::string& raw, Dialect dialect);

// Positional, tolerance-aware result comparison. Order-insensitive mode
// compares row multisets.
bool compare_results(const engine::ResultTable& actual, const engine::ResultTable& expected,
                     const ComparePolicy& policy);

// 1 iff the report counts as a success under the policy. exec_and_match
// additionally requires the result to match gold (which must be present).
int reward(const ExecReport& report, const std::optional<engine::ResultTable>& gold,
           RewardMode mode, const ComparePolicy& policy = {});

// Convenience: order sensitivity derived from the SQL text's top-level ORDER BY.
ComparePolicy policy_for_query(const std::string& sql);

class Backend {
public:
    virtual ~Backend() = default;
    virtual ExecReport run(const std::string& sql, const std::string& db_ref, double timeout_s) = 0;
    virtual std::string id() const = 0;
    virtual Dialect dialect() const = 0;
    // Seconds spent importing the database, measured once at first load.
    // Zero for backends that do not manage imports.
    virtual double import_time(const std::string& db_ref) { (void)db_ref; return 0.0; }
};

// Deterministic desk-scale backend over JSON fixtures and the embedded engine.
class EmbeddedBackend : public Backend {
public:
    EmbeddedBackend(std::string fixture_dir, engine::DialectMode mode);

    ExecReport run(const std::string& sql, const std::string& db_ref, double timeout_s) override;
    std::string id() const override { return id_; }
    Dialect dialect() const override { return mode_.dialect; }
    double import_time(const std::string& db_ref) override;

    std::shared_ptr<const engine::InMemoryDb> database(const std::string& db_ref);
    const engine::DialectMode& mode() const { return mode_; }

private:
    std::string fixture_dir_;
    engine::DialectMode mode_;
    std::string id_;
    std::mutex mutex_;
    std::map<std::string, std::shared_ptr<const engine::InMemoryDb>> cache_;
    std::map<std::string, double> load_seconds_;
};

// Invokes a database command-line client per query. The command template may
// reference {sql} and {db}; rows are read from stdout as tab-separated lines.
class SubprocessBackend : public Backend {
public:
    SubprocessBackend(Dialect dialect, std::string command_template, std::string id = "");

    ExecReport run(const std::string& sql, const std::string& db_ref, double timeout_s) override;
    std::string id() const override { return id_; }
    Dialect dialect() const override { return dialect_; }

private:
    Dialect dialect_;
    std::string command_template_;
    std::string id_;
};

struct TimingStats {
    double avg_import_s = 0.0;
    double avg_exec_s = 0.0;
    double total_s = 0.0;
    std::size_t imports = 0;
    std::size_t executions = 0;
};

class ExecutorGateway {
public:
    void register_backend(std::unique_ptr<Backend> backend);
    bool has_backend(Dialect d) const;
    Backend& backend_for(Dialect d) const;

    // timeout_s <= 0 uses the per-backend default (1 s embedded, 30 s live).
    ExecReport run(const std::string& sql, Dialect dialect, const std::string& db_ref,
                   double timeout_s = 0.0) const;

    void set_default_timeout(Dialect d, double seconds);

    // Executes the batch and aggregates timing; import time is counted once
    // per distinct database.
    TimingStats profile_execution(const std::vector<std::pair<std::string, std::string>>& batch,
                                  Dialect dialect) const;

private:
    std::map<Dialect, std::unique_ptr<Backend>> backends_;
    std::map<Dialect, double> timeouts_;
};

}  // namespace dforge::exec

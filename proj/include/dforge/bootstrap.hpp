#pragma once

// Translation-with-execution-feedback loop: propose target-dialect SQL,
// execute, feed the database error text back into the prompt, iterate to a
// round cap. Emits the translated dataset and per-round failure statistics.

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dforge/core.hpp"
#include "dforge/exec/gateway.hpp"
#include "dforge/llm/gateway.hpp"

namespace dforge::bootstrap {

struct TranslationPair {
    NLQuestion question;
    std::string source_sql;  // sqlite source
};

struct Attempt {
    std::string sql;
    exec::ExecReport report;
    std::string prompt;  // kept in memory for prompt-capture tests; not serialized
};

struct TranslationOutcome {
    DatasetRecord record;
    std::vector<Attempt> attempts;
    int rounds_used = 0;
    bool success = false;
    bool via_prefilter = false;  // solved by the rule-based hook, no model round
    bool aborted = false;        // model transport failure; item unresolved, run continues
    std::string abort_reason;
};

struct IterationStats {
    std::vector<std::size_t> proposed;  // items entering round r (1-based index 0)
    std::vector<std::size_t> failed;    // items still failing after round r
    std::size_t prefilter_solved = 0;
    std::size_t unresolved = 0;
    std::size_t total = 0;
};

// Rule-based translator hook tried before round 1; returns the translated SQL
// or nullopt to fall through to the model. The repo ships only the identity
// hook; real transpilers plug in as external commands.
using Prefilter = std::function<std::optional<std::string>(const TranslationPair&, Dialect)>;

Prefilter identity_prefilter();
// Runs `command` with {"question","sql","source_dialect","target_dialect"} as
// JSON on stdin and reads the translated SQL from stdout (exit 0 = produced).
Prefilter command_prefilter(std::string command);
// Parses a CLI prefilter spec: "none", "identity" or "cmd:<shell command>".
Prefilter parse_prefilter_spec(const std::string& spec);

using SchemaProvider = std::function<SchemaInfo(const std::string& db_ref)>;

struct TranslateConfig {
    int max_rounds = 3;
    exec::RewardMode reward = exec::RewardMode::exec_only;
    llm::GenRequest decoding;     // prompt/n overwritten per call
    Prefilter prefilter;          // may be null
    int workers = 1;
};

TranslationOutcome translate_with_feedback(const TranslationPair& pair, Dialect target,
                                           llm::GenerationModel& model,
                                           const llm::PromptLibrary& prompts,
                                           const exec::ExecutorGateway& gateway,
                                           const SchemaProvider& schema_for,
                                           const TranslateConfig& config);

struct BootstrapResult {
    std::map<Dialect, IterationStats> stats;
    std::size_t translated = 0;
    std::size_t unresolved = 0;
};

// One output record per (pair, target). Valid records go to d_trans.jsonl;
// unresolved items are exported with full attempt history, never dropped.
BootstrapResult run_bootstrap(const std::vector<TranslationPair>& pairs,
                              const std::vector<Dialect>& targets, llm::GenerationModel& model,
                              const llm::PromptLibrary& prompts,
                              const exec::ExecutorGateway& gateway,
                              const SchemaProvider& schema_for, const TranslateConfig& config,
                              const std::string& out_dir,
                              std::vector<TranslationOutcome>* outcomes_sink = nullptr);

std::vector<TranslationPair> read_pairs_file(const std::string& path);

}  // namespace dforge::bootstrap

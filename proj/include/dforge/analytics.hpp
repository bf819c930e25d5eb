#pragma once

// Benchmark evaluation (execution accuracy per dialect and per perturbation
// category), the dialect-degradation delta, macro averaging, the LLM-call
// cost estimator, the TF-IDF diversity metric, and dataset statistics.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dforge/core.hpp"
#include "dforge/exec/gateway.hpp"

namespace dforge::eval {

struct BenchmarkItem {
    std::string id;
    std::string question;
    std::string db_ref;
    Dialect dialect = Dialect::sqlite;
    std::string gold_sql;
    std::optional<engine::ResultTable> gold_result;
    std::string category;  // optional perturbation tag
    bool gold_invalid = false;
};

// Reads items.jsonl from a benchmark directory. Each line carries
// id, question, db_id, dialect, gold_sql and an optional category.
std::vector<BenchmarkItem> load_benchmark(const std::string& dir);

// Executes gold SQL once per item and caches the result; items whose gold
// fails to execute are flagged invalid and excluded from scoring.
std::size_t materialize_gold(std::vector<BenchmarkItem>& items,
                             const exec::ExecutorGateway& gateway);

struct EvalReport {
    struct Bucket {
        std::size_t total = 0;
        std::size_t correct = 0;
        double accuracy_pct() const {
            return total == 0 ? 0.0 : 100.0 * static_cast<double>(correct) / static_cast<double>(total);
        }
    };
    struct Detail {
        std::string id;
        std::string category;
        Dialect dialect = Dialect::sqlite;
        bool correct = false;
        std::string error_class;  // empty when correct
    };

    std::map<std::string, Bucket> per_dialect;
    std::map<std::string, Bucket> per_category;  // untagged items under "uncategorized"
    std::size_t total = 0;
    std::size_t correct = 0;
    std::size_t gold_invalid = 0;
    std::vector<Detail> details;

    double overall_pct() const {
        return total == 0 ? 0.0 : 100.0 * static_cast<double>(correct) / static_cast<double>(total);
    }
    double macro_average_pct() const;  // equal-weight mean over dialect buckets

    std::string render_text() const;
};

// Scores raw model outputs against the benchmark: extract SQL, execute, and
// compare with the gold result (execution accuracy). Unknown output ids are
// an error; items flagged gold-invalid are skipped with a count.
EvalReport evaluate(const std::vector<std::pair<std::string, std::string>>& outputs,
                    const std::vector<BenchmarkItem>& benchmark,
                    const exec::ExecutorGateway& gateway);

// Equal-weight mean of the given percentages, reported to 2 decimals.
double macro_average(const std::vector<double>& scores_pct);

// Mean dialect accuracy minus the sqlite accuracy for the same model, to 2
// decimals. Inputs are percentages with 2-decimal precision; the arithmetic
// runs on centi-scaled integers so reported deltas are exact.
double flip_delta(const std::vector<double>& dialect_scores_pct, double sqlite_score_pct);

// Expected number of model calls for translating q queries when a rule-based
// pre-filter solves p_prefilter of them and the model solves p_llm of the
// remainder in each of up to `rounds` rounds. Rounded half away from zero.
std::int64_t estimate_llm_calls(std::int64_t queries, double p_llm, int rounds, double p_prefilter);

// Mean over a in A of the maximum cosine similarity between a and any b in B,
// on TF-IDF vectors over the union vocabulary (lowercased alphanumeric
// tokens, smoothed idf = ln((1+N)/(1+df)) + 1, L2-normalized).
double diversity_score(const std::vector<std::string>& corpus_a,
                       const std::vector<std::string>& corpus_b);

struct DatasetStats {
    struct FileStats {
        std::string stage;  // caller-supplied label, e.g. SFT / DPO
        std::string path;
        std::map<std::string, std::size_t> by_provenance;
        std::size_t total = 0;
        std::size_t parse_errors = 0;
    };
    std::vector<FileStats> files;
    std::map<std::string, std::size_t> total_by_provenance;
    std::size_t total = 0;

    std::string render_table() const;  // Stage | Dataset | Size layout
};

// Counts records per (stage label, provenance); parse errors are reported
// per line and counting continues.
DatasetStats dataset_stats(const std::vector<std::pair<std::string, std::string>>& labeled_files);

struct CategoryRow {
    std::string category;
    std::size_t total = 0;
    std::size_t correct = 0;
    double accuracy_pct = 0.0;
};

// Per-category accuracy table from an evaluation report.
std::vector<CategoryRow> perturbation_breakdown(const EvalReport& report);

}  // namespace dforge::eval

#pragma once

// Generation-execution-filtering loop: best-of-N into valid/negative
// partitions, question augmentation, preference-pair construction with
// worst-of-N negatives, retention-rate estimation, and the pairwise
// preference check against a scorer.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dforge/core.hpp"
#include "dforge/exec/gateway.hpp"
#include "dforge/llm/gateway.hpp"

namespace dforge::sampling {

struct Candidate {
    std::string sql;         // extracted SQL, or the raw completion when extraction failed
    exec::ExecReport report;
    int sample_index = 0;    // order drawn
    bool extraction_ok = true;
    int reward = 0;          // filled by partition()
};

// Failure severity for worst-of-N: extraction failures outrank parse/dialect
// errors, which outrank semantic binding errors, which outrank runtime
// failures; a wrong result is the mildest failure.
int severity_rank(const Candidate& c);

// Renders the text-to-SQL prompt, draws n completions, and extracts SQL from
// each. Extraction failures become non-executable candidates with a synthetic
// syntax report.
std::vector<Candidate> sample_candidates(const NLQuestion& question, const SchemaInfo& schema,
                                         llm::GenerationModel& model,
                                         const llm::PromptLibrary& prompts, int n, Dialect dialect,
                                         const llm::GenRequest& decoding);

// Executes every candidate that parsed out of the model output.
void execute_candidates(std::vector<Candidate>& candidates, const exec::ExecutorGateway& gateway,
                        Dialect dialect, const std::string& db_ref);

struct PartitionResult {
    std::vector<Candidate> valid;
    std::vector<Candidate> neg;
};

// Splits executed candidates by reward. Order sensitivity for the gold
// comparison is derived from the gold query when given (it defines the
// expected semantics), otherwise from the candidate itself.
PartitionResult partition(std::vector<Candidate> candidates, exec::RewardMode policy,
                          const std::optional<engine::ResultTable>& gold,
                          const exec::ComparePolicy& compare = {});

// First-drawn valid candidate (lowest sample_index).
const Candidate& best_of_n_select(const std::vector<Candidate>& valid);

// Highest-severity failure among the first n_cap negatives; ties break to the
// lowest sample_index.
const Candidate& worst_of_n_select(const std::vector<Candidate>& neg, int n_cap = 8);

// One pair per question: (best valid, worst negative). Returns nullopt when
// either side is empty.
std::optional<PreferenceRecord> build_preference_pair(const NLQuestion& question, Dialect dialect,
                                                      const std::vector<Candidate>& valid,
                                                      const std::vector<Candidate>& neg,
                                                      int worst_of_cap = 8);

// All valid x neg combinations, for the cross-product export flag.
std::vector<PreferenceRecord> build_preference_pairs_cross(const NLQuestion& question,
                                                           Dialect dialect,
                                                           const std::vector<Candidate>& valid,
                                                           const std::vector<Candidate>& neg);

// Closed-form retention: probability that at least one of n samples is valid
// at per-sample validity p.
double retention_rate(double p, int n);

struct QuestionLog {
    std::string question_id;
    std::vector<bool> valid;  // per sample index
};

// Fraction of questions with >= 1 valid sample among the first n draws, for
// each requested n. Non-decreasing in n by prefix construction.
std::vector<std::pair<int, double>> empirical_retention(const std::vector<QuestionLog>& log,
                                                        const std::vector<int>& n_values);

// Synthetic i.i.d. run log with a portable generator (stable across
// platforms for a fixed seed).
std::vector<QuestionLog> synthetic_run_log(std::size_t questions, int samples_per_question,
                                           double p, std::uint64_t seed);

struct AugmentedQuestion {
    NLQuestion question;  // source=augmented, value_grounded set
};

// Generates k candidate questions grounded in actual database values and
// drops case/whitespace-normalized duplicates.
std::vector<AugmentedQuestion> augment_questions(const engine::InMemoryDb& db,
                                                 llm::GenerationModel& model,
                                                 const llm::PromptLibrary& prompts, int k,
                                                 const llm::GenRequest& decoding,
                                                 int rows_per_table = 5);

// Strict inequality check: scorer prefers chosen over rejected.
bool dpo_preference_check(llm::GenerationModel& scorer, const std::string& question_text,
                          const PreferenceRecord& pair);

// Fraction of pairs satisfying the check; question texts parallel the pairs.
double dpo_pairwise_accuracy(llm::GenerationModel& scorer,
                             const std::vector<std::string>& question_texts,
                             const std::vector<PreferenceRecord>& pairs);

}  // namespace dforge::sampling

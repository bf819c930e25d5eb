#include "dforge/sampling.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

namespace dforge::sampling {

int severity_rank(const Candidate& c) {
    if (!c.extraction_ok) return 5;
    const std::string& cls = c.report.error_class;
    if (cls == "syntax" || cls == "dialect-violation") return 4;
    if (cls == "unknown-object" || cls == "type" || cls == "strict-group-by") return 3;
    if (cls == "runtime" || cls == "timeout") return 2;
    return 1;  // executed fine but wrong result
}

std::vector<Candidate> sample_candidates(const NLQuestion& question, const SchemaInfo& schema,
                                         llm::GenerationModel& model,
                                         const llm::PromptLibrary& prompts, int n, Dialect dialect,
                                         const llm::GenRequest& decoding) {
    llm::GenRequest req = decoding;
    req.prompt = prompts.render_text2sql(question.text, schema, dialect);
    req.n = n;
    auto completions = llm::generate(model, req);
    std::vector<Candidate> candidates;
    candidates.reserve(completions.size());
    for (std::size_t i = 0; i < completions.size(); ++i) {
        Candidate c;
        c.sample_index = static_cast<int>(i);
        try {
            c.sql = llm::extract_sql(completions[i]);
        } catch (const llm::ExtractError& e) {
            c.sql = completions[i];
            c.extraction_ok = false;
            c.report.status = exec::ExecStatus::error;
            c.report.error_class = "syntax";
            c.report.raw_error = e.what();
        }
        candidates.push_back(std::move(c));
    }
    return candidates;
}

void execute_candidates(std::vector<Candidate>& candidates, const exec::ExecutorGateway& gateway,
                        Dialect dialect, const std::string& db_ref) {
    for (auto& c : candidates) {
        if (!c.extraction_ok) continue;  // already carries a synthetic syntax report
        c.report = gateway.run(c.sql, dialect, db_ref);
    }
}

PartitionResult partition(std::vector<Candidate> candidates, exec::RewardMode policy,
                          const std::optional<engine::ResultTable>& gold,
                          const exec::ComparePolicy& compare) {
    PartitionResult out;
    for (auto& c : candidates) {
        c.reward = exec::reward(c.report, gold, policy, compare);
        if (c.reward == 1)
            out.valid.push_back(std::move(c));
        else
            out.neg.push_back(std::move(c));
    }
    return out;
}

const Candidate& best_of_n_select(const std::vector<Candidate>& valid) {
    if (valid.empty()) throw exec::GatewayError("best_of_n_select requires a non-empty valid list");
    const Candidate* best = &valid.front();
    for (const auto& c : valid)
        if (c.sample_index < best->sample_index) best = &c;
    return *best;
}

const Candidate& worst_of_n_select(const std::vector<Candidate>& neg, int n_cap) {
    if (neg.empty()) throw exec::GatewayError("worst_of_n_select requires a non-empty negative list");
    // only the first n_cap negatives by draw order are considered
    std::vector<const Candidate*> pool;
    {
        std::vector<const Candidate*> ordered;
        for (const auto& c : neg) ordered.push_back(&c);
        std::stable_sort(ordered.begin(), ordered.end(),
                         [](const Candidate* a, const Candidate* b) {
                             return a->sample_index < b->sample_index;
                         });
        for (const auto* c : ordered) {
            if (static_cast<int>(pool.size()) >= n_cap) break;
            pool.push_back(c);
        }
    }
    const Candidate* worst = pool.front();
    for (const auto* c : pool) {
        if (severity_rank(*c) > severity_rank(*worst))
            worst = c;  // ties keep the earlier draw
    }
    return *worst;
}

namespace {

std::string rejected_class(const Candidate& c) {
    if (c.report.status == exec::ExecStatus::ok) return "wrong-result";
    return c.report.error_class;
}

PreferenceRecord make_pair(const NLQuestion& question, Dialect dialect, const Candidate& chosen,
                           const Candidate& rejected, const std::string& id) {
    PreferenceRecord p;
    p.id = id;
    p.question_id = question.id;
    p.db_id = question.db_ref;
    p.dialect = dialect;
    p.chosen = chosen.sql;
    p.rejected = rejected.sql;
    p.chosen_status = exec::exec_status_tag(chosen.report.status);
    p.rejected_status = exec::exec_status_tag(rejected.report.status);
    p.rejected_error_class = rejected_class(rejected);
    p.validate();
    return p;
}

}  // namespace

std::optional<PreferenceRecord> build_preference_pair(const NLQuestion& question, Dialect dialect,
                                                      const std::vector<Candidate>& valid,
                                                      const std::vector<Candidate>& neg,
                                                      int worst_of_cap) {
    if (valid.empty() || neg.empty()) return std::nullopt;
    const Candidate& chosen = best_of_n_select(valid);
    const Candidate& rejected = worst_of_n_select(neg, worst_of_cap);
    if (chosen.sql == rejected.sql) return std::nullopt;  // degenerate pair, not exportable
    return make_pair(question, dialect, chosen, rejected,
                     "pref-" + question.id + "-" + dialect_tag(dialect));
}

std::vector<PreferenceRecord> build_preference_pairs_cross(const NLQuestion& question,
                                                           Dialect dialect,
                                                           const std::vector<Candidate>& valid,
                                                           const std::vector<Candidate>& neg) {
    std::vector<PreferenceRecord> out;
    std::size_t k = 0;
    for (const auto& v : valid) {
        for (const auto& n : neg) {
            if (v.sql == n.sql) continue;
            out.push_back(make_pair(question, dialect, v, n,
                                    "pref-" + question.id + "-" + dialect_tag(dialect) + "-" +
                                        std::to_string(k++)));
        }
    }
    return out;
}

double retention_rate(double p, int n) {
    if (p < 0.0 || p > 1.0) throw exec::GatewayError("retention_rate requires p in [0, 1]");
    if (n < 1) throw exec::GatewayError("retention_rate requires n >= 1");
    return 1.0 - std::pow(1.0 - p, n);
}

std::vector<std::pair<int, double>> empirical_retention(const std::vector<QuestionLog>& log,
                                                        const std::vector<int>& n_values) {
    if (log.empty()) throw exec::GatewayError("empirical_retention requires a non-empty log");
    int max_n = 0;
    for (int n : n_values) max_n = std::max(max_n, n);
    for (const auto& q : log)
        if (static_cast<int>(q.valid.size()) < max_n)
            throw exec::GatewayError("run log for question '" + q.question_id + "' has " +
                                     std::to_string(q.valid.size()) + " samples, need " +
                                     std::to_string(max_n));
    std::vector<std::pair<int, double>> curve;
    for (int n : n_values) {
        std::size_t hits = 0;
        for (const auto& q : log) {
            bool any = false;
            for (int i = 0; i < n; ++i)
                if (q.valid[static_cast<std::size_t>(i)]) any = true;
            if (any) ++hits;
        }
        curve.push_back({n, static_cast<double>(hits) / static_cast<double>(log.size())});
    }
    return curve;
}

std::vector<QuestionLog> synthetic_run_log(std::size_t questions, int samples_per_question,
                                           double p, std::uint64_t seed) {
    // splitmix64 keeps the stream identical across standard libraries
    auto next = [state = seed]() mutable {
        state += 0x9E3779B97f4A7C15ULL;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    };
    std::vector<QuestionLog> log;
    log.reserve(questions);
    for (std::size_t q = 0; q < questions; ++q) {
        QuestionLog entry;
        entry.question_id = "synthetic-" + std::to_string(q);
        entry.valid.reserve(static_cast<std::size_t>(samples_per_question));
        for (int s = 0; s < samples_per_question; ++s) {
            double u = static_cast<double>(next() >> 11) * (1.0 / 9007199254740992.0);
            entry.valid.push_back(u < p);
        }
        log.push_back(std::move(entry));
    }
    return log;
}

namespace {

std::string normalize_question(const std::string& text) {
    std::string out;
    bool in_space = true;
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!in_space) out.push_back(' ');
            in_space = true;
        } else {
            out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
            in_space = false;
        }
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

std::string strip_listing_prefix(const std::string& line) {
    std::size_t i = 0;
    while (i < line.size() && (std::isdigit(static_cast<unsigned char>(line[i])) || line[i] == '.' ||
                               line[i] == ')' || line[i] == '-' || line[i] == '*' || line[i] == ' '))
        ++i;
    return i < line.size() ? line.substr(i) : line;
}

bool contains_ci(const std::string& haystack, const std::string& needle) {
    if (needle.empty()) return false;
    auto lower = [](const std::string& s) {
        std::string out(s);
        std::transform(out.begin(), out.end(), out.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        return out;
    };
    return lower(haystack).find(lower(needle)) != std::string::npos;
}

}  // namespace

std::vector<AugmentedQuestion> augment_questions(const engine::InMemoryDb& db,
                                                 llm::GenerationModel& model,
                                                 const llm::PromptLibrary& prompts, int k,
                                                 const llm::GenRequest& decoding,
                                                 int rows_per_table) {
    if (k == 0) return {};
    llm::GenRequest req = decoding;
    req.prompt = prompts.render_question_gen(db, k, rows_per_table);
    req.n = k;
    auto completions = llm::generate(model, req);

    // text cell values (length >= 3) ground the value check
    std::vector<std::string> cell_values;
    for (const auto& t : db.tables())
        for (const auto& row : t.rows)
            for (const auto& cell : row)
                if (engine::is_text(cell)) {
                    const auto& s = std::get<std::string>(cell);
                    if (s.size() >= 3) cell_values.push_back(s);
                }

    std::vector<AugmentedQuestion> out;
    std::set<std::string> seen;
    std::size_t index = 0;
    for (const auto& completion : completions) {
        std::string text = strip_listing_prefix(completion);
        // single question per completion: keep the first non-empty line
        std::size_t nl = text.find('\n');
        if (nl != std::string::npos) text = text.substr(0, nl);
        while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.pop_back();
        if (text.empty()) continue;
        std::string key = normalize_question(text);
        if (!seen.insert(key).second) continue;  // exact duplicate after normalization
        AugmentedQuestion aq;
        aq.question.id = db.db_id() + "-aug-" + std::to_string(index++);
        aq.question.text = text;
        aq.question.db_ref = db.db_id();
        aq.question.source = QuestionSource::augmented;
        for (const auto& v : cell_values)
            if (contains_ci(text, v)) aq.question.value_grounded = true;
        out.push_back(std::move(aq));
    }
    return out;
}

bool dpo_preference_check(llm::GenerationModel& scorer, const std::string& question_text,
                          const PreferenceRecord& pair) {
    double chosen = scorer.score(question_text, pair.chosen);
    double rejected = scorer.score(question_text, pair.rejected);
    return chosen > rejected;  // strict: equal scores fail the check
}

double dpo_pairwise_accuracy(llm::GenerationModel& scorer,
                             const std::vector<std::string>& question_texts,
                             const std::vector<PreferenceRecord>& pairs) {
    if (pairs.empty() || question_texts.size() != pairs.size())
        throw exec::GatewayError("dpo_pairwise_accuracy requires matched questions and pairs");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < pairs.size(); ++i)
        if (dpo_preference_check(scorer, question_texts[i], pairs[i])) ++hits;
    return static_cast<double>(hits) / static_cast<double>(pairs.size());
}

}  // namespace dforge::sampling

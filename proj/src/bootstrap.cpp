#include "dforge/bootstrap.hpp"

#include <unistd.h>

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

#include "json.hpp"

using nlohmann::json;

namespace dforge::bootstrap {

Prefilter identity_prefilter() {
    return [](const TranslationPair& pair, Dialect) -> std::optional<std::string> {
        return pair.source_sql;
    };
}

Prefilter command_prefilter(std::string command) {
    return [command](const TranslationPair& pair, Dialect target) -> std::optional<std::string> {
        json input;
        input["question"] = pair.question.text;
        input["sql"] = pair.source_sql;
        input["source_dialect"] = dialect_tag(Dialect::sqlite);
        input["target_dialect"] = dialect_tag(target);
        static std::atomic<std::uint64_t> seq{0};
        std::string tmp = (std::filesystem::temp_directory_path() /
                           ("dforge_prefilter_" + std::to_string(::getpid()) + "_" +
                            std::to_string(seq.fetch_add(1)) + ".json"))
                              .string();
        {
            std::ofstream out(tmp);
            out << input.dump();
        }
        std::string full = command + " < " + tmp;
        FILE* pipe = ::popen(full.c_str(), "r");
        if (!pipe) return std::nullopt;
        std::string output;
        char buf[4096];
        std::size_t n;
        while ((n = std::fread(buf, 1, sizeof(buf), pipe)) > 0) output.append(buf, n);
        int rc = ::pclose(pipe);
        std::filesystem::remove(tmp);
        if (rc != 0) return std::nullopt;
        while (!output.empty() && (output.back() == '\n' || output.back() == '\r')) output.pop_back();
        if (output.empty()) return std::nullopt;
        return output;
    };
}

Prefilter parse_prefilter_spec(const std::string& spec) {
    if (spec.empty() || spec == "none") return nullptr;
    if (spec == "identity") return identity_prefilter();
    if (spec.rfind("cmd:", 0) == 0) return command_prefilter(spec.substr(4));
    throw FormatError("invalid prefilter spec '" + spec + "' (valid: none, identity, cmd:<command>)");
}

namespace {

std::string record_id(const NLQuestion& q, Dialect target) {
    return q.id + ":" + dialect_tag(target);
}

DatasetRecord make_record(const TranslationPair& pair, Dialect target, const std::string& sql,
                          int rounds, bool success) {
    DatasetRecord r;
    r.id = record_id(pair.question, target);
    r.question_id = pair.question.id;
    r.db_id = pair.question.db_ref;
    r.dialect = target;
    r.sql = sql;
    r.round = rounds;
    r.status = success ? RecordStatus::valid : RecordStatus::invalid;
    r.provenance = Provenance::translated;
    return r;
}

}  // namespace

TranslationOutcome translate_with_feedback(const TranslationPair& pair, Dialect target,
                                           llm::GenerationModel& model,
                                           const llm::PromptLibrary& prompts,
                                           const exec::ExecutorGateway& gateway,
                                           const SchemaProvider& schema_for,
                                           const TranslateConfig& config) {
    if (config.max_rounds < 1) throw FormatError("max_rounds must be >= 1");
    TranslationOutcome outcome;

    if (config.prefilter) {
        if (auto sql = config.prefilter(pair, target)) {
            exec::ExecReport report = gateway.run(*sql, target, pair.question.db_ref);
            if (exec::reward(report, std::nullopt, exec::RewardMode::exec_only) == 1) {
                outcome.attempts.push_back({*sql, std::move(report), ""});
                outcome.rounds_used = 1;
                outcome.success = true;
                outcome.via_prefilter = true;
                outcome.record = make_record(pair, target, *sql, 1, true);
                return outcome;
            }
            // failed prefilter output is discarded; the model starts fresh
        }
    }

    SchemaInfo schema = schema_for(pair.question.db_ref);
    std::vector<std::pair<std::string, std::string>> prior_errors;
    for (int round = 1; round <= config.max_rounds; ++round) {
        std::string prompt = prompts.render_translation(pair.source_sql, pair.question.text, schema,
                                                        pair.question.db_ref, target, prior_errors);
        llm::GenRequest req = config.decoding;
        req.prompt = prompt;
        req.n = 1;
        std::string completion;
        try {
            completion = llm::generate(model, req).front();
        } catch (const llm::ModelError& e) {
            outcome.aborted = true;
            outcome.abort_reason = e.what();
            break;
        }
        Attempt attempt;
        attempt.prompt = std::move(prompt);
        try {
            attempt.sql = llm::extract_sql(completion);
        } catch (const llm::ExtractError& e) {
            attempt.sql = completion;
            attempt.report.status = exec::ExecStatus::error;
            attempt.report.error_class = "syntax";
            attempt.report.raw_error = e.what();
        }
        if (attempt.report.raw_error.empty())
            attempt.report = gateway.run(attempt.sql, target, pair.question.db_ref);

        bool ok = exec::reward(attempt.report, std::nullopt, exec::RewardMode::exec_only) == 1;
        prior_errors.emplace_back(attempt.sql, attempt.report.raw_error);
        outcome.attempts.push_back(std::move(attempt));
        outcome.rounds_used = round;
        if (ok) {
            outcome.success = true;
            break;
        }
    }

    const std::string final_sql = outcome.attempts.empty() ? "" : outcome.attempts.back().sql;
    outcome.record =
        make_record(pair, target, final_sql, std::max(outcome.rounds_used, 1), outcome.success);
    return outcome;
}

namespace {

json attempt_history(const TranslationOutcome& outcome) {
    json arr = json::array();
    for (const auto& a : outcome.attempts) {
        json aj;
        aj["sql"] = a.sql;
        aj["status"] = exec::exec_status_tag(a.report.status);
        aj["error_class"] = a.report.error_class;
        aj["error"] = a.report.raw_error;
        arr.push_back(std::move(aj));
    }
    return arr;
}

}  // namespace

BootstrapResult run_bootstrap(const std::vector<TranslationPair>& pairs,
                              const std::vector<Dialect>& targets, llm::GenerationModel& model,
                              const llm::PromptLibrary& prompts,
                              const exec::ExecutorGateway& gateway,
                              const SchemaProvider& schema_for, const TranslateConfig& config,
                              const std::string& out_dir,
                              std::vector<TranslationOutcome>* outcomes_sink) {
    std::filesystem::create_directories(out_dir);
    RecordWriter trans_writer((std::filesystem::path(out_dir) / "d_trans.jsonl").string());
    RecordWriter unresolved_writer((std::filesystem::path(out_dir) / "unresolved.jsonl").string());

    BootstrapResult result;

    for (Dialect target : targets) {
        std::vector<TranslationOutcome> outcomes(pairs.size());
        // Deterministic models consume scripts in call order; keep their
        // generation sequential. Stochastic models fan out across workers.
        int workers = model.deterministic() ? 1 : std::max(1, config.workers);
        if (workers == 1) {
            for (std::size_t i = 0; i < pairs.size(); ++i)
                outcomes[i] = translate_with_feedback(pairs[i], target, model, prompts, gateway,
                                                      schema_for, config);
        } else {
            std::atomic<std::size_t> next{0};
            std::vector<std::thread> threads;
            for (int w = 0; w < workers; ++w) {
                threads.emplace_back([&] {
                    while (true) {
                        std::size_t i = next.fetch_add(1);
                        if (i >= pairs.size()) return;
                        outcomes[i] = translate_with_feedback(pairs[i], target, model, prompts,
                                                              gateway, schema_for, config);
                    }
                });
            }
            for (auto& t : threads) t.join();
        }

        IterationStats stats;
        stats.total = pairs.size();
        stats.proposed.assign(static_cast<std::size_t>(config.max_rounds), 0);
        stats.failed.assign(static_cast<std::size_t>(config.max_rounds), 0);
        for (const auto& outcome : outcomes) {
            if (outcome.via_prefilter) ++stats.prefilter_solved;
            for (int r = 1; r <= config.max_rounds; ++r) {
                std::size_t idx = static_cast<std::size_t>(r - 1);
                // proposed: the item actually ran a model round r
                if (!outcome.via_prefilter &&
                    static_cast<int>(outcome.attempts.size()) >= r)
                    ++stats.proposed[idx];
                // failed: not solved by the end of round r
                if (!(outcome.success && outcome.rounds_used <= r)) ++stats.failed[idx];
            }
            if (!outcome.success) ++stats.unresolved;

            if (outcome.success) {
                trans_writer.write(outcome.record);
                ++result.translated;
            } else {
                json line;
                line["id"] = outcome.record.id;
                line["question_id"] = outcome.record.question_id;
                line["db_id"] = outcome.record.db_id;
                line["dialect"] = dialect_tag(outcome.record.dialect);
                line["sql"] = outcome.record.sql;
                line["round"] = outcome.record.round;
                line["status"] = "invalid";
                line["provenance"] = "translated";
                line["attempts"] = attempt_history(outcome);
                if (outcome.aborted) line["aborted"] = outcome.abort_reason;
                unresolved_writer.write_line(line.dump());
                ++result.unresolved;
            }
        }
        if (outcomes_sink)
            for (auto& o : outcomes) outcomes_sink->push_back(std::move(o));
        result.stats[target] = std::move(stats);
    }
    return result;
}

std::vector<TranslationPair> read_pairs_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open pairs file: " + path);
    std::vector<TranslationPair> pairs;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded())
            throw FormatError(path + ":" + std::to_string(lineno) + ": malformed line");
        TranslationPair p;
        p.question.id = j.at("id").get<std::string>();
        p.question.text = j.at("question").get<std::string>();
        p.question.db_ref = j.at("db_id").get<std::string>();
        p.question.source = QuestionSource::seed;
        p.source_sql = j.at("sql").get<std::string>();
        pairs.push_back(std::move(p));
    }
    return pairs;
}

}  // namespace dforge::bootstrap

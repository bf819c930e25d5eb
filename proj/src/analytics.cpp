#include "dforge/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dforge/llm/gateway.hpp"
#include "json.hpp"

using nlohmann::json;

namespace dforge::eval {

std::vector<BenchmarkItem> load_benchmark(const std::string& dir) {
    auto path = std::filesystem::path(dir) / "items.jsonl";
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open benchmark items: " + path.string());
    std::vector<BenchmarkItem> items;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded())
            throw FormatError(path.string() + ":" + std::to_string(lineno) + ": malformed line");
        BenchmarkItem item;
        item.id = j.at("id").get<std::string>();
        item.question = j.at("question").get<std::string>();
        item.db_ref = j.at("db_id").get<std::string>();
        item.dialect = parse_dialect(j.at("dialect").get<std::string>());
        item.gold_sql = j.at("gold_sql").get<std::string>();
        item.category = j.value("category", std::string());
        items.push_back(std::move(item));
    }
    return items;
}

std::size_t materialize_gold(std::vector<BenchmarkItem>& items,
                             const exec::ExecutorGateway& gateway) {
    std::size_t invalid = 0;
    for (auto& item : items) {
        if (item.gold_result || item.gold_invalid) continue;
        auto report = gateway.run(item.gold_sql, item.dialect, item.db_ref);
        if (report.status == exec::ExecStatus::ok) {
            item.gold_result = std::move(report.result);
        } else {
            item.gold_invalid = true;
            ++invalid;
        }
    }
    return invalid;
}

double EvalReport::macro_average_pct() const {
    std::vector<double> scores;
    for (const auto& [_, bucket] : per_dialect) scores.push_back(bucket.accuracy_pct());
    if (scores.empty()) return 0.0;
    return macro_average(scores);
}

std::string EvalReport::render_text() const {
    std::ostringstream os;
    os << "execution accuracy\n";
    char buf[160];
    for (const auto& [dialect, bucket] : per_dialect) {
        std::snprintf(buf, sizeof(buf), "  %-10s %6zu/%zu  %6.2f%%\n", dialect.c_str(),
                      bucket.correct, bucket.total, bucket.accuracy_pct());
        os << buf;
    }
    std::snprintf(buf, sizeof(buf), "  %-10s %6zu/%zu  %6.2f%%\n", "overall", correct, total,
                  overall_pct());
    os << buf;
    if (gold_invalid > 0) os << "  (" << gold_invalid << " items excluded: gold SQL failed)\n";
    if (per_category.size() > 1 ||
        (per_category.size() == 1 && per_category.begin()->first != "uncategorized")) {
        os << "per-category accuracy\n";
        for (const auto& [category, bucket] : per_category) {
            std::snprintf(buf, sizeof(buf), "  %-28s %6zu/%zu  %6.2f%%\n", category.c_str(),
                          bucket.correct, bucket.total, bucket.accuracy_pct());
            os << buf;
        }
    }
    return os.str();
}

EvalReport evaluate(const std::vector<std::pair<std::string, std::string>>& outputs,
                    const std::vector<BenchmarkItem>& benchmark,
                    const exec::ExecutorGateway& gateway) {
    std::map<std::string, const BenchmarkItem*> by_id;
    for (const auto& item : benchmark) by_id[item.id] = &item;

    EvalReport report;
    for (const auto& item : benchmark)
        if (item.gold_invalid) ++report.gold_invalid;

    for (const auto& [id, raw] : outputs) {
        auto it = by_id.find(id);
        if (it == by_id.end()) throw FormatError("output references unknown benchmark item '" + id + "'");
        const BenchmarkItem& item = *it->second;
        if (item.gold_invalid) continue;
        if (!item.gold_result)
            throw FormatError("benchmark item '" + id + "' has no materialized gold result");

        EvalReport::Detail detail;
        detail.id = id;
        detail.dialect = item.dialect;
        detail.category = item.category.empty() ? "uncategorized" : item.category;

        exec::ComparePolicy policy = exec::policy_for_query(item.gold_sql);
        try {
            std::string sql = llm::extract_sql(raw);
            auto exec_report = gateway.run(sql, item.dialect, item.db_ref);
            detail.correct =
                exec::reward(exec_report, item.gold_result, exec::RewardMode::exec_and_match,
                             policy) == 1;
            if (!detail.correct)
                detail.error_class = exec_report.status == exec::ExecStatus::ok
                                         ? "wrong-result"
                                         : exec_report.error_class;
        } catch (const llm::ExtractError&) {
            detail.correct = false;
            detail.error_class = "extraction";
        }

        auto& dialect_bucket = report.per_dialect[dialect_tag(item.dialect)];
        ++dialect_bucket.total;
        auto& category_bucket = report.per_category[detail.category];
        ++category_bucket.total;
        ++report.total;
        if (detail.correct) {
            ++dialect_bucket.correct;
            ++category_bucket.correct;
            ++report.correct;
        }
        report.details.push_back(std::move(detail));
    }
    return report;
}

double macro_average(const std::vector<double>& scores_pct) {
    if (scores_pct.empty()) throw FormatError("macro_average requires at least one score");
    // inputs are 2-decimal percentages; average in centi units so decimal
    // halves round the way the decimal arithmetic would
    double centi_sum = 0.0;
    for (double s : scores_pct) centi_sum += static_cast<double>(std::llround(s * 100.0));
    double mean_centi = centi_sum / static_cast<double>(scores_pct.size());
    return static_cast<double>(std::llround(mean_centi)) / 100.0;
}

double flip_delta(const std::vector<double>& dialect_scores_pct, double sqlite_score_pct) {
    if (dialect_scores_pct.empty()) throw FormatError("flip_delta requires dialect scores");
    // scores are 2-decimal percentages; work in centi units so halves stay exact
    double centi_sum = 0.0;
    for (double s : dialect_scores_pct) centi_sum += static_cast<double>(std::llround(s * 100.0));
    double mean_centi = centi_sum / static_cast<double>(dialect_scores_pct.size());
    double delta_centi = mean_centi - static_cast<double>(std::llround(sqlite_score_pct * 100.0));
    return static_cast<double>(std::llround(delta_centi)) / 100.0;
}

std::int64_t estimate_llm_calls(std::int64_t queries, double p_llm, int rounds,
                                double p_prefilter) {
    if (queries < 0) throw FormatError("estimate_llm_calls requires q >= 0");
    if (rounds < 1) throw FormatError("estimate_llm_calls requires rounds >= 1");
    if (p_llm < 0.0 || p_llm > 1.0 || p_prefilter < 0.0 || p_prefilter > 1.0)
        throw FormatError("estimate_llm_calls requires rates in [0, 1]");
    double factor = 0.0;
    double unresolved = 1.0;
    for (int r = 0; r < rounds; ++r) {
        factor += unresolved;
        unresolved *= (1.0 - p_llm);
    }
    double calls = static_cast<double>(queries) * (1.0 - p_prefilter) * factor;
    return std::llround(calls);  // llround rounds halves away from zero
}

namespace {

std::vector<std::string> tokenize_lower(const std::string& text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

using SparseVec = std::map<std::string, double>;

double cosine(const SparseVec& a, const SparseVec& b) {
    double dot = 0.0;
    for (const auto& [term, weight] : a) {
        auto it = b.find(term);
        if (it != b.end()) dot += weight * it->second;
    }
    return dot;  // vectors are L2-normalized
}

}  // namespace

double diversity_score(const std::vector<std::string>& corpus_a,
                       const std::vector<std::string>& corpus_b) {
    if (corpus_a.empty() || corpus_b.empty())
        throw FormatError("diversity_score requires non-empty corpora");

    std::vector<std::vector<std::string>> docs;
    for (const auto& d : corpus_a) docs.push_back(tokenize_lower(d));
    for (const auto& d : corpus_b) docs.push_back(tokenize_lower(d));
    const std::size_t n_docs = docs.size();

    std::map<std::string, std::size_t> df;
    for (const auto& doc : docs) {
        std::map<std::string, bool> seen;
        for (const auto& t : doc)
            if (seen.emplace(t, true).second) ++df[t];
    }
    auto idf = [&](const std::string& term) {
        return std::log((1.0 + static_cast<double>(n_docs)) /
                        (1.0 + static_cast<double>(df.at(term)))) +
               1.0;
    };

    std::vector<SparseVec> vectors;
    vectors.reserve(n_docs);
    for (const auto& doc : docs) {
        SparseVec v;
        for (const auto& t : doc) v[t] += 1.0;
        double norm_sq = 0.0;
        for (auto& [term, tf] : v) {
            tf *= idf(term);
            norm_sq += tf * tf;
        }
        if (norm_sq > 0.0) {
            double norm = std::sqrt(norm_sq);
            for (auto& [_, w] : v) w /= norm;
        }
        vectors.push_back(std::move(v));
    }

    double sum = 0.0;
    for (std::size_t i = 0; i < corpus_a.size(); ++i) {
        double best = 0.0;
        for (std::size_t j = 0; j < corpus_b.size(); ++j)
            best = std::max(best, cosine(vectors[i], vectors[corpus_a.size() + j]));
        sum += best;
    }
    return sum / static_cast<double>(corpus_a.size());
}

DatasetStats dataset_stats(const std::vector<std::pair<std::string, std::string>>& labeled_files) {
    DatasetStats stats;
    for (const auto& [stage, path] : labeled_files) {
        DatasetStats::FileStats fs;
        fs.stage = stage;
        fs.path = path;
        std::ifstream in(path);
        if (!in) throw FormatError("cannot open dataset file: " + path);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            try {
                DatasetRecord r = parse_record(line);
                ++fs.by_provenance[provenance_tag(r.provenance)];
                ++fs.total;
            } catch (const FormatError&) {
                ++fs.parse_errors;  // reported, counting continues
            }
        }
        for (const auto& [prov, count] : fs.by_provenance) stats.total_by_provenance[prov] += count;
        stats.total += fs.total;
        stats.files.push_back(std::move(fs));
    }
    return stats;
}

std::string DatasetStats::render_table() const {
    std::ostringstream os;
    char buf[160];
    os << "Stage  Dataset                      Size\n";
    std::string last_stage;
    for (const auto& fs : files) {
        std::string name = std::filesystem::path(fs.path).stem().string();
        std::string stage = fs.stage == last_stage ? "" : fs.stage;
        last_stage = fs.stage;
        std::snprintf(buf, sizeof(buf), "%-6s %-28s %zu\n", stage.c_str(), name.c_str(), fs.total);
        os << buf;
        for (const auto& [prov, count] : fs.by_provenance) {
            std::snprintf(buf, sizeof(buf), "       - %-26s %zu\n", prov.c_str(), count);
            os << buf;
        }
        if (fs.parse_errors) {
            std::snprintf(buf, sizeof(buf), "       ! %zu malformed lines skipped\n",
                          fs.parse_errors);
            os << buf;
        }
    }
    std::snprintf(buf, sizeof(buf), "%-6s %-28s %zu\n", "total", "", total);
    os << buf;
    return os.str();
}

std::vector<CategoryRow> perturbation_breakdown(const EvalReport& report) {
    std::vector<CategoryRow> rows;
    for (const auto& [category, bucket] : report.per_category) {
        CategoryRow row;
        row.category = category;
        row.total = bucket.total;
        row.correct = bucket.correct;
        row.accuracy_pct = bucket.accuracy_pct();
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace dforge::eval

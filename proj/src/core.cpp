#include "dforge/core.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

using nlohmann::json;

namespace dforge {

Dialect parse_dialect(const std::string& tag) {
    std::string t;
    t.reserve(tag.size());
    for (char c : tag) t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (t == "sqlite") return Dialect::sqlite;
    if (t == "postgres" || t == "postgresql") return Dialect::postgres;
    if (t == "mysql") return Dialect::mysql;
    if (t == "oracle") return Dialect::oracle;
    throw FormatError("unknown dialect '" + tag + "' (valid: sqlite, postgres, mysql, oracle)");
}

const char* dialect_tag(Dialect d) {
    switch (d) {
        case Dialect::sqlite: return "sqlite";
        case Dialect::postgres: return "postgres";
        case Dialect::mysql: return "mysql";
        case Dialect::oracle: return "oracle";
    }
    return "sqlite";
}

std::vector<Dialect> all_dialects() {
    return {Dialect::sqlite, Dialect::postgres, Dialect::mysql, Dialect::oracle};
}

const char* question_source_tag(QuestionSource s) {
    switch (s) {
        case QuestionSource::seed: return "seed";
        case QuestionSource::existing_dataset: return "existing-dataset";
        case QuestionSource::augmented: return "augmented";
    }
    return "seed";
}

const char* record_status_tag(RecordStatus s) {
    switch (s) {
        case RecordStatus::untested: return "untested";
        case RecordStatus::valid: return "valid";
        case RecordStatus::invalid: return "invalid";
    }
    return "untested";
}

const char* provenance_tag(Provenance p) {
    switch (p) {
        case Provenance::translated: return "translated";
        case Provenance::sampled: return "sampled";
        case Provenance::augmented: return "augmented";
        case Provenance::manual: return "manual";
    }
    return "manual";
}

QuestionSource parse_question_source(const std::string& tag) {
    if (tag == "seed") return QuestionSource::seed;
    if (tag == "existing-dataset") return QuestionSource::existing_dataset;
    if (tag == "augmented") return QuestionSource::augmented;
    throw FormatError("invalid field source: '" + tag + "'");
}

RecordStatus parse_record_status(const std::string& tag) {
    if (tag == "untested") return RecordStatus::untested;
    if (tag == "valid") return RecordStatus::valid;
    if (tag == "invalid") return RecordStatus::invalid;
    throw FormatError("invalid field status: '" + tag + "'");
}

Provenance parse_provenance(const std::string& tag) {
    if (tag == "translated") return Provenance::translated;
    if (tag == "sampled") return Provenance::sampled;
    if (tag == "augmented") return Provenance::augmented;
    if (tag == "manual") return Provenance::manual;
    throw FormatError("invalid field provenance: '" + tag + "'");
}

void SchemaInfo::validate() const {
    std::set<std::string> names;
    for (const auto& t : tables) {
        if (!names.insert(t.name).second)
            throw FormatError("duplicate table name '" + t.name + "'");
        std::set<std::string> cols;
        for (const auto& c : t.columns)
            if (!cols.insert(c.name).second)
                throw FormatError("duplicate column name '" + c.name + "' in table '" + t.name + "'");
    }
}

void DatasetRecord::validate() const {
    if (id.empty()) throw FormatError("invalid field id: must be non-empty");
    if (round < 0) throw FormatError("invalid field round: must be >= 0");
}

void PreferenceRecord::validate() const {
    if (chosen == rejected)
        throw FormatError("preference pair invariant violated: chosen equals rejected");
    if (chosen_status != "ok")
        throw FormatError("preference pair invariant violated: chosen_status must be ok");
    if (rejected_status == "ok" && rejected_error_class != "wrong-result")
        throw FormatError("preference pair invariant violated: rejected with status ok must be wrong-result");
    if (rejected_status != "ok" && rejected_error_class.empty())
        throw FormatError("preference pair invariant violated: rejected_error_class missing");
}

namespace {

json parse_line(const std::string& line) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw FormatError("malformed line: not valid JSON");
    if (!j.is_object()) throw FormatError("malformed line: expected a JSON object");
    return j;
}

std::string need_string(const json& j, const char* field) {
    auto it = j.find(field);
    if (it == j.end()) throw FormatError(std::string("missing field ") + field);
    if (!it->is_string()) throw FormatError(std::string("invalid field ") + field + ": expected string");
    return it->get<std::string>();
}

int need_int(const json& j, const char* field) {
    auto it = j.find(field);
    if (it == j.end()) throw FormatError(std::string("missing field ") + field);
    if (!it->is_number_integer()) throw FormatError(std::string("invalid field ") + field + ": expected integer");
    return it->get<int>();
}

}  // namespace

DatasetRecord parse_record(const std::string& line) {
    json j = parse_line(line);
    DatasetRecord r;
    r.id = need_string(j, "id");
    r.question_id = need_string(j, "question_id");
    r.db_id = need_string(j, "db_id");
    r.dialect = parse_dialect(need_string(j, "dialect"));
    r.sql = need_string(j, "sql");
    r.round = need_int(j, "round");
    r.status = parse_record_status(need_string(j, "status"));
    r.provenance = parse_provenance(need_string(j, "provenance"));
    r.validate();
    return r;
}

std::string serialize_record(const DatasetRecord& r) {
    r.validate();
    json j;  // nlohmann objects are key-ordered maps: dump() is alphabetical
    j["id"] = r.id;
    j["question_id"] = r.question_id;
    j["db_id"] = r.db_id;
    j["dialect"] = dialect_tag(r.dialect);
    j["sql"] = r.sql;
    j["round"] = r.round;
    j["status"] = record_status_tag(r.status);
    j["provenance"] = provenance_tag(r.provenance);
    return j.dump();
}

PreferenceRecord parse_preference(const std::string& line) {
    json j = parse_line(line);
    PreferenceRecord r;
    r.id = need_string(j, "id");
    r.question_id = need_string(j, "question_id");
    r.db_id = need_string(j, "db_id");
    r.dialect = parse_dialect(need_string(j, "dialect"));
    r.chosen = need_string(j, "chosen");
    r.rejected = need_string(j, "rejected");
    r.chosen_status = need_string(j, "chosen_status");
    r.rejected_status = need_string(j, "rejected_status");
    r.rejected_error_class = need_string(j, "rejected_error_class");
    r.validate();
    return r;
}

std::string serialize_preference(const PreferenceRecord& r) {
    r.validate();
    json j;
    j["id"] = r.id;
    j["question_id"] = r.question_id;
    j["db_id"] = r.db_id;
    j["dialect"] = dialect_tag(r.dialect);
    j["chosen"] = r.chosen;
    j["rejected"] = r.rejected;
    j["chosen_status"] = r.chosen_status;
    j["rejected_status"] = r.rejected_status;
    j["rejected_error_class"] = r.rejected_error_class;
    return j.dump();
}

NLQuestion parse_question(const std::string& line) {
    json j = parse_line(line);
    NLQuestion q;
    q.id = need_string(j, "id");
    q.text = need_string(j, "text");
    q.db_ref = need_string(j, "db_id");
    q.source = parse_question_source(need_string(j, "source"));
    if (auto it = j.find("value_grounded"); it != j.end() && it->is_boolean())
        q.value_grounded = it->get<bool>();
    if (q.text.empty()) throw FormatError("invalid field text: must be non-empty");
    return q;
}

std::string serialize_question(const NLQuestion& q) {
    json j;
    j["id"] = q.id;
    j["text"] = q.text;
    j["db_id"] = q.db_ref;
    j["source"] = question_source_tag(q.source);
    if (q.source == QuestionSource::augmented) j["value_grounded"] = q.value_grounded;
    return j.dump();
}

namespace {

template <typename T, typename ParseFn>
std::vector<T> read_lines(const std::string& path, ParseFn parse, bool check_ids) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open file: " + path);
    std::vector<T> out;
    std::set<std::string> ids;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            T item = parse(line);
            if (check_ids && !ids.insert(item.id).second)
                throw FormatError("duplicate id '" + item.id + "'");
            out.push_back(std::move(item));
        } catch (const FormatError& e) {
            throw FormatError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace

std::vector<DatasetRecord> read_record_file(const std::string& path) {
    return read_lines<DatasetRecord>(path, parse_record, true);
}

std::vector<NLQuestion> read_question_file(const std::string& path) {
    return read_lines<NLQuestion>(path, parse_question, true);
}

std::vector<PreferenceRecord> read_preference_file(const std::string& path) {
    return read_lines<PreferenceRecord>(path, parse_preference, true);
}

RecordWriter::RecordWriter(std::string path) : path_(std::move(path)) {
    FILE* f = std::fopen(path_.c_str(), "wb");
    if (!f) throw FormatError("cannot open file for writing: " + path_);
    file_ = f;
}

RecordWriter::~RecordWriter() { close(); }

void RecordWriter::ensure_unique(const std::string& id) {
    if (std::find(seen_ids_.begin(), seen_ids_.end(), id) != seen_ids_.end())
        throw FormatError("duplicate id '" + id + "' in " + path_);
    seen_ids_.push_back(id);
}

void RecordWriter::write(const DatasetRecord& r) {
    ensure_unique(r.id);
    write_line(serialize_record(r));
}

void RecordWriter::write(const PreferenceRecord& r) {
    ensure_unique(r.id);
    write_line(serialize_preference(r));
}

void RecordWriter::write_line(const std::string& line) {
    if (!file_) throw FormatError("writer already closed: " + path_);
    FILE* f = static_cast<FILE*>(file_);
    std::fwrite(line.data(), 1, line.size(), f);
    std::fputc('\n', f);
    std::fflush(f);
    ++count_;
}

void RecordWriter::close() {
    if (file_) {
        std::fclose(static_cast<FILE*>(file_));
        file_ = nullptr;
    }
}

}  // namespace dforge

#pragma once

// Shared data model for the dialect-forge pipeline: dialect tags, questions,
// schemas, dataset/preference records and the line-delimited persistence
// format every stage reads and writes.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dforge {

enum class Dialect { sqlite, postgres, mysql, oracle };

// Case-insensitive, accepts "postgresql" as an alias for postgres.
// Throws FormatError listing the valid tags on anything else.
Dialect parse_dialect(const std::string& tag);
const char* dialect_tag(Dialect d);
std::vector<Dialect> all_dialects();

enum class QuestionSource { seed, existing_dataset, augmented };
enum class RecordStatus { untested, valid, invalid };
enum class Provenance { translated, sampled, augmented, manual };

const char* question_source_tag(QuestionSource s);
const char* record_status_tag(RecordStatus s);
const char* provenance_tag(Provenance p);
QuestionSource parse_question_source(const std::string& tag);
RecordStatus parse_record_status(const std::string& tag);
Provenance parse_provenance(const std::string& tag);

class FormatError : public std::runtime_error {
public:
    explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

struct NLQuestion {
    std::string id;
    std::string text;
    std::string db_ref;
    QuestionSource source = QuestionSource::seed;
    // Set by the augmentation stage when the text quotes a concrete cell
    // value from the database it was generated against.
    bool value_grounded = false;

    bool operator==(const NLQuestion&) const = default;
};

struct SchemaInfo {
    struct Column {
        std::string name;
        std::string declared_type;
        bool operator==(const Column&) const = default;
    };
    struct Table {
        std::string name;
        std::vector<Column> columns;
        bool operator==(const Table&) const = default;
    };
    std::vector<Table> tables;

    bool operator==(const SchemaInfo&) const = default;
    // Table names unique, column names unique per table.
    void validate() const;
};

// One (question, dialect SQL) unit flowing through the pipeline stages.
struct DatasetRecord {
    std::string id;
    std::string question_id;
    std::string db_id;
    Dialect dialect = Dialect::sqlite;
    std::string sql;
    int round = 0;
    RecordStatus status = RecordStatus::untested;
    Provenance provenance = Provenance::manual;

    bool operator==(const DatasetRecord&) const = default;
    void validate() const;
};

struct PreferenceRecord {
    std::string id;
    std::string question_id;
    std::string db_id;
    Dialect dialect = Dialect::sqlite;
    std::string chosen;
    std::string rejected;
    std::string chosen_status;          // always "ok"
    std::string rejected_status;        // "ok" | "error" | "timeout"
    std::string rejected_error_class;   // error class, or "wrong-result" when rejected_status == "ok"

    bool operator==(const PreferenceRecord&) const = default;
    void validate() const;
};

// Persisted description of a pipeline run; one per output directory.
struct RunManifest {
    std::string run_id;
    std::string config_digest;
    struct StageState {
        bool completed = false;
        std::string digest;             // config digest the stage ran under
        std::map<std::string, std::int64_t> counters;
        std::string started_at;
        std::string finished_at;
    };
    std::map<std::string, StageState> stages;
    std::string created_at;
    std::string updated_at;
};

// Line-oriented persistence. One JSON object per line, field order canonical
// (alphabetical) so serialization is byte-stable for golden files.
DatasetRecord parse_record(const std::string& line);
std::string serialize_record(const DatasetRecord& r);

PreferenceRecord parse_preference(const std::string& line);
std::string serialize_preference(const PreferenceRecord& r);

NLQuestion parse_question(const std::string& line);
std::string serialize_question(const NLQuestion& q);

// Reads a record file, enforcing id uniqueness across the file.
std::vector<DatasetRecord> read_record_file(const std::string& path);
std::vector<NLQuestion> read_question_file(const std::string& path);
std::vector<PreferenceRecord> read_preference_file(const std::string& path);

// Serializing writer that enforces id uniqueness and record invariants.
class RecordWriter {
public:
    explicit RecordWriter(std::string path);
    ~RecordWriter();
    RecordWriter(const RecordWriter&) = delete;
    RecordWriter& operator=(const RecordWriter&) = delete;

    void write(const DatasetRecord& r);
    void write(const PreferenceRecord& r);
    void write_line(const std::string& line);
    void close();
    std::size_t count() const { return count_; }

private:
    void ensure_unique(const std::string& id);
    std::string path_;
    void* file_ = nullptr;  // FILE*
    std::size_t count_ = 0;
    std::vector<std::string> seen_ids_;
};

}  // namespace dforge

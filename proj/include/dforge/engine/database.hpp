#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dforge/core.hpp"
#include "dforge/engine/value.hpp"

namespace dforge::engine {

struct TableData {
    std::string name;
    std::vector<std::string> columns;
    std::vector<ColumnType> types;
    std::vector<std::vector<Value>> rows;
};

// Immutable after load; safe to share across concurrent executions.
class InMemoryDb {
public:
    InMemoryDb() = default;
    explicit InMemoryDb(std::string db_id) : db_id_(std::move(db_id)) {}

    const std::string& db_id() const { return db_id_; }
    void set_db_id(std::string id) { db_id_ = std::move(id); }

    void add_table(TableData t);
    const TableData* find_table(const std::string& name, bool case_sensitive) const;
    const std::vector<TableData>& tables() const { return tables_; }

    std::size_t table_count() const { return tables_.size(); }
    std::size_t total_rows() const;

    SchemaInfo schema() const;
    // Skipped while loading because a cell could not be coerced to the
    // declared column type (empty-string numerics and the like).
    std::size_t skipped_rows() const { return skipped_rows_; }
    void set_skipped_rows(std::size_t n) { skipped_rows_ = n; }

private:
    std::string db_id_;
    std::vector<TableData> tables_;
    std::size_t skipped_rows_ = 0;
};

class LoadError : public std::runtime_error {
public:
    explicit LoadError(const std::string& what) : std::runtime_error(what) {}
};

// Fixture format: {"tables": [{"name", "columns": [{"name","type"}], "rows": [[...]]}]}
// with types drawn from {integer, float, text, date}. Rows whose cells cannot
// be coerced to the declared type are skipped and counted; structural problems
// (arity mismatch, duplicate table, unknown type) abort the load.
std::shared_ptr<const InMemoryDb> load_database(const std::string& path);
std::shared_ptr<const InMemoryDb> load_database_from_json(const std::string& text, const std::string& db_id);

}  // namespace dforge::engine

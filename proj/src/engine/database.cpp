#include "dforge/engine/database.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

using nlohmann::json;

namespace dforge::engine {

void InMemoryDb::add_table(TableData t) {
    for (const auto& existing : tables_)
        if (existing.name == t.name) throw LoadError("duplicate table name '" + t.name + "'");
    tables_.push_back(std::move(t));
}

const TableData* InMemoryDb::find_table(const std::string& name, bool case_sensitive) const {
    auto ieq = [](const std::string& a, const std::string& b) {
        if (a.size() != b.size()) return false;
        for (std::size_t i = 0; i < a.size(); ++i)
            if (std::tolower(static_cast<unsigned char>(a[i])) !=
                std::tolower(static_cast<unsigned char>(b[i])))
                return false;
        return true;
    };
    for (const auto& t : tables_) {
        if (case_sensitive ? t.name == name : ieq(t.name, name)) return &t;
    }
    return nullptr;
}

std::size_t InMemoryDb::total_rows() const {
    std::size_t n = 0;
    for (const auto& t : tables_) n += t.rows.size();
    return n;
}

SchemaInfo InMemoryDb::schema() const {
    SchemaInfo s;
    for (const auto& t : tables_) {
        SchemaInfo::Table st;
        st.name = t.name;
        for (std::size_t i = 0; i < t.columns.size(); ++i)
            st.columns.push_back({t.columns[i], column_type_tag(t.types[i])});
        s.tables.push_back(std::move(st));
    }
    return s;
}

namespace {

// Coerces a JSON cell to the declared type. nullopt marks a malformed cell;
// the whole row is then skipped and counted, mirroring the data-quality pass
// the source corpora needed (empty-string numerics and the like).
std::optional<Value> coerce_cell(const json& cell, ColumnType type) {
    if (cell.is_null()) return Value{std::monostate{}};
    switch (type) {
        case ColumnType::integer:
            if (cell.is_number_integer()) return Value{cell.get<std::int64_t>()};
            if (cell.is_number_float()) {
                double d = cell.get<double>();
                if (d == static_cast<double>(static_cast<std::int64_t>(d)))
                    return Value{static_cast<std::int64_t>(d)};
                return std::nullopt;
            }
            if (cell.is_string()) {
                const std::string& s = cell.get_ref<const std::string&>();
                if (s.empty()) return std::nullopt;
                std::int64_t v = 0;
                auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
                if (ec == std::errc() && p == s.data() + s.size()) return Value{v};
                return std::nullopt;
            }
            return std::nullopt;
        case ColumnType::floating:
            if (cell.is_number()) return Value{cell.get<double>()};
            if (cell.is_string()) {
                const std::string& s = cell.get_ref<const std::string&>();
                if (s.empty()) return std::nullopt;
                char* end = nullptr;
                double v = std::strtod(s.c_str(), &end);
                if (end == s.c_str() + s.size()) return Value{v};
                return std::nullopt;
            }
            return std::nullopt;
        case ColumnType::text:
        case ColumnType::date:
            if (cell.is_string()) return Value{cell.get<std::string>()};
            return std::nullopt;
    }
    return std::nullopt;
}

}  // namespace

std::shared_ptr<const InMemoryDb> load_database_from_json(const std::string& text,
                                                          const std::string& db_id) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw LoadError("fixture '" + db_id + "' is not a JSON object");
    auto db = std::make_shared<InMemoryDb>(db_id);
    std::size_t skipped = 0;
    if (!j.contains("tables") || !j["tables"].is_array())
        throw LoadError("fixture '" + db_id + "' missing 'tables' array");
    for (const auto& tj : j["tables"]) {
        TableData t;
        if (!tj.contains("name") || !tj["name"].is_string())
            throw LoadError("fixture '" + db_id + "': table missing 'name'");
        t.name = tj["name"].get<std::string>();
        if (!tj.contains("columns") || !tj["columns"].is_array() || tj["columns"].empty())
            throw LoadError("table '" + t.name + "' missing 'columns'");
        std::set<std::string> seen;
        for (const auto& cj : tj["columns"]) {
            std::string cname = cj.at("name").get<std::string>();
            if (!seen.insert(cname).second)
                throw LoadError("duplicate column '" + cname + "' in table '" + t.name + "'");
            t.columns.push_back(cname);
            t.types.push_back(parse_column_type(cj.at("type").get<std::string>()));
        }
        std::size_t row_index = 0;
        for (const auto& rj : tj.value("rows", json::array())) {
            if (!rj.is_array() || rj.size() != t.columns.size())
                throw LoadError("table '" + t.name + "' row " + std::to_string(row_index) +
                                ": arity mismatch (expected " + std::to_string(t.columns.size()) +
                                " cells)");
            std::vector<Value> row;
            row.reserve(rj.size());
            bool ok = true;
            for (std::size_t c = 0; c < rj.size(); ++c) {
                auto v = coerce_cell(rj[c], t.types[c]);
                if (!v) {
                    ok = false;
                    break;
                }
                row.push_back(std::move(*v));
            }
            if (ok)
                t.rows.push_back(std::move(row));
            else
                ++skipped;
            ++row_index;
        }
        db->add_table(std::move(t));
    }
    db->set_skipped_rows(skipped);
    return db;
}

std::shared_ptr<const InMemoryDb> load_database(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw LoadError("cannot open fixture file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return load_database_from_json(buf.str(), std::filesystem::path(path).stem().string());
}

}  // namespace dforge::engine

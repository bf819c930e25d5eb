#include "dforge/engine/executor.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <unordered_map>

#include "dforge/engine/error.hpp"
#include "dforge/engine/printer.hpp"

namespace dforge::engine {

namespace {

using namespace ast;

bool iequals(const std::string& a, const std::string& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::tolower(static_cast<unsigned char>(a[i])) !=
            std::tolower(static_cast<unsigned char>(b[i])))
            return false;
    return true;
}

[[noreturn]] void unknown_relation(const std::string& name, Dialect d) {
    std::string msg;
    switch (d) {
        case Dialect::mysql: msg = "Table '" + name + "' doesn't exist"; break;
        case Dialect::postgres: msg = "relation \"" + name + "\" does not exist"; break;
        case Dialect::oracle: msg = "ORA-00942: table or view does not exist: " + name; break;
        case Dialect::sqlite: msg = "no such table: " + name; break;
    }
    throw EngineError(EngineErrorClass::unknown_relation, msg);
}

[[noreturn]] void unknown_column(const std::string& name, Dialect d) {
    std::string msg;
    switch (d) {
        case Dialect::mysql: msg = "Unknown column '" + name + "' in 'field list'"; break;
        case Dialect::postgres: msg = "column \"" + name + "\" does not exist"; break;
        case Dialect::oracle: msg = "ORA-00904: \"" + name + "\": invalid identifier"; break;
        case Dialect::sqlite: msg = "no such column: " + name; break;
    }
    throw EngineError(EngineErrorClass::unknown_column, msg);
}

struct Binding {
    std::string name;                       // alias or table name
    std::vector<std::string> columns;
    std::size_t offset = 0;                 // cell offset in the combined row
};

struct Scope {
    std::vector<Binding> bindings;
    std::size_t width = 0;
    bool case_sensitive_names = false;

    bool name_matches(const std::string& binding, const std::string& ref) const {
        return case_sensitive_names ? binding == ref : iequals(binding, ref);
    }

    // Returns absolute cell index of a (possibly qualified) column reference.
    std::size_t resolve(const std::string& table, const std::string& column, Dialect d) const {
        if (!table.empty()) {
            for (const auto& b : bindings) {
                if (!name_matches(b.name, table)) continue;
                for (std::size_t c = 0; c < b.columns.size(); ++c)
                    if (iequals(b.columns[c], column)) return b.offset + c;
                unknown_column(table + "." + column, d);
            }
            unknown_relation(table, d);
        }
        std::size_t found = 0, index = 0;
        for (const auto& b : bindings) {
            for (std::size_t c = 0; c < b.columns.size(); ++c) {
                if (iequals(b.columns[c], column)) {
                    ++found;
                    index = b.offset + c;
                }
            }
        }
        if (found == 0) unknown_column(column, d);
        if (found > 1)
            throw EngineError(EngineErrorClass::unknown_column, "ambiguous column name: " + column);
        return index;
    }
};

using RowSet = std::vector<std::vector<Value>>;

struct ValueVectorLess {
    bool operator()(const std::vector<Value>& a, const std::vector<Value>& b) const {
        for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
            int c = value_order(a[i], b[i]);
            if (c != 0) return c < 0;
        }
        return a.size() < b.size();
    }
};

class Evaluator {
public:
    Evaluator(const InMemoryDb& db, const DialectMode& mode, std::optional<Deadline> deadline)
        : db_(db), mode_(mode), deadline_(deadline) {}

    ResultTable exec_select(const SelectStmt& stmt) {
        Scope scope;
        scope.case_sensitive_names = mode_.case_sensitive_tables();
        RowSet rows;

        if (stmt.has_from) {
            bind_table(stmt.from, scope, rows, /*first=*/true);
            for (const auto& join : stmt.joins) apply_join(join, scope, rows);
        } else {
            rows.push_back({});  // one empty row: SELECT 1
        }

        if (stmt.where) {
            RowSet kept;
            for (auto& row : rows) {
                tick();
                if (truthy(eval(*stmt.where, scope, row))) kept.push_back(std::move(row));
            }
            rows = std::move(kept);
        }

        bool aggregate_mode = !stmt.group_by.empty();
        if (!aggregate_mode) {
            for (const auto& item : stmt.items)
                if (contains_aggregate(*item.expr)) aggregate_mode = true;
            if (stmt.having && contains_aggregate(*stmt.having)) aggregate_mode = true;
            for (const auto& o : stmt.order_by)
                if (contains_aggregate(*o.expr)) aggregate_mode = true;
        }
        if (stmt.having && !aggregate_mode)
            throw EngineError(EngineErrorClass::parse, "HAVING requires aggregation or GROUP BY");

        if (stmt.select_star && aggregate_mode)
            throw EngineError(EngineErrorClass::strict_group_by,
                              "SELECT * cannot be combined with aggregation");

        std::vector<std::string> labels = output_labels(stmt, scope);
        RowSet output;
        std::vector<std::vector<Value>> sort_keys;

        if (aggregate_mode) {
            exec_grouped(stmt, scope, rows, output, sort_keys);
        } else {
            exec_plain(stmt, scope, rows, output, sort_keys);
        }

        if (stmt.distinct) {
            RowSet dedup;
            std::vector<std::vector<Value>> dedup_keys;
            std::map<std::vector<Value>, bool, ValueVectorLess> seen;
            for (std::size_t i = 0; i < output.size(); ++i) {
                if (seen.emplace(output[i], true).second) {
                    dedup.push_back(std::move(output[i]));
                    if (!sort_keys.empty()) dedup_keys.push_back(std::move(sort_keys[i]));
                }
            }
            output = std::move(dedup);
            sort_keys = std::move(dedup_keys);
        }

        if (!stmt.order_by.empty()) {
            std::vector<std::size_t> idx(output.size());
            for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
            std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
                for (std::size_t k = 0; k < stmt.order_by.size(); ++k) {
                    int c = value_order(sort_keys[a][k], sort_keys[b][k]);
                    if (c != 0) return stmt.order_by[k].desc ? c > 0 : c < 0;
                }
                return false;
            });
            RowSet sorted;
            sorted.reserve(output.size());
            for (std::size_t i : idx) sorted.push_back(std::move(output[i]));
            output = std::move(sorted);
        }

        std::int64_t offset = stmt.offset.value_or(0);
        if (offset > 0) {
            if (static_cast<std::size_t>(offset) >= output.size())
                output.clear();
            else
                output.erase(output.begin(), output.begin() + offset);
        }
        if (stmt.limit && static_cast<std::size_t>(*stmt.limit) < output.size())
            output.resize(static_cast<std::size_t>(*stmt.limit));

        ResultTable result;
        result.columns = std::move(labels);
        result.rows = std::move(output);
        return result;
    }

private:
    const InMemoryDb& db_;
    const DialectMode& mode_;
    std::optional<Deadline> deadline_;
    std::uint32_t tick_counter_ = 0;
    // Uncorrelated subqueries are executed once and cached.
    std::unordered_map<const SelectStmt*, ResultTable> subquery_cache_;
    // Precomputed window values for the current row set, keyed by node.
    std::unordered_map<const Expr*, std::vector<Value>> window_values_;
    std::size_t current_row_index_ = 0;
    bool window_active_ = false;

    void tick() {
        if ((++tick_counter_ & 0xFFF) == 0 && deadline_ &&
            std::chrono::steady_clock::now() > *deadline_)
            throw ExecTimeout();
    }

    const ResultTable& subquery_result(const SelectStmt& stmt) {
        auto it = subquery_cache_.find(&stmt);
        if (it != subquery_cache_.end()) return it->second;
        Evaluator sub(db_, mode_, deadline_);
        auto [ins, _] = subquery_cache_.emplace(&stmt, sub.exec_select(stmt));
        return ins->second;
    }

    void bind_table(const TableRef& ref, Scope& scope, RowSet& rows, bool first) {
        Binding b;
        RowSet table_rows;
        if (ref.subquery) {
            ResultTable sub = Evaluator(db_, mode_, deadline_).exec_select(*ref.subquery);
            b.columns = sub.columns;
            table_rows = std::move(sub.rows);
        } else {
            const TableData* t = db_.find_table(ref.table, mode_.case_sensitive_tables());
            if (!t) unknown_relation(ref.table, mode_.dialect);
            b.columns = t->columns;
            table_rows = t->rows;
        }
        b.name = ref.binding_name();
        b.offset = scope.width;
        scope.width += b.columns.size();
        scope.bindings.push_back(std::move(b));
        if (first) {
            rows = std::move(table_rows);
        }
    }

    void apply_join(const Join& join, Scope& scope, RowSet& rows) {
        Binding b;
        RowSet right_rows;
        if (join.ref.subquery) {
            ResultTable sub = Evaluator(db_, mode_, deadline_).exec_select(*join.ref.subquery);
            b.columns = sub.columns;
            right_rows = std::move(sub.rows);
        } else {
            const TableData* t = db_.find_table(join.ref.table, mode_.case_sensitive_tables());
            if (!t) unknown_relation(join.ref.table, mode_.dialect);
            b.columns = t->columns;
            right_rows = t->rows;
        }
        b.name = join.ref.binding_name();
        b.offset = scope.width;
        std::size_t right_width = b.columns.size();
        scope.width += right_width;
        scope.bindings.push_back(std::move(b));

        RowSet joined;
        for (const auto& left : rows) {
            bool matched = false;
            for (const auto& right : right_rows) {
                tick();
                std::vector<Value> combined = left;
                combined.insert(combined.end(), right.begin(), right.end());
                if (truthy(eval(*join.on, scope, combined))) {
                    joined.push_back(std::move(combined));
                    matched = true;
                }
            }
            if (!matched && join.type == Join::Type::left) {
                std::vector<Value> combined = left;
                combined.resize(combined.size() + right_width);  // null-extended
                joined.push_back(std::move(combined));
            }
        }
        rows = std::move(joined);
    }

    // ---- plain (non-aggregate) path ---------------------------------------

    void exec_plain(const SelectStmt& stmt, Scope& scope, RowSet& rows, RowSet& output,
                    std::vector<std::vector<Value>>& sort_keys) {
        bool has_window = false;
        for (const auto& item : stmt.items)
            if (contains_window(*item.expr)) has_window = true;
        if (has_window) precompute_windows(stmt, scope, rows);

        output.reserve(rows.size());
        bool need_keys = !stmt.order_by.empty();
        for (std::size_t r = 0; r < rows.size(); ++r) {
            tick();
            current_row_index_ = r;
            window_active_ = has_window;
            std::vector<Value> cells;
            if (stmt.select_star) {
                cells = rows[r];
            } else {
                cells.reserve(stmt.items.size());
                for (const auto& item : stmt.items) cells.push_back(eval(*item.expr, scope, rows[r]));
            }
            if (need_keys) {
                std::vector<Value> keys;
                keys.reserve(stmt.order_by.size());
                for (const auto& o : stmt.order_by)
                    keys.push_back(order_key(stmt, scope, rows[r], cells, *o.expr));
                sort_keys.push_back(std::move(keys));
            }
            output.push_back(std::move(cells));
        }
        window_active_ = false;
    }

    // Resolves an ORDER BY expression: select alias or plain output column
    // name first, then the underlying row scope.
    Value order_key(const SelectStmt& stmt, Scope& scope, const std::vector<Value>& row,
                    const std::vector<Value>& cells, const Expr& e) {
        if (e.kind == Expr::Kind::column && e.table.empty() && !stmt.select_star) {
            for (std::size_t i = 0; i < stmt.items.size(); ++i) {
                if (!stmt.items[i].alias.empty() && iequals(stmt.items[i].alias, e.column))
                    return cells[i];
            }
        }
        return eval(e, scope, row);
    }

    void precompute_windows(const SelectStmt& stmt, Scope& scope, const RowSet& rows) {
        std::vector<const Expr*> nodes;
        for (const auto& item : stmt.items) collect_windows(*item.expr, nodes);
        for (const Expr* w : nodes) {
            if (w->window_order.size() != 1 || contains_aggregate(*w->window_order[0].expr) ||
                contains_window(*w->window_order[0].expr))
                throw EngineError(EngineErrorClass::unsupported_feature,
                                  "window functions execute only over a single plain ORDER BY key");
            for (const auto& p : w->partition_by)
                if (contains_aggregate(*p) || contains_window(*p))
                    throw EngineError(EngineErrorClass::unsupported_feature,
                                      "window PARTITION BY must use plain expressions");

            std::map<std::vector<Value>, std::vector<std::size_t>, ValueVectorLess> partitions;
            std::vector<std::vector<Value>> part_order;  // insertion order not needed; map is fine
            std::vector<Value> keys(rows.size());
            for (std::size_t r = 0; r < rows.size(); ++r) {
                tick();
                std::vector<Value> pkey;
                pkey.reserve(w->partition_by.size());
                for (const auto& p : w->partition_by) pkey.push_back(eval(*p, scope, rows[r]));
                keys[r] = eval(*w->window_order[0].expr, scope, rows[r]);
                partitions[pkey].push_back(r);
            }
            std::vector<Value> values(rows.size());
            bool desc = w->window_order[0].desc;
            for (auto& [pkey, members] : partitions) {
                std::stable_sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
                    int c = value_order(keys[a], keys[b]);
                    return desc ? c > 0 : c < 0;
                });
                std::int64_t rank = 0;
                for (std::size_t i = 0; i < members.size(); ++i) {
                    if (w->window_func == WindowFunc::row_number) {
                        values[members[i]] = static_cast<std::int64_t>(i + 1);
                    } else {
                        if (i == 0 || value_order(keys[members[i]], keys[members[i - 1]]) != 0)
                            rank = static_cast<std::int64_t>(i + 1);
                        values[members[i]] = rank;
                    }
                }
            }
            window_values_[w] = std::move(values);
        }
    }

    static void collect_windows(const Expr& e, std::vector<const Expr*>& out) {
        if (e.kind == Expr::Kind::window) {
            out.push_back(&e);
            return;
        }
        auto rec = [&](const ExprPtr& p) {
            if (p) collect_windows(*p, out);
        };
        rec(e.lhs);
        rec(e.rhs);
        rec(e.agg_arg);
        rec(e.between_low);
        rec(e.between_high);
        for (const auto& p : e.list) collect_windows(*p, out);
    }

    // ---- grouped path ------------------------------------------------------

    struct Group {
        std::vector<Value> key;
        std::vector<std::size_t> members;
    };

    void exec_grouped(const SelectStmt& stmt, Scope& scope, RowSet& rows, RowSet& output,
                      std::vector<std::vector<Value>>& sort_keys) {
        for (const auto& item : stmt.items)
            if (contains_window(*item.expr))
                throw EngineError(EngineErrorClass::unsupported_feature,
                                  "window functions cannot be combined with aggregation here");

        if (mode_.strict_group_by) strict_group_check(stmt, scope);

        std::map<std::vector<Value>, std::size_t, ValueVectorLess> index;
        std::vector<Group> groups;
        for (std::size_t r = 0; r < rows.size(); ++r) {
            tick();
            std::vector<Value> key;
            key.reserve(stmt.group_by.size());
            for (const auto& g : stmt.group_by) key.push_back(eval(*g, scope, rows[r]));
            auto it = index.find(key);
            if (it == index.end()) {
                index.emplace(key, groups.size());
                groups.push_back({std::move(key), {r}});
            } else {
                groups[it->second].members.push_back(r);
            }
        }
        if (stmt.group_by.empty()) {
            // implicit single group over all rows, present even when empty
            Group g;
            for (std::size_t r = 0; r < rows.size(); ++r) g.members.push_back(r);
            groups.clear();
            groups.push_back(std::move(g));
        }

        bool need_keys = !stmt.order_by.empty();
        for (const auto& group : groups) {
            tick();
            if (stmt.having && !truthy(eval_group(*stmt.having, scope, rows, group))) continue;
            std::vector<Value> cells;
            cells.reserve(stmt.items.size());
            for (const auto& item : stmt.items)
                cells.push_back(eval_group(*item.expr, scope, rows, group));
            if (need_keys) {
                std::vector<Value> keys;
                for (const auto& o : stmt.order_by) {
                    bool is_alias = false;
                    if (o.expr->kind == Expr::Kind::column && o.expr->table.empty()) {
                        for (std::size_t i = 0; i < stmt.items.size(); ++i) {
                            if (!stmt.items[i].alias.empty() &&
                                iequals(stmt.items[i].alias, o.expr->column)) {
                                keys.push_back(cells[i]);
                                is_alias = true;
                                break;
                            }
                        }
                    }
                    if (!is_alias) keys.push_back(eval_group(*o.expr, scope, rows, group));
                }
                sort_keys.push_back(std::move(keys));
            }
            output.push_back(std::move(cells));
        }
    }

    // MySQL only_full_group_by: every column referenced outside an aggregate
    // in SELECT/HAVING/ORDER BY must appear in the GROUP BY list.
    void strict_group_check(const SelectStmt& stmt, Scope& scope) {
        std::vector<std::size_t> grouped_cells;
        for (const auto& g : stmt.group_by)
            if (g->kind == Expr::Kind::column)
                grouped_cells.push_back(scope.resolve(g->table, g->column, mode_.dialect));

        auto check_expr = [&](const Expr& root, const char* clause, std::size_t ordinal) {
            std::vector<const Expr*> bare;
            collect_bare_columns(root, bare);
            for (const Expr* col : bare) {
                std::size_t cell = scope.resolve(col->table, col->column, mode_.dialect);
                bool grouped = std::find(grouped_cells.begin(), grouped_cells.end(), cell) !=
                               grouped_cells.end();
                if (!grouped) {
                    bool match_structural = false;
                    for (const auto& g : stmt.group_by)
                        if (expr_equal(*g, *col)) match_structural = true;
                    if (match_structural) continue;
                    std::string colname =
                        col->table.empty() ? col->column : col->table + "." + col->column;
                    std::string msg;
                    if (stmt.group_by.empty()) {
                        msg = "Error 1140 (42000): In aggregated query without GROUP BY, expression #" +
                              std::to_string(ordinal) + " of " + clause +
                              " contains nonaggregated column '" + db_.db_id() + "." + colname +
                              "'; this is incompatible with sql_mode=only_full_group_by";
                    } else {
                        msg = "Error 1055 (42000): Expression #" + std::to_string(ordinal) + " of " +
                              clause + " is not in GROUP BY clause and contains nonaggregated column '" +
                              db_.db_id() + "." + colname +
                              "' which is not functionally dependent on columns in GROUP BY clause; "
                              "this is incompatible with sql_mode=only_full_group_by";
                    }
                    throw EngineError(EngineErrorClass::strict_group_by, msg);
                }
            }
        };

        for (std::size_t i = 0; i < stmt.items.size(); ++i)
            check_expr(*stmt.items[i].expr, "SELECT list", i + 1);
        if (stmt.having) check_expr(*stmt.having, "HAVING clause", 1);
        for (std::size_t i = 0; i < stmt.order_by.size(); ++i) {
            // ORDER BY may name a select alias; those are already checked.
            const Expr& e = *stmt.order_by[i].expr;
            if (e.kind == Expr::Kind::column && e.table.empty()) {
                bool is_alias = false;
                for (const auto& item : stmt.items)
                    if (!item.alias.empty() && iequals(item.alias, e.column)) is_alias = true;
                if (is_alias) continue;
            }
            check_expr(e, "ORDER BY clause", i + 1);
        }
    }

    // Columns outside aggregate calls.
    static void collect_bare_columns(const Expr& e, std::vector<const Expr*>& out) {
        if (e.kind == Expr::Kind::aggregate) return;
        if (e.kind == Expr::Kind::window) return;
        if (e.kind == Expr::Kind::scalar_subquery || e.kind == Expr::Kind::in_subquery) {
            if (e.lhs) collect_bare_columns(*e.lhs, out);
            return;  // subquery internals resolve in their own scope
        }
        if (e.kind == Expr::Kind::column) {
            out.push_back(&e);
            return;
        }
        auto rec = [&](const ExprPtr& p) {
            if (p) collect_bare_columns(*p, out);
        };
        rec(e.lhs);
        rec(e.rhs);
        rec(e.between_low);
        rec(e.between_high);
        for (const auto& p : e.list) collect_bare_columns(*p, out);
    }

    Value eval_group(const Expr& e, Scope& scope, const RowSet& rows, const Group& group) {
        switch (e.kind) {
            case Expr::Kind::aggregate:
                return eval_aggregate(e, scope, rows, group);
            case Expr::Kind::column:
                // Non-aggregated column in group context: value from the
                // group's first row (MySQL non-strict ANY_VALUE semantics).
                if (group.members.empty()) return std::monostate{};
                return eval(e, scope, rows[group.members.front()]);
            case Expr::Kind::binary: {
                if (e.op == BinOp::logical_and || e.op == BinOp::logical_or) {
                    bool lhs = truthy(eval_group(*e.lhs, scope, rows, group));
                    if (e.op == BinOp::logical_and)
                        return static_cast<std::int64_t>(lhs && truthy(eval_group(*e.rhs, scope, rows, group)));
                    return static_cast<std::int64_t>(lhs || truthy(eval_group(*e.rhs, scope, rows, group)));
                }
                Value l = eval_group(*e.lhs, scope, rows, group);
                Value r = eval_group(*e.rhs, scope, rows, group);
                return apply_binary(e.op, l, r);
            }
            case Expr::Kind::unary_not:
                return static_cast<std::int64_t>(!truthy(eval_group(*e.lhs, scope, rows, group)));
            case Expr::Kind::unary_neg:
                return negate(eval_group(*e.lhs, scope, rows, group));
            case Expr::Kind::cast:
                return apply_cast(eval_group(*e.lhs, scope, rows, group), e.cast_target);
            case Expr::Kind::between: {
                Value v = eval_group(*e.lhs, scope, rows, group);
                Value lo = eval_group(*e.between_low, scope, rows, group);
                Value hi = eval_group(*e.between_high, scope, rows, group);
                bool in = truthy(apply_binary(BinOp::ge, v, lo)) && truthy(apply_binary(BinOp::le, v, hi));
                return static_cast<std::int64_t>(e.negated ? !in : in);
            }
            case Expr::Kind::is_null: {
                Value v = eval_group(*e.lhs, scope, rows, group);
                bool n = is_null(v);
                return static_cast<std::int64_t>(e.negated ? !n : n);
            }
            default:
                // literals, subqueries: row-independent; evaluate against the
                // group's first row (or an empty row for empty groups).
                if (group.members.empty()) {
                    std::vector<Value> empty_row(scope.width);
                    return eval(e, scope, empty_row);
                }
                return eval(e, scope, rows[group.members.front()]);
        }
    }

    Value eval_aggregate(const Expr& e, Scope& scope, const RowSet& rows, const Group& group) {
        if (e.agg_filter)
            throw EngineError(EngineErrorClass::unsupported_feature,
                              "aggregate FILTER clauses are parsed but not executable");
        if (e.agg_star)  // count(*)
            return static_cast<std::int64_t>(group.members.size());

        std::vector<Value> vals;
        vals.reserve(group.members.size());
        for (std::size_t r : group.members) {
            tick();
            Value v = eval(*e.agg_arg, scope, rows[r]);
            if (!is_null(v)) vals.push_back(std::move(v));
        }
        if (e.agg_distinct) {
            std::vector<Value> unique;
            for (auto& v : vals) {
                bool seen = false;
                for (const auto& u : unique)
                    if (value_equal(u, v)) seen = true;
                if (!seen) unique.push_back(std::move(v));
            }
            vals = std::move(unique);
        }
        switch (e.agg) {
            case AggFunc::count:
                return static_cast<std::int64_t>(vals.size());
            case AggFunc::sum:
            case AggFunc::avg: {
                if (vals.empty()) return std::monostate{};
                bool all_int = true;
                double acc = 0;
                std::int64_t iacc = 0;
                for (const auto& v : vals) {
                    if (!is_numeric(v))
                        throw EngineError(EngineErrorClass::type_mismatch,
                                          "sum/avg requires numeric values, got text");
                    if (is_int(v)) {
                        iacc += std::get<std::int64_t>(v);
                        acc += static_cast<double>(std::get<std::int64_t>(v));
                    } else {
                        all_int = false;
                        acc += std::get<double>(v);
                    }
                }
                if (e.agg == AggFunc::avg) return acc / static_cast<double>(vals.size());
                if (all_int) return iacc;
                return acc;
            }
            case AggFunc::min:
            case AggFunc::max: {
                if (vals.empty()) return std::monostate{};
                const Value* best = &vals[0];
                for (const auto& v : vals) {
                    int c = value_order(v, *best);
                    if ((e.agg == AggFunc::min && c < 0) || (e.agg == AggFunc::max && c > 0))
                        best = &v;
                }
                return *best;
            }
        }
        return std::monostate{};
    }

    // ---- scalar evaluation --------------------------------------------------

    static bool truthy(const Value& v) {
        if (is_null(v)) return false;
        if (is_int(v)) return std::get<std::int64_t>(v) != 0;
        if (is_float(v)) return std::get<double>(v) != 0.0;
        return !std::get<std::string>(v).empty();
    }

    Value eval(const Expr& e, Scope& scope, const std::vector<Value>& row) {
        switch (e.kind) {
            case Expr::Kind::null_literal:
                return std::monostate{};
            case Expr::Kind::int_literal:
                return e.int_value;
            case Expr::Kind::float_literal:
                return e.float_value;
            case Expr::Kind::string_literal:
                return e.string_value;
            case Expr::Kind::star:
                throw EngineError(EngineErrorClass::parse, "'*' is not a value");
            case Expr::Kind::column:
                return row[scope.resolve(e.table, e.column, mode_.dialect)];
            case Expr::Kind::unary_not:
                return static_cast<std::int64_t>(!truthy(eval(*e.lhs, scope, row)));
            case Expr::Kind::unary_neg:
                return negate(eval(*e.lhs, scope, row));
            case Expr::Kind::binary: {
                if (e.op == BinOp::logical_and) {
                    if (!truthy(eval(*e.lhs, scope, row))) return static_cast<std::int64_t>(0);
                    return static_cast<std::int64_t>(truthy(eval(*e.rhs, scope, row)));
                }
                if (e.op == BinOp::logical_or) {
                    if (truthy(eval(*e.lhs, scope, row))) return static_cast<std::int64_t>(1);
                    return static_cast<std::int64_t>(truthy(eval(*e.rhs, scope, row)));
                }
                Value l = eval(*e.lhs, scope, row);
                Value r = eval(*e.rhs, scope, row);
                return apply_binary(e.op, l, r);
            }
            case Expr::Kind::cast:
                return apply_cast(eval(*e.lhs, scope, row), e.cast_target);
            case Expr::Kind::aggregate:
                throw EngineError(EngineErrorClass::parse,
                                  "aggregate function used outside aggregation context");
            case Expr::Kind::window: {
                auto it = window_values_.find(&e);
                if (!window_active_ || it == window_values_.end())
                    throw EngineError(EngineErrorClass::unsupported_feature,
                                      "window function not available in this context");
                return it->second[current_row_index_];
            }
            case Expr::Kind::in_list: {
                Value v = eval(*e.lhs, scope, row);
                if (is_null(v)) return static_cast<std::int64_t>(0);
                bool found = false;
                for (const auto& item : e.list)
                    if (value_equal(v, eval(*item, scope, row))) found = true;
                return static_cast<std::int64_t>(e.negated ? !found : found);
            }
            case Expr::Kind::in_subquery: {
                Value v = eval(*e.lhs, scope, row);
                if (is_null(v)) return static_cast<std::int64_t>(0);
                const ResultTable& sub = subquery_result(*e.subquery);
                bool found = false;
                for (const auto& srow : sub.rows)
                    if (!srow.empty() && value_equal(v, srow[0])) found = true;
                return static_cast<std::int64_t>(e.negated ? !found : found);
            }
            case Expr::Kind::between: {
                Value v = eval(*e.lhs, scope, row);
                Value lo = eval(*e.between_low, scope, row);
                Value hi = eval(*e.between_high, scope, row);
                bool in = truthy(apply_binary(BinOp::ge, v, lo)) && truthy(apply_binary(BinOp::le, v, hi));
                return static_cast<std::int64_t>(e.negated ? !in : in);
            }
            case Expr::Kind::is_null: {
                Value v = eval(*e.lhs, scope, row);
                bool n = is_null(v);
                return static_cast<std::int64_t>(e.negated ? !n : n);
            }
            case Expr::Kind::scalar_subquery: {
                const ResultTable& sub = subquery_result(*e.subquery);
                if (sub.rows.empty() || sub.rows[0].empty()) return std::monostate{};
                return sub.rows[0][0];  // first row, sqlite-style
            }
        }
        return std::monostate{};
    }

    Value negate(Value v) {
        if (is_null(v)) return v;
        if (is_int(v)) return -std::get<std::int64_t>(v);
        if (is_float(v)) return -std::get<double>(v);
        throw EngineError(EngineErrorClass::type_mismatch, "cannot negate text value");
    }

    Value apply_cast(Value v, CastTarget target) {
        if (is_null(v)) return v;
        if (target == CastTarget::to_integer) {
            if (is_int(v)) return v;
            if (is_float(v)) return static_cast<std::int64_t>(std::llround(std::get<double>(v)));
            const std::string& s = std::get<std::string>(v);
            std::string t = trim(s);
            std::int64_t out = 0;
            auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
            if (ec != std::errc() || p != t.data() + t.size())
                throw EngineError(EngineErrorClass::type_mismatch,
                                  "invalid input syntax for type integer: \"" + s + "\"");
            return out;
        }
        if (is_float(v)) return v;
        if (is_int(v)) return static_cast<double>(std::get<std::int64_t>(v));
        const std::string& s = std::get<std::string>(v);
        std::string t = trim(s);
        if (t.empty())
            throw EngineError(EngineErrorClass::type_mismatch,
                              "invalid input syntax for type double precision: \"" + s + "\"");
        char* end = nullptr;
        double out = std::strtod(t.c_str(), &end);
        if (end != t.c_str() + t.size())
            throw EngineError(EngineErrorClass::type_mismatch,
                              "invalid input syntax for type double precision: \"" + s + "\"");
        return out;
    }

    static std::string trim(const std::string& s) {
        std::size_t b = s.find_first_not_of(" \t\r\n");
        if (b == std::string::npos) return "";
        std::size_t e = s.find_last_not_of(" \t\r\n");
        return s.substr(b, e - b + 1);
    }

    Value apply_binary(BinOp op, const Value& l, const Value& r) {
        switch (op) {
            case BinOp::add:
            case BinOp::sub:
            case BinOp::mul:
            case BinOp::div: {
                if (is_null(l) || is_null(r)) return std::monostate{};
                if (!is_numeric(l) || !is_numeric(r))
                    throw EngineError(EngineErrorClass::type_mismatch,
                                      "arithmetic requires numeric operands");
                if (op == BinOp::div) {
                    double d = as_double(r);
                    if (d == 0.0) return std::monostate{};  // division by zero yields null
                    return as_double(l) / d;
                }
                if (is_int(l) && is_int(r)) {
                    std::int64_t a = std::get<std::int64_t>(l), b = std::get<std::int64_t>(r);
                    switch (op) {
                        case BinOp::add: return a + b;
                        case BinOp::sub: return a - b;
                        default: return a * b;
                    }
                }
                double a = as_double(l), b = as_double(r);
                switch (op) {
                    case BinOp::add: return a + b;
                    case BinOp::sub: return a - b;
                    default: return a * b;
                }
            }
            case BinOp::eq:
            case BinOp::ne:
            case BinOp::lt:
            case BinOp::le:
            case BinOp::gt:
            case BinOp::ge: {
                if (is_null(l) || is_null(r)) return static_cast<std::int64_t>(0);
                int c = compare_strict(l, r);
                bool res = false;
                switch (op) {
                    case BinOp::eq: res = c == 0; break;
                    case BinOp::ne: res = c != 0; break;
                    case BinOp::lt: res = c < 0; break;
                    case BinOp::le: res = c <= 0; break;
                    case BinOp::gt: res = c > 0; break;
                    default: res = c >= 0; break;
                }
                return static_cast<std::int64_t>(res);
            }
            case BinOp::like:
            case BinOp::ilike: {
                if (is_null(l) || is_null(r)) return static_cast<std::int64_t>(0);
                if (!is_text(l) || !is_text(r))
                    throw EngineError(EngineErrorClass::type_mismatch, "LIKE requires text operands");
                bool m = like_match(std::get<std::string>(l), std::get<std::string>(r),
                                    op == BinOp::ilike);
                return static_cast<std::int64_t>(m);
            }
            default:
                throw EngineError(EngineErrorClass::parse, "unexpected operator");
        }
    }

    // Strict comparison: numerics compare with numerics, text with text.
    // Cross-type comparisons error the way postgres does, which is exactly
    // why the translated corpora carry explicit casts.
    int compare_strict(const Value& l, const Value& r) {
        if (is_numeric(l) && is_numeric(r)) {
            if (is_int(l) && is_int(r)) {
                auto a = std::get<std::int64_t>(l), b = std::get<std::int64_t>(r);
                return a < b ? -1 : (a > b ? 1 : 0);
            }
            double a = as_double(l), b = as_double(r);
            return a < b ? -1 : (a > b ? 1 : 0);
        }
        if (is_text(l) && is_text(r)) {
            const auto& a = std::get<std::string>(l);
            const auto& b = std::get<std::string>(r);
            return a < b ? -1 : (a > b ? 1 : 0);
        }
        std::string msg;
        switch (mode_.dialect) {
            case Dialect::postgres:
                msg = "operator does not exist: " + type_name(l) + " vs " + type_name(r) +
                      " (explicit cast required)";
                break;
            case Dialect::mysql:
                msg = "Incorrect comparison between " + type_name(l) + " and " + type_name(r);
                break;
            case Dialect::oracle:
                msg = "ORA-01722: invalid number (comparison between " + type_name(l) + " and " +
                      type_name(r) + ")";
                break;
            case Dialect::sqlite:
                msg = "cannot compare " + type_name(l) + " with " + type_name(r);
                break;
        }
        throw EngineError(EngineErrorClass::type_mismatch, msg);
    }

    static std::string type_name(const Value& v) {
        if (is_int(v)) return "integer";
        if (is_float(v)) return "double precision";
        if (is_text(v)) return "text";
        return "null";
    }

    static bool like_match(const std::string& text, const std::string& pattern, bool fold_case) {
        auto lower = [](char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); };
        // iterative wildcard match with backtracking on '%'
        std::size_t t = 0, p = 0, star_p = std::string::npos, star_t = 0;
        while (t < text.size()) {
            char pc = p < pattern.size() ? pattern[p] : '\0';
            char tc = text[t];
            bool ch_match = p < pattern.size() &&
                            (pc == '_' || (fold_case ? lower(pc) == lower(tc) : pc == tc));
            if (ch_match) {
                ++t;
                ++p;
            } else if (p < pattern.size() && pc == '%') {
                star_p = p++;
                star_t = t;
            } else if (star_p != std::string::npos) {
                p = star_p + 1;
                t = ++star_t;
            } else {
                return false;
            }
        }
        while (p < pattern.size() && pattern[p] == '%') ++p;
        return p == pattern.size();
    }

    std::vector<std::string> output_labels(const SelectStmt& stmt, Scope& scope) {
        std::vector<std::string> labels;
        if (stmt.select_star) {
            for (const auto& b : scope.bindings)
                for (const auto& c : b.columns) labels.push_back(c);
            return labels;
        }
        for (const auto& item : stmt.items) {
            if (!item.alias.empty())
                labels.push_back(item.alias);
            else if (item.expr->kind == Expr::Kind::column)
                labels.push_back(item.expr->column);
            else
                labels.push_back(print_expr(*item.expr, mode_));
        }
        return labels;
    }
};

}  // namespace

ResultTable execute(const ast::SelectStmt& stmt, const InMemoryDb& db, const DialectMode& mode,
                    std::optional<Deadline> deadline) {
    Evaluator ev(db, mode, deadline);
    return ev.exec_select(stmt);
}

}  // namespace dforge::engine

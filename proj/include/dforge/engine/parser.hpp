#pragma once

#include <string>

#include "dforge/engine/ast.hpp"
#include "dforge/engine/lexer.hpp"
#include "dforge/engine/mode.hpp"

namespace dforge::engine {

// Parses one SELECT statement under the dialect mode. Dialect-gated
// constructs (:: casts, ILIKE, backquoted identifiers, LIMIT vs FETCH FIRST,
// FILTER clauses, DISTINCT/ORDER BY interplay on postgres) are rejected at
// parse time with EngineError{dialect_violation}; true syntax errors raise
// EngineError{parse} carrying the source position.
ast::SelectPtr parse_sql(const std::string& sql, const DialectMode& mode);

// Same grammar, but dialect violations are collected through the sink and
// parsing continues where recovery is safe. Used by check_conformance.
ast::SelectPtr parse_sql_collecting(const std::string& sql, const DialectMode& mode, ViolationSink& sink);

}  // namespace dforge::engine

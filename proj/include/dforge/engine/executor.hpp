#pragma once

#include <chrono>
#include <optional>

#include "dforge/engine/ast.hpp"
#include "dforge/engine/database.hpp"
#include "dforge/engine/mode.hpp"

namespace dforge::engine {

using Deadline = std::chrono::steady_clock::time_point;

// Executes a parsed SELECT against an in-memory database. Pure function of
// (ast, db, mode): repeated calls produce identical tables. Row order is
// defined only when the statement carries a top-level ORDER BY (stable sort,
// input order preserved across ties). Throws EngineError on semantic
// failures and ExecTimeout past the deadline.
ResultTable execute(const ast::SelectStmt& stmt, const InMemoryDb& db, const DialectMode& mode,
                    std::optional<Deadline> deadline = std::nullopt);

}  // namespace dforge::engine

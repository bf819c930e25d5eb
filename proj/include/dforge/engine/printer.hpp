#pragma once

#include <string>

#include "dforge/engine/ast.hpp"
#include "dforge/engine/mode.hpp"

namespace dforge::engine {

// Renders an AST back to SQL text in the given dialect. Printing a statement
// in the dialect it was parsed under and re-parsing yields an equal AST.
std::string print_sql(const ast::SelectStmt& stmt, const DialectMode& mode);
std::string print_expr(const ast::Expr& e, const DialectMode& mode);

}  // namespace dforge::engine

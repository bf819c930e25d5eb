#pragma once

#include <string>
#include <vector>

#include "dforge/engine/lexer.hpp"
#include "dforge/engine/mode.hpp"

namespace dforge::engine {

// Static dialect check: parses, never executes. Returns the empty list iff
// parse_sql would accept the text with no dialect violation. Hard syntax
// errors surface as a single violation with construct "syntax".
std::vector<Violation> check_conformance(const std::string& sql, const DialectMode& mode);

}  // namespace dforge::engine

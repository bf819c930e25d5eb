#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "dforge/engine/error.hpp"
#include "dforge/engine/mode.hpp"

namespace dforge::engine {

// A dialect-syntax violation found while scanning/parsing. check_conformance
// collects these; parse_sql throws on the first one.
struct Violation {
    std::string construct;  // e.g. "double-colon-cast", "ilike", "backquote-identifier"
    Dialect dialect;
    std::size_t position = 0;
    std::size_t length = 0;
    std::string message;
};

// Collector interface: when present, violations are recorded and scanning
// continues; when absent, the lexer/parser throws EngineError{dialect_violation}.
class ViolationSink {
public:
    virtual ~ViolationSink() = default;
    virtual void report(Violation v) = 0;
};

struct Token {
    enum class Kind {
        word,        // bare identifier or keyword
        quoted_ident,
        string_lit,
        int_lit,
        float_lit,
        symbol,      // punctuation, stored in text
        end,
    };
    Kind kind;
    std::string text;       // uppercased for word comparison lives in parser
    std::size_t position;   // byte offset into source
};

// Tokenizes under the given mode. Mode decides whether double quotes delimit
// identifiers or string literals and whether backquotes are legal.
std::vector<Token> tokenize(const std::string& sql, const DialectMode& mode, ViolationSink* sink);

}  // namespace dforge::engine

#pragma once

#include "dforge/core.hpp"

namespace dforge::engine {

enum class IdentifierQuote { backquote, double_quote };
enum class LimitStyle { limit, fetch_first };

// Per-dialect grammar/semantics switches. Derived deterministically from the
// dialect tag; individual fields may be overridden through explicit config
// (the strict_group_by toggle mirrors MySQL's only_full_group_by sql_mode).
struct DialectMode {
    Dialect dialect = Dialect::sqlite;
    bool strict_group_by = false;        // mysql default true
    bool allow_double_colon_cast = false;  // postgres only
    bool allow_ilike = false;              // postgres only
    IdentifierQuote identifier_quote = IdentifierQuote::double_quote;
    LimitStyle limit_style = LimitStyle::limit;

    static DialectMode for_dialect(Dialect d);

    // Table-name lookup is case-sensitive in mysql mode only.
    bool case_sensitive_tables() const { return dialect == Dialect::mysql; }
};

}  // namespace dforge::engine

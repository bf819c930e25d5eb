#include "dforge/engine/lexer.hpp"

#include <cctype>

namespace dforge::engine {

namespace {

bool ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

[[noreturn]] void fail(const std::string& msg, std::size_t pos) {
    throw EngineError(EngineErrorClass::parse, msg + " at position " + std::to_string(pos), pos);
}

void violation(ViolationSink* sink, const char* construct, const DialectMode& mode,
               std::size_t pos, std::size_t len, const std::string& msg) {
    if (sink) {
        sink->report({construct, mode.dialect, pos, len, msg});
    } else {
        throw EngineError(EngineErrorClass::dialect_violation, msg, pos);
    }
}

}  // namespace

std::vector<Token> tokenize(const std::string& sql, const DialectMode& mode, ViolationSink* sink) {
    std::vector<Token> out;
    std::size_t i = 0;
    const std::size_t n = sql.size();
    while (i < n) {
        char c = sql[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        std::size_t start = i;
        if (ident_start(c)) {
            ++i;
            while (i < n && ident_char(sql[i])) ++i;
            out.push_back({Token::Kind::word, sql.substr(start, i - start), start});
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(sql[i + 1])))) {
            bool is_float = false;
            while (i < n && std::isdigit(static_cast<unsigned char>(sql[i]))) ++i;
            if (i < n && sql[i] == '.' && !(i + 1 < n && sql[i + 1] == '.')) {
                is_float = true;
                ++i;
                while (i < n && std::isdigit(static_cast<unsigned char>(sql[i]))) ++i;
            }
            if (i < n && (sql[i] == 'e' || sql[i] == 'E')) {
                std::size_t save = i;
                ++i;
                if (i < n && (sql[i] == '+' || sql[i] == '-')) ++i;
                if (i < n && std::isdigit(static_cast<unsigned char>(sql[i]))) {
                    is_float = true;
                    while (i < n && std::isdigit(static_cast<unsigned char>(sql[i]))) ++i;
                } else {
                    i = save;
                }
            }
            out.push_back({is_float ? Token::Kind::float_lit : Token::Kind::int_lit,
                           sql.substr(start, i - start), start});
            continue;
        }
        if (c == '\'') {
            std::string text;
            ++i;
            bool closed = false;
            while (i < n) {
                if (sql[i] == '\'') {
                    if (i + 1 < n && sql[i + 1] == '\'') {  // '' escape
                        text.push_back('\'');
                        i += 2;
                        continue;
                    }
                    ++i;
                    closed = true;
                    break;
                }
                text.push_back(sql[i]);
                ++i;
            }
            if (!closed) fail("unterminated string literal", start);
            out.push_back({Token::Kind::string_lit, std::move(text), start});
            continue;
        }
        if (c == '"') {
            std::string text;
            ++i;
            bool closed = false;
            while (i < n) {
                if (sql[i] == '"') {
                    if (i + 1 < n && sql[i + 1] == '"') {
                        text.push_back('"');
                        i += 2;
                        continue;
                    }
                    ++i;
                    closed = true;
                    break;
                }
                text.push_back(sql[i]);
                ++i;
            }
            if (!closed) fail("unterminated quoted name", start);
            // MySQL treats double quotes as string delimiters (ANSI_QUOTES off);
            // everywhere else they quote identifiers.
            if (mode.identifier_quote == IdentifierQuote::backquote)
                out.push_back({Token::Kind::string_lit, std::move(text), start});
            else
                out.push_back({Token::Kind::quoted_ident, std::move(text), start});
            continue;
        }
        if (c == '`') {
            std::string text;
            ++i;
            bool closed = false;
            while (i < n) {
                if (sql[i] == '`') {
                    ++i;
                    closed = true;
                    break;
                }
                text.push_back(sql[i]);
                ++i;
            }
            if (!closed) fail("unterminated backquoted name", start);
            if (mode.identifier_quote != IdentifierQuote::backquote)
                violation(sink, "backquote-identifier", mode, start, i - start,
                          std::string("backquoted identifiers are not ") + dialect_tag(mode.dialect) +
                              " syntax (identifier quoting)");
            out.push_back({Token::Kind::quoted_ident, std::move(text), start});
            continue;
        }
        // multi-char symbols
        auto sym2 = [&](const char* s) {
            out.push_back({Token::Kind::symbol, s, start});
            i += 2;
        };
        if (c == ':' && i + 1 < n && sql[i + 1] == ':') {
            sym2("::");
            continue;
        }
        if (c == '<' && i + 1 < n && sql[i + 1] == '=') { sym2("<="); continue; }
        if (c == '>' && i + 1 < n && sql[i + 1] == '=') { sym2(">="); continue; }
        if (c == '<' && i + 1 < n && sql[i + 1] == '>') { sym2("<>"); continue; }
        if (c == '!' && i + 1 < n && sql[i + 1] == '=') { sym2("!="); continue; }
        static const char singles[] = "(),.*/+-<>=;";
        bool matched = false;
        for (char s : singles) {
            if (c == s && s != '\0') {
                out.push_back({Token::Kind::symbol, std::string(1, c), start});
                ++i;
                matched = true;
                break;
            }
        }
        if (matched) continue;
        fail(std::string("unexpected character '") + c + "'", start);
    }
    out.push_back({Token::Kind::end, "", n});
    return out;
}

}  // namespace dforge::engine

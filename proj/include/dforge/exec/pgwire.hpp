#pragma once

// Minimal PostgreSQL v3 wire client: startup, cleartext-password auth, simple
// query. The message codec is separated from socket transport so it can be
// tested against fixed byte strings.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dforge/exec/gateway.hpp"

namespace dforge::exec::pgwire {

std::string encode_startup(const std::string& user, const std::string& database);
std::string encode_query(const std::string& sql);
std::string encode_password(const std::string& password);

struct BackendMessage {
    char type = 0;
    std::string payload;
};

// Consumes one complete framed message from the front of the buffer;
// returns nullopt when more bytes are needed.
std::optional<BackendMessage> try_decode(std::string& buffer);

std::int32_t read_auth_code(const std::string& payload);
std::vector<std::string> parse_row_description(const std::string& payload);
std::vector<std::optional<std::string>> parse_data_row(const std::string& payload);
// "SQLSTATE: message" from an ErrorResponse payload.
std::string parse_error_message(const std::string& payload);

// key=value pairs separated by whitespace; values may be single-quoted.
std::map<std::string, std::string> parse_dsn(const std::string& dsn);

}  // namespace dforge::exec::pgwire

namespace dforge::exec {

// Live postgres adapter; one fresh connection per query keeps the adapter
// stateless (per-worker pooling happens above the gateway).
class PgWireBackend : public Backend {
public:
    // dsn: host=... port=... user=... [password=...] [dbname=...]
    // A missing or "{db}" dbname is replaced by the query's db_ref.
    explicit PgWireBackend(std::string dsn, std::string id = "");

    ExecReport run(const std::string& sql, const std::string& db_ref, double timeout_s) override;
    std::string id() const override { return id_; }
    Dialect dialect() const override { return Dialect::postgres; }

private:
    std::string dsn_;
    std::string id_;
};

}  // namespace dforge::exec

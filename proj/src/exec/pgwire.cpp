#include "dforge/exec/pgwire.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <cstring>

namespace dforge::exec::pgwire {

namespace {

void put_int32(std::string& out, std::int32_t v) {
    out.push_back(static_cast<char>((v >> 24) & 0xFF));
    out.push_back(static_cast<char>((v >> 16) & 0xFF));
    out.push_back(static_cast<char>((v >> 8) & 0xFF));
    out.push_back(static_cast<char>(v & 0xFF));
}

std::int32_t get_int32(const char* p) {
    return (static_cast<std::int32_t>(static_cast<unsigned char>(p[0])) << 24) |
           (static_cast<std::int32_t>(static_cast<unsigned char>(p[1])) << 16) |
           (static_cast<std::int32_t>(static_cast<unsigned char>(p[2])) << 8) |
           static_cast<std::int32_t>(static_cast<unsigned char>(p[3]));
}

std::int16_t get_int16(const char* p) {
    return static_cast<std::int16_t>(
        (static_cast<std::int16_t>(static_cast<unsigned char>(p[0])) << 8) |
        static_cast<std::int16_t>(static_cast<unsigned char>(p[1])));
}

}  // namespace

std::string encode_startup(const std::string& user, const std::string& database) {
    std::string body;
    put_int32(body, 196608);  // protocol 3.0
    body += "user";
    body.push_back('\0');
    body += user;
    body.push_back('\0');
    body += "database";
    body.push_back('\0');
    body += database;
    body.push_back('\0');
    body.push_back('\0');
    std::string out;
    put_int32(out, static_cast<std::int32_t>(body.size() + 4));
    out += body;
    return out;
}

std::string encode_query(const std::string& sql) {
    std::string out;
    out.push_back('Q');
    put_int32(out, static_cast<std::int32_t>(sql.size() + 1 + 4));
    out += sql;
    out.push_back('\0');
    return out;
}

std::string encode_password(const std::string& password) {
    std::string out;
    out.push_back('p');
    put_int32(out, static_cast<std::int32_t>(password.size() + 1 + 4));
    out += password;
    out.push_back('\0');
    return out;
}

std::optional<BackendMessage> try_decode(std::string& buffer) {
    if (buffer.size() < 5) return std::nullopt;
    char type = buffer[0];
    std::int32_t len = get_int32(buffer.data() + 1);
    if (len < 4) {
        buffer.clear();  // framing broken; drop the stream
        return std::nullopt;
    }
    std::size_t total = 1 + static_cast<std::size_t>(len);
    if (buffer.size() < total) return std::nullopt;
    BackendMessage msg;
    msg.type = type;
    msg.payload = buffer.substr(5, total - 5);
    buffer.erase(0, total);
    return msg;
}

std::int32_t read_auth_code(const std::string& payload) {
    if (payload.size() < 4) return -1;
    return get_int32(payload.data());
}

std::vector<std::string> parse_row_description(const std::string& payload) {
    std::vector<std::string> names;
    if (payload.size() < 2) return names;
    int n = get_int16(payload.data());
    std::size_t pos = 2;
    for (int i = 0; i < n && pos < payload.size(); ++i) {
        std::size_t end = payload.find('\0', pos);
        if (end == std::string::npos) break;
        names.push_back(payload.substr(pos, end - pos));
        pos = end + 1 + 18;  // fixed-width field metadata
    }
    return names;
}

std::vector<std::optional<std::string>> parse_data_row(const std::string& payload) {
    std::vector<std::optional<std::string>> cells;
    if (payload.size() < 2) return cells;
    int n = get_int16(payload.data());
    std::size_t pos = 2;
    for (int i = 0; i < n && pos + 4 <= payload.size(); ++i) {
        std::int32_t len = get_int32(payload.data() + pos);
        pos += 4;
        if (len < 0) {
            cells.push_back(std::nullopt);
            continue;
        }
        cells.push_back(payload.substr(pos, static_cast<std::size_t>(len)));
        pos += static_cast<std::size_t>(len);
    }
    return cells;
}

std::string parse_error_message(const std::string& payload) {
    std::string sqlstate, message;
    std::size_t pos = 0;
    while (pos < payload.size() && payload[pos] != '\0') {
        char code = payload[pos++];
        std::size_t end = payload.find('\0', pos);
        if (end == std::string::npos) break;
        std::string value = payload.substr(pos, end - pos);
        pos = end + 1;
        if (code == 'C') sqlstate = value;
        if (code == 'M') message = value;
    }
    if (sqlstate.empty()) return message;
    return sqlstate + ": " + message;
}

std::map<std::string, std::string> parse_dsn(const std::string& dsn) {
    std::map<std::string, std::string> out;
    std::size_t i = 0;
    while (i < dsn.size()) {
        while (i < dsn.size() && std::isspace(static_cast<unsigned char>(dsn[i]))) ++i;
        std::size_t eq = dsn.find('=', i);
        if (eq == std::string::npos) break;
        std::string key = dsn.substr(i, eq - i);
        i = eq + 1;
        std::string value;
        if (i < dsn.size() && dsn[i] == '\'') {
            ++i;
            while (i < dsn.size() && dsn[i] != '\'') value.push_back(dsn[i++]);
            if (i < dsn.size()) ++i;
        } else {
            while (i < dsn.size() && !std::isspace(static_cast<unsigned char>(dsn[i])))
                value.push_back(dsn[i++]);
        }
        out[key] = value;
    }
    return out;
}

}  // namespace dforge::exec::pgwire

namespace dforge::exec {

namespace {

using namespace pgwire;
using Clock = std::chrono::steady_clock;

class Socket {
public:
    ~Socket() {
        if (fd_ >= 0) ::close(fd_);
    }

    bool connect_to(const std::string& host, const std::string& port, Clock::time_point deadline,
                    std::string& error) {
        addrinfo hints{};
        hints.ai_family = AF_UNSPEC;
        hints.ai_socktype = SOCK_STREAM;
        addrinfo* res = nullptr;
        if (getaddrinfo(host.c_str(), port.c_str(), &hints, &res) != 0 || !res) {
            error = "cannot resolve host " + host;
            return false;
        }
        fd_ = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
        if (fd_ < 0) {
            freeaddrinfo(res);
            error = "socket() failed";
            return false;
        }
        int rc = ::connect(fd_, res->ai_addr, res->ai_addrlen);
        freeaddrinfo(res);
        if (rc != 0) {
            error = "connection to " + host + ":" + port + " failed: " + std::strerror(errno);
            return false;
        }
        (void)deadline;
        return true;
    }

    bool send_all(const std::string& data, std::string& error) {
        std::size_t sent = 0;
        while (sent < data.size()) {
            ssize_t n = ::send(fd_, data.data() + sent, data.size() - sent, 0);
            if (n <= 0) {
                error = "send failed";
                return false;
            }
            sent += static_cast<std::size_t>(n);
        }
        return true;
    }

    // Appends available bytes; returns false on deadline or closed stream.
    bool recv_some(std::string& buffer, Clock::time_point deadline, bool& timed_out) {
        auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
        if (remaining.count() <= 0) {
            timed_out = true;
            return false;
        }
        pollfd pfd{fd_, POLLIN, 0};
        int rc = ::poll(&pfd, 1, static_cast<int>(std::min<long long>(remaining.count(), 250)));
        if (rc < 0) return false;
        if (rc == 0) return true;  // keep looping until deadline
        char buf[8192];
        ssize_t n = ::recv(fd_, buf, sizeof(buf), 0);
        if (n <= 0) return false;
        buffer.append(buf, static_cast<std::size_t>(n));
        return true;
    }

private:
    int fd_ = -1;
};

engine::Value typed_cell(const std::optional<std::string>& text) {
    if (!text) return std::monostate{};
    const std::string& s = *text;
    if (s.empty()) return s;
    char* end = nullptr;
    errno = 0;
    long long i = std::strtoll(s.c_str(), &end, 10);
    if (errno == 0 && end == s.c_str() + s.size()) return static_cast<std::int64_t>(i);
    end = nullptr;
    double d = std::strtod(s.c_str(), &end);
    if (end == s.c_str() + s.size()) return d;
    return s;
}

}  // namespace

PgWireBackend::PgWireBackend(std::string dsn, std::string id)
    : dsn_(std::move(dsn)), id_(id.empty() ? "wire:postgres" : std::move(id)) {}

ExecReport PgWireBackend::run(const std::string& sql, const std::string& db_ref,
                              double timeout_s) {
    ExecReport report;
    report.backend = id_;
    auto start = Clock::now();
    auto deadline = start + std::chrono::duration_cast<Clock::duration>(
                                std::chrono::duration<double>(timeout_s));
    auto finish = [&] {
        report.elapsed_s = std::chrono::duration<double>(Clock::now() - start).count();
    };
    auto fail = [&](const std::string& msg, const char* cls = "runtime") {
        report.status = ExecStatus::error;
        report.raw_error = msg;
        report.error_class = cls;
        finish();
        return report;
    };

    auto params = pgwire::parse_dsn(dsn_);
    std::string host = params.count("host") ? params["host"] : "127.0.0.1";
    std::string port = params.count("port") ? params["port"] : "5432";
    std::string user = params.count("user") ? params["user"] : "postgres";
    std::string dbname = params.count("dbname") ? params["dbname"] : "{db}";
    if (dbname == "{db}" || dbname.empty()) dbname = db_ref;

    Socket sock;
    std::string error;
    if (!sock.connect_to(host, port, deadline, error)) return fail(error);
    if (!sock.send_all(encode_startup(user, dbname), error)) return fail(error);

    std::string buffer;
    bool ready = false;
    bool timed_out = false;
    engine::ResultTable table;
    std::string server_error;
    bool query_sent = false;
    bool saw_rows = false;

    while (!ready) {
        while (auto msg = try_decode(buffer)) {
            switch (msg->type) {
                case 'R': {
                    std::int32_t code = read_auth_code(msg->payload);
                    if (code == 0) break;
                    if (code == 3) {
                        if (!params.count("password"))
                            return fail("server requested a password but none configured");
                        if (!sock.send_all(encode_password(params["password"]), error))
                            return fail(error);
                        break;
                    }
                    return fail("unsupported authentication method (code " + std::to_string(code) +
                                "); use trust or password auth");
                }
                case 'E':
                    server_error = parse_error_message(msg->payload);
                    break;
                case 'T':
                    table.columns = parse_row_description(msg->payload);
                    saw_rows = true;
                    break;
                case 'D': {
                    auto cells = parse_data_row(msg->payload);
                    std::vector<engine::Value> row;
                    row.reserve(cells.size());
                    for (const auto& c : cells) row.push_back(typed_cell(c));
                    table.rows.push_back(std::move(row));
                    break;
                }
                case 'Z':
                    if (!query_sent) {
                        if (!server_error.empty())
                            return fail(server_error, classify_error(server_error, Dialect::postgres).c_str());
                        if (!sock.send_all(encode_query(sql), error)) return fail(error);
                        query_sent = true;
                    } else {
                        ready = true;
                    }
                    break;
                default:
                    break;  // ParameterStatus, BackendKeyData, CommandComplete, ...
            }
            if (ready) break;
        }
        if (ready) break;
        if (!sock.recv_some(buffer, deadline, timed_out)) {
            if (timed_out) {
                report.status = ExecStatus::timeout;
                report.error_class = "timeout";
                report.raw_error = "query timed out after " + std::to_string(timeout_s) + " s";
                finish();
                return report;
            }
            return fail(server_error.empty() ? "connection closed unexpectedly" : server_error);
        }
    }

    if (!server_error.empty()) {
        report.status = ExecStatus::error;
        report.raw_error = server_error;
        report.error_class = classify_error(server_error, Dialect::postgres);
        finish();
        return report;
    }
    report.status = ExecStatus::ok;
    if (!saw_rows) table.columns.clear();
    report.result = std::move(table);
    finish();
    return report;
}

}  // namespace dforge::exec

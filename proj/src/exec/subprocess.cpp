#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstring>

#include "dforge/exec/gateway.hpp"

namespace dforge::exec {

namespace {

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'')
            out += "'\\''";
        else
            out += c;
    }
    out += "'";
    return out;
}

std::string substitute(const std::string& tmpl, const std::string& sql, const std::string& db) {
    std::string out;
    for (std::size_t i = 0; i < tmpl.size();) {
        if (tmpl.compare(i, 5, "{sql}") == 0) {
            out += shell_quote(sql);
            i += 5;
        } else if (tmpl.compare(i, 4, "{db}") == 0) {
            out += shell_quote(db);
            i += 4;
        } else {
            out += tmpl[i++];
        }
    }
    return out;
}

struct ProcessResult {
    int exit_code = -1;
    bool timed_out = false;
    std::string out;
    std::string err;
};

ProcessResult run_with_timeout(const std::string& command, double timeout_s) {
    ProcessResult result;
    int out_pipe[2], err_pipe[2];
    if (pipe(out_pipe) != 0 || pipe(err_pipe) != 0) {
        result.err = "pipe() failed";
        return result;
    }
    pid_t pid = fork();
    if (pid < 0) {
        result.err = "fork() failed";
        return result;
    }
    if (pid == 0) {
        dup2(out_pipe[1], STDOUT_FILENO);
        dup2(err_pipe[1], STDERR_FILENO);
        close(out_pipe[0]);
        close(out_pipe[1]);
        close(err_pipe[0]);
        close(err_pipe[1]);
        execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }
    close(out_pipe[1]);
    close(err_pipe[1]);
    fcntl(out_pipe[0], F_SETFL, O_NONBLOCK);
    fcntl(err_pipe[0], F_SETFL, O_NONBLOCK);

    auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout_s);
    bool exited = false;
    int status = 0;
    char buf[4096];
    bool out_open = true, err_open = true;
    while (true) {
        struct pollfd fds[2] = {{out_pipe[0], POLLIN, 0}, {err_pipe[0], POLLIN, 0}};
        poll(fds, 2, 20);
        while (out_open) {
            ssize_t n = read(out_pipe[0], buf, sizeof(buf));
            if (n > 0)
                result.out.append(buf, static_cast<std::size_t>(n));
            else {
                if (n == 0) out_open = false;
                break;
            }
        }
        while (err_open) {
            ssize_t n = read(err_pipe[0], buf, sizeof(buf));
            if (n > 0)
                result.err.append(buf, static_cast<std::size_t>(n));
            else {
                if (n == 0) err_open = false;
                break;
            }
        }
        pid_t w = waitpid(pid, &status, WNOHANG);
        if (w == pid) {
            exited = true;
            break;
        }
        if (std::chrono::steady_clock::now() > deadline) {
            kill(pid, SIGKILL);
            waitpid(pid, &status, 0);
            result.timed_out = true;
            break;
        }
    }
    // drain whatever is left
    ssize_t n;
    while ((n = read(out_pipe[0], buf, sizeof(buf))) > 0) result.out.append(buf, static_cast<std::size_t>(n));
    while ((n = read(err_pipe[0], buf, sizeof(buf))) > 0) result.err.append(buf, static_cast<std::size_t>(n));
    close(out_pipe[0]);
    close(err_pipe[0]);
    if (exited && WIFEXITED(status)) result.exit_code = WEXITSTATUS(status);
    return result;
}

engine::Value parse_cell(const std::string& text) {
    if (text.empty() || text == "NULL") return std::monostate{};
    char* end = nullptr;
    errno = 0;
    long long i = std::strtoll(text.c_str(), &end, 10);
    if (errno == 0 && end == text.c_str() + text.size()) return static_cast<std::int64_t>(i);
    end = nullptr;
    double d = std::strtod(text.c_str(), &end);
    if (end == text.c_str() + text.size()) return d;
    return text;
}

engine::ResultTable parse_tsv(const std::string& text) {
    engine::ResultTable table;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t nl = text.find('\n', start);
        if (nl == std::string::npos) nl = text.size();
        std::string line = text.substr(start, nl - start);
        start = nl + 1;
        if (line.empty()) continue;
        std::vector<engine::Value> row;
        std::size_t cell_start = 0;
        while (true) {
            std::size_t tab = line.find('\t', cell_start);
            std::string cell =
                tab == std::string::npos ? line.substr(cell_start) : line.substr(cell_start, tab - cell_start);
            row.push_back(parse_cell(cell));
            if (tab == std::string::npos) break;
            cell_start = tab + 1;
        }
        table.rows.push_back(std::move(row));
    }
    if (!table.rows.empty())
        for (std::size_t i = 0; i < table.rows[0].size(); ++i)
            table.columns.push_back("col" + std::to_string(i));
    return table;
}

}  // namespace

SubprocessBackend::SubprocessBackend(Dialect dialect, std::string command_template, std::string id)
    : dialect_(dialect),
      command_template_(std::move(command_template)),
      id_(id.empty() ? std::string("subprocess:") + dialect_tag(dialect) : std::move(id)) {}

ExecReport SubprocessBackend::run(const std::string& sql, const std::string& db_ref,
                                  double timeout_s) {
    ExecReport report;
    report.backend = id_;
    auto start = std::chrono::steady_clock::now();
    ProcessResult proc = run_with_timeout(substitute(command_template_, sql, db_ref), timeout_s);
    report.elapsed_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (proc.timed_out) {
        report.status = ExecStatus::timeout;
        report.error_class = "timeout";
        report.raw_error = "client timed out after " + std::to_string(timeout_s) + " s";
        return report;
    }
    if (proc.exit_code != 0) {
        report.status = ExecStatus::error;
        report.raw_error = proc.err.empty() ? proc.out : proc.err;
        report.error_class = classify_error(report.raw_error, dialect_);
        return report;
    }
    report.status = ExecStatus::ok;
    report.result = parse_tsv(proc.out);
    return report;
}

}  // namespace dforge::exec

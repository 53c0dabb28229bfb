#pragma once

// External model driven over a line protocol on the child's stdin/stdout:
//   parent -> child   "EVAL <N> <x_1> ... <x_N>\n"
//   child  -> parent  "<value>\n"            one reply per request, in order
//   parent -> child   "QUIT\n"               on shutdown
// Up to batch_size requests are written before replies are read.

#include <cerrno>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>
#include <vector>

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include "ttsense/blackbox.hpp"
#include "ttsense/errors.hpp"

namespace ttsense {

struct SubprocessOptions {
    Index batch_size = 64;
    double timeout_seconds = 60.0;
    /// Number of child processes; a batch is split across them.
    Index workers = 1;
};

namespace detail {

inline std::string format_request(const RowMatrix& x, Eigen::Index row) {
    std::string line = "EVAL " + std::to_string(x.cols());
    char buf[40];
    for (Eigen::Index n = 0; n < x.cols(); ++n) {
        std::snprintf(buf, sizeof buf, " %.17g", x(row, n));
        line += buf;
    }
    line += '\n';
    return line;
}

inline double parse_reply(const std::string& line) {
    const char* begin = line.c_str();
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(begin, &end);
    if (end == begin) throw TransportError("subprocess: malformed reply line: '" + line + "'");
    while (*end == ' ' || *end == '\t' || *end == '\r') ++end;
    if (*end != '\0') throw TransportError("subprocess: malformed reply line: '" + line + "'");
    return v;
}

class ChildProcess {
public:
    ChildProcess(const std::string& command, double timeout_seconds) : timeout_(timeout_seconds) {
        static const bool sigpipe_ignored = [] {
            ::signal(SIGPIPE, SIG_IGN);
            return true;
        }();
        (void)sigpipe_ignored;
        int to_child[2];
        int from_child[2];
        if (pipe2(to_child, O_CLOEXEC) != 0) throw TransportError("subprocess: pipe() failed");
        if (pipe2(from_child, O_CLOEXEC) != 0) {
            close(to_child[0]);
            close(to_child[1]);
            throw TransportError("subprocess: pipe() failed");
        }
        pid_ = fork();
        if (pid_ < 0) {
            for (int fd : {to_child[0], to_child[1], from_child[0], from_child[1]}) close(fd);
            throw TransportError("subprocess: fork() failed");
        }
        if (pid_ == 0) {
            dup2(to_child[0], STDIN_FILENO);
            dup2(from_child[1], STDOUT_FILENO);
            execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
            _exit(127);
        }
        close(to_child[0]);
        close(from_child[1]);
        in_ = to_child[1];
        out_ = from_child[0];
        fcntl(in_, F_SETFL, fcntl(in_, F_GETFL) | O_NONBLOCK);
        fcntl(out_, F_SETFL, fcntl(out_, F_GETFL) | O_NONBLOCK);
    }

    ChildProcess(const ChildProcess&) = delete;
    ChildProcess& operator=(const ChildProcess&) = delete;

    ~ChildProcess() {
        if (in_ >= 0) {
            const char quit[] = "QUIT\n";
            [[maybe_unused]] auto w = write(in_, quit, sizeof quit - 1);
            close(in_);
        }
        if (out_ >= 0) close(out_);
        if (pid_ > 0) {
            int status = 0;
            for (int i = 0; i < 100; ++i) {
                if (waitpid(pid_, &status, WNOHANG) != 0) return;
                usleep(10000);
            }
            kill(pid_, SIGKILL);
            waitpid(pid_, &status, 0);
        }
    }

    /// Sends `requests` and returns one parsed reply per request.
    std::vector<double> exchange(const std::vector<std::string>& requests) {
        std::string outgoing;
        for (const auto& r : requests) outgoing += r;
        std::vector<double> replies;
        replies.reserve(requests.size());
        std::size_t written = 0;
        const auto deadline_step = std::chrono::duration<double>(timeout_);
        auto deadline = std::chrono::steady_clock::now() + deadline_step;

        while (replies.size() < requests.size()) {
            pollfd fds[2];
            nfds_t count = 0;
            fds[count++] = {out_, POLLIN, 0};
            if (written < outgoing.size()) fds[count++] = {in_, POLLOUT, 0};
            const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
                deadline - std::chrono::steady_clock::now());
            if (remaining.count() <= 0) {
                throw TimeoutError("subprocess: no reply within " + std::to_string(timeout_) + " s");
            }
            const int ready = poll(fds, count, static_cast<int>(std::min<long long>(remaining.count(), 1 << 30)));
            if (ready < 0) {
                if (errno == EINTR) continue;
                throw TransportError("subprocess: poll() failed");
            }
            if (ready == 0) continue;
            if (count == 2 && (fds[1].revents & (POLLOUT | POLLERR | POLLHUP))) {
                const ssize_t n = write(in_, outgoing.data() + written, outgoing.size() - written);
                if (n < 0 && errno != EAGAIN && errno != EINTR) {
                    throw TransportError("subprocess: child closed its input (" + exit_status() + ")");
                }
                if (n > 0) written += static_cast<std::size_t>(n);
            }
            if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
                char buf[4096];
                const ssize_t n = read(out_, buf, sizeof buf);
                if (n == 0) {
                    throw TransportError("subprocess: child exited before replying (" + exit_status() + ")");
                }
                if (n < 0) {
                    if (errno == EAGAIN || errno == EINTR) continue;
                    throw TransportError("subprocess: read() failed");
                }
                buffer_.append(buf, static_cast<std::size_t>(n));
                std::size_t pos;
                while ((pos = buffer_.find('\n')) != std::string::npos) {
                    std::string line = buffer_.substr(0, pos);
                    buffer_.erase(0, pos + 1);
                    if (replies.size() >= requests.size()) {
                        throw TransportError("subprocess: unexpected extra reply line: '" + line + "'");
                    }
                    replies.push_back(parse_reply(line));
                }
                deadline = std::chrono::steady_clock::now() + deadline_step;
            }
        }
        return replies;
    }

private:
    std::string exit_status() {
        int status = 0;
        const pid_t r = waitpid(pid_, &status, WNOHANG);
        if (r == pid_) {
            pid_ = -1;
            if (WIFEXITED(status)) return "exit status " + std::to_string(WEXITSTATUS(status));
            if (WIFSIGNALED(status)) return "killed by signal " + std::to_string(WTERMSIG(status));
        }
        return "child still running";
    }

    pid_t pid_ = -1;
    int in_ = -1;
    int out_ = -1;
    double timeout_;
    std::string buffer_;
};

}  // namespace detail

/// Starts `options.workers` children running `command` through /bin/sh and
/// returns an evaluator talking to them.
inline EvaluatorHandle spawn_subprocess_evaluator(const std::string& command, Index arity,
                                                  const SubprocessOptions& options = {}) {
    if (options.batch_size < 1) throw DomainError("subprocess: batch_size must be >= 1");
    if (!(options.timeout_seconds > 0.0)) throw DomainError("subprocess: timeout must be positive");
    std::vector<BatchFunction> workers;
    for (Index w = 0; w < std::max<Index>(options.workers, 1); ++w) {
        auto child = std::make_shared<detail::ChildProcess>(command, options.timeout_seconds);
        const Index batch = options.batch_size;
        workers.emplace_back([child, batch](const RowMatrix& x, std::span<double> out) {
            for (Eigen::Index start = 0; start < x.rows(); start += static_cast<Eigen::Index>(batch)) {
                const Eigen::Index stop = std::min<Eigen::Index>(x.rows(), start + static_cast<Eigen::Index>(batch));
                std::vector<std::string> requests;
                for (Eigen::Index m = start; m < stop; ++m) requests.push_back(detail::format_request(x, m));
                const auto replies = child->exchange(requests);
                for (Eigen::Index m = start; m < stop; ++m) {
                    out[static_cast<Index>(m)] = replies[static_cast<Index>(m - start)];
                }
            }
        });
    }
    return EvaluatorHandle(arity, std::move(workers), "subprocess: " + command);
}

}  // namespace ttsense

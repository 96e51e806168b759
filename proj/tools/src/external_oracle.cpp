// SPDX-License-Identifier: Apache-2.0
#include "sepsr/cli/external_oracle.hpp"

#include <cerrno>
#include <charconv>
#include <csignal>
#include <cstring>
#include <limits>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include "sepsr/error.hpp"
#include "sepsr/expr.hpp"

namespace sepsr::cli {

namespace {

std::string errno_text() {
    return std::strerror(errno);
}

} // namespace

ExternalOracle::ExternalOracle(std::string command, std::size_t dimension, std::chrono::milliseconds timeout)
    : command_(std::move(command)), dimension_(dimension), timeout_(timeout) {
    if (command_.empty()) {
        throw InputError("external oracle command is empty");
    }
    if (dimension_ == 0) {
        throw InputError("external oracle needs a positive dimension");
    }
    // A child that exits early must not kill us through SIGPIPE.
    std::signal(SIGPIPE, SIG_IGN);
}

ExternalOracle::~ExternalOracle() {
    stop();
}

void ExternalOracle::start() const {
    int in_pipe[2];
    int out_pipe[2];
    if (pipe(in_pipe) != 0) {
        throw OracleError("pipe: " + errno_text());
    }
    if (pipe(out_pipe) != 0) {
        close(in_pipe[0]);
        close(in_pipe[1]);
        throw OracleError("pipe: " + errno_text());
    }
    const pid_t pid = fork();
    if (pid < 0) {
        throw OracleError("fork: " + errno_text());
    }
    if (pid == 0) {
        dup2(in_pipe[0], STDIN_FILENO);
        dup2(out_pipe[1], STDOUT_FILENO);
        close(in_pipe[0]);
        close(in_pipe[1]);
        close(out_pipe[0]);
        close(out_pipe[1]);
        execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }
    close(in_pipe[0]);
    close(out_pipe[1]);
    fcntl(in_pipe[1], F_SETFD, FD_CLOEXEC);
    fcntl(out_pipe[0], F_SETFD, FD_CLOEXEC);
    pid_ = pid;
    to_child_ = in_pipe[1];
    from_child_ = out_pipe[0];
    buffer_.clear();
}

void ExternalOracle::stop() const noexcept {
    if (to_child_ >= 0) {
        close(to_child_);
        to_child_ = -1;
    }
    if (from_child_ >= 0) {
        close(from_child_);
        from_child_ = -1;
    }
    if (pid_ > 0) {
        // Closing stdin asks the child to finish; give it a moment.
        int status = 0;
        for (int i = 0; i < 50; ++i) {
            if (waitpid(pid_, &status, WNOHANG) == pid_) {
                pid_ = -1;
                return;
            }
            usleep(2000);
        }
        kill(pid_, SIGKILL);
        waitpid(pid_, &status, 0);
        pid_ = -1;
    }
}

void ExternalOracle::write_all(const std::string& text) const {
    std::size_t done = 0;
    while (done < text.size()) {
        const ssize_t n = write(to_child_, text.data() + done, text.size() - done);
        if (n < 0) {
            if (errno == EINTR) {
                continue;
            }
            throw OracleError("external oracle '" + command_ + "' closed its input: " + errno_text());
        }
        done += static_cast<std::size_t>(n);
    }
}

std::string ExternalOracle::read_line() const {
    const auto deadline = std::chrono::steady_clock::now() + timeout_;
    for (;;) {
        if (const auto nl = buffer_.find('\n'); nl != std::string::npos) {
            std::string line = buffer_.substr(0, nl);
            buffer_.erase(0, nl + 1);
            if (!line.empty() && line.back() == '\r') {
                line.pop_back();
            }
            return line;
        }
        const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        if (left.count() <= 0) {
            throw OracleError("external oracle '" + command_ + "' timed out");
        }
        pollfd pfd{from_child_, POLLIN, 0};
        const int ready = poll(&pfd, 1, static_cast<int>(std::min<long long>(left.count(), 1 << 30)));
        if (ready < 0) {
            if (errno == EINTR) {
                continue;
            }
            throw OracleError("poll: " + errno_text());
        }
        if (ready == 0) {
            continue;
        }
        char chunk[4096];
        const ssize_t n = read(from_child_, chunk, sizeof chunk);
        if (n < 0) {
            if (errno == EINTR) {
                continue;
            }
            throw OracleError("read: " + errno_text());
        }
        if (n == 0) {
            throw OracleError("external oracle '" + command_ + "' exited before answering");
        }
        buffer_.append(chunk, static_cast<std::size_t>(n));
    }
}

void ExternalOracle::evaluate(std::span<const double> points, std::span<double> out) const {
    if (points.size() != out.size() * dimension_) {
        throw InputError("external oracle: batch shape mismatch");
    }
    std::lock_guard lock(mutex_);
    if (pid_ < 0) {
        start();
    }
    try {
        std::string request;
        request.reserve(out.size() * dimension_ * 24);
        for (std::size_t i = 0; i < out.size(); ++i) {
            for (std::size_t d = 0; d < dimension_; ++d) {
                if (d > 0) {
                    request.push_back(' ');
                }
                request += format_double(points[i * dimension_ + d]);
            }
            request.push_back('\n');
        }
        request += "#\n";
        write_all(request);
        for (std::size_t i = 0; i < out.size(); ++i) {
            const std::string line = read_line();
            if (line == "#") {
                throw ProtocolError("external oracle sent " + std::to_string(i) + " values for " +
                                    std::to_string(out.size()) + " points");
            }
            std::string_view s = line;
            while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
                s.remove_prefix(1);
            }
            while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) {
                s.remove_suffix(1);
            }
            if (!s.empty() && s.front() == '+') {
                s.remove_prefix(1);
            }
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
                throw ProtocolError("external oracle replied '" + line + "', expected a number");
            }
            out[i] = v;
        }
        if (const std::string end = read_line(); end != "#") {
            throw ProtocolError("external oracle replied '" + end + "' where '#' was expected");
        }
    } catch (...) {
        stop();
        throw;
    }
}

} // namespace sepsr::cli

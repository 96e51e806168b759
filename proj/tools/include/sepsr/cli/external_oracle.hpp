// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <mutex>
#include <string>
#include <sys/types.h>

#include "sepsr/oracle.hpp"

namespace sepsr::cli {

// Child process speaking a line protocol: one point per line (space
// separated), then a line "#"; the child answers one value per line, then
// "#". "nan" marks a point outside the child's domain.
class ExternalOracle final : public Oracle {
public:
    ExternalOracle(std::string command, std::size_t dimension,
                   std::chrono::milliseconds timeout = std::chrono::seconds(60));
    ~ExternalOracle() override;

    ExternalOracle(const ExternalOracle&) = delete;
    ExternalOracle& operator=(const ExternalOracle&) = delete;

    [[nodiscard]] std::size_t dimension() const override { return dimension_; }
    void evaluate(std::span<const double> points, std::span<double> out) const override;
    [[nodiscard]] bool thread_safe() const override { return false; }

    [[nodiscard]] const std::string& command() const noexcept { return command_; }

private:
    void start() const;
    void stop() const noexcept;
    void write_all(const std::string& text) const;
    [[nodiscard]] std::string read_line() const;

    std::string command_;
    std::size_t dimension_;
    std::chrono::milliseconds timeout_;
    mutable std::mutex mutex_;
    mutable pid_t pid_ = -1;
    mutable int to_child_ = -1;
    mutable int from_child_ = -1;
    mutable std::string buffer_;
};

} // namespace sepsr::cli

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace sepsr {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Caller supplied something malformed (dimension mismatch, bad box, bad config).
class InputError : public Error {
public:
    using Error::Error;
};

class ParseError : public InputError {
public:
    ParseError(const std::string& what, std::size_t position)
        : InputError(what + " at position " + std::to_string(position)), position_(position) {}

    [[nodiscard]] std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

// A correlation could not be computed because one vector is flat.
class IndeterminateError : public Error {
public:
    using Error::Error;
};

// The oracle was undefined on too large a share of the requested points.
class EvaluationDomainError : public Error {
public:
    using Error::Error;
};

// Fitness is undefined for a constant target (SST == 0).
class DegenerateTargetError : public Error {
public:
    using Error::Error;
};

class RankDeficiencyError : public Error {
public:
    RankDeficiencyError(const std::string& what, std::size_t block)
        : Error(what), block_(block) {}

    [[nodiscard]] std::size_t block() const noexcept { return block_; }

private:
    std::size_t block_;
};

// Failure of an external evaluator (launch, exit, timeout, malformed reply).
class OracleError : public Error {
public:
    using Error::Error;
};

class ProtocolError : public OracleError {
public:
    using OracleError::OracleError;
};

class UnsupportedLayoutError : public InputError {
public:
    using InputError::InputError;
};

} // namespace sepsr

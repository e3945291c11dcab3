#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace supraflow {

/// Stable error taxonomy. Scripts branch on the string form printed by the CLI.
enum class ErrorCode {
    ScenarioInvalid,
    NumericalDivergence,
    EigenNonconvergence,
    IoError,
};

std::string_view to_string(ErrorCode code);

/// Base class for every exception thrown by the library.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// A model or scenario violates one of its invariants.
class InvalidModel : public Error {
public:
    explicit InvalidModel(const std::string& message)
        : Error(ErrorCode::ScenarioInvalid, message) {}
};

/// Integration produced a non-finite state.
class DivergenceError : public Error {
public:
    DivergenceError(double time, const std::string& message)
        : Error(ErrorCode::NumericalDivergence, message), time_(time) {}

    double time() const noexcept { return time_; }

private:
    double time_;
};

class EigenNonconvergence : public Error {
public:
    EigenNonconvergence(int sweeps, const std::string& message)
        : Error(ErrorCode::EigenNonconvergence, message), sweeps_(sweeps) {}

    int sweeps() const noexcept { return sweeps_; }

private:
    int sweeps_;
};

class IoError : public Error {
public:
    explicit IoError(const std::string& message) : Error(ErrorCode::IoError, message) {}
};

}  // namespace supraflow

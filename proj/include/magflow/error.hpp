#pragma once

#include <stdexcept>
#include <string>

namespace magflow {

/// Process exit codes. Part of the CLI contract.
enum class ExitCode : int {
    ok = 0,
    failure = 1,
    bulk_level = 2,
    tracking = 3,
    window = 4,
    budget = 5,
};

class Error : public std::runtime_error {
public:
    Error(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ExitCode code() const noexcept { return code_; }

private:
    ExitCode code_;
};

/// alpha coincides with (or is on top of) a bulk Landau level.
class BulkLevelError : public Error {
public:
    explicit BulkLevelError(const std::string& what) : Error(ExitCode::bulk_level, what) {}
};

class TrackingError : public Error {
public:
    TrackingError(const std::string& what, double zeta)
        : Error(ExitCode::tracking, what + " at zeta=" + std::to_string(zeta)), zeta_(zeta) {}
    double zeta() const noexcept { return zeta_; }

private:
    double zeta_;
};

class WindowError : public Error {
public:
    explicit WindowError(const std::string& what) : Error(ExitCode::window, what) {}
};

class BudgetError : public Error {
public:
    explicit BudgetError(const std::string& what) : Error(ExitCode::budget, what) {}
};

class SolverError : public Error {
public:
    explicit SolverError(const std::string& what) : Error(ExitCode::failure, what) {}
};

/// A branch endpoint matches neither a bulk level nor the divergence heuristic.
class ClassificationError : public Error {
public:
    explicit ClassificationError(const std::string& what) : Error(ExitCode::failure, what) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ExitCode::failure, what) {}
};

}  // namespace magflow

#pragma once

#include <stdexcept>
#include <string>

namespace crim {

/// Base of every error raised by the library. `stage()` names the pipeline
/// stage that failed (ingest, measure, ctd, fit, estimate, report, ...).
class Error : public std::runtime_error {
public:
    Error(std::string stage, const std::string& message)
        : std::runtime_error(message), stage_(std::move(stage)) {}

    [[nodiscard]] const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

/// Malformed or unreadable input (bad JSONL, missing repository, bad config).
class InputError : public Error {
public:
    using Error::Error;
};

/// The runtime environment lacks something we need (e.g. no git executable).
class EnvironmentError : public Error {
public:
    using Error::Error;
};

/// A caller broke an operation's precondition.
class ContractViolation : public Error {
public:
    using Error::Error;
};

/// Arithmetic outside an operation's domain (zero denominators, rho <= 0).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Not enough observed samples to fit a rate.
class InsufficientData : public Error {
public:
    using Error::Error;
};

/// The language profile cannot compute complexity; callers fall back to
/// word distance.
class ComplexityUnavailable : public Error {
public:
    using Error::Error;
};

/// Invalid generator or run parameters.
class ParameterError : public Error {
public:
    using Error::Error;
};

}  // namespace crim

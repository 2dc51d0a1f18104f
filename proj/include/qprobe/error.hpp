#pragma once

#include <stdexcept>
#include <string>

namespace qprobe {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad input to an operation (unknown node, mismatched shapes, empty list, ...).
class ArgumentError : public Error {
public:
    using Error::Error;
};

// Exact tables and contingency counts are exponential in the variable count.
class CapacityError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

// Random DAG rejection sampling exceeded its attempt cap.
class GenerationError : public Error {
public:
    using Error::Error;
};

// Inconsistent domain knowledge.
class ValidationError : public Error {
public:
    using Error::Error;
};

// A pattern has no consistent DAG extension under the given knowledge.
class OrientationError : public Error {
public:
    using Error::Error;
};

class EstimationError : public Error {
public:
    using Error::Error;
};

// No treatment/outcome pair with a nonzero effect exists in a network.
class DegenerateNetworkError : public Error {
public:
    using Error::Error;
};

class PipelineError : public Error {
public:
    PipelineError(std::string stage, const std::string& what)
        : Error(stage + ": " + what), stage_(std::move(stage)) {}

    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

} // namespace qprobe

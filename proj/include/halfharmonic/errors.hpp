#pragma once

#include <stdexcept>
#include <string>

namespace hh {

// Exit codes shared by the command-line driver.
enum class ExitCode : int {
    ok = 0,
    config = 2,
    numeric = 3,
    sign = 4,
    consistency = 5,
};

class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// |Pi phi| > 1 somewhere, so no normal correction keeps the map on S^1.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class SignConditionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConsistencyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NoBubbleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ResolutionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace hh

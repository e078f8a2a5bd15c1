#pragma once

#include <stdexcept>
#include <string>

namespace mvg {

// Error taxonomy mapped to CLI exit codes: usage 2, precondition/hash 3,
// numerical 4.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& m) : std::runtime_error(m) {}
};

struct SamplingError : std::runtime_error {
    explicit SamplingError(const std::string& m) : std::runtime_error(m) {}
};

struct ShapeError : std::invalid_argument {
    explicit ShapeError(const std::string& m) : std::invalid_argument(m) {}
};

struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& m) : std::runtime_error(m) {}
};

struct HashMismatchError : std::runtime_error {
    explicit HashMismatchError(const std::string& m) : std::runtime_error(m) {}
};

struct ProtocolError : std::runtime_error {
    explicit ProtocolError(const std::string& m) : std::runtime_error(m) {}
};

struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& m) : std::runtime_error(m) {}
};

} // namespace mvg

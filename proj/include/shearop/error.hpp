#pragma once

#include <stdexcept>
#include <string>

namespace shearop {

/// Shape, index or configuration mismatch between otherwise valid objects.
class StructuralError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Invalid user configuration (bad id, out-of-range hyperparameter).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// File could not be read or written, or has the wrong format.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A required input file does not exist.
class MissingInputError : public IoError {
public:
    explicit MissingInputError(const std::string& path)
        : IoError("missing input: " + path), path_(path) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

/// Non-finite values, CFL violation, divergence.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace shearop

#ifndef PIXANT_ERRORS_HPP
#define PIXANT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace pixant {

/// Base of all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Bad user input: configs, file contents, out-of-contract arguments.
/// The CLI maps these to exit code 2.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Failure produced by the numerics at runtime (singular systems,
/// degenerate loads, missing resonances). CLI exit code 3.
class NumericError : public Error {
public:
    using Error::Error;
};

class NonPositiveGround : public NumericError {
public:
    using NumericError::NumericError;
};

class SingularSystem : public NumericError {
public:
    using NumericError::NumericError;
};

class SingularBlock : public NumericError {
public:
    using NumericError::NumericError;
};

class DegenerateLoad : public NumericError {
public:
    using NumericError::NumericError;
};

class InsufficientResonances : public NumericError {
public:
    using NumericError::NumericError;
};

class OutOfRange : public NumericError {
public:
    using NumericError::NumericError;
};

class EmptyBand : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class LengthMismatch : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class TooManyPorts : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class ParseError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class UnsupportedFormat : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class UnitError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class ZeroModelChange : public NumericError {
public:
    using NumericError::NumericError;
};

class FeatureLoss : public NumericError {
public:
    using NumericError::NumericError;
};

class NoFeasibleTopology : public NumericError {
public:
    using NumericError::NumericError;
};

} // namespace pixant

#endif // PIXANT_ERRORS_HPP

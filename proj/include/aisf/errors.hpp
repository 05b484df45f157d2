#pragma once

#include <stdexcept>
#include <string>

namespace aisf {

// Shape or dimension contract violated by an operation's arguments.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Input data violates a domain constraint (NaN, ordering, ranges).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class OrderingError : public DataError {
public:
    using DataError::DataError;
};

// Malformed file or schema.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Object used before it was ready (e.g. an unfitted scaler).
class StateError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Non-finite values or singular systems.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid run configuration.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace aisf

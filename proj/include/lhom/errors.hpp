#pragma once

#include <stdexcept>
#include <string>

namespace lhom {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid user-supplied parameter (non-positive sigma, h >= 2R, ...).
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Truncated domain leaves too much density mass outside [-R,R].
class TruncationError : public Error {
public:
    using Error::Error;
};

class QuadratureError : public Error {
public:
    using Error::Error;
};

/// Independent computations of the same quantity disagree.
class ConsistencyError : public Error {
public:
    using Error::Error;
};

class WeightError : public Error {
public:
    using Error::Error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class NotSpdError : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class ConvergenceError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace lhom

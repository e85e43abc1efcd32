#pragma once

#include <stdexcept>
#include <string>

namespace dgcnn {

// Base of every error raised by the library. The subclasses let callers
// (mainly the CLI) map failures onto exit codes without string matching.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

class ArgumentError : public Error {
public:
    using Error::Error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class LookupError : public Error {
public:
    using Error::Error;
};

// Numerical failure during training (NaN/inf loss).
class TrainingAborted : public Error {
public:
    using Error::Error;
};

}  // namespace dgcnn

#pragma once

#include <stdexcept>
#include <string>

namespace zisofr {

// Exception hierarchy. The CLI maps each branch to a distinct exit code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad user input: config keys, flag values, parameters outside a family's domain.
class UsageError : public Error {
public:
    using Error::Error;
};

class ParameterDomainError : public UsageError {
public:
    using UsageError::UsageError;
};

// Malformed or inconsistent data files and datasets.
class DataError : public Error {
public:
    using Error::Error;
};

class CollinearityError : public DataError {
public:
    using DataError::DataError;
};

// Numerical failure: factorization, unidentifiable fits, degenerate integrals.
class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace zisofr

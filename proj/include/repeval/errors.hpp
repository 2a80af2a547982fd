#pragma once

#include <stdexcept>
#include <string>

namespace repeval {

// Error taxonomy mirrors the CLI exit codes: validation failures exit 2,
// budget refusals exit 3, I/O failures exit 4.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class BudgetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Raised when a linear system over GF(2) admits no solution at all.
class InconsistentSystemError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

}  // namespace repeval

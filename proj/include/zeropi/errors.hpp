#pragma once

#include <stdexcept>
#include <string>

namespace zeropi {

// Bad input: violated invariants, malformed files, impossible requests.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A numerical routine failed (LAPACK info != 0, step size underflow, gauge failure).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An iterative procedure stopped before meeting its tolerance.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& what)
{
    if (!cond) throw ValidationError(what);
}

}  // namespace zeropi

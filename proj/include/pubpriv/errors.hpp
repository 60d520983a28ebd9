#pragma once

#include <stdexcept>
#include <string>

namespace pubpriv {

// Failure taxonomy shared by all modules. Callers that only care about
// "invalid call" vs "numerical breakdown" can catch the std bases.

struct ParameterError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct EmptyInputError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Posterior weight formulas require both a private and a public source;
// with one source missing the caller must switch to the single-source path.
struct DegeneratePathError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct BudgetError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct SingularDesignError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace pubpriv

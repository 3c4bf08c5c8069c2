#ifndef DISCUCB_ERRORS_HPP
#define DISCUCB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace discucb {

    /// Caller supplied something malformed: wrong dimensions, non-finite
    /// coordinates, out-of-range parameters.
    class InputError : public std::invalid_argument {
    public:
        explicit InputError(const std::string& what) : std::invalid_argument(what) {}
    };

    /// Numerical breakdown inside a computation (Cholesky pivot collapse,
    /// negative variance beyond roundoff, non-finite kernel values).
    class NumericError : public std::runtime_error {
    public:
        explicit NumericError(const std::string& what) : std::runtime_error(what) {}
    };

    /// The planner found no sequence with a finite objective.
    class InfeasibleError : public std::runtime_error {
    public:
        explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
    };

} // namespace discucb

#endif

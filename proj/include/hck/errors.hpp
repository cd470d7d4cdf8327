#pragma once

#include <stdexcept>
#include <string>

namespace hck {

// A linear-algebra step failed beyond the documented recovery ladder
// (e.g. Cholesky after maximum jitter escalation, replica bisection stuck).
struct numerical_error : std::runtime_error {
    explicit numerical_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Grid or quadrature order too small for the requested mode range.
struct resolution_error : std::runtime_error {
    explicit resolution_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Not enough trustworthy data points for a fit (e.g. rank tail of a
// degenerate spectrum).
struct insufficient_tail_error : std::runtime_error {
    explicit insufficient_tail_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace hck

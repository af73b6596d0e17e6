#pragma once

#include <stdexcept>
#include <string>

namespace tsturm {

/// Violated structural invariant (ordering, counts, malformed input).
class structural_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A point was requested outside the time scale (in the gap or off the ends).
class timescale_point_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Integration blew up or would need more substeps than the fixed-step
/// integrator allows; carries the offending spectral parameter.
class numeric_overflow_error : public std::runtime_error {
public:
    numeric_overflow_error(const std::string& what, double lambda)
        : std::runtime_error(what), lambda_(lambda) {}
    double lambda() const { return lambda_; }

private:
    double lambda_;
};

/// Fixed-point iteration failed to reach tolerance within the iteration cap.
class convergence_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The eigenvalue scan hit its ceiling before locating the requested count.
class incomplete_spectrum_error : public std::runtime_error {
public:
    incomplete_spectrum_error(const std::string& what, int found, int requested)
        : std::runtime_error(what), found_(found), requested_(requested) {}
    int found() const { return found_; }
    int requested() const { return requested_; }

private:
    int found_;
    int requested_;
};

/// The given lambda is not (close to) a zero of the characteristic function.
class not_an_eigenvalue_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

} // namespace tsturm

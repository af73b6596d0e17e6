#pragma once

#include <vector>

#include "tsturm/errors.hpp"

namespace tsturm {

/// The two-interval time scale T = [0, a1] u [a2, l].
///
/// Every point except a1 is right-dense; a1 is right-scattered with
/// sigma(a1) = a2 and graininess mu(a1) = a = a2 - a1.
struct TimeScaleDomain {
    double a1 = 0;
    double a2 = 0;
    double l = 0;
    double a = 0;           // gap length a2 - a1
    bool symmetric = false; // l - a2 == a1 within tolerance

    double left_length() const { return a1; }
    double right_length() const { return l - a2; }

    /// Membership test with a small absolute slack for roundoff at the
    /// interval edges.
    bool contains(double t, double slack = 0.0) const;
};

/// Validates 0 < a1 < a2 < l and fills in the derived fields.
/// Throws structural_error naming the violated inequality.
TimeScaleDomain make_domain(double a1, double a2, double l);

struct JumpInfo {
    double sigma;
    double mu;
};

/// Forward jump operator and graininess at t.
/// Throws timescale_point_error if t is not in T.
JumpInfo forward_jump(const TimeScaleDomain& domain, double t);

enum class PotentialForm { grid, cosine };

/// Real-valued coefficient q on T, stored per interval either as samples on
/// a uniform grid (evaluated by local cubic interpolation) or as cosine
/// coefficients c_k of sum c_k cos(k pi x / len) with x measured from the
/// interval's left endpoint.
class Potential {
public:
    static Potential zero(const TimeScaleDomain& domain);
    static Potential from_grid(const TimeScaleDomain& domain,
                               std::vector<double> left_samples,
                               std::vector<double> right_samples);
    static Potential from_cosine(const TimeScaleDomain& domain,
                                 std::vector<double> left_coeffs,
                                 std::vector<double> right_coeffs);

    PotentialForm form() const { return form_; }
    const TimeScaleDomain& domain() const { return domain_; }
    const std::vector<double>& left() const { return left_; }
    const std::vector<double>& right() const { return right_; }

    /// q(t) for t in T; throws timescale_point_error in the open gap or
    /// outside [0, l]. Points within roundoff slack of an interval edge are
    /// clamped onto the interval, never extrapolated.
    double evaluate(double t) const;

    /// Endpoint values used by the gap-crossing condition.
    double value_at_a1() const;
    double value_at_a2() const;

    /// Upper bound for sup |q| over T (exact max for grid form, coefficient
    /// l1-norm for cosine form).
    double sup_abs() const;

private:
    Potential(const TimeScaleDomain& d, PotentialForm f,
              std::vector<double> left, std::vector<double> right);

    TimeScaleDomain domain_;
    PotentialForm form_;
    std::vector<double> left_, right_;
};

/// Free-function spelling of Potential::evaluate.
double evaluate_potential(const Potential& q, double t);

/// Full problem L = (domain, q, h, H); immutable after construction.
struct ProblemSpec {
    ProblemSpec(TimeScaleDomain domain, Potential q, double h, double H);

    TimeScaleDomain domain;
    Potential q;
    double h;
    double H;
};

/// Sample nodes for solution traces, one ordered node set per interval.
/// Endpoints 0, a1, a2, l are always present.
struct Grid {
    std::vector<double> left;  // nodes in [0, a1]
    std::vector<double> right; // nodes in [a2, l]
    double step_left = 0;      // max cell width, left interval
    double step_right = 0;     // max cell width, right interval
};

/// Uniform grid with the given number of cells per interval (nodes = cells+1).
Grid make_uniform_grid(const TimeScaleDomain& domain, int cells_left,
                       int cells_right);

/// Checks ordering and endpoint presence; throws structural_error.
void validate_grid(const TimeScaleDomain& domain, const Grid& grid);

} // namespace tsturm

#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <vector>

#include "tsturm/domain.hpp"
#include "tsturm/forward.hpp"

namespace tsturm {

/// Boundary data treated as known during reconstruction: the geometry and
/// the constants h, H. The domain must be symmetric (a1 + a2 = l).
struct FixedCoefficients {
    TimeScaleDomain domain;
    double h = 0;
    double H = 0;
};

struct InverseConfig {
    int n_data = 8;          // (lambda_n, r_n) pairs used
    int n_basis_left = 2;    // cosine modes on [0, a1], k = 0 .. n-1
    int n_basis_right = 2;   // cosine modes on [a2, l]
    double regularization = 1e-8;
    int max_iterations = 50;
    /// Convergence gate on ||residual||. The Tikhonov term biases the
    /// minimizer by roughly reg * ||coeffs|| / sigma_min, a floor near 1e-8
    /// at the default weight, so tolerances below ~1e-8 are unreachable
    /// without also lowering `regularization`.
    double residual_tolerance = 1e-7;
    double damping_initial = 1e-3;
    double damping_decrease = 0.25;
    double damping_increase = 4.0;
    double fd_step = 1e-4;   // central-difference step for the Jacobian
    SearchOptions forward{}; // forward-solver controls
    double ratio_denominator_tol = 1e-8;

    /// Throws structural_error unless the system is square or overdetermined
    /// (n_data >= n_basis_left + n_basis_right) and all knobs are sane.
    void validate() const;
};

/// Weighted data mismatch of the candidate potential given by `coeffs`
/// (first n_basis_left left cosine coefficients, then n_basis_right right
/// ones) against the first n_data unflagged target entries:
///   [(lambda_n(q) - lambda_n*) / (1 + |lambda_n*|) ...,
///    (r_n(q) - r_n*) / (1 + |r_n*|) ...]
/// Forward-solver failures are rethrown with the offending coefficients
/// attached to the message.
std::vector<double> residual(std::span<const double> coeffs,
                             const SpectralData& target,
                             const FixedCoefficients& fixed,
                             const InverseConfig& config);

/// Central finite-difference Jacobian of residual() with respect to the
/// coefficients; columns are independent and evaluated concurrently when
/// config.forward.parallel is set.
Eigen::MatrixXd jacobian(std::span<const double> coeffs,
                         const SpectralData& target,
                         const FixedCoefficients& fixed,
                         const InverseConfig& config);

struct ReconstructionReport {
    std::optional<Potential> recovered; // cosine form
    std::vector<double> coeffs_left;
    std::vector<double> coeffs_right;
    double final_residual = 0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> residual_history;  // ||r|| at start and after accepts
    std::vector<double> objective_history; // damped objective, strictly drops
    double eigenvalue_residual = 0; // final data-fit breakdown
    double ratio_residual = 0;
    std::vector<double> singular_values; // of the Jacobian at the solution
};

/// Levenberg-Marquardt minimization of ||residual||^2 + reg ||coeffs||^2
/// from a zero start. Non-convergence is reported in the flag, not thrown.
ReconstructionReport reconstruct(const SpectralData& target,
                                 const FixedCoefficients& fixed,
                                 const InverseConfig& config);

/// Max over compared indices of the weighted component distances used in
/// residual(); symmetric in its arguments. Indices flagged in either input
/// are skipped. Throws structural_error on mismatched counts.
double uniqueness_gap(const SpectralData& a, const SpectralData& b);

} // namespace tsturm

#pragma once

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tsturm/domain.hpp"
#include "tsturm/forward.hpp"

namespace tsturm {

/// One convergence experiment: a parameter sweep, the measured errors, the
/// log-log least-squares decay exponent, and a pass flag against the check's
/// stated bound. `extra` carries named companion sequences (same length).
struct ConvergenceReport {
    std::string name;
    std::vector<double> parameters;
    std::vector<double> errors;
    double fitted_exponent = 0;
    bool pass = false;
    std::vector<std::pair<std::string, std::vector<double>>> extra;
};

/// Least-squares slope of log(error) against log(parameter); nonpositive
/// errors are skipped, fewer than two usable points give 0.
double fit_decay_exponent(std::span<const double> parameters,
                          std::span<const double> errors);

/// Pass rule shared by the asymptotic validators: a normalized error series
/// counts as bounded when its max stays within 2.5x of its median, or when
/// the raw errors never leave the roundoff floor (1e-9). Growing raw errors
/// fail.
bool normalized_errors_bounded(std::span<const double> normalized,
                               std::span<const double> raw);

/// Asymptotic-form validator for phi: for each s, the max deviation between
/// the shot solution at lambda = s^2 and the leading asymptotic terms, per
/// interval. `errors` holds the raw left-interval deviations; extras hold
/// the normalized left (x s), raw right, and normalized right (/ s) series.
/// Passes when the normalized series stay bounded on both intervals.
ConvergenceReport check_phi_asymptotics(const ProblemSpec& spec,
                               std::span<const double> s_values,
                               int cells = 512, const StepPolicy& policy = {});

struct EigenvalueAsymptoticsOptions {
    int n_lo = 10;
    int n_hi = 40;
    /// Subtracted from each eigenvalue before taking the square root, for
    /// shifted-potential comparisons.
    double lambda_shift = 0;
    /// Offset added to the printed seed index (n-1); 0 is the formula as
    /// printed, -1 pairs each root with the previous seed.
    int seed_index_offset = 0;
};

/// Eigenvalue-asymptotics validator: reports d_n = n |sqrt(lambda_n) -
/// (n-1+offset) pi/(2 a1)| over [n_lo, n_hi]. With offset 0 the extras also
/// carry the offset -1 sequence ("index_shifted_errors"), which is the
/// pairing that actually stays bounded for this operator family. Passes when
/// the mean over the last ten indices is at most 1.2x the mean over the
/// first ten. Requires a symmetric domain.
ConvergenceReport check_eigenvalue_asymptotics(const ProblemSpec& spec, const EigenvalueAsymptoticsOptions& opts = {},
                            const SearchOptions& search = {});

/// Max deviation over all trace nodes (gap step included) of the bracket
/// u v^Delta - u^Delta v from its value at 0, for the solutions with initial
/// data (1, h) and (0, 1) at the same lambda. The bracket is conserved
/// exactly by the matching conditions, so the deviation measures integrator
/// error.
double check_wronskian(const ProblemSpec& spec, double lambda, const Grid& grid,
                       const StepPolicy& policy = {});

struct Probe {
    std::string name;
    std::function<double(double)> f;
};

/// {1, t, t^2, cos(pi t / a1), step at a1/2} on [0, a1].
std::vector<Probe> default_probes(double a1);

struct CompletenessReport {
    std::vector<int> span_sizes;
    std::vector<std::string> probe_names;
    /// residuals[p][k]: L2([0,a1]) projection residual of probe p onto
    /// span{cos 2 sqrt(lambda_n) t : n <= span_sizes[k]}.
    std::vector<std::vector<double>> residuals;
    bool monotone = true;
    bool conditioning_warning = false;
};

/// Numerical surrogate for the completeness of {cos 2 sqrt(lambda_n) t}:
/// Gram-matrix least-squares projection residuals over nested spans, with a
/// small ridge for conditioning. Reports observed decay only; it cannot
/// prove completeness. Negative eigenvalues contribute cosh branches.
CompletenessReport completeness_diagnostic(std::span<const double> eigenvalues,
                                           const std::vector<Probe>& probes,
                                           std::span<const int> span_sizes,
                                           double a1, double ridge = 1e-12,
                                           int quadrature_panels = 4096);

/// Eigenvalues of the equivalent classical two-segment problem on
/// (0, a1 + l - a2): left segment carries q(x), right segment q(x - a1 + a2),
/// with the value/slope jumps of the gap crossing at x = a1. Independent
/// bookkeeping of the same equations.
std::vector<double> transmission_eigenvalues(const ProblemSpec& spec, int n,
                                             const SearchOptions& opts = {});

/// Max |lambda_n(time scale) - lambda_n(transmission form)| over the first
/// n eigenvalues.
double transmission_equivalence(const ProblemSpec& spec, int n,
                                const SearchOptions& opts = {});

} // namespace tsturm

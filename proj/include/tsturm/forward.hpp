#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "tsturm/domain.hpp"

namespace tsturm {

/// Substep control for the fixed-step RK4 integrator.
///
/// The substep on each interval is capped by
///   h <= accuracy_constant / (1 + sqrt(|lambda|))^(5/4),
/// which keeps the accumulated RK4 phase error near 1e-10 for the lambda
/// ranges the eigenvalue search visits. This cap is strictly tighter than
/// 0.1 / (1 + sqrt(|lambda|)) for any accuracy_constant <= 0.1.
struct StepPolicy {
    double accuracy_constant = 8e-3;
    /// One RK4 step per grid cell regardless of lambda (for order studies).
    bool grid_steps_only = false;
    /// Renormalize (phi, phi') and track log_scale past this magnitude.
    double renorm_threshold = 1e100;
    /// Refuse lambdas that would need more substeps than this per interval.
    long max_substeps = 50'000'000;
};

struct TraceSample {
    double t;
    double phi;
    double dphi;
};

/// Sampled solution (phi, phi') along both intervals for one lambda.
///
/// Left samples carry the classical derivative, which at a1 equals the
/// delta derivative because phi^Delta is continuous there. The first right
/// sample carries the one-sided derivative phi'(a2+).
///
/// If renormalization was triggered, all stored values are the true solution
/// times exp(-log_scale); log_scale is 0 in ordinary runs.
struct SolutionTrace {
    double lambda = 0;
    std::vector<TraceSample> left;
    std::vector<TraceSample> right;
    double log_scale = 0;

    double phi_0() const { return left.front().phi; }
    double dphi_0() const { return left.front().dphi; }
    double phi_a1() const { return left.back().phi; }
    double dphi_a1() const { return left.back().dphi; }
    double phi_a2() const { return right.front().phi; }
    double dphi_a2() const { return right.front().dphi; }
    double phi_l() const { return right.back().phi; }
    double dphi_l() const { return right.back().dphi; }
};

/// Integrates the initial value problem for phi across the gap:
/// classical ODE -y'' + q y = lambda y on [0,a1] from (1, h), then
///   phi(a2)   = phi(a1) + a phi'(a1-)
///   phi'(a2+) = phi'(a1-) + a (q(a1) - lambda) phi(a2)
/// and the classical ODE again on [a2, l]. Samples at the grid nodes.
SolutionTrace shoot(const ProblemSpec& spec, double lambda, const Grid& grid,
                    const StepPolicy& policy = {});

/// Same integration with caller-chosen initial data (y(0), y^Delta(0));
/// shoot() is the (1, h) special case.
SolutionTrace shoot_with_initial(const ProblemSpec& spec, double lambda,
                                 const Grid& grid, double y0, double dy0,
                                 const StepPolicy& policy = {});

/// Characteristic function Delta(lambda) = phi^Delta(l) + H phi(l), with
/// phi^Delta(l) the classical left derivative. Uses a traceless integration
/// at the same substep rule as shoot(). If renormalization was triggered the
/// returned value is the true Delta times exp(-log_scale); the zero set and
/// the sign are unaffected.
double characteristic(const ProblemSpec& spec, double lambda,
                      const StepPolicy& policy = {}, int cells = 16);

/// Exact Delta(lambda) for q == 0, h = H = 0, composed in closed form from
/// the cosine solution, the gap crossing, and the boundary form. Requires
/// lambda >= 0.
double closed_form_char_zero_potential(const TimeScaleDomain& domain,
                                       double lambda);

/// Rough magnitude of Delta at the given lambda, used for relative
/// comparisons of characteristic values.
double characteristic_scale(const TimeScaleDomain& domain, double H,
                            double lambda);

struct PicardOptions {
    int panels = 2048;        // quadrature panels on [0, t]
    int max_iterations = 200;
    double tolerance = 1e-13; // sup-norm fixed-point tolerance, relative
};

/// phi(t, lambda) on the left interval by Picard iteration on the Volterra
/// integral equation
///   phi(t) = cos(sqrt(lambda) t) + (h/sqrt(lambda)) sin(sqrt(lambda) t)
///          + (1/sqrt(lambda)) int_0^t sin(sqrt(lambda)(t-xi)) q(xi) phi(xi) dxi.
/// Independent of the RK4 shooting path. Requires lambda > 0, t in [0, a1].
/// Throws convergence_error if the fixed point is not reached.
double phi_via_integral_equation(const ProblemSpec& spec, double lambda,
                                 double t, const PicardOptions& opts = {});

/// Volterra solution sampled at the given uniform, increasing nodes
/// (nodes.front() == 0); each node cell is refined `refine`-fold for the
/// quadrature. Used to compare whole left-interval profiles against shoot().
std::vector<double> phi_profile_via_integral_equation(
    const ProblemSpec& spec, double lambda, std::span<const double> nodes,
    int refine = 16, const PicardOptions& opts = {});

/// Ordered eigenvalues with optional interior data; `flags[i]` marks entries
/// whose ratio denominator phi(a1, lambda_i) was numerically degenerate.
struct SpectralData {
    std::vector<double> eigenvalues;
    std::vector<double> ratios; // empty if only eigenvalues were computed
    std::vector<bool> flags;    // empty if only eigenvalues were computed
    int count() const { return static_cast<int>(eigenvalues.size()); }
};

struct SearchOptions {
    /// Scan resolution in s = sqrt(lambda); 0 selects pi/(8 max(a1, l-a2)).
    double s_step = 0;
    /// Scan step for the lambda < 0 range.
    double negative_step = 0.25;
    /// Scan start; default -(sup|q| + |h| + |H| + 1)^2.
    std::optional<double> lambda_floor;
    /// Scan ceiling in s; default sized from the requested count.
    std::optional<double> s_ceiling;
    /// Bisection stops at bracket width <= bracket_rel_width * (1 + |lambda|).
    double bracket_rel_width = 1e-12;
    /// Evaluate scan points and refine brackets concurrently.
    bool parallel = true;
    StepPolicy policy{};
    /// Internal integration cells per interval (floor for the substep count).
    int solver_cells = 16;
};

/// Locates the n_max smallest zeros of Delta(lambda): coarse sign-change scan
/// (in lambda below zero, in s above), bisection refinement, with
/// asymptotic seed points added to the scan for symmetric domains.
/// Throws incomplete_spectrum_error (reporting the count found) if the scan
/// ceiling is reached first.
SpectralData eigenvalues(const ProblemSpec& spec, int n_max,
                         const SearchOptions& opts = {});

/// Trace of phi(., lambda_n) for an already-located eigenvalue. Throws
/// not_an_eigenvalue_error if |Delta(lambda_n)| is not small relative to
/// characteristic_scale.
SolutionTrace eigenfunction(const ProblemSpec& spec, double lambda_n,
                            const Grid& grid, const StepPolicy& policy = {},
                            double accept_tol = 1e-7);

struct ExtractOptions {
    SearchOptions search{};
    /// Entry n is flagged when |phi(a1, lambda_n)| < ratio_denominator_tol
    /// times the left-interval amplitude of phi.
    double ratio_denominator_tol = 1e-8;
    int trace_cells = 64;
};

/// First n eigenvalues with interior ratios r_n = phi^Delta(a1) / phi(a1).
/// Degenerate denominators are flagged, never perturbed; the raw quotient is
/// kept unless the denominator is exactly zero.
SpectralData extract_data(const ProblemSpec& spec, int n,
                          const ExtractOptions& opts = {});

/// Leading asymptotic terms of phi for large lambda:
/// cos(st) + (h/s) sin(st) on [0,a1]; a^2 lambda sin(s a1) sin(s (t - a2))
/// on [a2, l], with s = sqrt(lambda). Requires lambda > 0 and t in T.
double asymptotic_phi(const TimeScaleDomain& domain, double h, double lambda,
                      double t);

/// Leading asymptotic term of the characteristic function:
/// a^2 lambda^(3/2) sin(sqrt(lambda) a1) cos(sqrt(lambda) (l - a2)).
double asymptotic_char(const TimeScaleDomain& domain, double lambda);

/// Asymptotic eigenvalue seed ((n-1) pi / (2 a1))^2; only defined for
/// symmetric domains (l - a2 == a1). Used to size scan brackets, never to
/// label roots.
double asymptotic_eigen_guess(const TimeScaleDomain& domain, int n);

/// Generic scan-and-bisect root finder shared by the time-scale and
/// transmission characteristic functions.
using DeltaFn = std::function<double(double)>;
/// Each worker obtains its own evaluator instance, so stateful evaluators
/// (plan caches) need no locking.
using DeltaFactory = std::function<DeltaFn()>;

struct RootScanParams {
    double lambda_floor = -1.0;
    double negative_step = 0.25;
    double s_step = 0.39;
    double s_ceiling = 40.0;
    double bracket_rel_width = 1e-12;
    bool parallel = true;
    std::vector<double> seed_s; // extra scan nodes in s-space
};

std::vector<double> find_characteristic_roots(const DeltaFactory& factory,
                                              int n_max,
                                              const RootScanParams& params);

/// Scan parameters the eigenvalue search derives from a problem spec:
/// lambda floor from sup|q| + |h| + |H|, s resolution from the interval
/// lengths, ceiling from the asymptotic root density, plus asymptotic seed
/// points for symmetric domains.
RootScanParams default_scan_params(const ProblemSpec& spec, int n_max,
                                   const SearchOptions& opts = {});

} // namespace tsturm

#include "tsturm/forward.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace tsturm {

namespace {

constexpr double kPi = std::numbers::pi;

struct State {
    double y;
    double dy;
};

long substeps_for(double length, double lambda, const StepPolicy& policy,
                  long min_steps) {
    if (policy.grid_steps_only) return min_steps;
    const double s = std::sqrt(std::abs(lambda));
    const double h_max = policy.accuracy_constant / std::pow(1.0 + s, 1.25);
    double n = std::ceil(length / h_max);
    if (!(n < static_cast<double>(policy.max_substeps))) {
        std::ostringstream os;
        os << "lambda = " << lambda
           << " needs more than " << policy.max_substeps
           << " fixed RK4 substeps per interval";
        throw numeric_overflow_error(os.str(), lambda);
    }
    return std::max(min_steps, static_cast<long>(n));
}

// One RK4 step for y' = v, v' = (q - lambda) y. w0, w1, w2 are q - lambda at
// the step start, midpoint, and end.
inline State rk4_step(State st, double h, double w0, double w1, double w2) {
    const double k1y = st.dy;
    const double k1v = w0 * st.y;
    const double k2y = st.dy + 0.5 * h * k1v;
    const double k2v = w1 * (st.y + 0.5 * h * k1y);
    const double k3y = st.dy + 0.5 * h * k2v;
    const double k3v = w1 * (st.y + 0.5 * h * k2y);
    const double k4y = st.dy + h * k3v;
    const double k4v = w2 * (st.y + h * k3y);
    st.y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
    st.dy += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    return st;
}

struct Renormalizer {
    double threshold;
    double log_scale = 0;
    std::vector<TraceSample>* recorded_a = nullptr;
    std::vector<TraceSample>* recorded_b = nullptr;

    void apply(State& st, double lambda) {
        if (!std::isfinite(st.y) || !std::isfinite(st.dy)) {
            std::ostringstream os;
            os << "integration produced non-finite values at lambda = "
               << lambda;
            throw numeric_overflow_error(os.str(), lambda);
        }
        const double mag = std::max(std::abs(st.y), std::abs(st.dy));
        if (mag > threshold) {
            st.y /= mag;
            st.dy /= mag;
            log_scale += std::log(mag);
            // keep already-recorded samples on the same scale as the state
            for (auto* rec : {recorded_a, recorded_b}) {
                if (!rec) continue;
                for (auto& sample : *rec) {
                    sample.phi /= mag;
                    sample.dphi /= mag;
                }
            }
        }
    }
};

// Integrates one interval over explicit grid cells, recording at every node.
State integrate_cells(const Potential& q, double lambda,
                      const std::vector<double>& nodes, State st,
                      const StepPolicy& policy, Renormalizer& renorm,
                      std::vector<TraceSample>& out) {
    out.push_back({nodes.front(), st.y, st.dy});
    for (std::size_t c = 0; c + 1 < nodes.size(); ++c) {
        const double t0 = nodes[c];
        const double cell = nodes[c + 1] - t0;
        const long m = substeps_for(cell, lambda, policy, 1);
        const double h = cell / static_cast<double>(m);
        double w_lo = q.evaluate(t0) - lambda;
        for (long j = 0; j < m; ++j) {
            const double ta = t0 + h * static_cast<double>(j);
            const double w_mid = q.evaluate(ta + 0.5 * h) - lambda;
            const double w_hi = q.evaluate(ta + h) - lambda;
            st = rk4_step(st, h, w_lo, w_mid, w_hi);
            renorm.apply(st, lambda);
            w_lo = w_hi;
        }
        out.push_back({nodes[c + 1], st.y, st.dy});
    }
    return st;
}

State cross_gap(const ProblemSpec& spec, double lambda, State at_a1) {
    const double a = spec.domain.a;
    State st;
    st.y = at_a1.y + a * at_a1.dy;
    st.dy = at_a1.dy + a * (spec.q.value_at_a1() - lambda) * st.y;
    return st;
}

// Traceless uniform-substep integration from a precomputed q table holding
// values at substep boundaries and midpoints (2n+1 entries).
State integrate_table(const std::vector<double>& q_half, double h, long n,
                      double lambda, State st, Renormalizer& renorm) {
    for (long j = 0; j < n; ++j) {
        st = rk4_step(st, h, q_half[2 * j] - lambda, q_half[2 * j + 1] - lambda,
                      q_half[2 * j + 2] - lambda);
        renorm.apply(st, lambda);
    }
    return st;
}

// Characteristic-function evaluator with a per-instance q-table cache; the
// table is rebuilt only when the lambda-dependent substep count changes, so
// bisection sweeps reuse it. Instances are not shared across threads.
class TimescaleDelta {
public:
    TimescaleDelta(const ProblemSpec& spec, StepPolicy policy, int cells)
        : spec_(spec), policy_(policy), cells_(std::max(1, cells)) {}

    double operator()(double lambda) {
        prepare(lambda);
        Renormalizer renorm{policy_.renorm_threshold};
        State st{1.0, spec_.h};
        st = integrate_table(q_left_, h_left_, n_left_, lambda, st, renorm);
        st = cross_gap(spec_, lambda, st);
        st = integrate_table(q_right_, h_right_, n_right_, lambda, st, renorm);
        return st.dy + spec_.H * st.y;
    }

private:
    void prepare(double lambda) {
        const long nl =
            substeps_for(spec_.domain.a1, lambda, policy_, cells_);
        const long nr = substeps_for(spec_.domain.l - spec_.domain.a2, lambda,
                                     policy_, cells_);
        if (nl == n_left_ && nr == n_right_) return;
        n_left_ = nl;
        n_right_ = nr;
        fill_table(q_left_, 0.0, spec_.domain.a1, nl, h_left_);
        fill_table(q_right_, spec_.domain.a2, spec_.domain.l, nr, h_right_);
    }

    void fill_table(std::vector<double>& q_half, double lo, double hi, long n,
                    double& h_out) {
        h_out = (hi - lo) / static_cast<double>(n);
        q_half.resize(2 * n + 1);
        for (long j = 0; j <= 2 * n; ++j) {
            q_half[j] =
                spec_.q.evaluate(lo + 0.5 * h_out * static_cast<double>(j));
        }
    }

    ProblemSpec spec_;
    StepPolicy policy_;
    int cells_;
    long n_left_ = -1, n_right_ = -1;
    double h_left_ = 0, h_right_ = 0;
    std::vector<double> q_left_, q_right_;
};

} // namespace

SolutionTrace shoot_with_initial(const ProblemSpec& spec, double lambda,
                                 const Grid& grid, double y0, double dy0,
                                 const StepPolicy& policy) {
    validate_grid(spec.domain, grid);
    SolutionTrace trace;
    trace.lambda = lambda;
    Renormalizer renorm{policy.renorm_threshold};
    renorm.recorded_a = &trace.left;
    renorm.recorded_b = &trace.right;

    State st{y0, dy0};
    st = integrate_cells(spec.q, lambda, grid.left, st, policy, renorm,
                         trace.left);
    st = cross_gap(spec, lambda, st);
    st = integrate_cells(spec.q, lambda, grid.right, st, policy, renorm,
                         trace.right);
    trace.log_scale = renorm.log_scale;
    return trace;
}

SolutionTrace shoot(const ProblemSpec& spec, double lambda, const Grid& grid,
                    const StepPolicy& policy) {
    return shoot_with_initial(spec, lambda, grid, 1.0, spec.h, policy);
}

double characteristic(const ProblemSpec& spec, double lambda,
                      const StepPolicy& policy, int cells) {
    TimescaleDelta delta(spec, policy, cells);
    return delta(lambda);
}

double closed_form_char_zero_potential(const TimeScaleDomain& domain,
                                       double lambda) {
    if (lambda < 0) {
        throw structural_error(
            "closed-form zero-potential characteristic requires lambda >= 0");
    }
    const double s = std::sqrt(lambda);
    const double a = domain.a;
    const double r = domain.l - domain.a2;
    const double y1 = std::cos(s * domain.a1);
    const double d1 = -s * std::sin(s * domain.a1);
    const double y2 = y1 + a * d1;
    const double d2 = d1 - a * lambda * y2;
    return -s * y2 * std::sin(s * r) + d2 * std::cos(s * r);
}

double characteristic_scale(const TimeScaleDomain& domain, double H,
                            double lambda) {
    return (1.0 + domain.a * domain.a) *
           std::pow(1.0 + std::abs(lambda), 1.5) * (1.0 + std::abs(H));
}

// ---------------------------------------------------------------------------
// Volterra integral equation on the left interval
// ---------------------------------------------------------------------------

namespace {

// Cumulative integral of uniformly sampled values, 4th order: Simpson pairs
// for even prefixes, quadratic end-panels for odd ones.
void cumulative_integral(const std::vector<double>& v, double h,
                         std::vector<double>& out) {
    const std::size_t n = v.size();
    out.assign(n, 0.0);
    if (n < 2) return;
    if (n == 2) {
        out[1] = 0.5 * h * (v[0] + v[1]);
        return;
    }
    out[1] = h / 12.0 * (5.0 * v[0] + 8.0 * v[1] - v[2]);
    for (std::size_t i = 2; i < n; ++i) {
        if (i % 2 == 0) {
            out[i] = out[i - 2] + h / 3.0 * (v[i - 2] + 4.0 * v[i - 1] + v[i]);
        } else {
            out[i] =
                out[i - 1] + h / 12.0 * (-v[i - 2] + 8.0 * v[i - 1] + 5.0 * v[i]);
        }
    }
}

// Picard iteration for phi on [0, t_end] over a uniform fine grid.
std::vector<double> picard_profile(const ProblemSpec& spec, double lambda,
                                   const std::vector<double>& t,
                                   const PicardOptions& opts) {
    if (!(lambda > 0)) {
        throw structural_error(
            "integral-equation evaluation requires lambda > 0");
    }
    const double s = std::sqrt(lambda);
    const std::size_t n = t.size();
    const double h = t.size() > 1 ? t[1] - t[0] : 0.0;

    std::vector<double> base(n), q_cos(n), q_sin(n);
    for (std::size_t i = 0; i < n; ++i) {
        base[i] = std::cos(s * t[i]) + spec.h / s * std::sin(s * t[i]);
        const double qv = spec.q.evaluate(t[i]);
        q_cos[i] = qv * std::cos(s * t[i]);
        q_sin[i] = qv * std::sin(s * t[i]);
    }

    std::vector<double> phi = base, next(n), fc(n), fs(n), ic, is;
    for (int iter = 0; iter < opts.max_iterations; ++iter) {
        for (std::size_t i = 0; i < n; ++i) {
            fc[i] = q_cos[i] * phi[i];
            fs[i] = q_sin[i] * phi[i];
        }
        cumulative_integral(fc, h, ic);
        cumulative_integral(fs, h, is);
        double diff = 0.0, amp = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            next[i] = base[i] + (std::sin(s * t[i]) * ic[i] -
                                 std::cos(s * t[i]) * is[i]) /
                                    s;
            diff = std::max(diff, std::abs(next[i] - phi[i]));
            amp = std::max(amp, std::abs(next[i]));
        }
        phi.swap(next);
        if (diff <= opts.tolerance * (1.0 + amp)) return phi;
    }
    std::ostringstream os;
    os << "Picard iteration did not converge within " << opts.max_iterations
       << " iterations at lambda = " << lambda;
    throw convergence_error(os.str());
}

} // namespace

double phi_via_integral_equation(const ProblemSpec& spec, double lambda,
                                 double t, const PicardOptions& opts) {
    const double slack = 1e-12 * (1.0 + spec.domain.l);
    if (t < -slack || t > spec.domain.a1 + slack) {
        throw timescale_point_error(
            "integral-equation evaluation point must lie in [0, a1]");
    }
    t = std::clamp(t, 0.0, spec.domain.a1);
    if (t == 0.0) return 1.0;
    const int panels = std::max(2, opts.panels - opts.panels % 2);
    std::vector<double> nodes(panels + 1);
    for (int i = 0; i <= panels; ++i) {
        nodes[i] = t * static_cast<double>(i) / panels;
    }
    return picard_profile(spec, lambda, nodes, opts).back();
}

std::vector<double> phi_profile_via_integral_equation(
    const ProblemSpec& spec, double lambda, std::span<const double> nodes,
    int refine, const PicardOptions& opts) {
    if (nodes.size() < 2 || nodes.front() != 0.0) {
        throw structural_error("profile nodes must start at 0");
    }
    const std::size_t cells = nodes.size() - 1;
    const double mean_cell = nodes.back() / static_cast<double>(cells);
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        if (std::abs(nodes[i + 1] - nodes[i] - mean_cell) >
            1e-9 * mean_cell) {
            throw structural_error("profile nodes must be uniform");
        }
    }
    refine = std::max(1, refine + refine % 2);
    std::vector<double> fine(cells * refine + 1);
    for (std::size_t i = 0; i < fine.size(); ++i) {
        fine[i] = nodes.back() * static_cast<double>(i) /
                  static_cast<double>(fine.size() - 1);
    }
    std::vector<double> full = picard_profile(spec, lambda, fine, opts);
    std::vector<double> at_nodes(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        at_nodes[i] = full[i * refine];
    }
    return at_nodes;
}

// ---------------------------------------------------------------------------
// Eigenvalue search
// ---------------------------------------------------------------------------

namespace {

double bisect_bracket(const DeltaFn& f, double lo, double hi, double f_lo,
                      double rel_width) {
    const bool lo_negative = f_lo < 0;
    for (int it = 0; it < 220; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (hi - lo <= rel_width * (1.0 + std::abs(mid))) return mid;
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm < 0) == lo_negative) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

struct ScanChunk {
    std::vector<double> lambdas;
    std::vector<double> values;
};

void evaluate_chunk(const DeltaFactory& factory, ScanChunk& chunk,
                    bool parallel) {
    const int n = static_cast<int>(chunk.lambdas.size());
    chunk.values.resize(n);
    std::exception_ptr failure = nullptr;
#ifdef _OPENMP
#pragma omp parallel if (parallel)
    {
        DeltaFn delta = factory();
#pragma omp for schedule(static)
        for (int i = 0; i < n; ++i) {
            try {
                chunk.values[i] = delta(chunk.lambdas[i]);
            } catch (...) {
#pragma omp critical
                if (!failure) failure = std::current_exception();
            }
        }
    }
#else
    (void)parallel;
    DeltaFn delta = factory();
    for (int i = 0; i < n; ++i) {
        try {
            chunk.values[i] = delta(chunk.lambdas[i]);
        } catch (...) {
            if (!failure) failure = std::current_exception();
        }
    }
#endif
    if (failure) std::rethrow_exception(failure);
}

} // namespace

std::vector<double> find_characteristic_roots(const DeltaFactory& factory,
                                              int n_max,
                                              const RootScanParams& params) {
    if (n_max < 1) throw structural_error("root count must be >= 1");
    if (!(params.s_step > 0) || !(params.negative_step > 0)) {
        throw structural_error("scan steps must be positive");
    }

    // Scan node list in increasing lambda: [lambda_floor, 0) stepped in
    // lambda, then lambda = s^2 for s in [0, s_ceiling] stepped in s, with
    // any extra seed points merged in.
    std::vector<double> nodes;
    for (double lam = params.lambda_floor; lam < -1e-300;
         lam += params.negative_step) {
        nodes.push_back(lam);
    }
    std::vector<double> s_nodes;
    for (double s = 0.0; s <= params.s_ceiling + 0.5 * params.s_step;
         s += params.s_step) {
        s_nodes.push_back(s);
    }
    for (double seed : params.seed_s) {
        if (seed > 0 && seed < params.s_ceiling) s_nodes.push_back(seed);
    }
    std::sort(s_nodes.begin(), s_nodes.end());
    for (double s : s_nodes) nodes.push_back(s * s);
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());

    std::vector<double> exact_roots;
    std::vector<std::pair<double, double>> brackets; // lo, hi
    std::vector<double> bracket_flo;

    // Evaluate in chunks so the scan can stop early once enough sign changes
    // are known; chunking does not change any computed value.
    const std::size_t chunk_size = 64;
    double prev_lambda = 0, prev_value = 0;
    bool have_prev = false;
    std::size_t pos = 0;
    while (pos < nodes.size()) {
        ScanChunk chunk;
        const std::size_t end = std::min(nodes.size(), pos + chunk_size);
        chunk.lambdas.assign(nodes.begin() + pos, nodes.begin() + end);
        evaluate_chunk(factory, chunk, params.parallel);
        for (std::size_t i = 0; i < chunk.lambdas.size(); ++i) {
            const double lam = chunk.lambdas[i];
            const double val = chunk.values[i];
            if (val == 0.0) {
                exact_roots.push_back(lam);
            } else if (have_prev && prev_value != 0.0 &&
                       (prev_value < 0) != (val < 0)) {
                brackets.emplace_back(prev_lambda, lam);
                bracket_flo.push_back(prev_value);
            }
            prev_lambda = lam;
            prev_value = val;
            have_prev = true;
        }
        pos = end;
        if (exact_roots.size() + brackets.size() >=
            static_cast<std::size_t>(n_max) + 2) {
            break;
        }
    }

    std::vector<double> roots(brackets.size());
    std::exception_ptr refine_failure = nullptr;
#ifdef _OPENMP
#pragma omp parallel for if (params.parallel) schedule(dynamic)
#endif
    for (long b = 0; b < static_cast<long>(brackets.size()); ++b) {
        try {
            DeltaFn delta = factory();
            roots[b] =
                bisect_bracket(delta, brackets[b].first, brackets[b].second,
                               bracket_flo[b], params.bracket_rel_width);
        } catch (...) {
#ifdef _OPENMP
#pragma omp critical
#endif
            if (!refine_failure) refine_failure = std::current_exception();
        }
    }
    if (refine_failure) std::rethrow_exception(refine_failure);
    roots.insert(roots.end(), exact_roots.begin(), exact_roots.end());
    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end(),
                            [](double x, double y) {
                                return std::abs(y - x) <=
                                       1e-9 * (1.0 + std::abs(x));
                            }),
                roots.end());

    if (roots.size() < static_cast<std::size_t>(n_max)) {
        std::ostringstream os;
        os << "eigenvalue scan found only " << roots.size() << " of " << n_max
           << " requested roots below the scan ceiling";
        throw incomplete_spectrum_error(os.str(),
                                        static_cast<int>(roots.size()), n_max);
    }
    roots.resize(n_max);
    return roots;
}

RootScanParams default_scan_params(const ProblemSpec& spec, int n_max,
                                   const SearchOptions& opts) {
    RootScanParams params;
    const double r = spec.domain.l - spec.domain.a2;
    params.s_step =
        opts.s_step > 0 ? opts.s_step : kPi / (8.0 * std::max(spec.domain.a1, r));
    params.negative_step = opts.negative_step;
    if (opts.lambda_floor) {
        params.lambda_floor = *opts.lambda_floor;
    } else {
        const double b =
            spec.q.sup_abs() + std::abs(spec.h) + std::abs(spec.H) + 1.0;
        params.lambda_floor = -b * b;
    }
    if (opts.s_ceiling) {
        params.s_ceiling = *opts.s_ceiling;
    } else {
        // asymptotic root density of sin(s a1) cos(s r) is (a1 + r)/pi per
        // unit s; add margin for low-lying irregularity and potential shifts
        const double density = (spec.domain.a1 + r) / kPi;
        params.s_ceiling = (n_max + 6) / density +
                           std::sqrt(spec.q.sup_abs() + 1.0) + 4.0;
    }
    params.bracket_rel_width = opts.bracket_rel_width;
    params.parallel = opts.parallel;
    if (spec.domain.symmetric) {
        for (int n = 1; n <= n_max + 3; ++n) {
            params.seed_s.push_back(
                std::sqrt(asymptotic_eigen_guess(spec.domain, n)));
        }
    }
    return params;
}

SpectralData eigenvalues(const ProblemSpec& spec, int n_max,
                         const SearchOptions& opts) {
    if (n_max < 1) throw structural_error("eigenvalue count must be >= 1");
    const RootScanParams params = default_scan_params(spec, n_max, opts);
    DeltaFactory factory = [&spec, &opts]() -> DeltaFn {
        return TimescaleDelta(spec, opts.policy, opts.solver_cells);
    };
    SpectralData data;
    data.eigenvalues = find_characteristic_roots(factory, n_max, params);
    return data;
}

SolutionTrace eigenfunction(const ProblemSpec& spec, double lambda_n,
                            const Grid& grid, const StepPolicy& policy,
                            double accept_tol) {
    const double value = characteristic(spec, lambda_n, policy);
    const double scale =
        characteristic_scale(spec.domain, spec.H, lambda_n);
    if (std::abs(value) > accept_tol * scale) {
        std::ostringstream os;
        os << "lambda = " << lambda_n
           << " is not near a characteristic root: |Delta| = "
           << std::abs(value) << " exceeds " << accept_tol * scale;
        throw not_an_eigenvalue_error(os.str());
    }
    return shoot(spec, lambda_n, grid, policy);
}

SpectralData extract_data(const ProblemSpec& spec, int n,
                          const ExtractOptions& opts) {
    SpectralData data = eigenvalues(spec, n, opts.search);
    const Grid grid =
        make_uniform_grid(spec.domain, opts.trace_cells, opts.trace_cells);
    data.ratios.reserve(data.eigenvalues.size());
    data.flags.reserve(data.eigenvalues.size());
    for (double lam : data.eigenvalues) {
        const SolutionTrace trace = shoot(spec, lam, grid, opts.search.policy);
        double amplitude = 0.0;
        for (const auto& sample : trace.left) {
            amplitude = std::max(amplitude, std::abs(sample.phi));
        }
        const double denom = trace.phi_a1();
        const bool degenerate =
            std::abs(denom) < opts.ratio_denominator_tol * amplitude;
        data.flags.push_back(degenerate);
        // flagged entries keep the raw quotient so downstream penalties stay
        // finite; only an exact zero denominator is replaced
        data.ratios.push_back(denom == 0.0 ? 0.0 : trace.dphi_a1() / denom);
    }
    return data;
}

// ---------------------------------------------------------------------------
// Asymptotics
// ---------------------------------------------------------------------------

double asymptotic_phi(const TimeScaleDomain& domain, double h, double lambda,
                      double t) {
    if (!(lambda > 0)) {
        throw structural_error("asymptotic form requires lambda > 0");
    }
    const double slack = 1e-12 * (1.0 + domain.l);
    if (!domain.contains(t, slack)) {
        throw timescale_point_error(
            "asymptotic evaluation point is not in the time scale");
    }
    const double s = std::sqrt(lambda);
    if (t <= domain.a1 + slack) {
        return std::cos(s * t) + h / s * std::sin(s * t);
    }
    return domain.a * domain.a * lambda * std::sin(s * domain.a1) *
           std::sin(s * (t - domain.a2));
}

double asymptotic_char(const TimeScaleDomain& domain, double lambda) {
    if (!(lambda > 0)) {
        throw structural_error("asymptotic form requires lambda > 0");
    }
    const double s = std::sqrt(lambda);
    return domain.a * domain.a * std::pow(lambda, 1.5) *
           std::sin(s * domain.a1) * std::cos(s * (domain.l - domain.a2));
}

double asymptotic_eigen_guess(const TimeScaleDomain& domain, int n) {
    if (!domain.symmetric) {
        throw structural_error(
            "asymptotic eigenvalue seeds require a symmetric domain "
            "(l - a2 == a1)");
    }
    if (n < 1) throw structural_error("eigenvalue index must be >= 1");
    const double root = (n - 1) * kPi / (2.0 * domain.a1);
    return root * root;
}

} // namespace tsturm

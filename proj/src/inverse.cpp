#include "tsturm/inverse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace tsturm {

void InverseConfig::validate() const {
    if (n_basis_left < 0 || n_basis_right < 0 ||
        n_basis_left + n_basis_right < 1) {
        throw structural_error("at least one cosine mode is required");
    }
    if (n_data < n_basis_left + n_basis_right) {
        throw structural_error(
            "n_data must be >= n_basis_left + n_basis_right "
            "(square or overdetermined system)");
    }
    if (!(fd_step > 0)) throw structural_error("fd_step must be positive");
    if (regularization < 0 || residual_tolerance < 0) {
        throw structural_error(
            "regularization and residual tolerance must be nonnegative");
    }
    if (max_iterations < 0) {
        throw structural_error("max_iterations must be nonnegative");
    }
    if (!(damping_initial > 0) || !(damping_increase > 1) ||
        !(damping_decrease > 0) || !(damping_decrease < 1)) {
        throw structural_error("damping parameters out of range");
    }
}

namespace {

// First n_data unflagged target indices, in eigenvalue order.
std::vector<int> used_indices(const SpectralData& target, int n_data) {
    if (target.ratios.size() != target.eigenvalues.size()) {
        throw structural_error("target data is missing interior ratios");
    }
    std::vector<int> idx;
    for (int i = 0; i < target.count() && static_cast<int>(idx.size()) < n_data;
         ++i) {
        const bool flagged =
            !target.flags.empty() && target.flags[static_cast<std::size_t>(i)];
        if (!flagged) idx.push_back(i);
    }
    if (static_cast<int>(idx.size()) < n_data) {
        std::ostringstream os;
        os << "target has only " << idx.size() << " unflagged entries, need "
           << n_data;
        throw structural_error(os.str());
    }
    return idx;
}

Potential coeffs_to_potential(std::span<const double> coeffs,
                              const FixedCoefficients& fixed,
                              const InverseConfig& config) {
    if (static_cast<int>(coeffs.size()) !=
        config.n_basis_left + config.n_basis_right) {
        throw structural_error("coefficient count does not match basis sizes");
    }
    std::vector<double> left(coeffs.begin(),
                             coeffs.begin() + config.n_basis_left);
    std::vector<double> right(coeffs.begin() + config.n_basis_left,
                              coeffs.end());
    return Potential::from_cosine(fixed.domain, std::move(left),
                                  std::move(right));
}

std::string coeffs_to_string(std::span<const double> coeffs) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        if (i) os << ", ";
        os << coeffs[i];
    }
    os << "]";
    return os.str();
}

} // namespace

std::vector<double> residual(std::span<const double> coeffs,
                             const SpectralData& target,
                             const FixedCoefficients& fixed,
                             const InverseConfig& config) {
    config.validate();
    if (!fixed.domain.symmetric) {
        throw structural_error(
            "reconstruction requires a symmetric domain (a1 + a2 = l)");
    }
    const std::vector<int> idx = used_indices(target, config.n_data);

    SpectralData candidate;
    try {
        ProblemSpec spec(fixed.domain,
                         coeffs_to_potential(coeffs, fixed, config), fixed.h,
                         fixed.H);
        ExtractOptions opts;
        opts.search = config.forward;
        opts.ratio_denominator_tol = config.ratio_denominator_tol;
        candidate = extract_data(spec, idx.back() + 1, opts);
    } catch (const numeric_overflow_error& e) {
        throw numeric_overflow_error(
            std::string(e.what()) + " at coefficients " +
                coeffs_to_string(coeffs),
            e.lambda());
    } catch (const incomplete_spectrum_error& e) {
        throw incomplete_spectrum_error(std::string(e.what()) +
                                            " at coefficients " +
                                            coeffs_to_string(coeffs),
                                        e.found(), e.requested());
    }

    std::vector<double> r(2 * idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
        const int i = idx[k];
        const double lt = target.eigenvalues[i];
        const double rt = target.ratios[i];
        r[k] = (candidate.eigenvalues[i] - lt) / (1.0 + std::abs(lt));
        r[idx.size() + k] =
            (candidate.ratios[i] - rt) / (1.0 + std::abs(rt));
    }
    return r;
}

Eigen::MatrixXd jacobian(std::span<const double> coeffs,
                         const SpectralData& target,
                         const FixedCoefficients& fixed,
                         const InverseConfig& config) {
    config.validate();
    const int k = static_cast<int>(coeffs.size());
    const int m = 2 * config.n_data;
    Eigen::MatrixXd J(m, k);
    std::exception_ptr failure = nullptr;

#ifdef _OPENMP
#pragma omp parallel for if (config.forward.parallel) schedule(dynamic)
#endif
    for (int col = 0; col < k; ++col) {
        try {
            std::vector<double> c(coeffs.begin(), coeffs.end());
            c[col] += config.fd_step;
            const std::vector<double> rp = residual(c, target, fixed, config);
            c[col] -= 2.0 * config.fd_step;
            const std::vector<double> rm = residual(c, target, fixed, config);
            for (int row = 0; row < m; ++row) {
                J(row, col) = (rp[row] - rm[row]) / (2.0 * config.fd_step);
            }
        } catch (...) {
#ifdef _OPENMP
#pragma omp critical
#endif
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return J;
}

ReconstructionReport reconstruct(const SpectralData& target,
                                 const FixedCoefficients& fixed,
                                 const InverseConfig& config) {
    config.validate();
    const int k = config.n_basis_left + config.n_basis_right;
    const double reg = config.regularization;

    Eigen::VectorXd theta = Eigen::VectorXd::Zero(k);
    auto eval = [&](const Eigen::VectorXd& c) {
        std::vector<double> cv(c.data(), c.data() + c.size());
        std::vector<double> rv = residual(cv, target, fixed, config);
        return Eigen::Map<Eigen::VectorXd>(rv.data(),
                                           static_cast<long>(rv.size()))
            .eval();
    };

    ReconstructionReport report;
    Eigen::VectorXd r = eval(theta);
    double objective = r.squaredNorm() + reg * theta.squaredNorm();
    report.residual_history.push_back(r.norm());
    report.objective_history.push_back(objective);

    double mu = config.damping_initial;
    bool converged = r.norm() <= config.residual_tolerance;
    bool stalled = false;
    for (int iter = 0; iter < config.max_iterations && !converged && !stalled;
         ++iter) {
        const Eigen::MatrixXd J = jacobian(
            std::span<const double>(theta.data(),
                                    static_cast<std::size_t>(theta.size())),
            target, fixed, config);
        const Eigen::MatrixXd JtJ = J.transpose() * J;
        const Eigen::VectorXd grad = J.transpose() * r + reg * theta;

        bool accepted = false;
        while (!accepted) {
            Eigen::MatrixXd lhs = JtJ;
            lhs.diagonal().array() += reg + mu;
            const Eigen::VectorXd step = lhs.ldlt().solve(-grad);
            const Eigen::VectorXd trial = theta + step;
            bool trial_ok = true;
            Eigen::VectorXd r_trial;
            try {
                r_trial = eval(trial);
            } catch (const numeric_overflow_error&) {
                trial_ok = false;
            } catch (const incomplete_spectrum_error&) {
                trial_ok = false;
            }
            const double trial_objective =
                trial_ok ? r_trial.squaredNorm() + reg * trial.squaredNorm()
                         : std::numeric_limits<double>::infinity();
            if (trial_ok && trial_objective < objective) {
                accepted = true;
                const double step_size = step.norm();
                theta = trial;
                r = r_trial;
                objective = trial_objective;
                report.iterations = iter + 1;
                report.residual_history.push_back(r.norm());
                report.objective_history.push_back(objective);
                mu = std::max(mu * config.damping_decrease, 1e-14);
                if (r.norm() <= config.residual_tolerance) converged = true;
                if (step_size <= 1e-13 * (1.0 + theta.norm())) {
                    stalled = true; // step collapse
                }
            } else {
                mu *= config.damping_increase;
                if (mu > 1e14) {
                    stalled = true; // no acceptable step left
                    break;
                }
            }
        }
    }

    report.converged = converged;
    report.final_residual = r.norm();
    const int n = config.n_data;
    report.eigenvalue_residual = r.head(n).norm();
    report.ratio_residual = r.tail(n).norm();
    report.coeffs_left.assign(theta.data(), theta.data() + config.n_basis_left);
    report.coeffs_right.assign(theta.data() + config.n_basis_left,
                               theta.data() + k);
    report.recovered = Potential::from_cosine(fixed.domain, report.coeffs_left,
                                              report.coeffs_right);
    const Eigen::MatrixXd J_final = jacobian(
        std::span<const double>(theta.data(),
                                static_cast<std::size_t>(theta.size())),
        target, fixed, config);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(J_final);
    report.singular_values.assign(
        svd.singularValues().data(),
        svd.singularValues().data() + svd.singularValues().size());
    return report;
}

double uniqueness_gap(const SpectralData& a, const SpectralData& b) {
    if (a.count() != b.count()) {
        throw structural_error("spectral data counts differ");
    }
    const bool a_has_ratios = !a.ratios.empty();
    const bool b_has_ratios = !b.ratios.empty();
    if (a_has_ratios != b_has_ratios) {
        throw structural_error(
            "one data set carries interior ratios and the other does not");
    }
    double gap = 0.0;
    for (int i = 0; i < a.count(); ++i) {
        const auto flagged = [&](const SpectralData& d) {
            return !d.flags.empty() && d.flags[static_cast<std::size_t>(i)];
        };
        if (flagged(a) || flagged(b)) continue;
        const double la = a.eigenvalues[i];
        const double lb = b.eigenvalues[i];
        gap = std::max(gap, std::abs(la - lb) /
                                (1.0 + 0.5 * (std::abs(la) + std::abs(lb))));
        if (a_has_ratios) {
            const double ra = a.ratios[i];
            const double rb = b.ratios[i];
            gap = std::max(gap,
                           std::abs(ra - rb) /
                               (1.0 + 0.5 * (std::abs(ra) + std::abs(rb))));
        }
    }
    return gap;
}

} // namespace tsturm

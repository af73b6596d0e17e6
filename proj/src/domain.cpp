#include "tsturm/domain.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace tsturm {

namespace {

void require_finite(double x, const char* name) {
    if (!std::isfinite(x)) {
        std::ostringstream os;
        os << name << " must be finite, got " << x;
        throw structural_error(os.str());
    }
}

double edge_slack(const TimeScaleDomain& d) {
    return 1e-12 * (1.0 + std::abs(d.l));
}

} // namespace

bool TimeScaleDomain::contains(double t, double slack) const {
    if (t >= -slack && t <= a1 + slack) return true;
    if (t >= a2 - slack && t <= l + slack) return true;
    return false;
}

TimeScaleDomain make_domain(double a1, double a2, double l) {
    require_finite(a1, "a1");
    require_finite(a2, "a2");
    require_finite(l, "l");
    if (!(a1 > 0)) throw structural_error("domain ordering violated: 0 < a1 fails");
    if (!(a1 < a2)) throw structural_error("domain ordering violated: a1 < a2 fails");
    if (!(a2 < l)) throw structural_error("domain ordering violated: a2 < l fails");
    TimeScaleDomain d;
    d.a1 = a1;
    d.a2 = a2;
    d.l = l;
    d.a = a2 - a1;
    d.symmetric = std::abs((l - a2) - a1) <= 1e-12 * l;
    return d;
}

JumpInfo forward_jump(const TimeScaleDomain& domain, double t) {
    const double slack = edge_slack(domain);
    if (!domain.contains(t, slack)) {
        std::ostringstream os;
        os << "t = " << t << " is not in the time scale [0," << domain.a1
           << "] u [" << domain.a2 << "," << domain.l << "]";
        throw timescale_point_error(os.str());
    }
    if (std::abs(t - domain.a1) <= slack) return {domain.a2, domain.a};
    if (t >= domain.l - slack) return {domain.l, 0.0};
    return {t, 0.0};
}

Potential::Potential(const TimeScaleDomain& d, PotentialForm f,
                     std::vector<double> left, std::vector<double> right)
    : domain_(d), form_(f), left_(std::move(left)), right_(std::move(right)) {
    for (const auto* part : {&left_, &right_}) {
        for (double v : *part) {
            if (!std::isfinite(v)) {
                throw structural_error("potential values must be finite");
            }
        }
    }
    if (form_ == PotentialForm::grid) {
        if (left_.size() < 2 || right_.size() < 2) {
            throw structural_error(
                "grid potential requires >= 2 points per interval");
        }
    }
}

Potential Potential::zero(const TimeScaleDomain& domain) {
    return from_cosine(domain, {}, {});
}

Potential Potential::from_grid(const TimeScaleDomain& domain,
                               std::vector<double> left_samples,
                               std::vector<double> right_samples) {
    return Potential(domain, PotentialForm::grid, std::move(left_samples),
                     std::move(right_samples));
}

Potential Potential::from_cosine(const TimeScaleDomain& domain,
                                 std::vector<double> left_coeffs,
                                 std::vector<double> right_coeffs) {
    return Potential(domain, PotentialForm::cosine, std::move(left_coeffs),
                     std::move(right_coeffs));
}

namespace {

// Local Lagrange interpolation on a uniform grid: cubic through the four
// nearest nodes, one-sided at the ends so the stencil never leaves the
// interval. Degenerates to the full polynomial for fewer than 4 samples.
double interpolate_uniform(const std::vector<double>& v, double start,
                           double len, double x) {
    const int n = static_cast<int>(v.size());
    const double step = len / (n - 1);
    double u = (x - start) / step; // node coordinate
    u = std::clamp(u, 0.0, static_cast<double>(n - 1));

    int stencil = std::min(4, n);
    int i0 = static_cast<int>(std::floor(u)) - (stencil - 1) / 2;
    i0 = std::clamp(i0, 0, n - stencil);

    double result = 0.0;
    for (int j = 0; j < stencil; ++j) {
        double w = 1.0;
        for (int k = 0; k < stencil; ++k) {
            if (k == j) continue;
            w *= (u - (i0 + k)) / static_cast<double>(j - k);
        }
        result += w * v[i0 + j];
    }
    return result;
}

double cosine_sum(const std::vector<double>& c, double start, double len,
                  double x) {
    const double pi = 3.14159265358979323846;
    double arg = pi * (x - start) / len;
    double sum = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) {
        sum += c[k] * std::cos(static_cast<double>(k) * arg);
    }
    return sum;
}

} // namespace

double Potential::evaluate(double t) const {
    const double slack = edge_slack(domain_);
    bool on_left = t >= -slack && t <= domain_.a1 + slack;
    bool on_right = t >= domain_.a2 - slack && t <= domain_.l + slack;
    if (!on_left && !on_right) {
        std::ostringstream os;
        os << "potential evaluated at t = " << t
           << " which is not in the time scale";
        throw timescale_point_error(os.str());
    }
    double start = on_left ? 0.0 : domain_.a2;
    double len = on_left ? domain_.a1 : (domain_.l - domain_.a2);
    double x = std::clamp(t, start, start + len);
    const std::vector<double>& part = on_left ? left_ : right_;
    if (part.empty()) return 0.0; // empty cosine part means q == 0
    if (form_ == PotentialForm::grid) {
        return interpolate_uniform(part, start, len, x);
    }
    return cosine_sum(part, start, len, x);
}

double Potential::value_at_a1() const { return evaluate(domain_.a1); }
double Potential::value_at_a2() const { return evaluate(domain_.a2); }

double Potential::sup_abs() const {
    double bound = 0.0;
    if (form_ == PotentialForm::grid) {
        for (const auto* part : {&left_, &right_}) {
            for (double v : *part) bound = std::max(bound, std::abs(v));
        }
    } else {
        for (const auto* part : {&left_, &right_}) {
            double sum = 0.0;
            for (double c : *part) sum += std::abs(c);
            bound = std::max(bound, sum);
        }
    }
    return bound;
}

double evaluate_potential(const Potential& q, double t) { return q.evaluate(t); }

ProblemSpec::ProblemSpec(TimeScaleDomain d, Potential potential, double h_in,
                         double H_in)
    : domain(d), q(std::move(potential)), h(h_in), H(H_in) {
    if (!std::isfinite(h) || !std::isfinite(H)) {
        throw structural_error("boundary constants h, H must be finite");
    }
    if (q.domain().a1 != domain.a1 || q.domain().a2 != domain.a2 ||
        q.domain().l != domain.l) {
        throw structural_error("potential domain does not match problem domain");
    }
}

Grid make_uniform_grid(const TimeScaleDomain& domain, int cells_left,
                       int cells_right) {
    if (cells_left < 1 || cells_right < 1) {
        throw structural_error("grid needs at least one cell per interval");
    }
    Grid g;
    g.left.resize(cells_left + 1);
    g.right.resize(cells_right + 1);
    for (int i = 0; i <= cells_left; ++i) {
        g.left[i] = domain.a1 * static_cast<double>(i) / cells_left;
    }
    g.left.front() = 0.0;
    g.left.back() = domain.a1;
    const double rlen = domain.l - domain.a2;
    for (int i = 0; i <= cells_right; ++i) {
        g.right[i] = domain.a2 + rlen * static_cast<double>(i) / cells_right;
    }
    g.right.front() = domain.a2;
    g.right.back() = domain.l;
    g.step_left = domain.a1 / cells_left;
    g.step_right = rlen / cells_right;
    return g;
}

void validate_grid(const TimeScaleDomain& domain, const Grid& grid) {
    auto check = [](const std::vector<double>& nodes, double lo, double hi,
                    const char* which) {
        if (nodes.size() < 2) {
            throw structural_error(std::string(which) +
                                   " grid needs >= 2 nodes");
        }
        if (nodes.front() != lo || nodes.back() != hi) {
            throw structural_error(std::string(which) +
                                   " grid must include the interval endpoints");
        }
        for (std::size_t i = 1; i < nodes.size(); ++i) {
            if (!(nodes[i] > nodes[i - 1])) {
                throw structural_error(std::string(which) +
                                       " grid nodes must be strictly increasing");
            }
        }
    };
    check(grid.left, 0.0, domain.a1, "left");
    check(grid.right, domain.a2, domain.l, "right");
}

} // namespace tsturm

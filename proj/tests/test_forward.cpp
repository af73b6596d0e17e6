#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "tsturm/domain.hpp"
#include "tsturm/forward.hpp"

using namespace tsturm;

namespace {

constexpr double kPi = std::numbers::pi;

// Frozen with an independent high-precision bisection of the closed-form
// characteristic -s sin 2s - s^2 cos 2s + (s^3/2) sin 2s for the unit
// symmetric domain (1,2,3) with q = 0, h = H = 0.
constexpr double kLambda2 = 1.0216494160500208;
constexpr double kLambda3 = 4.3959153104415311;

ProblemSpec unit_zero_spec() {
    const TimeScaleDomain d = make_domain(1, 2, 3);
    return ProblemSpec(d, Potential::zero(d), 0.0, 0.0);
}

Potential random_smooth(const TimeScaleDomain& d, unsigned seed,
                        double amplitude = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coeff(-1.0, 1.0);
    std::vector<double> left(4), right(4);
    for (int k = 0; k < 4; ++k) {
        left[k] = amplitude * coeff(rng) / ((k + 1) * (k + 1));
        right[k] = amplitude * coeff(rng) / ((k + 1) * (k + 1));
    }
    return Potential::from_cosine(d, left, right);
}

} // namespace

TEST_CASE("shoot reproduces the cosine solution on the left interval") {
    const ProblemSpec spec = unit_zero_spec();
    const Grid grid = make_uniform_grid(spec.domain, 64, 64);
    const double lambda = kPi * kPi / 4.0;
    const SolutionTrace trace = shoot(spec, lambda, grid);
    CHECK(trace.phi_0() == 1.0);
    CHECK(trace.dphi_0() == 0.0);
    CHECK(std::abs(trace.phi_a1()) < 1e-10);
    CHECK(trace.dphi_a1() == doctest::Approx(-kPi / 2).epsilon(1e-10));
}

TEST_CASE("gap crossing matches the closed form for arbitrary s") {
    const ProblemSpec spec = unit_zero_spec();
    const Grid grid = make_uniform_grid(spec.domain, 32, 32);
    for (double s : {0.7, 1.3, 2.0, 3.9}) {
        const SolutionTrace trace = shoot(spec, s * s, grid);
        const double expected_phi_a2 = std::cos(s) - s * std::sin(s);
        const double expected_dphi_a2 =
            -s * std::sin(s) - s * s * expected_phi_a2;
        CHECK(trace.phi_a2() ==
              doctest::Approx(expected_phi_a2).epsilon(1e-9));
        CHECK(trace.dphi_a2() ==
              doctest::Approx(expected_dphi_a2).epsilon(1e-9));
    }
}

TEST_CASE("lambda = 0 gives the constant solution across the whole scale") {
    const ProblemSpec spec = unit_zero_spec();
    const Grid grid = make_uniform_grid(spec.domain, 16, 16);
    const SolutionTrace trace = shoot(spec, 0.0, grid);
    for (const auto& part : {trace.left, trace.right}) {
        for (const auto& sample : part) {
            CHECK(sample.phi == 1.0);
            CHECK(sample.dphi == 0.0);
        }
    }
    CHECK(characteristic(spec, 0.0) == 0.0);
}

TEST_CASE("matching and slope-jump relations hold along every trace") {
    const TimeScaleDomain d = make_domain(0.8, 1.9, 3.4);
    const ProblemSpec spec(d, random_smooth(d, 21), 0.3, -0.4);
    const Grid grid = make_uniform_grid(d, 48, 48);
    std::mt19937_64 rng(22);
    std::uniform_real_distribution<double> lam(-3.0, 40.0);
    for (int i = 0; i < 25; ++i) {
        const double lambda = lam(rng);
        const SolutionTrace tr = shoot(spec, lambda, grid);
        const double scale =
            1.0 + std::abs(tr.phi_a1()) + std::abs(tr.dphi_a1()) +
            std::abs(tr.phi_a2()) + std::abs(tr.dphi_a2());
        CHECK(std::abs(d.a * tr.dphi_a1() - (tr.phi_a2() - tr.phi_a1())) <=
              1e-12 * scale);
        CHECK(std::abs(tr.dphi_a2() - tr.dphi_a1() -
                       d.a * (spec.q.value_at_a1() - lambda) * tr.phi_a2()) <=
              1e-12 * scale);
    }
}

TEST_CASE("characteristic matches the frozen closed-form values") {
    const ProblemSpec spec = unit_zero_spec();
    const double s_half_pi = kPi / 2;
    CHECK(characteristic(spec, s_half_pi * s_half_pi) ==
          doctest::Approx(2.4674011002723397).epsilon(1e-9));
    CHECK(characteristic(spec, 4.0) ==
          doctest::Approx(1.1009694928385912).epsilon(1e-9));
}

TEST_CASE("closed-form oracle values and domain checks") {
    const TimeScaleDomain d = make_domain(1, 2, 3);
    CHECK(closed_form_char_zero_potential(d, 0.0) == 0.0);
    CHECK(closed_form_char_zero_potential(d, kPi * kPi / 4) ==
          doctest::Approx(2.4674011002723397).epsilon(1e-12));
    CHECK(closed_form_char_zero_potential(d, 4.0) ==
          doctest::Approx(1.1009694928385912).epsilon(1e-12));
    CHECK(closed_form_char_zero_potential(d, 4.0) ==
          doctest::Approx(2 * std::sin(4.0) - 4 * std::cos(4.0))
              .epsilon(1e-14));
    CHECK_THROWS_AS(closed_form_char_zero_potential(d, -1.0),
                    structural_error);
}

TEST_CASE("shooter agrees with the closed form over an s sweep") {
    const ProblemSpec spec = unit_zero_spec();
    for (int i = 0; i <= 60; ++i) {
        const double s = 30.0 * i / 60.0;
        const double lambda = s * s;
        const double numeric = characteristic(spec, lambda);
        const double exact =
            closed_form_char_zero_potential(spec.domain, lambda);
        CHECK(std::abs(numeric - exact) <=
              1e-9 * (1.0 + std::pow(lambda, 1.5)));
    }
}

TEST_CASE("closed form composes correctly on a non-symmetric domain") {
    const TimeScaleDomain d = make_domain(0.8, 1.7, 3.1);
    const ProblemSpec spec(d, Potential::zero(d), 0.0, 0.0);
    for (double s : {0.6, 1.3, 2.8}) {
        const double lambda = s * s;
        CHECK(characteristic(spec, lambda) ==
              doctest::Approx(closed_form_char_zero_potential(d, lambda))
                  .epsilon(1e-9));
    }
}

TEST_CASE("first three eigenvalues of the unit zero-potential problem") {
    const ProblemSpec spec = unit_zero_spec();
    const SpectralData data = eigenvalues(spec, 3);
    REQUIRE(data.count() == 3);
    CHECK(std::abs(data.eigenvalues[0]) < 1e-10);
    CHECK(data.eigenvalues[1] == doctest::Approx(kLambda2).epsilon(1e-8));
    CHECK(data.eigenvalues[2] == doctest::Approx(kLambda3).epsilon(1e-8));
}

TEST_CASE("eigenvalues are strictly increasing and simple") {
    const TimeScaleDomain d = make_domain(1, 2, 3);
    const ProblemSpec spec(d, random_smooth(d, 31), 0.2, 0.1);
    const SpectralData data = eigenvalues(spec, 10);
    REQUIRE(data.count() == 10);
    for (int i = 1; i < 10; ++i) {
        CHECK(data.eigenvalues[i] > data.eigenvalues[i - 1]);
    }
    // simplicity: the characteristic changes sign across each root
    for (double lam : data.eigenvalues) {
        const double w = 1e-6 * (1.0 + std::abs(lam));
        CHECK(characteristic(spec, lam - w) * characteristic(spec, lam + w) <
              0.0);
    }
}

TEST_CASE("scan ceiling is reported as an incomplete spectrum") {
    const ProblemSpec spec = unit_zero_spec();
    SearchOptions opts;
    opts.s_ceiling = 1.0;
    try {
        eigenvalues(spec, 5, opts);
        FAIL("expected incomplete_spectrum_error");
    } catch (const incomplete_spectrum_error& e) {
        CHECK(e.requested() == 5);
        CHECK(e.found() < 5);
        CHECK(std::string(e.what()).find("found only") != std::string::npos);
    }
}

TEST_CASE("eigenfunction traces satisfy the boundary condition") {
    const ProblemSpec spec = unit_zero_spec();
    const Grid grid = make_uniform_grid(spec.domain, 64, 64);
    const SpectralData data = eigenvalues(spec, 3);

    const SolutionTrace ground = eigenfunction(spec, data.eigenvalues[0], grid);
    for (const auto& sample : ground.left) CHECK(sample.phi == 1.0);
    for (const auto& sample : ground.right) CHECK(sample.phi == 1.0);

    for (double lam : data.eigenvalues) {
        const SolutionTrace tr = eigenfunction(spec, lam, grid);
        const double residual = std::abs(tr.dphi_l() + spec.H * tr.phi_l());
        CHECK(residual <=
              1e-7 * characteristic_scale(spec.domain, spec.H, lam));
    }

    // second eigenfunction is cos(s t) on the left interval
    const double s2 = std::sqrt(data.eigenvalues[1]);
    const SolutionTrace tr2 = eigenfunction(spec, data.eigenvalues[1], grid);
    for (const auto& sample : tr2.left) {
        CHECK(sample.phi == doctest::Approx(std::cos(s2 * sample.t))
                                .epsilon(1e-8));
    }

    CHECK_THROWS_AS(eigenfunction(spec, 0.5, grid), not_an_eigenvalue_error);
}

TEST_CASE("interior ratio equals -s tan(s a1) for the zero potential") {
    const ProblemSpec spec = unit_zero_spec();
    const Grid grid = make_uniform_grid(spec.domain, 64, 64);
    const SolutionTrace tr = shoot(spec, 4.0, grid); // s = 2, not an eigenvalue
    CHECK(tr.dphi_a1() / tr.phi_a1() ==
          doctest::Approx(4.370079726523038).epsilon(1e-9));
}

TEST_CASE("extract_data returns ratios aligned with the spectrum") {
    const ProblemSpec spec = unit_zero_spec();
    const SpectralData eig = eigenvalues(spec, 5);
    const SpectralData full = extract_data(spec, 5);
    REQUIRE(full.count() == 5);
    for (int i = 0; i < 5; ++i) {
        CHECK(full.eigenvalues[i] == eig.eigenvalues[i]);
        CHECK_FALSE(full.flags[i]);
    }
    CHECK(full.ratios[0] == 0.0); // constant eigenfunction
    // ratios match the closed form at the located eigenvalues
    for (int i = 1; i < 5; ++i) {
        const double s = std::sqrt(full.eigenvalues[i]);
        CHECK(full.ratios[i] ==
              doctest::Approx(-s * std::tan(s)).epsilon(1e-7));
    }
}

TEST_CASE("degenerate-ratio flagging is reported, not perturbed") {
    const ProblemSpec spec = unit_zero_spec();
    ExtractOptions opts;
    opts.ratio_denominator_tol = 10.0; // force every entry to flag
    const SpectralData data = extract_data(spec, 3, opts);
    for (int i = 0; i < 3; ++i) {
        CHECK(data.flags[i]);
        CHECK(std::isfinite(data.ratios[i]));
    }
}

TEST_CASE("constant shifts move eigenvalues and keep the ratios") {
    const TimeScaleDomain d = make_domain(1, 2, 3);
    const double c = 0.5;
    const ProblemSpec base(d, random_smooth(d, 41, 0.8), 0.1, 0.2);
    std::vector<double> left = base.q.left(), right = base.q.right();
    left[0] += c;
    right[0] += c;
    const ProblemSpec shifted(
        d, Potential::from_cosine(d, left, right), 0.1, 0.2);

    const SpectralData a = extract_data(base, 6);
    const SpectralData b = extract_data(shifted, 6);
    for (int i = 0; i < 6; ++i) {
        CHECK(std::abs(b.eigenvalues[i] - a.eigenvalues[i] - c) <=
              1e-9 * (1.0 + std::abs(a.eigenvalues[i])));
        CHECK(std::abs(b.ratios[i] - a.ratios[i]) <=
              1e-8 * (1.0 + std::abs(a.ratios[i])));
    }
}

TEST_CASE("Picard solution of the integral equation: exact cases") {
    const TimeScaleDomain d = make_domain(1, 2, 3);
    const ProblemSpec zero_h0(d, Potential::zero(d), 0.0, 0.0);
    CHECK(phi_via_integral_equation(zero_h0, 4.0, 1.0) ==
          doctest::Approx(std::cos(2.0)).epsilon(1e-12));

    const ProblemSpec zero_h1(d, Potential::zero(d), 1.0, 0.0);
    CHECK(phi_via_integral_equation(zero_h1, 4.0, 1.0) ==
          doctest::Approx(std::cos(2.0) + 0.5 * std::sin(2.0)).epsilon(1e-12));

    // constant q shifts lambda: q = 1, lambda = 4 solves y'' = -3y
    const ProblemSpec const_q(d, Potential::from_cosine(d, {1.0}, {}), 0.0,
                              0.0);
    CHECK(phi_via_integral_equation(const_q, 4.0, 1.0) ==
          doctest::Approx(std::cos(std::sqrt(3.0))).epsilon(1e-9));
}

TEST_CASE("Picard iteration reports non-convergence") {
    const TimeScaleDomain d = make_domain(1, 2, 3);
    const ProblemSpec spec(d, Potential::from_cosine(d, {2.0}, {}), 0.0, 0.0);
    PicardOptions opts;
    opts.max_iterations = 1;
    CHECK_THROWS_AS(phi_via_integral_equation(spec, 4.0, 1.0, opts),
                    convergence_error);
    CHECK_THROWS_AS(phi_via_integral_equation(spec, -4.0, 1.0),
                    structural_error);
    CHECK_THROWS_AS(phi_via_integral_equation(spec, 4.0, 1.5),
                    timescale_point_error);
}

TEST_CASE("Picard profile agrees with the shooter on the left interval") {
    const TimeScaleDomain d = make_domain(1, 2, 3);
    const ProblemSpec spec(d, random_smooth(d, 51, 2.0), 0.2, 0.0);
    const Grid grid = make_uniform_grid(d, 64, 8);
    for (double s : {1.0, 4.0, 9.0}) {
        const double lambda = s * s;
        const SolutionTrace tr = shoot(spec, lambda, grid);
        std::vector<double> nodes;
        for (const auto& sample : tr.left) nodes.push_back(sample.t);
        const std::vector<double> picard =
            phi_profile_via_integral_equation(spec, lambda, nodes, 32);
        double sup = 0;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            sup = std::max(sup, std::abs(picard[i] - tr.left[i].phi));
        }
        CHECK(sup <= 1e-9);
    }
}

TEST_CASE("asymptotic phi branches") {
    const TimeScaleDomain d = make_domain(1, 2, 3);
    for (double s : {2.0, 5.0}) {
        CHECK(asymptotic_phi(d, 0.0, s * s, 0.5) ==
              doctest::Approx(std::cos(0.5 * s)).epsilon(1e-14));
    }
    const double s = 3.0;
    CHECK(asymptotic_phi(d, 0.0, s * s, 2.5) ==
          doctest::Approx(s * s * std::sin(s) * std::sin(0.5 * s))
              .epsilon(1e-14));
    CHECK(asymptotic_phi(d, 0.7, s * s, 2.0) == 0.0); // sin(0) factor at a2
    CHECK(asymptotic_phi(d, 2.0, 4.0, 0.5) ==
          doctest::Approx(std::cos(1.0) + std::sin(1.0)).epsilon(1e-14));
    CHECK_THROWS_AS(asymptotic_phi(d, 0.0, 4.0, 1.5), timescale_point_error);
    CHECK_THROWS_AS(asymptotic_phi(d, 0.0, -1.0, 0.5), structural_error);
}

TEST_CASE("asymptotic characteristic values") {
    const TimeScaleDomain d = make_domain(1, 2, 3);
    CHECK(asymptotic_char(d, 4.0) ==
          doctest::Approx(-3.027209981231713).epsilon(1e-12));
    CHECK(std::abs(asymptotic_char(d, kPi * kPi)) < 1e-12);
    // leading-term error of the closed form is O(lambda)
    for (double s : {10.0, 20.0, 30.0}) {
        const double lambda = s * s;
        const double diff = std::abs(
            closed_form_char_zero_potential(d, lambda) -
            asymptotic_char(d, lambda));
        CHECK(diff / lambda < 10.0);
    }
}

TEST_CASE("asymptotic eigenvalue seeds follow the printed formula") {
    const TimeScaleDomain d = make_domain(1, 2, 3);
    CHECK(asymptotic_eigen_guess(d, 1) == 0.0);
    CHECK(asymptotic_eigen_guess(d, 3) ==
          doctest::Approx(kPi * kPi).epsilon(1e-14));
    const TimeScaleDomain wide = make_domain(2, 4, 6);
    CHECK(asymptotic_eigen_guess(wide, 2) ==
          doctest::Approx(0.61685027506808491).epsilon(1e-14));
    const TimeScaleDomain asym = make_domain(1, 2, 4);
    CHECK_THROWS_AS(asymptotic_eigen_guess(asym, 1), structural_error);
    CHECK_THROWS_AS(asymptotic_eigen_guess(d, 0), structural_error);
}

TEST_CASE("negative eigenvalues are found by the lambda-space scan") {
    const TimeScaleDomain d = make_domain(1, 2, 3);
    const ProblemSpec spec(d, Potential::from_cosine(d, {-5.0}, {-5.0}), 0.0,
                           0.0);
    const SpectralData data = eigenvalues(spec, 3);
    // the spectrum of q == -5 is the zero-potential spectrum shifted down
    CHECK(data.eigenvalues[0] == doctest::Approx(-5.0).epsilon(1e-9));
    CHECK(data.eigenvalues[1] ==
          doctest::Approx(kLambda2 - 5.0).epsilon(1e-8));
    CHECK(data.eigenvalues[2] ==
          doctest::Approx(kLambda3 - 5.0).epsilon(1e-8));
}

TEST_CASE("grid-form and cosine-form constants solve identically") {
    const TimeScaleDomain d = make_domain(1, 2, 3);
    const ProblemSpec cosine_spec(
        d, Potential::from_cosine(d, {0.3}, {0.3}), 0.1, 0.2);
    const ProblemSpec grid_spec(
        d,
        Potential::from_grid(d, std::vector<double>(33, 0.3),
                             std::vector<double>(33, 0.3)),
        0.1, 0.2);
    const SpectralData a = eigenvalues(cosine_spec, 5);
    const SpectralData b = eigenvalues(grid_spec, 5);
    for (int i = 0; i < 5; ++i) {
        CHECK(a.eigenvalues[i] ==
              doctest::Approx(b.eigenvalues[i]).epsilon(1e-10));
    }
}

TEST_CASE("renormalization keeps extreme negative lambdas finite") {
    const ProblemSpec spec = unit_zero_spec();
    const double lambda = -1e6;
    const double value = characteristic(spec, lambda);
    CHECK(std::isfinite(value));
    CHECK(value > 0.0); // cosh-type solution keeps a positive derivative

    const Grid grid = make_uniform_grid(spec.domain, 8, 8);
    const SolutionTrace tr = shoot(spec, lambda, grid);
    CHECK(tr.log_scale > 100.0);
    for (const auto& sample : tr.right) {
        CHECK(std::isfinite(sample.phi));
        CHECK(std::isfinite(sample.dphi));
    }
}

TEST_CASE("absurd lambdas fail with a numeric error naming lambda") {
    const ProblemSpec spec = unit_zero_spec();
    try {
        characteristic(spec, 1e12);
        FAIL("expected numeric_overflow_error");
    } catch (const numeric_overflow_error& e) {
        CHECK(e.lambda() == 1e12);
    }
}

TEST_CASE("shoot accepts non-uniform grids") {
    const TimeScaleDomain d = make_domain(1, 2, 3);
    const ProblemSpec spec(d, random_smooth(d, 71), 0.1, 0.0);
    Grid grid;
    grid.left = {0.0, 0.05, 0.15, 0.4, 0.41, 0.7, 1.0};
    grid.right = {2.0, 2.6, 2.65, 3.0};
    grid.step_left = 0.3;
    grid.step_right = 0.6;
    const SolutionTrace tr = shoot(spec, 7.0, grid);
    CHECK(tr.left.size() == grid.left.size());
    CHECK(tr.right.size() == grid.right.size());
    const double scale = 1.0 + std::abs(tr.phi_a1()) + std::abs(tr.dphi_a1());
    CHECK(std::abs(d.a * tr.dphi_a1() - (tr.phi_a2() - tr.phi_a1())) <=
          1e-12 * scale);
    // node layout does not change the solution, only where it is sampled
    const SolutionTrace uniform = shoot(spec, 7.0, make_uniform_grid(d, 64, 64));
    CHECK(tr.phi_l() == doctest::Approx(uniform.phi_l()).epsilon(1e-9));
}

TEST_CASE("traceless characteristic matches the trace-based shooter") {
    const TimeScaleDomain d = make_domain(1, 2, 3);
    const ProblemSpec spec(d, random_smooth(d, 61), -0.2, 0.3);
    const Grid grid = make_uniform_grid(d, 16, 16);
    for (double lambda : {-1.5, 2.0, 17.0, 90.0}) {
        const SolutionTrace tr = shoot(spec, lambda, grid);
        const double from_trace = tr.dphi_l() + spec.H * tr.phi_l();
        const double traceless = characteristic(spec, lambda);
        CHECK(std::abs(from_trace - traceless) <=
              1e-9 * characteristic_scale(d, spec.H, lambda));
    }
}

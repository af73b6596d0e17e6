// Benchmark: OpenMP-parallel eigenvalue scan and inverse Jacobian against
// their serial reference paths. Both paths must produce identical numbers;
// the parallel ones are just faster.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "tsturm/domain.hpp"
#include "tsturm/forward.hpp"
#include "tsturm/inverse.hpp"

using namespace tsturm;

namespace {

double now_ms() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double, std::milli>(
               clock::now().time_since_epoch())
        .count();
}

template <typename F> double timed(F&& f) {
    const double t0 = now_ms();
    f();
    return now_ms() - t0;
}

} // namespace

int main(int argc, char** argv) {
    bool quick = false;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--quick") == 0) quick = true;
    }
    const int n_eigs = quick ? 8 : 24;
    const int n_data = quick ? 6 : 12;
    const int modes = quick ? 2 : 4;

    const TimeScaleDomain domain = make_domain(1.0, 2.0, 3.0);
    const Potential q = Potential::from_cosine(domain, {0.3, 0.4, -0.2, 0.1},
                                               {0.2, -0.3, 0.1});
    const ProblemSpec spec(domain, q, 0.0, 0.0);

#ifdef _OPENMP
    std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
    std::printf("OpenMP not enabled; both paths run serially\n");
#endif

    SearchOptions serial, parallel;
    serial.parallel = false;
    parallel.parallel = true;

    SpectralData eig_serial, eig_parallel;
    const double t_scan_serial =
        timed([&] { eig_serial = eigenvalues(spec, n_eigs, serial); });
    const double t_scan_parallel =
        timed([&] { eig_parallel = eigenvalues(spec, n_eigs, parallel); });
    double scan_diff = 0;
    for (int i = 0; i < n_eigs; ++i) {
        scan_diff = std::max(scan_diff,
                             std::abs(eig_serial.eigenvalues[i] -
                                      eig_parallel.eigenvalues[i]));
    }
    std::printf("spectrum n=%-3d serial %8.1f ms  parallel %8.1f ms  "
                "speedup %.2fx  max|diff| %.3g\n",
                n_eigs, t_scan_serial, t_scan_parallel,
                t_scan_serial / t_scan_parallel, scan_diff);

    ExtractOptions ex;
    ex.search = parallel;
    const SpectralData target = extract_data(spec, n_data, ex);
    FixedCoefficients fixed{domain, 0.0, 0.0};
    InverseConfig cfg;
    cfg.n_data = n_data;
    cfg.n_basis_left = modes;
    cfg.n_basis_right = modes;
    std::vector<double> coeffs(2 * modes, 0.05);

    Eigen::MatrixXd j_serial, j_parallel;
    cfg.forward.parallel = false;
    const double t_jac_serial =
        timed([&] { j_serial = jacobian(coeffs, target, fixed, cfg); });
    cfg.forward.parallel = true;
    const double t_jac_parallel =
        timed([&] { j_parallel = jacobian(coeffs, target, fixed, cfg); });
    const double jac_diff = (j_serial - j_parallel).cwiseAbs().maxCoeff();
    std::printf("jacobian %dx%-2d serial %8.1f ms  parallel %8.1f ms  "
                "speedup %.2fx  max|diff| %.3g\n",
                2 * n_data, 2 * modes, t_jac_serial, t_jac_parallel,
                t_jac_serial / t_jac_parallel, jac_diff);

    if (scan_diff != 0.0 || jac_diff != 0.0) {
        std::printf("FAIL: parallel and serial paths disagree\n");
        return 1;
    }
    std::printf("parallel results identical to serial reference\n");
    return 0;
}

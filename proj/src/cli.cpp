#include "tsturm/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "tsturm/analysis.hpp"
#include "tsturm/domain.hpp"
#include "tsturm/forward.hpp"
#include "tsturm/inverse.hpp"
#include "tsturm/io.hpp"

namespace tsturm {

namespace {

std::vector<double> parse_double_list(const std::string& text,
                                      const char* what) {
    std::vector<double> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t pos = 0;
            values.push_back(std::stod(item, &pos));
            if (pos != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw structural_error(std::string("cannot parse ") + what +
                                   " entry: \"" + item + "\"");
        }
    }
    if (values.empty()) {
        throw structural_error(std::string("empty ") + what + " list");
    }
    return values;
}

void emit(const std::string& content, const std::string& out_path,
          std::ostream& out) {
    if (out_path.empty()) {
        out << content << "\n";
    } else {
        write_file(out_path, content + "\n");
    }
}

struct CliState {
    // common
    std::string spec_path, out_path;
    bool serial = false;
    int n = 8;
    // forward
    std::string lambdas;
    int cells = 64;
    // invert
    std::string data_path, fixed_path, modes = "4,4";
    double reg = 1e-8;
    int max_iters = 50;
    double tol = 1e-7;
    double noise = 0.0;
    unsigned long long seed = 12345;
    int n_data = 0; // 0 = all unflagged entries
    // oracle
    std::string domain_csv;
    double smax_oracle = 10.0;
    double step_oracle = 0.05;
    // spectrum/extract ceiling override
    double smax = 0.0;
};

SearchOptions search_options(const CliState& st) {
    SearchOptions opts;
    opts.parallel = !st.serial;
    if (st.smax > 0) opts.s_ceiling = st.smax;
    return opts;
}

int cmd_spectrum(const CliState& st, std::ostream& out) {
    const ProblemSpec spec = load_spec_file(st.spec_path);
    const SpectralData data = eigenvalues(spec, st.n, search_options(st));
    emit(spectral_to_json(data), st.out_path, out);
    return 0;
}

int cmd_extract(const CliState& st, std::ostream& out) {
    const ProblemSpec spec = load_spec_file(st.spec_path);
    ExtractOptions opts;
    opts.search = search_options(st);
    const SpectralData data = extract_data(spec, st.n, opts);
    emit(spectral_to_json(data), st.out_path, out);
    return 0;
}

int cmd_forward(const CliState& st, std::ostream& out) {
    const ProblemSpec spec = load_spec_file(st.spec_path);
    const std::vector<double> lambdas =
        parse_double_list(st.lambdas, "lambda");
    if (st.out_path.empty()) {
        throw structural_error("forward requires --out DIR");
    }
    std::filesystem::create_directories(st.out_path);
    const Grid grid = make_uniform_grid(spec.domain, st.cells, st.cells);
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        const SolutionTrace trace = shoot(spec, lambdas[i], grid);
        write_file(st.out_path + "/trace_" + std::to_string(i + 1) + ".csv",
                   trace_to_csv(trace));
    }
    out << "wrote " << lambdas.size() << " trace files to " << st.out_path
        << "\n";
    return 0;
}

int cmd_oracle(const CliState& st, std::ostream& out) {
    const std::vector<double> d = parse_double_list(st.domain_csv, "domain");
    if (d.size() != 3) {
        throw structural_error("--domain expects a1,a2,l");
    }
    const TimeScaleDomain domain = make_domain(d[0], d[1], d[2]);
    if (!(st.step_oracle > 0) || !(st.smax_oracle >= 0)) {
        throw structural_error("oracle needs --step > 0 and --smax >= 0");
    }
    std::string csv = "s,lambda,delta\n";
    for (double s = 0.0; s <= st.smax_oracle + 0.5 * st.step_oracle;
         s += st.step_oracle) {
        const double lambda = s * s;
        csv += format_double(s) + "," + format_double(lambda) + "," +
               format_double(closed_form_char_zero_potential(domain, lambda)) +
               "\n";
    }
    if (st.out_path.empty()) {
        out << csv;
    } else {
        write_file(st.out_path, csv);
    }
    return 0;
}

int cmd_invert(const CliState& st, std::ostream& out) {
    SpectralData target = load_spectral_file(st.data_path);
    const ProblemSpec fixed_spec = load_spec_file(st.fixed_path, false);
    const std::vector<double> modes = parse_double_list(st.modes, "modes");
    if (modes.size() != 2) {
        throw structural_error("--modes expects KL,KR");
    }

    if (st.noise > 0) {
        std::mt19937_64 rng(st.seed);
        std::normal_distribution<double> gauss(0.0, st.noise);
        for (double& v : target.eigenvalues) v += gauss(rng);
        for (double& v : target.ratios) v += gauss(rng);
        for (std::size_t i = 1; i < target.eigenvalues.size(); ++i) {
            if (!(target.eigenvalues[i] > target.eigenvalues[i - 1])) {
                throw structural_error(
                    "noise perturbation broke the eigenvalue ordering; "
                    "lower --noise");
            }
        }
    }

    int unflagged = 0;
    for (int i = 0; i < target.count(); ++i) {
        const bool flagged = !target.flags.empty() &&
                             target.flags[static_cast<std::size_t>(i)];
        if (!flagged) ++unflagged;
    }

    InverseConfig config;
    config.n_basis_left = static_cast<int>(modes[0]);
    config.n_basis_right = static_cast<int>(modes[1]);
    config.n_data = st.n_data > 0 ? st.n_data : unflagged;
    config.regularization = st.reg;
    config.max_iterations = st.max_iters;
    config.residual_tolerance = st.tol;
    config.forward.parallel = !st.serial;
    config.validate();

    FixedCoefficients fixed{fixed_spec.domain, fixed_spec.h, fixed_spec.H};
    const ReconstructionReport report = reconstruct(target, fixed, config);
    emit(reconstruction_report_to_json(report), st.out_path, out);
    return report.converged ? 0 : 3;
}

int cmd_verify(const CliState& st, std::ostream& out) {
    const ProblemSpec spec = load_spec_file(st.spec_path);
    const SearchOptions search = search_options(st);
    const bool write_dir = !st.out_path.empty();
    if (write_dir) std::filesystem::create_directories(st.out_path);

    std::string json = "{";

    const std::vector<double> s_values = {25, 50, 100, 200};
    const ConvergenceReport phi_rep = check_phi_asymptotics(spec, s_values);
    json += "\"phi_asymptotics\":" + convergence_report_to_json(phi_rep);
    if (write_dir) {
        write_file(st.out_path + "/phi_asymptotics.csv",
                   convergence_report_to_csv(phi_rep));
    }

    json += ",\"eigenvalue_asymptotics\":";
    if (spec.domain.symmetric) {
        const ConvergenceReport eig_rep =
            check_eigenvalue_asymptotics(spec, {}, search);
        json += convergence_report_to_json(eig_rep);
        if (write_dir) {
            write_file(st.out_path + "/eigenvalue_asymptotics.csv",
                       convergence_report_to_csv(eig_rep));
        }
    } else {
        json += "{\"skipped\":\"non-symmetric domain\"}";
    }

    const std::vector<double> wronskian_lambdas = {-1, 1, 5, 20};
    const Grid grid = make_uniform_grid(spec.domain, 128, 128);
    std::vector<double> deviations;
    for (double lam : wronskian_lambdas) {
        deviations.push_back(check_wronskian(spec, lam, grid));
    }
    json += ",\"wronskian\":{\"lambdas\":" + json_array(wronskian_lambdas);
    json += ",\"deviations\":" + json_array(deviations) + "}";
    if (write_dir) {
        std::string csv = "parameter,error\n";
        for (std::size_t i = 0; i < deviations.size(); ++i) {
            csv += format_double(wronskian_lambdas[i]) + "," +
                   format_double(deviations[i]) + "\n";
        }
        write_file(st.out_path + "/wronskian.csv", csv);
    }

    json += ",\"completeness\":";
    if (spec.domain.symmetric) {
        const std::vector<int> spans = {4, 8, 16, 32};
        const SpectralData eig = eigenvalues(spec, 32, search);
        const CompletenessReport comp = completeness_diagnostic(
            eig.eigenvalues, default_probes(spec.domain.a1), spans,
            spec.domain.a1);
        json += completeness_report_to_json(comp);
        if (write_dir) {
            std::string csv = "probe,span,residual\n";
            for (std::size_t p = 0; p < comp.probe_names.size(); ++p) {
                for (std::size_t k = 0; k < comp.span_sizes.size(); ++k) {
                    csv += comp.probe_names[p] + "," +
                           std::to_string(comp.span_sizes[k]) + "," +
                           format_double(comp.residuals[p][k]) + "\n";
                }
            }
            write_file(st.out_path + "/completeness.csv", csv);
        }
    } else {
        json += "{\"skipped\":\"non-symmetric domain\"}";
    }

    const double trans = transmission_equivalence(spec, 8, search);
    json += ",\"transmission\":{\"n\":8,\"max_discrepancy\":" +
            format_double(trans) + "}}";
    out << json << "\n";
    return 0;
}

} // namespace

int run_cli(std::vector<std::string> args, std::ostream& out,
            std::ostream& err) {
    CLI::App app{"Sturm-Liouville problems on the two-interval time scale "
                 "[0,a1] u [a2,l]: forward solves, spectra, interior data, "
                 "potential reconstruction, and verification reports"};
    app.require_subcommand(1);
    CliState st;

    auto* spectrum = app.add_subcommand("spectrum", "first n eigenvalues");
    spectrum->add_option("--spec", st.spec_path, "problem spec JSON file")
        ->required();
    spectrum->add_option("--n", st.n, "eigenvalue count")->required();
    spectrum->add_option("--out", st.out_path, "output JSON file (default stdout)");
    spectrum->add_option("--smax", st.smax, "scan ceiling override in s");
    spectrum->add_flag("--serial", st.serial, "disable parallel scanning");

    auto* extract = app.add_subcommand(
        "extract", "eigenvalues plus interior ratios (inverse-problem data)");
    extract->add_option("--spec", st.spec_path, "problem spec JSON file")
        ->required();
    extract->add_option("--n", st.n, "pair count")->required();
    extract->add_option("--out", st.out_path, "output JSON file (default stdout)");
    extract->add_option("--smax", st.smax, "scan ceiling override in s");
    extract->add_flag("--serial", st.serial, "disable parallel scanning");

    auto* forward = app.add_subcommand(
        "forward", "solution traces for a list of lambda values");
    forward->add_option("--spec", st.spec_path, "problem spec JSON file")
        ->required();
    forward->add_option("--lambdas", st.lambdas, "comma-separated lambdas")
        ->required();
    forward->add_option("--out", st.out_path, "output directory")->required();
    forward->add_option("--cells", st.cells, "trace cells per interval");

    auto* invert = app.add_subcommand(
        "invert", "reconstruct the potential from spectral data");
    invert->add_option("--data", st.data_path, "spectral data JSON file")
        ->required();
    invert->add_option("--fixed", st.fixed_path,
                       "spec JSON with the known domain, h, H (q optional)")
        ->required();
    invert->add_option("--modes", st.modes, "cosine modes per interval KL,KR");
    invert->add_option("--reg", st.reg, "Tikhonov weight");
    invert->add_option("--n", st.n_data,
                       "data pairs to fit (default: all unflagged)");
    invert->add_option("--max-iters", st.max_iters, "iteration cap");
    invert->add_option("--tol", st.tol, "residual tolerance");
    invert->add_option("--noise", st.noise,
                       "additive gaussian perturbation of the input data");
    invert->add_option("--seed", st.seed, "noise seed");
    invert->add_option("--out", st.out_path, "report JSON file (default stdout)");
    invert->add_flag("--serial", st.serial, "disable parallel Jacobian");

    auto* verify =
        app.add_subcommand("verify", "run all verification reports");
    verify->add_option("--spec", st.spec_path, "problem spec JSON file")
        ->required();
    verify->add_option("--out", st.out_path, "directory for CSV tables");
    verify->add_flag("--serial", st.serial, "disable parallel scanning");

    auto* oracle = app.add_subcommand(
        "oracle", "closed-form zero-potential characteristic table");
    oracle->add_option("--domain", st.domain_csv, "a1,a2,l")->required();
    oracle->add_option("--smax", st.smax_oracle, "table end in s");
    oracle->add_option("--step", st.step_oracle, "table step in s");
    oracle->add_option("--out", st.out_path, "output CSV file (default stdout)");

    std::vector<const char*> argv;
    argv.push_back("tsturm");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }

    try {
        if (spectrum->parsed()) return cmd_spectrum(st, out);
        if (extract->parsed()) return cmd_extract(st, out);
        if (forward->parsed()) return cmd_forward(st, out);
        if (invert->parsed()) return cmd_invert(st, out);
        if (verify->parsed()) return cmd_verify(st, out);
        if (oracle->parsed()) return cmd_oracle(st, out);
        err << "error: no subcommand selected\n";
        return 1;
    } catch (const numeric_overflow_error& e) {
        err << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const incomplete_spectrum_error& e) {
        err << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const convergence_error& e) {
        err << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::domain_error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace tsturm

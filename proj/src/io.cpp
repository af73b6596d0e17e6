#include "tsturm/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace tsturm {

std::string format_double(double x) {
    if (x == 0.0) x = 0.0; // canonicalize negative zero
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::string json_array(std::span<const double> values) {
    std::string out = "[";
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ",";
        out += format_double(values[i]);
    }
    out += "]";
    return out;
}

std::string json_array(std::span<const int> values) {
    std::string out = "[";
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(values[i]);
    }
    out += "]";
    return out;
}

std::string json_bool_array(const std::vector<bool>& values) {
    std::string out = "[";
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ",";
        out += values[i] ? "true" : "false";
    }
    out += "]";
    return out;
}

namespace {

std::string json_string(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    out += "\"";
    return out;
}

double require_number(const nlohmann::json& j, const char* field) {
    if (!j.contains(field)) {
        throw structural_error(std::string("missing field \"") + field + "\"");
    }
    if (!j[field].is_number()) {
        throw structural_error(std::string("field \"") + field +
                               "\" must be a number");
    }
    return j[field].get<double>();
}

std::vector<double> require_number_array(const nlohmann::json& j,
                                         const char* field) {
    if (!j.contains(field)) {
        throw structural_error(std::string("missing field \"") + field + "\"");
    }
    if (!j[field].is_array()) {
        throw structural_error(std::string("field \"") + field +
                               "\" must be an array");
    }
    std::vector<double> out;
    for (const auto& v : j[field]) {
        if (!v.is_number()) {
            throw structural_error(std::string("field \"") + field +
                                   "\" must contain numbers only");
        }
        out.push_back(v.get<double>());
    }
    return out;
}

nlohmann::json parse_or_throw(const std::string& text) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw structural_error(std::string("JSON parse error: ") + e.what());
    }
}

} // namespace

ProblemSpec parse_spec_json(const std::string& text, bool require_potential) {
    const nlohmann::json j = parse_or_throw(text);
    const double a1 = require_number(j, "a1");
    const double a2 = require_number(j, "a2");
    const double l = require_number(j, "l");
    const double h = require_number(j, "h");
    const double H = require_number(j, "H");
    const TimeScaleDomain domain = make_domain(a1, a2, l);

    if (!j.contains("q")) {
        if (require_potential) throw structural_error("missing field \"q\"");
        return ProblemSpec(domain, Potential::zero(domain), h, H);
    }
    const nlohmann::json& q = j["q"];
    if (!q.is_object() || !q.contains("form") || !q["form"].is_string()) {
        throw structural_error(
            "field \"q\" must be an object with a \"form\" string");
    }
    const std::string form = q["form"].get<std::string>();
    std::vector<double> left = require_number_array(q, "left");
    std::vector<double> right = require_number_array(q, "right");
    Potential potential =
        form == "grid"
            ? Potential::from_grid(domain, std::move(left), std::move(right))
        : form == "cosine"
            ? Potential::from_cosine(domain, std::move(left), std::move(right))
            : throw structural_error(
                  "field \"form\" must be \"grid\" or \"cosine\"");
    return ProblemSpec(domain, std::move(potential), h, H);
}

ProblemSpec load_spec_file(const std::string& path, bool require_potential) {
    return parse_spec_json(read_file(path), require_potential);
}

std::string spec_to_json(const ProblemSpec& spec) {
    std::string out = "{";
    out += "\"a1\":" + format_double(spec.domain.a1);
    out += ",\"a2\":" + format_double(spec.domain.a2);
    out += ",\"l\":" + format_double(spec.domain.l);
    out += ",\"h\":" + format_double(spec.h);
    out += ",\"H\":" + format_double(spec.H);
    out += ",\"q\":{\"form\":";
    out += spec.q.form() == PotentialForm::grid ? "\"grid\"" : "\"cosine\"";
    out += ",\"left\":" + json_array(spec.q.left());
    out += ",\"right\":" + json_array(spec.q.right());
    out += "}}";
    return out;
}

SpectralData parse_spectral_json(const std::string& text) {
    const nlohmann::json j = parse_or_throw(text);
    SpectralData data;
    data.eigenvalues = require_number_array(j, "eigenvalues");
    for (std::size_t i = 1; i < data.eigenvalues.size(); ++i) {
        if (!(data.eigenvalues[i] > data.eigenvalues[i - 1])) {
            throw structural_error(
                "eigenvalues must be strictly increasing");
        }
    }
    // ratios and flags may be omitted or empty for eigenvalue-only data
    if (j.contains("ratios")) {
        data.ratios = require_number_array(j, "ratios");
        if (!data.ratios.empty() &&
            data.ratios.size() != data.eigenvalues.size()) {
            throw structural_error(
                "ratios and eigenvalues must have equal length");
        }
    }
    if (j.contains("flags")) {
        if (!j["flags"].is_array()) {
            throw structural_error("field \"flags\" must be an array");
        }
        for (const auto& v : j["flags"]) {
            if (!v.is_boolean()) {
                throw structural_error("flags must be booleans");
            }
            data.flags.push_back(v.get<bool>());
        }
        if (!data.flags.empty() &&
            data.flags.size() != data.eigenvalues.size()) {
            throw structural_error(
                "flags and eigenvalues must have equal length");
        }
    }
    return data;
}

SpectralData load_spectral_file(const std::string& path) {
    return parse_spectral_json(read_file(path));
}

std::string spectral_to_json(const SpectralData& data) {
    std::string out = "{";
    out += "\"eigenvalues\":" + json_array(data.eigenvalues);
    out += ",\"ratios\":" + json_array(data.ratios);
    out += ",\"flags\":" + json_bool_array(data.flags);
    out += "}";
    return out;
}

std::string spectral_to_csv(const SpectralData& data) {
    std::string out = "n,eigenvalue,ratio,flag\n";
    for (std::size_t i = 0; i < data.eigenvalues.size(); ++i) {
        out += std::to_string(i + 1) + "," + format_double(data.eigenvalues[i]);
        out += ",";
        out += i < data.ratios.size() ? format_double(data.ratios[i]) : "";
        out += ",";
        out += i < data.flags.size() ? (data.flags[i] ? "1" : "0") : "0";
        out += "\n";
    }
    return out;
}

std::string trace_to_csv(const SolutionTrace& trace) {
    std::string out = "t,phi,dphi\n";
    auto rows = [&out](const std::vector<TraceSample>& samples) {
        for (const auto& s : samples) {
            out += format_double(s.t) + "," + format_double(s.phi) + "," +
                   format_double(s.dphi) + "\n";
        }
    };
    rows(trace.left);
    rows(trace.right);
    return out;
}

std::string convergence_report_to_json(const ConvergenceReport& report) {
    std::string out = "{";
    out += "\"name\":" + json_string(report.name);
    out += ",\"parameters\":" + json_array(report.parameters);
    out += ",\"errors\":" + json_array(report.errors);
    out += ",\"fitted_exponent\":" + format_double(report.fitted_exponent);
    out += std::string(",\"pass\":") + (report.pass ? "true" : "false");
    out += ",\"extra\":{";
    for (std::size_t i = 0; i < report.extra.size(); ++i) {
        if (i) out += ",";
        out += json_string(report.extra[i].first) + ":" +
               json_array(report.extra[i].second);
    }
    out += "}}";
    return out;
}

std::string convergence_report_to_csv(const ConvergenceReport& report) {
    std::string out = "parameter,error\n";
    for (std::size_t i = 0; i < report.parameters.size(); ++i) {
        out += format_double(report.parameters[i]) + "," +
               format_double(report.errors[i]) + "\n";
    }
    return out;
}

std::string completeness_report_to_json(const CompletenessReport& report) {
    std::string out = "{";
    out += "\"span_sizes\":" + json_array(report.span_sizes);
    out += ",\"probes\":[";
    for (std::size_t i = 0; i < report.probe_names.size(); ++i) {
        if (i) out += ",";
        out += "{\"name\":" + json_string(report.probe_names[i]);
        out += ",\"residuals\":" + json_array(report.residuals[i]) + "}";
    }
    out += "]";
    out += std::string(",\"monotone\":") + (report.monotone ? "true" : "false");
    out += std::string(",\"conditioning_warning\":") +
           (report.conditioning_warning ? "true" : "false");
    out += "}";
    return out;
}

std::string reconstruction_report_to_json(const ReconstructionReport& report) {
    std::string out = "{";
    out += std::string("\"converged\":") + (report.converged ? "true" : "false");
    out += ",\"iterations\":" + std::to_string(report.iterations);
    out += ",\"final_residual\":" + format_double(report.final_residual);
    out += ",\"eigenvalue_residual\":" +
           format_double(report.eigenvalue_residual);
    out += ",\"ratio_residual\":" + format_double(report.ratio_residual);
    out += ",\"residual_history\":" + json_array(report.residual_history);
    out += ",\"objective_history\":" + json_array(report.objective_history);
    out += ",\"singular_values\":" + json_array(report.singular_values);
    out += ",\"q\":{\"form\":\"cosine\",\"left\":" +
           json_array(report.coeffs_left);
    out += ",\"right\":" + json_array(report.coeffs_right) + "}}";
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw structural_error("cannot open file: " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw structural_error("cannot write file: " + path);
    out << content;
}

} // namespace tsturm

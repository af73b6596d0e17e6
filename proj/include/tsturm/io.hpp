#pragma once

#include <span>
#include <string>

#include "tsturm/analysis.hpp"
#include "tsturm/domain.hpp"
#include "tsturm/forward.hpp"
#include "tsturm/inverse.hpp"

namespace tsturm {

/// 17-significant-digit rendering; round-trips any 64-bit value and makes
/// emitted files byte-reproducible.
std::string format_double(double x);

/// Problem-spec JSON schema (field names are part of the format):
/// {"a1":..,"a2":..,"l":..,"h":..,"H":..,
///  "q":{"form":"grid"|"cosine","left":[..],"right":[..]}}
/// With require_potential false a missing "q" becomes the zero potential
/// (used for the fixed-coefficients file of the inversion workflow).
ProblemSpec parse_spec_json(const std::string& text,
                            bool require_potential = true);
ProblemSpec load_spec_file(const std::string& path,
                           bool require_potential = true);
std::string spec_to_json(const ProblemSpec& spec);

/// {"eigenvalues":[..],"ratios":[..],"flags":[..]}; ratios and flags may be
/// omitted for eigenvalue-only data.
SpectralData parse_spectral_json(const std::string& text);
SpectralData load_spectral_file(const std::string& path);
std::string spectral_to_json(const SpectralData& data);
std::string spectral_to_csv(const SpectralData& data);

/// Columns t,phi,dphi over both intervals.
std::string trace_to_csv(const SolutionTrace& trace);

std::string convergence_report_to_json(const ConvergenceReport& report);
/// Columns parameter,error.
std::string convergence_report_to_csv(const ConvergenceReport& report);
std::string completeness_report_to_json(const CompletenessReport& report);
std::string reconstruction_report_to_json(const ReconstructionReport& report);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

/// Small helpers for building deterministic JSON by hand.
std::string json_array(std::span<const double> values);
std::string json_array(std::span<const int> values);
std::string json_bool_array(const std::vector<bool>& values);

} // namespace tsturm

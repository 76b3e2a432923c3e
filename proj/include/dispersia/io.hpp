#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dispersia/decay.hpp"
#include "dispersia/dispersion.hpp"
#include "dispersia/kernel.hpp"
#include "dispersia/modal.hpp"

namespace dispersia {

using Json = nlohmann::ordered_json;

/// Reads and parses a JSON document; ConfigError names `field` on failure.
Json load_json(const std::filesystem::path& path, const std::string& field);

/// Kernel document:
///   {"type": "exp_poly", "terms": [{"poly_re": [...], "poly_im": [...], "z_re": x, "z_im": y}, ...]}
///   {"type": "sampled_builtin", "name": "gaussian", "C": c, "delta": d}
/// A string is a path to such a document, relative to `base`. Null means the zero kernel.
Kernel parse_kernel(const Json& doc, const std::string& field, const std::filesystem::path& base);

/// Document for a closed-form kernel in conjugate-closed term form.
Json kernel_to_json(const ExpPolyKernel& kernel);

/// {"eps": e, "mu": m, "nuE": kernel, "nuH": kernel}; missing entries default to 1, 1, zero, zero.
MediumSpec parse_medium(const Json& doc, const std::string& field, const std::filesystem::path& base);

struct SimulateConfig {
  MediumSpec medium;
  std::vector<Mode> modes;
  RunOptions run;
};

/// Keys: medium, modes [{k, amplitude}] or cavity {length, n_max, amplitude_power},
/// dt, T, output_stride, threads, weight {C, delta}.
SimulateConfig parse_simulate(const Json& doc, const std::filesystem::path& base);

struct SpectrumConfig {
  MediumSpec medium;
  std::vector<double> ks;
};

/// Keys: medium, and k (list) or k_range {start, stop, count, spacing: "linear" | "log"}.
SpectrumConfig parse_spectrum(const Json& doc, const std::filesystem::path& base);

struct AnalyzeConfig {
  MediumSpec medium;
  SampledScan scan;
};

/// Keys: medium, scan {points, omega_max, quadrature_points, quadrature_omega_max}.
AnalyzeConfig parse_analyze(const Json& doc, const std::filesystem::path& base);

struct FitConfig {
  std::string trace;
  std::optional<FitWindow> window;
};

/// Keys: trace (path), window [a, b].
FitConfig parse_fit(const Json& doc, const std::filesystem::path& base);

/// Parses "a,b".
FitWindow parse_window(const std::string& text);

/// Header `t,energy,history_norm`, one row per sample, 17 significant digits.
std::string format_trace(const EnergyTrace& trace);
void write_trace(std::ostream& os, const EnergyTrace& trace);
EnergyTrace read_trace(std::istream& is);
EnergyTrace read_trace(const std::filesystem::path& path);

/// Header `k,abscissa,n_eigs`.
std::string format_spectrum(const std::vector<double>& ks, const std::vector<Spectrum>& spectra);

Json report_to_json(const PassivityReport& report, const ClassKCertificate& certE, const ClassKCertificate& certH);
Json report_to_json(const DecayReport& report);

/// Writes through a temporary file and rename, so a failed run leaves no partial file.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace dispersia

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pairtomo/measurement.hpp"
#include "pairtomo/mle.hpp"
#include "pairtomo/qstate.hpp"
#include "pairtomo/spectral.hpp"

namespace pairtomo::io {

/// Shortest representation that round-trips exactly (17 significant digits
/// at most), locale-independent, '.' decimal separator.
std::string format_double(double v);

// ---- density matrix JSON: {"basis": ["HH","HV","VH","VV"], "re": 4x4, "im": 4x4} ----
std::string density_matrix_to_json(const DensityMatrix& rho);
DensityMatrix density_matrix_from_json(const std::string& text);
void write_density_matrix(const std::filesystem::path& path, const DensityMatrix& rho);
DensityMatrix read_density_matrix(const std::filesystem::path& path);

/// Density-matrix JSON plus "objective", "iterations", "converged", "method".
void write_reconstruction(const std::filesystem::path& path,
                          const ReconstructionResult& result);

// ---- measurement records CSV ----
// Header: setting_signal,setting_idler,value_kind,value,seed_power,integration_time
// Non-applicable columns are left empty. UTF-8, LF line endings.
std::string records_to_csv(const std::vector<MeasurementRecord>& records);
std::vector<MeasurementRecord> records_from_csv(const std::string& text);
void write_records_csv(const std::filesystem::path& path,
                       const std::vector<MeasurementRecord>& records);
/// Parses a records file; malformed rows raise ParseError naming the first
/// offending line. A header-only file yields an empty list.
std::vector<MeasurementRecord> read_records_csv(const std::filesystem::path& path);

// ---- bootstrap CSV: metric,mean,std_dev,n_resamples,skipped ----
void write_bootstrap_csv(const std::filesystem::path& path,
                         const std::vector<BootstrapStats>& stats);

// ---- metrics report ----
struct MetricsReport {
    std::optional<double> fidelity_to_target;
    double concurrence = 0.0;
    double purity = 0.0;
    std::optional<double> relative_phase;  // absent when coherence is below floor
    std::map<std::string, double> std_devs;
};

/// All qstate metrics of `rho`; fidelity included when a target is given
/// (pure-state formula for pure targets, Uhlmann otherwise). An undefined
/// phase is omitted, not zeroed.
MetricsReport compute_metrics(const DensityMatrix& rho,
                              const std::optional<DensityMatrix>& target,
                              const std::vector<BootstrapStats>& stats = {});

/// CSV columns metric,value,std_dev,note; the phase row keeps its place with
/// an empty value and a note when undefined.
void write_metrics_csv(const std::filesystem::path& path, const MetricsReport& report);

// ---- crystal / Sellmeier coefficient file ----
// JSON fields: "form", "ordinary", "extraordinary", "validity_window_nm",
// "source", plus optional geometry overrides (length_m, cut_angle_deg,
// pump_center_m, design_signal_m, design_idler_m, pump_fwhm_m).
CrystalConfig read_crystal_config(const std::filesystem::path& path);

/// Resolution order for the default coefficient file: PAIRTOMO_CRYSTAL_FILE
/// env var, share/pairtomo next to the executable, then the source data dir.
std::filesystem::path default_crystal_file();

// ---- spectra / JSI CSV (wavelengths in nm) ----
void write_jsi_csv(const std::filesystem::path& path, const JsiGrid& grid);
void write_spectra_csv(const std::filesystem::path& path, const Spectrum& spdc,
                       const Spectrum& dfg);
void write_phase_comparison_csv(const std::filesystem::path& path,
                                const PhaseComparison& cmp);

}  // namespace pairtomo::io

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "pairtomo/errors.hpp"

namespace pairtomo {

/// Geometry and dispersion of the down-conversion crystal. Sellmeier
/// coefficients are configuration, not constants: they are loaded from a
/// JSON coefficient file (see io.hpp) in the 3-pole form
///   n^2 = 1 + sum_j B_j lam^2 / (lam^2 - C_j),  lam in micrometers,
/// as [B1, C1, B2, C2, B3, C3].
struct CrystalConfig {
    double length = 2.0e-3;                  // meters
    double cut_angle = 68.0 * 3.14159265358979323846 / 180.0;  // radians
    std::vector<double> sellmeier_o;
    std::vector<double> sellmeier_e;
    double validity_min = 0.0;               // meters
    double validity_max = 0.0;
    std::string form = "sellmeier-3pole";
    std::string source;
    double pump_center = 532.0e-9;           // meters
    double design_signal = 810.0e-9;
    double design_idler = 1550.0e-9;
    double pump_fwhm = 0.1e-9;               // wavelength FWHM, meters

    void validate() const;
};

enum class Polarization { Ordinary, ExtraordinaryAtAngle };

/// sin(x)/x with the removable singularity patched below |x| = 1e-8.
double sinc(double x);

/// Sellmeier index. ExtraordinaryAtAngle evaluates the index ellipsoid
/// 1/n^2 = cos^2(a)/n_o^2 + sin^2(a)/n_e^2 at propagation angle `angle`.
/// Wavelengths outside the coefficient validity window raise OutOfRangeError.
double refractive_index(const CrystalConfig& config, double wavelength,
                        Polarization pol, double angle = 0.0);

/// Collinear type-I phase mismatch k_p - k_s - k_i for e -> o + o, with the
/// pump wavelength fixed by energy conservation 1/lp = 1/ls + 1/li and the
/// pump index taken extraordinary at the cut angle.
double delta_k(const CrystalConfig& config, double lambda_s, double lambda_i);

/// Bisects delta_k at the design wavelengths to zero over cut_angle +- 10 deg
/// (to 1e-10 rad), stores the root back into config, and returns it. Raises
/// CalibrationError when the bracket holds no sign change.
double calibrate_cut_angle(CrystalConfig& config);

struct SpectralGrid {
    std::vector<double> signal_axis;  // meters, strictly increasing
    std::vector<double> idler_axis;

    static SpectralGrid uniform(double signal_min, double signal_max, std::size_t n_signal,
                                double idler_min, double idler_max, std::size_t n_idler);
    void validate() const;
};

/// Sampled joint spectral intensity; values row-major over
/// (signal index, idler index), peak-normalized when `normalized`.
struct JsiGrid {
    std::vector<double> signal_axis;
    std::vector<double> idler_axis;
    std::vector<double> values;
    bool normalized = true;

    double value(std::size_t is, std::size_t ii) const {
        return values[is * idler_axis.size() + ii];
    }
};

/// 1-D intensity spectrum; peak-normalized when `normalized` (an all-zero
/// spectrum is returned unnormalized and flagged).
struct Spectrum {
    std::vector<double> wavelengths;  // meters
    std::vector<double> intensities;
    bool normalized = true;
};

/// JSI(ls, li) = |alpha|^2 sinc^2(dk L / 2) with a Gaussian pump envelope in
/// the detuning (1/ls + 1/li - 1/lp) whose FWHM derives from pump_fwhm.
JsiGrid jsi(const CrystalConfig& config, const SpectralGrid& grid);

/// Idler spectrum of spontaneous emission: trapezoidal sum of the JSI over
/// the signal axis, peak-normalized.
Spectrum spdc_marginal(const JsiGrid& grid);

/// Idler spectrum stimulated by a monochromatic seed: the JSI slice at the
/// seed wavelength, peak-normalized.
Spectrum dfg_spectrum(const CrystalConfig& config, double seed_wavelength,
                      const std::vector<double>& idler_axis);

/// Linear-interpolated width between the outermost half-maximum crossings
/// around the global peak. Raises UnresolvedWidthError when the spectrum
/// does not cross half maximum on both sides.
double fwhm(const Spectrum& spectrum);

/// Linear model of the biphoton phase across the idler spectrum:
/// theta(li) = theta0 + slope * (li - reference_idler).
struct PhaseDispersionModel {
    double theta0 = 0.0;
    double slope = 0.0;              // radians per meter of idler wavelength
    double reference_idler = 1550.0e-9;

    double theta(double lambda_i) const {
        return theta0 + slope * (lambda_i - reference_idler);
    }
};

struct PhaseComparison {
    double theta_qst = 0.0;  // intensity-weighted circular mean over the spectrum
    double theta_set = 0.0;  // model phase at the seed's phase-matched idler
};

/// The mechanism behind the QST/SET phase discrepancy: broadband detection
/// averages theta over the SPDC spectrum, while a narrow seed samples it at
/// one energy-conserving idler wavelength.
PhaseComparison phase_comparison(const PhaseDispersionModel& model,
                                 const Spectrum& spdc_idler, double seed_wavelength,
                                 double pump_center);

}  // namespace pairtomo

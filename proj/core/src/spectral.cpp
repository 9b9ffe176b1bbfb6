#include "pairtomo/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace pairtomo {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kFourLn2 = 4.0 * std::numbers::ln2;

double sellmeier_n(const std::vector<double>& coeffs, double wavelength) {
    const double l2 = wavelength * 1e6 * wavelength * 1e6;  // micrometers^2
    double n2 = 1.0;
    for (std::size_t j = 0; j + 1 < coeffs.size(); j += 2)
        n2 += coeffs[j] * l2 / (l2 - coeffs[j + 1]);
    return std::sqrt(n2);
}

void check_window(const CrystalConfig& c, double wavelength) {
    if (wavelength < c.validity_min || wavelength > c.validity_max)
        throw OutOfRangeError("wavelength outside Sellmeier validity window");
}

double delta_k_at_angle(const CrystalConfig& c, double lambda_s, double lambda_i,
                        double angle) {
    const double lambda_p = 1.0 / (1.0 / lambda_s + 1.0 / lambda_i);
    check_window(c, lambda_s);
    check_window(c, lambda_i);
    check_window(c, lambda_p);
    const double np = refractive_index(c, lambda_p, Polarization::ExtraordinaryAtAngle, angle);
    const double ns = refractive_index(c, lambda_s, Polarization::Ordinary);
    const double ni = refractive_index(c, lambda_i, Polarization::Ordinary);
    return kTwoPi * (np / lambda_p - ns / lambda_s - ni / lambda_i);
}

// |pump envelope|^2: Gaussian in the detuning 1/ls + 1/li - 1/lp whose FWHM
// is the pump wavelength FWHM mapped to reciprocal units.
double pump_envelope_sq(const CrystalConfig& c, double lambda_s, double lambda_i) {
    const double detune = 1.0 / lambda_s + 1.0 / lambda_i - 1.0 / c.pump_center;
    const double fwhm_recip = c.pump_fwhm / (c.pump_center * c.pump_center);
    const double u = detune / fwhm_recip;
    return std::exp(-kFourLn2 * u * u);
}

}  // namespace

void CrystalConfig::validate() const {
    if (!(length > 0.0))
        throw std::invalid_argument("CrystalConfig: length must be > 0");
    if (!(cut_angle > 0.0 && cut_angle < std::numbers::pi / 2.0))
        throw std::invalid_argument("CrystalConfig: cut_angle must be in (0, pi/2)");
    if (!(pump_center > 0.0 && design_signal > 0.0 && design_idler > 0.0))
        throw std::invalid_argument("CrystalConfig: wavelengths must be positive");
    if (!(pump_fwhm > 0.0))
        throw std::invalid_argument("CrystalConfig: pump_fwhm must be > 0");
    if (sellmeier_o.size() < 2 || sellmeier_o.size() % 2 != 0 ||
        sellmeier_e.size() < 2 || sellmeier_e.size() % 2 != 0)
        throw std::invalid_argument("CrystalConfig: malformed Sellmeier coefficients");
    if (!(validity_min > 0.0 && validity_max > validity_min))
        throw std::invalid_argument("CrystalConfig: malformed validity window");
    const double implied = 1.0 / design_signal + 1.0 / design_idler;
    if (std::abs(implied - 1.0 / pump_center) > 1e-4 * (1.0 / pump_center))
        throw std::invalid_argument(
            "CrystalConfig: design wavelengths violate energy conservation");
}

double sinc(double x) {
    if (std::abs(x) < 1e-8) return 1.0 - x * x / 6.0;
    return std::sin(x) / x;
}

double refractive_index(const CrystalConfig& config, double wavelength,
                        Polarization pol, double angle) {
    check_window(config, wavelength);
    const double no = sellmeier_n(config.sellmeier_o, wavelength);
    if (pol == Polarization::Ordinary) return no;
    const double ne = sellmeier_n(config.sellmeier_e, wavelength);
    const double c = std::cos(angle), s = std::sin(angle);
    return 1.0 / std::sqrt(c * c / (no * no) + s * s / (ne * ne));
}

double delta_k(const CrystalConfig& config, double lambda_s, double lambda_i) {
    return delta_k_at_angle(config, lambda_s, lambda_i, config.cut_angle);
}

double calibrate_cut_angle(CrystalConfig& config) {
    config.validate();
    const double half_bracket = 10.0 * std::numbers::pi / 180.0;
    double lo = std::max(config.cut_angle - half_bracket, 1e-6);
    double hi = std::min(config.cut_angle + half_bracket, std::numbers::pi / 2.0 - 1e-6);
    auto f = [&](double angle) {
        return delta_k_at_angle(config, config.design_signal, config.design_idler, angle);
    };
    double flo = f(lo), fhi = f(hi);
    if (flo == 0.0) {
        config.cut_angle = lo;
        return lo;
    }
    if (fhi == 0.0) {
        config.cut_angle = hi;
        return hi;
    }
    if (flo * fhi > 0.0)
        throw CalibrationError(
            "calibrate_cut_angle: no delta-k sign change within +-10 deg; "
            "coefficient file inconsistent with the design point");
    while (hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) {
            lo = hi = mid;
            break;
        }
        if (flo * fm < 0.0) {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    config.cut_angle = 0.5 * (lo + hi);
    return config.cut_angle;
}

SpectralGrid SpectralGrid::uniform(double signal_min, double signal_max,
                                   std::size_t n_signal, double idler_min,
                                   double idler_max, std::size_t n_idler) {
    if (n_signal < 2 || n_idler < 2)
        throw std::invalid_argument("SpectralGrid: need at least 2 points per axis");
    if (!(signal_max > signal_min) || !(idler_max > idler_min))
        throw std::invalid_argument("SpectralGrid: axis bounds must increase");
    SpectralGrid g;
    g.signal_axis.resize(n_signal);
    g.idler_axis.resize(n_idler);
    for (std::size_t i = 0; i < n_signal; ++i)
        g.signal_axis[i] =
            signal_min + (signal_max - signal_min) * static_cast<double>(i) /
                             static_cast<double>(n_signal - 1);
    for (std::size_t i = 0; i < n_idler; ++i)
        g.idler_axis[i] =
            idler_min + (idler_max - idler_min) * static_cast<double>(i) /
                            static_cast<double>(n_idler - 1);
    return g;
}

void SpectralGrid::validate() const {
    auto check_axis = [](const std::vector<double>& axis) {
        if (axis.size() < 2)
            throw std::invalid_argument("SpectralGrid: need at least 2 points per axis");
        for (std::size_t i = 1; i < axis.size(); ++i)
            if (!(axis[i] > axis[i - 1]))
                throw std::invalid_argument("SpectralGrid: axes must strictly increase");
    };
    check_axis(signal_axis);
    check_axis(idler_axis);
}

JsiGrid jsi(const CrystalConfig& config, const SpectralGrid& grid) {
    config.validate();
    grid.validate();
    JsiGrid out;
    out.signal_axis = grid.signal_axis;
    out.idler_axis = grid.idler_axis;
    out.values.assign(grid.signal_axis.size() * grid.idler_axis.size(), 0.0);
    // fixed evaluation and normalization order: results are bit-identical
    // however the loop is scheduled
    for (std::size_t is = 0; is < grid.signal_axis.size(); ++is) {
        for (std::size_t ii = 0; ii < grid.idler_axis.size(); ++ii) {
            const double ls = grid.signal_axis[is];
            const double li = grid.idler_axis[ii];
            const double pm = sinc(delta_k(config, ls, li) * config.length / 2.0);
            out.values[is * grid.idler_axis.size() + ii] =
                pump_envelope_sq(config, ls, li) * pm * pm;
        }
    }
    const double peak = *std::max_element(out.values.begin(), out.values.end());
    if (peak > 0.0) {
        for (double& v : out.values) v /= peak;
        out.normalized = true;
    } else {
        out.normalized = false;
    }
    return out;
}

Spectrum spdc_marginal(const JsiGrid& grid) {
    const std::size_t ns = grid.signal_axis.size(), ni = grid.idler_axis.size();
    if (ns < 2 || ni < 1)
        throw std::invalid_argument("spdc_marginal: degenerate grid");
    Spectrum s;
    s.wavelengths = grid.idler_axis;
    s.intensities.assign(ni, 0.0);
    for (std::size_t ii = 0; ii < ni; ++ii) {
        double acc = 0.0;
        for (std::size_t is = 0; is + 1 < ns; ++is) {
            const double h = grid.signal_axis[is + 1] - grid.signal_axis[is];
            acc += 0.5 * h * (grid.value(is, ii) + grid.value(is + 1, ii));
        }
        s.intensities[ii] = acc;
    }
    const double peak = *std::max_element(s.intensities.begin(), s.intensities.end());
    if (peak > 0.0) {
        for (double& v : s.intensities) v /= peak;
        s.normalized = true;
    } else {
        s.normalized = false;
    }
    return s;
}

Spectrum dfg_spectrum(const CrystalConfig& config, double seed_wavelength,
                      const std::vector<double>& idler_axis) {
    config.validate();
    check_window(config, seed_wavelength);
    if (idler_axis.size() < 2)
        throw std::invalid_argument("dfg_spectrum: need at least 2 idler samples");
    Spectrum s;
    s.wavelengths = idler_axis;
    s.intensities.resize(idler_axis.size());
    for (std::size_t ii = 0; ii < idler_axis.size(); ++ii) {
        const double li = idler_axis[ii];
        const double pm = sinc(delta_k(config, seed_wavelength, li) * config.length / 2.0);
        s.intensities[ii] = pump_envelope_sq(config, seed_wavelength, li) * pm * pm;
    }
    const double peak = *std::max_element(s.intensities.begin(), s.intensities.end());
    if (peak > 0.0) {
        for (double& v : s.intensities) v /= peak;
        s.normalized = true;
    } else {
        s.normalized = false;
    }
    return s;
}

double fwhm(const Spectrum& spectrum) {
    const auto& x = spectrum.wavelengths;
    const auto& y = spectrum.intensities;
    if (x.size() != y.size() || x.size() < 3)
        throw std::invalid_argument("fwhm: need at least 3 samples");
    const std::size_t peak =
        static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
    const double half = y[peak] / 2.0;
    if (!(y[peak] > 0.0))
        throw UnresolvedWidthError("fwhm: spectrum has no positive peak");

    // outermost crossings: scan inward from each end
    std::size_t left = 0;
    while (left < peak && y[left] < half) ++left;
    std::size_t right = x.size() - 1;
    while (right > peak && y[right] < half) --right;
    if (left == 0 || right == x.size() - 1)
        throw UnresolvedWidthError("fwhm: no half-maximum crossing on both sides");

    auto interp = [&](std::size_t below, std::size_t above) {
        return x[below] +
               (half - y[below]) * (x[above] - x[below]) / (y[above] - y[below]);
    };
    const double xl = interp(left - 1, left);
    const double xr = interp(right + 1, right);
    return xr - xl;
}

PhaseComparison phase_comparison(const PhaseDispersionModel& model,
                                 const Spectrum& spdc_idler, double seed_wavelength,
                                 double pump_center) {
    if (!std::isfinite(model.theta0) || !std::isfinite(model.slope))
        throw std::invalid_argument("phase_comparison: model parameters must be finite");
    const auto& x = spdc_idler.wavelengths;
    const auto& y = spdc_idler.intensities;
    if (x.size() != y.size() || x.empty())
        throw std::invalid_argument("phase_comparison: malformed spectrum");

    std::complex<double> acc{0.0, 0.0};
    double total = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        acc += y[i] * std::polar(1.0, model.theta(x[i]));
        total += y[i];
    }
    if (!(total > 0.0))
        throw UndefinedAverageError("phase_comparison: zero total intensity");

    PhaseComparison out;
    if (model.slope == 0.0) {
        // broadband average and single-wavelength sample coincide exactly
        out.theta_qst = model.theta0;
        out.theta_set = model.theta0;
        return out;
    }
    out.theta_qst = std::arg(acc);

    const double recip = 1.0 / pump_center - 1.0 / seed_wavelength;
    if (!(recip > 0.0))
        throw std::invalid_argument(
            "phase_comparison: seed wavelength incompatible with pump");
    out.theta_set = model.theta(1.0 / recip);
    return out;
}

}  // namespace pairtomo

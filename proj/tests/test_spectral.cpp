#include <doctest.h>

#include <cmath>
#include <numbers>

#include "pairtomo/io.hpp"
#include "pairtomo/spectral.hpp"

using namespace pairtomo;

namespace {

CrystalConfig shipped_config() {
    return io::read_crystal_config(io::default_crystal_file());
}

CrystalConfig calibrated_config() {
    CrystalConfig c = shipped_config();
    calibrate_cut_angle(c);
    return c;
}

Spectrum gaussian_spectrum(double center, double sigma, double lo, double hi,
                           std::size_t n) {
    Spectrum s;
    s.wavelengths.resize(n);
    s.intensities.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
        s.wavelengths[i] = x;
        const double u = (x - center) / sigma;
        s.intensities[i] = std::exp(-0.5 * u * u);
    }
    return s;
}

}  // namespace

TEST_CASE("shipped coefficient file loads and validates") {
    const auto c = shipped_config();
    CHECK(c.form == "sellmeier-3pole");
    CHECK(c.sellmeier_o.size() == 6);
    CHECK(c.sellmeier_e.size() == 6);
    CHECK(c.length == 2.0e-3);
    CHECK(c.pump_center == 532.0e-9);
    CHECK(!c.source.empty());
}

TEST_CASE("refractive_index matches the independently evaluated polynomial") {
    const auto c = shipped_config();
    // values computed from the coefficient file with a separate script
    CHECK(refractive_index(c, 810e-9, Polarization::Ordinary) ==
          doctest::Approx(2.250437222615).epsilon(1e-9));
    CHECK(refractive_index(c, 1550e-9, Polarization::Ordinary) ==
          doctest::Approx(2.208166670823).epsilon(1e-9));
    CHECK(refractive_index(c, 532e-9, Polarization::Ordinary) ==
          doctest::Approx(2.318791052608).epsilon(1e-9));

    // index ellipsoid endpoints
    for (double lam : {532e-9, 810e-9, 1550e-9}) {
        const double no = refractive_index(c, lam, Polarization::Ordinary);
        const double ne_axis =
            refractive_index(c, lam, Polarization::ExtraordinaryAtAngle,
                             std::numbers::pi / 2);
        CHECK(refractive_index(c, lam, Polarization::ExtraordinaryAtAngle, 0.0) ==
              doctest::Approx(no).epsilon(1e-12));
        CHECK(ne_axis < no);  // negative uniaxial
    }
    const double ne_532 =
        refractive_index(c, 532e-9, Polarization::ExtraordinaryAtAngle,
                         std::numbers::pi / 2);
    CHECK(ne_532 == doctest::Approx(2.223424207593).epsilon(1e-9));

    CHECK_THROWS_AS(refractive_index(c, 200e-9, Polarization::Ordinary), OutOfRangeError);
    CHECK_THROWS_AS(refractive_index(c, 9e-6, Polarization::Ordinary), OutOfRangeError);
}

TEST_CASE("refractive_index is continuous over the window") {
    // the dispersion slope is steepest near the UV edge (~1.2e-3 per nm);
    // a bounded step-to-step change rules out coefficient-file poles inside
    // the validity window
    const auto c = shipped_config();
    double prev = refractive_index(c, 420e-9, Polarization::Ordinary);
    for (double lam = 421e-9; lam < 4.8e-6; lam += 1e-9) {
        const double n = refractive_index(c, lam, Polarization::Ordinary);
        CHECK(n > 1.0);
        CHECK(std::abs(n - prev) < 2e-3);
        prev = n;
    }
}

TEST_CASE("energy conservation fixes the pump wavelength") {
    const double implied = 1.0 / (1.0 / 810e-9 + 1.0 / 1550e-9);
    CHECK(implied * 1e9 == doctest::Approx(531.991525).epsilon(1e-7));
}

TEST_CASE("calibrate_cut_angle finds the phase-matching root near the cut") {
    CrystalConfig c = shipped_config();
    const double root = calibrate_cut_angle(c);
    CHECK(root == c.cut_angle);
    CHECK(root > 58.0 * std::numbers::pi / 180.0);
    CHECK(root < 78.0 * std::numbers::pi / 180.0);
    // bisection oracle over the same bracket, frozen
    CHECK(root == doctest::Approx(1.189593852738).epsilon(1e-8));

    const double lambda_p = 1.0 / (1.0 / c.design_signal + 1.0 / c.design_idler);
    CHECK(std::abs(delta_k(c, c.design_signal, c.design_idler)) <
          1e-6 * (2.0 * std::numbers::pi / lambda_p));

    // already-calibrated config is a fixed point
    const double again = calibrate_cut_angle(c);
    CHECK(std::abs(again - root) < 1e-10);

    CrystalConfig off = shipped_config();
    off.cut_angle = 20.0 * std::numbers::pi / 180.0;
    CHECK_THROWS_AS(calibrate_cut_angle(off), CalibrationError);
}

TEST_CASE("delta_k rejects wavelengths whose pump leaves the window") {
    const auto c = calibrated_config();
    // 1/(1/402nm + 1/1550nm) = 319 nm, below the 400 nm window edge
    CHECK_THROWS_AS(delta_k(c, 402e-9, 1550e-9), OutOfRangeError);
    CHECK_THROWS_AS(delta_k(c, 300e-9, 1550e-9), OutOfRangeError);

    const auto outside =
        SpectralGrid::uniform(4.9e-6, 5.2e-6, 4, 1480e-9, 1620e-9, 4);
    CHECK_THROWS_AS(jsi(c, outside), OutOfRangeError);
}

TEST_CASE("delta_k is continuous in the signal wavelength") {
    const auto c = calibrated_config();
    const double d0 = delta_k(c, 810.00e-9, 1550e-9);
    const double d1 = delta_k(c, 810.10e-9, 1550e-9);
    // slope bound from a finer central difference around the same point
    const double slope =
        (delta_k(c, 810.06e-9, 1550e-9) - delta_k(c, 810.04e-9, 1550e-9)) / 0.02e-9;
    CHECK(std::abs(d1 - d0) < 1.5 * std::abs(slope) * 0.1e-9 + 1.0);
}

TEST_CASE("jsi peaks exactly at the calibrated design point") {
    const auto c = calibrated_config();
    // grid containing (810, 1550) exactly
    const auto grid = SpectralGrid::uniform(800e-9, 820e-9, 5, 1540e-9, 1560e-9, 5);
    const auto j = jsi(c, grid);
    CHECK(j.normalized);
    CHECK(j.value(2, 2) == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t is = 0; is < 5; ++is)
        for (std::size_t ii = 0; ii < 5; ++ii) CHECK(j.value(is, ii) <= 1.0);

    // corners of this grid sit far off energy conservation: the pump
    // envelope suppresses them by many orders of magnitude
    CHECK(j.value(0, 0) < 1e-6);
    CHECK(j.value(4, 4) < 1e-6);
    CHECK(j.value(0, 4) < 1e-6);
}

TEST_CASE("jsi ridge follows the energy-conservation curve") {
    const auto c = calibrated_config();
    const auto grid =
        SpectralGrid::uniform(790e-9, 830e-9, 512, 1480e-9, 1620e-9, 512);
    const auto j = jsi(c, grid);
    const double step = grid.idler_axis[1] - grid.idler_axis[0];
    int checked = 0;
    for (std::size_t is = 0; is < grid.signal_axis.size(); ++is) {
        const double ls = grid.signal_axis[is];
        const double li_star = 1.0 / (1.0 / c.pump_center - 1.0 / ls);
        if (li_star < 1490e-9 || li_star > 1610e-9) continue;
        ++checked;
        std::size_t best = 0;
        for (std::size_t ii = 1; ii < grid.idler_axis.size(); ++ii)
            if (j.value(is, ii) > j.value(is, best)) best = ii;
        CHECK(std::abs(grid.idler_axis[best] - li_star) <= 3.0 * step);
    }
    CHECK(checked > 400);
}

TEST_CASE("spdc_marginal peaks at the design idler") {
    const auto c = calibrated_config();
    const auto grid =
        SpectralGrid::uniform(790e-9, 830e-9, 256, 1480e-9, 1620e-9, 256);
    const auto marginal = spdc_marginal(jsi(c, grid));
    CHECK(marginal.normalized);
    const double step = grid.idler_axis[1] - grid.idler_axis[0];
    std::size_t best = 0;
    for (std::size_t i = 1; i < marginal.intensities.size(); ++i)
        if (marginal.intensities[i] > marginal.intensities[best]) best = i;
    CHECK(std::abs(marginal.wavelengths[best] - c.design_idler) <= step);
}

TEST_CASE("spdc_marginal handles degenerate input") {
    JsiGrid zero;
    zero.signal_axis = {1.0e-6, 1.1e-6, 1.2e-6};
    zero.idler_axis = {1.5e-6, 1.6e-6};
    zero.values.assign(6, 0.0);
    const auto s = spdc_marginal(zero);
    CHECK_FALSE(s.normalized);
    for (double v : s.intensities) CHECK(v == 0.0);
}

TEST_CASE("a symmetric grid gives a symmetric marginal") {
    JsiGrid g;
    const std::size_t n = 41;
    g.signal_axis.resize(n);
    g.idler_axis.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        g.signal_axis[i] = 800e-9 + static_cast<double>(i) * 0.5e-9;
        g.idler_axis[i] = 1540e-9 + static_cast<double>(i) * 0.5e-9;
    }
    g.values.resize(n * n);
    for (std::size_t is = 0; is < n; ++is)
        for (std::size_t ii = 0; ii < n; ++ii) {
            const double u = (static_cast<double>(is) - 20.0) / 8.0;
            const double w = (static_cast<double>(ii) - 20.0) / 6.0;
            g.values[is * n + ii] = std::exp(-0.5 * (u * u + w * w));
        }
    const auto s = spdc_marginal(g);
    for (std::size_t i = 0; i < n; ++i)
        CHECK(std::abs(s.intensities[i] - s.intensities[n - 1 - i]) < 1e-9);
}

TEST_CASE("dfg_spectrum peaks at the phase-matched idler and shifts with the seed") {
    const auto c = calibrated_config();
    const auto grid =
        SpectralGrid::uniform(790e-9, 830e-9, 2, 1480e-9, 1620e-9, 1024);
    const auto dfg = dfg_spectrum(c, c.design_signal, grid.idler_axis);
    CHECK(dfg.normalized);
    const double step = grid.idler_axis[1] - grid.idler_axis[0];
    auto argmax = [](const Spectrum& s) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < s.intensities.size(); ++i)
            if (s.intensities[i] > s.intensities[best]) best = i;
        return best;
    };
    CHECK(std::abs(dfg.wavelengths[argmax(dfg)] - c.design_idler) <= step);

    // a longer seed phase-matches a shorter idler
    const auto detuned = dfg_spectrum(c, c.design_signal + 1e-9, grid.idler_axis);
    CHECK(detuned.wavelengths[argmax(detuned)] < dfg.wavelengths[argmax(dfg)]);

    CHECK_THROWS_AS(dfg_spectrum(c, 200e-9, grid.idler_axis), OutOfRangeError);
}

TEST_CASE("the SPDC marginal is much wider than the DFG line") {
    const auto c = calibrated_config();
    const auto grid =
        SpectralGrid::uniform(790e-9, 830e-9, 512, 1480e-9, 1620e-9, 1024);
    const auto spdc = spdc_marginal(jsi(c, grid));
    const auto dfg = dfg_spectrum(c, c.design_signal, grid.idler_axis);
    const double w_spdc = fwhm(spdc);
    const double w_dfg = fwhm(dfg);
    CHECK(w_spdc / w_dfg >= 5.0);
    // absolute widths frozen from the independent oracle run
    CHECK(w_spdc == doctest::Approx(11.86e-9).epsilon(0.02));
    CHECK(w_dfg == doctest::Approx(0.86e-9).epsilon(0.05));
}

TEST_CASE("doubling the crystal length never widens the DFG line") {
    auto c = calibrated_config();
    const auto grid =
        SpectralGrid::uniform(790e-9, 830e-9, 2, 1480e-9, 1620e-9, 2048);
    const double w1 = fwhm(dfg_spectrum(c, c.design_signal, grid.idler_axis));
    c.length *= 2.0;
    const double w2 = fwhm(dfg_spectrum(c, c.design_signal, grid.idler_axis));
    CHECK(w2 <= w1 * (1.0 + 1e-9));
}

TEST_CASE("jsi converges under grid refinement") {
    const auto c = calibrated_config();
    auto total = [&](std::size_t n) {
        const auto grid =
            SpectralGrid::uniform(790e-9, 830e-9, n, 1480e-9, 1620e-9, n);
        const auto j = jsi(c, grid);
        // trapezoid in both axes
        double acc = 0.0;
        for (std::size_t is = 0; is + 1 < n; ++is) {
            for (std::size_t ii = 0; ii + 1 < n; ++ii) {
                const double cell = 0.25 * (j.value(is, ii) + j.value(is + 1, ii) +
                                            j.value(is, ii + 1) + j.value(is + 1, ii + 1));
                acc += cell * (grid.signal_axis[is + 1] - grid.signal_axis[is]) *
                       (grid.idler_axis[ii + 1] - grid.idler_axis[ii]);
            }
        }
        return acc;
    };
    const double t256 = total(256);
    const double t512 = total(512);
    CHECK(std::abs(t512 - t256) / t512 < 0.01);
}

TEST_CASE("sinc basics") {
    CHECK(sinc(0.0) == 1.0);
    CHECK(sinc(1e-9) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(sinc(std::numbers::pi) == doctest::Approx(0.0).epsilon(1e-12));
    for (double x = -50.0; x <= 50.0; x += 0.37) {
        const double s = sinc(x);
        CHECK(s * s <= 1.0);
        CHECK(s * s >= 0.0);
    }
}

TEST_CASE("fwhm of known shapes") {
    const double sigma = 2.0e-9;
    const auto g = gaussian_spectrum(1550e-9, sigma, 1530e-9, 1570e-9, 4001);
    const double step = g.wavelengths[1] - g.wavelengths[0];
    CHECK(std::abs(fwhm(g) - 2.3548200450309493 * sigma) < 0.005 * step + 1e-15);

    // symmetric triangle of base width w peaks at 1: FWHM = w/2
    Spectrum tri;
    const double w = 10e-9;
    for (int i = 0; i <= 100; ++i) {
        const double x = 1545e-9 + w * i / 100.0;
        tri.wavelengths.push_back(x);
        tri.intensities.push_back(1.0 - std::abs(i - 50.0) / 50.0);
    }
    CHECK(fwhm(tri) == doctest::Approx(w / 2.0).epsilon(1e-9));

    Spectrum monotone;
    for (int i = 0; i < 50; ++i) {
        monotone.wavelengths.push_back(1500e-9 + i * 1e-9);
        monotone.intensities.push_back(static_cast<double>(i));
    }
    CHECK_THROWS_AS(fwhm(monotone), UnresolvedWidthError);
}

TEST_CASE("phase_comparison") {
    // consistent pump makes the seed's phase-matched idler the design idler
    const double pump = 1.0 / (1.0 / 810e-9 + 1.0 / 1550e-9);

    SUBCASE("zero slope collapses both phases to theta0") {
        const auto s = gaussian_spectrum(1552e-9, 3e-9, 1500e-9, 1600e-9, 301);
        const PhaseDispersionModel model{0.7321, 0.0, 1550e-9};
        const auto cmp = phase_comparison(model, s, 810e-9, pump);
        CHECK(cmp.theta_qst == 0.7321);
        CHECK(cmp.theta_set == 0.7321);
    }

    SUBCASE("symmetric spectrum cancels the linear term") {
        const auto s = gaussian_spectrum(1550e-9, 4e-9, 1500e-9, 1600e-9, 501);
        const PhaseDispersionModel model{0.02, 2.0e5, 1550e-9};
        const auto cmp = phase_comparison(model, s, 810e-9, pump);
        CHECK(std::abs(cmp.theta_qst - 0.02) < 1e-9);
        CHECK(std::abs(cmp.theta_set - 0.02) < 1e-9);
        CHECK(std::abs(cmp.theta_qst - cmp.theta_set) < 1e-9);
    }

    SUBCASE("skewed spectrum biases the averaged phase along the skew") {
        // mass shifted toward longer idler wavelengths
        auto s = gaussian_spectrum(1555e-9, 3e-9, 1500e-9, 1600e-9, 501);
        const double slope = 3.0e5;
        const PhaseDispersionModel model{0.0138, slope, 1550e-9};
        const auto cmp = phase_comparison(model, s, 810e-9, pump);
        CHECK(cmp.theta_qst > cmp.theta_set);

        // quadrature oracle for the circular mean
        double re = 0.0, im = 0.0;
        for (std::size_t i = 0; i < s.wavelengths.size(); ++i) {
            const double th = model.theta0 + slope * (s.wavelengths[i] - 1550e-9);
            re += s.intensities[i] * std::cos(th);
            im += s.intensities[i] * std::sin(th);
        }
        CHECK(cmp.theta_qst == doctest::Approx(std::atan2(im, re)).epsilon(1e-12));

        // flipping the skew flips the sign of the discrepancy
        const auto s_low = gaussian_spectrum(1545e-9, 3e-9, 1500e-9, 1600e-9, 501);
        const auto cmp_low = phase_comparison(model, s_low, 810e-9, pump);
        CHECK(cmp_low.theta_qst < cmp_low.theta_set);
    }

    SUBCASE("zero spectrum is rejected") {
        Spectrum zero;
        zero.wavelengths = {1540e-9, 1550e-9, 1560e-9};
        zero.intensities = {0.0, 0.0, 0.0};
        const PhaseDispersionModel model{0.0, 1.0, 1550e-9};
        CHECK_THROWS_AS(phase_comparison(model, zero, 810e-9, pump),
                        UndefinedAverageError);
    }
}

TEST_CASE("CrystalConfig validation") {
    CrystalConfig c = shipped_config();
    c.design_signal = 700e-9;  // breaks energy conservation with the pump
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);

    c = shipped_config();
    c.length = 0.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);

    c = shipped_config();
    c.sellmeier_o = {1.0};
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

// pairtomo command-line tool: simulation, reconstruction, metrics and
// crystal spectral models as reproducible file-to-file pipelines. Every
// command is deterministic for a fixed --seed; partial outputs are removed
// on failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pairtomo/io.hpp"
#include "pairtomo/measurement.hpp"
#include "pairtomo/mle.hpp"
#include "pairtomo/qstate.hpp"
#include "pairtomo/spectral.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace pairtomo;

namespace {

DensityMatrix parse_state(const std::string& spec) {
    if (spec.rfind("bell:", 0) == 0)
        return bell_state(std::stod(spec.substr(5)));
    if (spec == "mixed") return maximally_mixed();
    if (spec.rfind("werner:", 0) == 0)
        return werner_state(std::stod(spec.substr(7)));
    if (fs::exists(spec)) return io::read_density_matrix(spec);
    throw std::invalid_argument(
        "unknown state '" + spec +
        "' (expected bell:<theta>, mixed, werner:<p>, or a JSON file)");
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
}

QstNoiseModel parse_qst_noise(const std::string& path, std::optional<std::uint64_t> seed) {
    QstNoiseModel m;
    if (!path.empty()) {
        const json j = load_json_file(path);
        m.pair_rate = j.value("pair_rate", m.pair_rate);
        m.integration_time = j.value("integration_time", m.integration_time);
        m.efficiency_signal = j.value("efficiency_signal", m.efficiency_signal);
        m.efficiency_idler = j.value("efficiency_idler", m.efficiency_idler);
        m.dark_coincidence_rate = j.value("dark_coincidence_rate", m.dark_coincidence_rate);
        m.rng_seed = j.value("rng_seed", m.rng_seed);
    }
    if (seed) m.rng_seed = *seed;  // flags override file values
    return m;
}

SetNoiseModel parse_set_noise(const std::string& path, std::optional<std::uint64_t> seed) {
    SetNoiseModel m;
    if (!path.empty()) {
        const json j = load_json_file(path);
        m.gain = j.value("gain", m.gain);
        m.seed_power_nominal = j.value("seed_power_nominal", m.seed_power_nominal);
        m.seed_power_jitter_rel = j.value("seed_power_jitter_rel", m.seed_power_jitter_rel);
        m.detector_noise_rel = j.value("detector_noise_rel", m.detector_noise_rel);
        m.detector_floor = j.value("detector_floor", m.detector_floor);
        m.seed_conjugation = j.value("seed_conjugation", m.seed_conjugation);
        m.rng_seed = j.value("rng_seed", m.rng_seed);
    }
    if (seed) m.rng_seed = *seed;
    return m;
}

std::pair<std::size_t, std::size_t> parse_grid(const std::string& spec) {
    const auto x = spec.find('x');
    if (x == std::string::npos)
        throw std::invalid_argument("grid must be <n>x<n>, got '" + spec + "'");
    return {std::stoul(spec.substr(0, x)), std::stoul(spec.substr(x + 1))};
}

std::pair<double, double> parse_window_nm(const std::string& spec) {
    const auto c = spec.find(':');
    if (c == std::string::npos)
        throw std::invalid_argument("window must be <lo>:<hi> in nm, got '" + spec + "'");
    return {std::stod(spec.substr(0, c)) * 1e-9, std::stod(spec.substr(c + 1)) * 1e-9};
}

CrystalConfig load_crystal(const std::string& path, bool calibrate) {
    CrystalConfig c = io::read_crystal_config(path.empty() ? io::default_crystal_file()
                                                           : fs::path(path));
    if (calibrate) calibrate_cut_angle(c);
    return c;
}

// Tracks this command's declared artifacts so a failure never leaves a
// torn file behind.
struct OutputGuard {
    std::vector<fs::path> paths;
    bool committed = false;

    void declare(const fs::path& p) { paths.push_back(p); }
    ~OutputGuard() {
        if (committed) return;
        for (const auto& p : paths) {
            std::error_code ec;
            fs::remove(p, ec);
        }
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tomography toolkit for frequency non-degenerate entangled photon-pair sources"};
    app.require_subcommand(1);

    std::string state_spec = "bell:0";
    std::string noise_path;
    std::string in_path, out_path, rho_path, crystal_path;
    std::string target_spec;
    std::string method = "mle";
    std::string grid_spec = "256x256";
    std::string signal_window = "790:830";
    std::string idler_window = "1480:1620";
    std::string bootstrap_out;
    std::optional<std::uint64_t> seed_flag;
    int bootstrap_n = 0;
    double gain = PowerNormalization{}.gain;
    double floor_w = 0.0;
    double power_noise_rel = 0.01;
    double theta0 = 0.0, slope = 0.0;
    double seed_wavelength = 810e-9;
    bool poisson = false;
    bool no_calibrate = false;

    auto* sim_qst = app.add_subcommand("simulate-qst",
                                       "Simulate coincidence counts over the 36-setting plan");
    sim_qst->add_option("--state", state_spec, "bell:<theta>, mixed, werner:<p>, or JSON file");
    sim_qst->add_option("--noise", noise_path, "QST noise model JSON");
    sim_qst->add_option("--seed", seed_flag, "RNG seed (overrides noise file)");
    sim_qst->add_option("--out", out_path, "Records CSV")->required();

    auto* sim_set = app.add_subcommand("simulate-set",
                                       "Simulate stimulated idler powers over the 36-setting plan");
    sim_set->add_option("--state", state_spec, "bell:<theta>, mixed, werner:<p>, or JSON file");
    sim_set->add_option("--noise", noise_path, "SET noise model JSON");
    sim_set->add_option("--seed", seed_flag, "RNG seed (overrides noise file)");
    sim_set->add_option("--out", out_path, "Records CSV")->required();

    auto* rec = app.add_subcommand("reconstruct", "Reconstruct a density matrix from records");
    rec->add_option("--in", in_path, "Records CSV")->required();
    rec->add_option("--method", method, "mle or linear")
        ->check(CLI::IsMember({"mle", "linear"}));
    rec->add_option("--bootstrap", bootstrap_n, "Number of bootstrap resamples (0 = off)");
    rec->add_option("--bootstrap-out", bootstrap_out,
                    "Bootstrap CSV (default: <out>.bootstrap.csv)");
    rec->add_option("--target", target_spec, "Fidelity target for bootstrap metrics");
    rec->add_option("--seed", seed_flag, "Bootstrap RNG seed");
    rec->add_option("--gain", gain, "Power normalization gain (W out per W seed)");
    rec->add_option("--floor", floor_w, "Detector floor subtracted from powers (W)");
    rec->add_option("--power-noise-rel", power_noise_rel,
                    "Relative sigma for bootstrap resampling of powers");
    rec->add_flag("--poisson", poisson, "Exact Poisson likelihood for counts");
    rec->add_option("--out", out_path, "Reconstruction JSON")->required();

    auto* met = app.add_subcommand("metrics", "Entanglement metrics of a density matrix");
    met->add_option("--rho", rho_path, "Density matrix JSON")->required();
    met->add_option("--target", target_spec, "Fidelity target (e.g. bell:0)");
    met->add_option("--out", out_path, "Metrics CSV")->required();

    auto* jsi_cmd = app.add_subcommand("jsi", "Joint spectral intensity on a wavelength grid");
    jsi_cmd->add_option("--crystal", crystal_path, "Crystal/Sellmeier JSON (default: shipped file)");
    jsi_cmd->add_option("--grid", grid_spec, "Samples per axis, e.g. 256x256");
    jsi_cmd->add_option("--signal-window-nm", signal_window, "Signal axis range lo:hi (nm)");
    jsi_cmd->add_option("--idler-window-nm", idler_window, "Idler axis range lo:hi (nm)");
    jsi_cmd->add_flag("--no-calibrate", no_calibrate, "Skip cut-angle calibration");
    jsi_cmd->add_option("--out", out_path, "JSI CSV")->required();

    auto* spec_cmd = app.add_subcommand("spectra",
                                        "SPDC marginal and seeded DFG idler spectra");
    spec_cmd->add_option("--crystal", crystal_path, "Crystal/Sellmeier JSON (default: shipped file)");
    spec_cmd->add_option("--grid", grid_spec, "JSI samples per axis used for the marginal");
    spec_cmd->add_option("--signal-window-nm", signal_window, "Signal axis range lo:hi (nm)");
    spec_cmd->add_option("--idler-window-nm", idler_window, "Idler axis range lo:hi (nm)");
    spec_cmd->add_option("--seed-wavelength", seed_wavelength, "DFG seed wavelength (m)");
    spec_cmd->add_flag("--no-calibrate", no_calibrate, "Skip cut-angle calibration");
    spec_cmd->add_option("--out", out_path, "Spectra CSV")->required();

    auto* phase = app.add_subcommand("phase-model",
                                     "Spectrally averaged vs seed-sampled biphoton phase");
    phase->add_option("--theta0", theta0, "Phase at the design idler wavelength (rad)")->required();
    phase->add_option("--slope", slope, "Phase slope (rad per m of idler wavelength)")->required();
    phase->add_option("--seed-wavelength", seed_wavelength, "SET seed wavelength (m)");
    phase->add_option("--crystal", crystal_path, "Crystal/Sellmeier JSON (default: shipped file)");
    phase->add_option("--grid", grid_spec, "JSI samples per axis used for the marginal");
    phase->add_option("--signal-window-nm", signal_window, "Signal axis range lo:hi (nm)");
    phase->add_option("--idler-window-nm", idler_window, "Idler axis range lo:hi (nm)");
    phase->add_option("--out", out_path, "Phase comparison CSV")->required();

    CLI11_PARSE(app, argc, argv);
    const std::string command = app.get_subcommands().front()->get_name();

    OutputGuard guard;
    try {
        if (*sim_qst || *sim_set) {
            const DensityMatrix rho = parse_state(state_spec);
            const auto plan = build_plan();
            std::vector<MeasurementRecord> records;
            if (*sim_qst) {
                records = simulate_qst(rho, plan, parse_qst_noise(noise_path, seed_flag));
            } else {
                records = simulate_set(rho, plan, parse_set_noise(noise_path, seed_flag));
            }
            guard.declare(out_path);
            io::write_records_csv(out_path, records);
        } else if (*rec) {
            const auto records = io::read_records_csv(in_path);
            if (records.empty())
                std::cerr << "warning: " << in_path << " has no data rows\n";
            FitOptions fopts;
            fopts.poisson_likelihood = poisson;
            fopts.normalization = {gain, floor_w};
            ReconstructionResult result =
                method == "linear" ? linear_reconstruct(records, fopts)
                                   : mle_fit(records, std::nullopt, fopts);
            guard.declare(out_path);
            io::write_reconstruction(out_path, result);
            if (bootstrap_n > 0) {
                BootstrapOptions bopts;
                bopts.n_resamples = bootstrap_n;
                bopts.rng_seed = seed_flag.value_or(0);
                bopts.power_noise_rel = power_noise_rel;
                bopts.fit = fopts;
                std::vector<std::string> metric_names{"concurrence", "purity",
                                                      "relative_phase"};
                if (!target_spec.empty()) {
                    bopts.fidelity_target = parse_state(target_spec);
                    metric_names.insert(metric_names.begin(), "fidelity");
                }
                const fs::path bpath = bootstrap_out.empty()
                                           ? fs::path(out_path + ".bootstrap.csv")
                                           : fs::path(bootstrap_out);
                guard.declare(bpath);
                io::write_bootstrap_csv(bpath, bootstrap(records, metric_names, bopts));
            }
        } else if (*met) {
            const DensityMatrix rho = io::read_density_matrix(rho_path);
            std::optional<DensityMatrix> target;
            if (!target_spec.empty()) target = parse_state(target_spec);
            guard.declare(out_path);
            io::write_metrics_csv(out_path, io::compute_metrics(rho, target));
        } else if (*jsi_cmd || *spec_cmd || *phase) {
            CrystalConfig config = load_crystal(crystal_path, !no_calibrate);
            const auto [ns, ni] = parse_grid(grid_spec);
            const auto [slo, shi] = parse_window_nm(signal_window);
            const auto [ilo, ihi] = parse_window_nm(idler_window);
            const auto grid = SpectralGrid::uniform(slo, shi, ns, ilo, ihi, ni);
            if (*jsi_cmd) {
                guard.declare(out_path);
                io::write_jsi_csv(out_path, jsi(config, grid));
            } else if (*spec_cmd) {
                const auto j = jsi(config, grid);
                const auto spdc = spdc_marginal(j);
                const auto dfg = dfg_spectrum(config, seed_wavelength, grid.idler_axis);
                guard.declare(out_path);
                io::write_spectra_csv(out_path, spdc, dfg);
                std::cout << "spdc_fwhm_nm=" << io::format_double(fwhm(spdc) * 1e9)
                          << " dfg_fwhm_nm=" << io::format_double(fwhm(dfg) * 1e9) << "\n";
            } else {
                const auto spdc = spdc_marginal(jsi(config, grid));
                PhaseDispersionModel model{theta0, slope, config.design_idler};
                const auto cmp =
                    phase_comparison(model, spdc, seed_wavelength, config.pump_center);
                guard.declare(out_path);
                io::write_phase_comparison_csv(out_path, cmp);
            }
        }
        guard.committed = true;
        return 0;
    } catch (const std::exception& e) {
        json err;
        err["error"] = {{"command", command}, {"message", e.what()}};
        std::cerr << err.dump() << "\n";
        return 1;
    }
}

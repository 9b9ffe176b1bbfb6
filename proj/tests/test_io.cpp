#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "pairtomo/io.hpp"
#include "test_support.hpp"

using namespace pairtomo;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("pairtomo_io_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

}  // namespace

TEST_CASE("format_double round trips") {
    for (double v : {0.0, 1.0, 0.06e-9, 531.991525e-9, -3.14159, 1e-300, 4980.0}) {
        const std::string s = io::format_double(v);
        CHECK(std::stod(s) == v);
        CHECK(s.find(',') == std::string::npos);
    }
    CHECK(io::format_double(4980.0) == "4980");
}

TEST_CASE("density matrix JSON round trip is exact") {
    std::mt19937_64 rng(55);
    for (int n = 0; n < 20; ++n) {
        const auto rho = n % 2 ? testsup::random_mixed_state(rng)
                               : testsup::random_pure_state(rng);
        const auto back = io::density_matrix_from_json(io::density_matrix_to_json(rho));
        // shortest round-trip decimal repr reparses to the same bits
        CHECK((back.matrix() - rho.matrix()).cwiseAbs().maxCoeff() == 0.0);
    }
    const std::string j = io::density_matrix_to_json(bell_state(0.0));
    CHECK(j.find("\"basis\"") != std::string::npos);
    CHECK(j.find("\"HH\"") != std::string::npos);

    CHECK_THROWS_AS(io::density_matrix_from_json("{\"re\": []}"), ParseError);
    CHECK_THROWS_AS(io::density_matrix_from_json("not json"), ParseError);
}

TEST_CASE("records CSV round trip preserves every field") {
    std::mt19937_64 rng(66);
    const auto plan = build_plan();

    SetNoiseModel set_noise;
    set_noise.detector_noise_rel = 0.01;
    set_noise.rng_seed = 2;
    const auto powers = simulate_set(bell_state(0.2), plan, set_noise);
    const auto powers_back = io::records_from_csv(io::records_to_csv(powers));
    REQUIRE(powers_back.size() == powers.size());
    for (std::size_t k = 0; k < powers.size(); ++k) {
        CHECK(powers_back[k].setting == powers[k].setting);
        CHECK(powers_back[k].kind == powers[k].kind);
        CHECK(powers_back[k].value == powers[k].value);
        CHECK(*powers_back[k].seed_power == *powers[k].seed_power);
        CHECK_FALSE(powers_back[k].integration_time.has_value());
    }

    QstNoiseModel qst_noise;
    qst_noise.rng_seed = 3;
    const auto counts = simulate_qst(bell_state(0.2), plan, qst_noise);
    const auto counts_back = io::records_from_csv(io::records_to_csv(counts));
    for (std::size_t k = 0; k < counts.size(); ++k) {
        CHECK(counts_back[k].value == counts[k].value);
        CHECK(*counts_back[k].integration_time == *counts[k].integration_time);
        CHECK_FALSE(counts_back[k].seed_power.has_value());
    }

    CHECK(io::records_from_csv(io::records_to_csv({})).empty());
}

TEST_CASE("records CSV parsing errors name the offending line") {
    const std::string header =
        "setting_signal,setting_idler,value_kind,value,seed_power,integration_time\n";

    // the documented one-row example: 20 mW seed, 0.06 nW reading
    const auto one = io::records_from_csv(header + "H,H,power,6.0e-11,2.0e-2,\n");
    REQUIRE(one.size() == 1);
    CHECK(one[0].kind == ValueKind::Power);
    CHECK(*one[0].seed_power == 0.02);

    CHECK(io::records_from_csv(header).empty());  // header-only file

    auto throws_with = [&](const std::string& body, const char* needle) {
        try {
            io::records_from_csv(header + body);
            FAIL_CHECK("expected ParseError for: " << body);
        } catch (const ParseError& e) {
            CHECK(std::string(e.what()).find(needle) != std::string::npos);
        }
    };
    throws_with("H,H,counts,12.5,,1\n", "line 2");         // non-integer counts
    throws_with("H,H,counts,-3,,1\n", "line 2");           // negative value
    throws_with("H,H,counts,10,1\n", "line 2");            // missing column
    throws_with("H,X,counts,10,,1\n", "line 2");           // unknown basis
    throws_with("H,H,watts,10,,1\n", "line 2");            // unknown kind
    throws_with("H,H,power,1e-9,0,\n", "line 2");          // zero seed power
    throws_with("H,H,counts,10,,1\nH,V,power,1e-9,2e-2,\n", "line 3");  // mixed kinds

    CHECK_THROWS_AS(io::records_from_csv(""), ParseError);
    CHECK_THROWS_AS(io::records_from_csv("a,b,c\n"), ParseError);
}

TEST_CASE("metrics report and CSV") {
    const auto bell = bell_state(0.0);
    const auto report = io::compute_metrics(bell, bell);
    REQUIRE(report.fidelity_to_target.has_value());
    CHECK(*report.fidelity_to_target == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(report.concurrence == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(report.purity == doctest::Approx(1.0).epsilon(1e-12));
    REQUIRE(report.relative_phase.has_value());
    CHECK(*report.relative_phase == doctest::Approx(0.0).epsilon(1e-12));

    const auto mixed_report = io::compute_metrics(maximally_mixed(), bell);
    CHECK(*mixed_report.fidelity_to_target == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(mixed_report.concurrence == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(mixed_report.purity == doctest::Approx(0.25).epsilon(1e-12));
    CHECK_FALSE(mixed_report.relative_phase.has_value());  // omitted, not zero

    // bootstrap std_devs attach to matching rows
    const auto with_stats = io::compute_metrics(
        bell, bell, {{"fidelity", 0.993, 1.2e-4, 100, 0}, {"purity", 0.99, 2e-3, 100, 0}});
    CHECK(with_stats.std_devs.at("fidelity") == 1.2e-4);
    CHECK(with_stats.std_devs.at("purity") == 2e-3);

    TempDir tmp;
    const auto stats_csv = tmp.path / "with_stats.csv";
    io::write_metrics_csv(stats_csv, with_stats);
    {
        std::ifstream in(stats_csv);
        std::string line;
        bool fidelity_std = false, purity_std = false;
        while (std::getline(in, line)) {
            if (line.rfind("fidelity,", 0) == 0)
                fidelity_std = line.find(",0.00012,") != std::string::npos;
            if (line.rfind("purity,", 0) == 0)
                purity_std = line.find(",0.002,") != std::string::npos;
        }
        CHECK(fidelity_std);
        CHECK(purity_std);
    }

    const auto csv_path = tmp.path / "metrics.csv";
    io::write_metrics_csv(csv_path, mixed_report);
    std::ifstream in(csv_path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "metric,value,std_dev,note");
    bool phase_row = false;
    while (std::getline(in, line)) {
        if (line.rfind("relative_phase", 0) == 0) {
            phase_row = true;
            CHECK(line.find("undefined") != std::string::npos);
            CHECK(line.rfind("relative_phase,,", 0) == 0);  // no value emitted
        }
    }
    CHECK(phase_row);
}

TEST_CASE("bootstrap CSV layout") {
    TempDir tmp;
    const auto path = tmp.path / "boot.csv";
    io::write_bootstrap_csv(path, {{"fidelity", 0.993, 0.0001, 100, 0},
                                   {"relative_phase", 0.0247, 0.002, 100, 3}});
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "metric,mean,std_dev,n_resamples,skipped");
    std::getline(in, line);
    CHECK(line == "fidelity,0.993,1e-04,100,0");
    std::getline(in, line);
    CHECK(line == "relative_phase,0.0247,0.002,100,3");
}

TEST_CASE("crystal config parsing") {
    const auto c = io::read_crystal_config(io::default_crystal_file());
    CHECK(c.validity_min == doctest::Approx(400e-9).epsilon(1e-12));
    CHECK(c.validity_max == doctest::Approx(5000e-9).epsilon(1e-12));

    TempDir tmp;
    const auto bad = tmp.path / "bad.json";
    std::ofstream(bad) << "{\"form\": \"unknown\", \"ordinary\": [1,2],"
                          "\"extraordinary\": [1,2], \"validity_window_nm\": [400,5000]}";
    CHECK_THROWS_AS(io::read_crystal_config(bad), ParseError);

    const auto missing = tmp.path / "missing.json";
    CHECK_THROWS_AS(io::read_crystal_config(missing), ParseError);

    // geometry overrides ride along with the coefficient fields
    const auto tweaked = tmp.path / "tweaked.json";
    std::ofstream(tweaked)
        << "{\"form\": \"sellmeier-3pole\","
           "\"ordinary\": [2.4272, 0.01478, 1.4617, 0.05612, 9.6536, 371.216],"
           "\"extraordinary\": [2.2454, 0.01242, 1.3005, 0.05313, 6.8972, 331.33],"
           "\"validity_window_nm\": [400, 5000], \"length_m\": 3e-3}";
    CHECK(io::read_crystal_config(tweaked).length == 3e-3);
}

TEST_CASE("reconstruction JSON carries the fit summary") {
    TempDir tmp;
    ReconstructionResult result{bell_state(0.1), 1.25e-12, 4321, true, FitMethod::Mle};
    const auto path = tmp.path / "rec.json";
    io::write_reconstruction(path, result);
    // the density-matrix reader accepts the superset document
    const auto rho = io::read_density_matrix(path);
    CHECK((rho.matrix() - bell_state(0.1).matrix()).cwiseAbs().maxCoeff() == 0.0);
    std::ifstream in(path);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    CHECK(text.find("\"objective\"") != std::string::npos);
    CHECK(text.find("\"iterations\": 4321") != std::string::npos);
    CHECK(text.find("\"converged\": true") != std::string::npos);
    CHECK(text.find("\"method\": \"mle\"") != std::string::npos);
}

#include "pairtomo/io.hpp"

#include <array>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

namespace pairtomo::io {

namespace {

using nlohmann::json;

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spill(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

double parse_number(const std::string& s, int line_no, const char* what) {
    double v = 0.0;
    const auto* begin = s.data();
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{} || ptr != end)
        throw ParseError("line " + std::to_string(line_no) + ": bad " +
                         std::string(what) + " '" + s + "'");
    return v;
}

json matrix_json(const Eigen::Matrix4cd& m, bool real_part) {
    json rows = json::array();
    for (int i = 0; i < 4; ++i) {
        json row = json::array();
        for (int j = 0; j < 4; ++j)
            row.push_back(real_part ? m(i, j).real() : m(i, j).imag());
        rows.push_back(row);
    }
    return rows;
}

Eigen::Matrix4cd matrix_from_json(const json& j) {
    const auto& re = j.at("re");
    const auto& im = j.at("im");
    if (re.size() != 4 || im.size() != 4)
        throw ParseError("density matrix JSON: re/im must be 4x4");
    Eigen::Matrix4cd m;
    for (int i = 0; i < 4; ++i) {
        if (re[i].size() != 4 || im[i].size() != 4)
            throw ParseError("density matrix JSON: re/im must be 4x4");
        for (int k = 0; k < 4; ++k)
            m(i, k) = Complex(re[i][k].get<double>(), im[i][k].get<double>());
    }
    return m;
}

}  // namespace

std::string format_double(double v) {
    std::array<char, 64> buf;
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc{}) throw std::runtime_error("format_double failed");
    return std::string(buf.data(), ptr);
}

std::string density_matrix_to_json(const DensityMatrix& rho) {
    json j;
    j["basis"] = {"HH", "HV", "VH", "VV"};
    j["re"] = matrix_json(rho.matrix(), true);
    j["im"] = matrix_json(rho.matrix(), false);
    return j.dump(2) + "\n";
}

DensityMatrix density_matrix_from_json(const std::string& text) {
    try {
        return DensityMatrix(matrix_from_json(json::parse(text)));
    } catch (const json::exception& e) {
        throw ParseError(std::string("density matrix JSON: ") + e.what());
    }
}

void write_density_matrix(const std::filesystem::path& path, const DensityMatrix& rho) {
    spill(path, density_matrix_to_json(rho));
}

DensityMatrix read_density_matrix(const std::filesystem::path& path) {
    return density_matrix_from_json(slurp(path));
}

void write_reconstruction(const std::filesystem::path& path,
                          const ReconstructionResult& result) {
    json j;
    j["basis"] = {"HH", "HV", "VH", "VV"};
    j["re"] = matrix_json(result.rho.matrix(), true);
    j["im"] = matrix_json(result.rho.matrix(), false);
    j["objective"] = result.objective;
    j["iterations"] = result.iterations;
    j["converged"] = result.converged;
    j["method"] = result.method == FitMethod::Mle ? "mle" : "linear";
    spill(path, j.dump(2) + "\n");
}

std::string records_to_csv(const std::vector<MeasurementRecord>& records) {
    std::string out =
        "setting_signal,setting_idler,value_kind,value,seed_power,integration_time\n";
    for (const auto& r : records) {
        out += to_label(r.setting.signal);
        out += ',';
        out += to_label(r.setting.idler);
        out += ',';
        out += r.kind == ValueKind::Counts ? "counts" : "power";
        out += ',';
        out += format_double(r.value);
        out += ',';
        if (r.seed_power) out += format_double(*r.seed_power);
        out += ',';
        if (r.integration_time) out += format_double(*r.integration_time);
        out += '\n';
    }
    return out;
}

std::vector<MeasurementRecord> records_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line))
        throw ParseError("line 1: missing header");
    {
        const auto header = split_csv_line(line);
        if (header.size() != 6 || header[0] != "setting_signal" ||
            header[1] != "setting_idler" || header[2] != "value_kind" ||
            header[3] != "value" || header[4] != "seed_power" ||
            header[5] != "integration_time")
            throw ParseError("line 1: unexpected header");
    }

    std::vector<MeasurementRecord> records;
    std::optional<ValueKind> file_kind;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto f = split_csv_line(line);
        if (f.size() != 6)
            throw ParseError("line " + std::to_string(line_no) + ": expected 6 columns, got " +
                             std::to_string(f.size()));
        MeasurementRecord r;
        try {
            r.setting.signal = basis_from_label(f[0]);
            r.setting.idler = basis_from_label(f[1]);
        } catch (const std::invalid_argument& e) {
            throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
        }
        if (f[2] == "counts") {
            r.kind = ValueKind::Counts;
        } else if (f[2] == "power") {
            r.kind = ValueKind::Power;
        } else {
            throw ParseError("line " + std::to_string(line_no) + ": bad value_kind '" +
                             f[2] + "'");
        }
        if (file_kind && r.kind != *file_kind)
            throw ParseError("line " + std::to_string(line_no) +
                             ": mixed value kinds in one file");
        file_kind = r.kind;

        r.value = parse_number(f[3], line_no, "value");
        if (r.value < 0.0)
            throw ParseError("line " + std::to_string(line_no) + ": negative value");
        if (r.kind == ValueKind::Counts && r.value != std::floor(r.value))
            throw ParseError("line " + std::to_string(line_no) +
                             ": counts must be integral");
        if (!f[4].empty()) r.seed_power = parse_number(f[4], line_no, "seed_power");
        if (!f[5].empty())
            r.integration_time = parse_number(f[5], line_no, "integration_time");
        try {
            r.validate();
        } catch (const std::invalid_argument& e) {
            throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
        }
        records.push_back(r);
    }
    return records;
}

void write_records_csv(const std::filesystem::path& path,
                       const std::vector<MeasurementRecord>& records) {
    spill(path, records_to_csv(records));
}

std::vector<MeasurementRecord> read_records_csv(const std::filesystem::path& path) {
    return records_from_csv(slurp(path));
}

void write_bootstrap_csv(const std::filesystem::path& path,
                         const std::vector<BootstrapStats>& stats) {
    std::string out = "metric,mean,std_dev,n_resamples,skipped\n";
    for (const auto& s : stats) {
        out += s.metric + ',' + format_double(s.mean) + ',' + format_double(s.std_dev) +
               ',' + std::to_string(s.n_resamples) + ',' + std::to_string(s.skipped) +
               '\n';
    }
    spill(path, out);
}

MetricsReport compute_metrics(const DensityMatrix& rho,
                              const std::optional<DensityMatrix>& target,
                              const std::vector<BootstrapStats>& stats) {
    MetricsReport rep;
    if (target) {
        rep.fidelity_to_target = std::abs(purity(*target) - 1.0) <= 1e-8
                                     ? fidelity_to_pure(rho, *target)
                                     : fidelity_mixed(rho, *target);
    }
    rep.concurrence = concurrence(rho);
    rep.purity = purity(rho);
    try {
        rep.relative_phase = relative_phase(rho);
    } catch (const UndefinedPhaseError&) {
        // reported as omitted
    }
    for (const auto& s : stats) rep.std_devs[s.metric] = s.std_dev;
    return rep;
}

void write_metrics_csv(const std::filesystem::path& path, const MetricsReport& report) {
    std::string out = "metric,value,std_dev,note\n";
    auto row = [&](const std::string& name, std::optional<double> value,
                   const std::string& note = {}) {
        out += name + ',';
        if (value) out += format_double(*value);
        out += ',';
        auto it = report.std_devs.find(name);
        if (it != report.std_devs.end()) out += format_double(it->second);
        out += ',' + note + '\n';
    };
    if (report.fidelity_to_target) row("fidelity", report.fidelity_to_target);
    row("concurrence", report.concurrence);
    row("purity", report.purity);
    if (report.relative_phase) {
        row("relative_phase", report.relative_phase);
    } else {
        row("relative_phase", std::nullopt, "undefined: coherence below floor");
    }
    spill(path, out);
}

CrystalConfig read_crystal_config(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(slurp(path));
    } catch (const json::exception& e) {
        throw ParseError("crystal config " + path.string() + ": " + e.what());
    }
    CrystalConfig c;
    try {
        c.form = j.at("form").get<std::string>();
        if (c.form != "sellmeier-3pole")
            throw ParseError("crystal config: unsupported form '" + c.form + "'");
        c.sellmeier_o = j.at("ordinary").get<std::vector<double>>();
        c.sellmeier_e = j.at("extraordinary").get<std::vector<double>>();
        const auto window = j.at("validity_window_nm").get<std::vector<double>>();
        if (window.size() != 2)
            throw ParseError("crystal config: validity_window_nm must be [min, max]");
        c.validity_min = window[0] * 1e-9;
        c.validity_max = window[1] * 1e-9;
        c.source = j.value("source", "");
        c.length = j.value("length_m", c.length);
        if (j.contains("cut_angle_deg"))
            c.cut_angle = j["cut_angle_deg"].get<double>() * std::numbers::pi / 180.0;
        c.pump_center = j.value("pump_center_m", c.pump_center);
        c.design_signal = j.value("design_signal_m", c.design_signal);
        c.design_idler = j.value("design_idler_m", c.design_idler);
        c.pump_fwhm = j.value("pump_fwhm_m", c.pump_fwhm);
    } catch (const json::exception& e) {
        throw ParseError("crystal config " + path.string() + ": " + e.what());
    }
    c.validate();
    return c;
}

std::filesystem::path default_crystal_file() {
    if (const char* env = std::getenv("PAIRTOMO_CRYSTAL_FILE"); env && *env)
        return env;
    const char* name = "mgo_linbo3_zelmon1997.json";
    std::error_code ec;
    const auto exe = std::filesystem::read_symlink("/proc/self/exe", ec);
    if (!ec) {
        const auto share = exe.parent_path().parent_path() / "share" / "pairtomo" / name;
        if (std::filesystem::exists(share, ec)) return share;
    }
#ifdef PAIRTOMO_DATA_DIR
    return std::filesystem::path(PAIRTOMO_DATA_DIR) / name;
#else
    return name;
#endif
}

void write_jsi_csv(const std::filesystem::path& path, const JsiGrid& grid) {
    std::string out = "signal_nm,idler_nm,intensity\n";
    for (std::size_t is = 0; is < grid.signal_axis.size(); ++is)
        for (std::size_t ii = 0; ii < grid.idler_axis.size(); ++ii)
            out += format_double(grid.signal_axis[is] * 1e9) + ',' +
                   format_double(grid.idler_axis[ii] * 1e9) + ',' +
                   format_double(grid.value(is, ii)) + '\n';
    spill(path, out);
}

void write_spectra_csv(const std::filesystem::path& path, const Spectrum& spdc,
                       const Spectrum& dfg) {
    if (spdc.wavelengths != dfg.wavelengths)
        throw std::invalid_argument("write_spectra_csv: spectra on different axes");
    std::string out = "idler_nm,spdc_intensity,dfg_intensity\n";
    for (std::size_t i = 0; i < spdc.wavelengths.size(); ++i)
        out += format_double(spdc.wavelengths[i] * 1e9) + ',' +
               format_double(spdc.intensities[i]) + ',' +
               format_double(dfg.intensities[i]) + '\n';
    spill(path, out);
}

void write_phase_comparison_csv(const std::filesystem::path& path,
                                const PhaseComparison& cmp) {
    std::string out = "quantity,value\n";
    out += "theta_qst," + format_double(cmp.theta_qst) + '\n';
    out += "theta_set," + format_double(cmp.theta_set) + '\n';
    out += "theta_difference," + format_double(cmp.theta_qst - cmp.theta_set) + '\n';
    spill(path, out);
}

}  // namespace pairtomo::io

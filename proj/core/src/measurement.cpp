#include "pairtomo/measurement.hpp"

#include <cmath>
#include <random>

#include "pairtomo/rng.hpp"

namespace pairtomo {

namespace {

constexpr BasisState kBases[6] = {BasisState::H, BasisState::V, BasisState::D,
                                  BasisState::A, BasisState::R, BasisState::L};

int basis_index(BasisState b) { return static_cast<int>(b); }

}  // namespace

void MeasurementRecord::validate() const {
    if (!(value >= 0.0) || !std::isfinite(value))
        throw std::invalid_argument("MeasurementRecord: value must be nonnegative");
    if (kind == ValueKind::Counts) {
        if (value != std::floor(value))
            throw std::invalid_argument("MeasurementRecord: counts must be integral");
    } else {
        if (!seed_power || !(*seed_power > 0.0))
            throw std::invalid_argument(
                "MeasurementRecord: power records need seed_power > 0");
    }
}

void QstNoiseModel::validate() const {
    if (!(pair_rate > 0.0))
        throw std::invalid_argument("QstNoiseModel: pair_rate must be > 0");
    if (!(integration_time > 0.0))
        throw std::invalid_argument("QstNoiseModel: integration_time must be > 0");
    if (!(efficiency_signal > 0.0 && efficiency_signal <= 1.0) ||
        !(efficiency_idler > 0.0 && efficiency_idler <= 1.0))
        throw std::invalid_argument("QstNoiseModel: efficiencies must be in (0, 1]");
    if (!(dark_coincidence_rate >= 0.0))
        throw std::invalid_argument("QstNoiseModel: dark rate must be >= 0");
}

void SetNoiseModel::validate() const {
    if (!(gain > 0.0))
        throw std::invalid_argument("SetNoiseModel: gain must be > 0");
    if (!(seed_power_nominal > 0.0))
        throw std::invalid_argument("SetNoiseModel: seed_power_nominal must be > 0");
    if (!(seed_power_jitter_rel >= 0.0 && seed_power_jitter_rel < 0.5))
        throw std::invalid_argument("SetNoiseModel: jitter must be in [0, 0.5)");
    if (!(detector_noise_rel >= 0.0 && detector_noise_rel < 0.5))
        throw std::invalid_argument("SetNoiseModel: detector noise must be in [0, 0.5)");
    if (!(detector_floor >= 0.0))
        throw std::invalid_argument("SetNoiseModel: detector_floor must be >= 0");
}

std::vector<MeasurementSetting> build_plan() {
    std::vector<MeasurementSetting> plan;
    plan.reserve(36);
    for (BasisState s : kBases)
        for (BasisState i : kBases) plan.push_back({s, i});
    return plan;
}

int plan_index(const MeasurementSetting& s) {
    return 6 * basis_index(s.signal) + basis_index(s.idler);
}

TwoQubitOperator setting_projector(const MeasurementSetting& s, bool conjugate_signal) {
    JonesVector sig = jones(s.signal);
    if (conjugate_signal) sig = sig.conjugated();
    return projector2q(sig, jones(s.idler));
}

std::vector<MeasurementRecord> simulate_qst(const DensityMatrix& rho,
                                            const std::vector<MeasurementSetting>& plan,
                                            const QstNoiseModel& noise) {
    noise.validate();
    std::vector<MeasurementRecord> records;
    records.reserve(plan.size());
    for (std::size_t k = 0; k < plan.size(); ++k) {
        const double p = born_probability(rho, setting_projector(plan[k]));
        const double mean = noise.expected_pairs() * p +
                            noise.dark_coincidence_rate * noise.integration_time;
        double counts = 0.0;
        if (mean > 0.0) {
            auto gen = rng::stream(noise.rng_seed, "qst-counts", k);
            counts = static_cast<double>(std::poisson_distribution<long long>(mean)(gen));
        }
        records.push_back({plan[k], ValueKind::Counts, counts, std::nullopt,
                           noise.integration_time});
    }
    return records;
}

std::vector<MeasurementRecord> simulate_set(const DensityMatrix& rho,
                                            const std::vector<MeasurementSetting>& plan,
                                            const SetNoiseModel& noise) {
    noise.validate();
    std::vector<MeasurementRecord> records;
    records.reserve(plan.size());
    for (std::size_t k = 0; k < plan.size(); ++k) {
        auto gen = rng::stream(noise.rng_seed, "set-power", k);
        std::normal_distribution<double> unit_gauss(0.0, 1.0);

        double seed_power = noise.seed_power_nominal;
        if (noise.seed_power_jitter_rel > 0.0)
            seed_power *= std::max(1.0 + noise.seed_power_jitter_rel * unit_gauss(gen), 1e-3);

        const double p = born_probability(
            rho, setting_projector(plan[k], noise.seed_conjugation));
        double power = noise.gain * seed_power * p;
        if (noise.detector_noise_rel > 0.0)
            power *= 1.0 + noise.detector_noise_rel * unit_gauss(gen);
        power = std::max(power + noise.detector_floor, 0.0);

        records.push_back({plan[k], ValueKind::Power, power, seed_power, std::nullopt});
    }
    return records;
}

std::vector<NormalizedRecord> normalize_records(
    const std::vector<MeasurementRecord>& records, const PowerNormalization& norm) {
    if (records.empty())
        throw std::invalid_argument("normalize_records: no records");
    const ValueKind kind = records.front().kind;
    std::vector<NormalizedRecord> out;
    out.reserve(records.size());
    for (const auto& r : records) {
        if (r.kind != kind)
            throw std::invalid_argument("normalize_records: mixed value kinds");
        r.validate();
        if (kind == ValueKind::Counts) {
            // Poisson: variance ~ observed counts, floored at one count
            out.push_back({r.setting, kind, r.value, 1.0 / std::max(r.value, 1.0)});
        } else {
            if (!(norm.gain > 0.0))
                throw std::invalid_argument("normalize_records: gain must be > 0");
            const double denom = norm.gain * *r.seed_power;
            out.push_back({r.setting, kind, (r.value - norm.detector_floor) / denom, 1.0});
        }
    }
    return out;
}

}  // namespace pairtomo

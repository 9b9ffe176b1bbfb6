#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "pairtomo/qstate.hpp"

namespace pairtomo {

/// One tomography setting: the seed (SET) or signal-analysis (QST)
/// polarization paired with the idler-analysis polarization.
struct MeasurementSetting {
    BasisState signal = BasisState::H;
    BasisState idler = BasisState::H;

    bool operator==(const MeasurementSetting&) const = default;
};

enum class ValueKind { Counts, Power };

/// One observed value: coincidence counts (QST) or stimulated idler power
/// in watts (SET). seed_power is the per-setting seed normalization (SET),
/// integration_time the counting window (QST).
struct MeasurementRecord {
    MeasurementSetting setting;
    ValueKind kind = ValueKind::Counts;
    double value = 0.0;
    std::optional<double> seed_power;
    std::optional<double> integration_time;

    void validate() const;
};

struct QstNoiseModel {
    double pair_rate = 1.0e4;        // detected pairs per second at unit Born probability
    double integration_time = 1.0;   // seconds
    double efficiency_signal = 1.0;
    double efficiency_idler = 1.0;
    double dark_coincidence_rate = 0.0;  // counts per second
    std::uint64_t rng_seed = 0;

    void validate() const;
    double expected_pairs() const {
        return pair_rate * integration_time * efficiency_signal * efficiency_idler;
    }
};

struct SetNoiseModel {
    // Defaults reproduce the reported operating point: 20 mW seed gives
    // 0.06 nW stimulated idler at the Born-probability-0.5 settings.
    double gain = 6.0e-9;                // watts out per watt seed at unit Born probability
    double seed_power_nominal = 20.0e-3; // watts
    double seed_power_jitter_rel = 0.0;
    double detector_noise_rel = 0.0;
    double detector_floor = 0.0;         // watts
    std::uint64_t rng_seed = 0;
    bool seed_conjugation = false;

    void validate() const;
};

/// The 36-setting plan: {H,V,D,A,R,L} x {H,V,D,A,R,L} in row-major
/// (signal-major) order.
std::vector<MeasurementSetting> build_plan();

/// Index of a setting in the row-major plan, in [0, 36).
int plan_index(const MeasurementSetting& s);

/// Projector measured by a setting. For SET simulation the seed may act
/// phase-conjugated (conjugate_signal) — circular seeds then project onto
/// the conjugate Jones vector; linear seeds are unaffected.
TwoQubitOperator setting_projector(const MeasurementSetting& s,
                                   bool conjugate_signal = false);

/// Poisson coincidence counting: mean = pairs * Tr(rho Pi) + dark counts.
/// Per-setting substreams of rng_seed, so output is independent of
/// evaluation order and identical for identical seeds.
std::vector<MeasurementRecord> simulate_qst(const DensityMatrix& rho,
                                            const std::vector<MeasurementSetting>& plan,
                                            const QstNoiseModel& noise);

/// Stimulated-power readout: per-setting seed power with relative jitter,
/// multiplicative Gaussian detector noise, additive floor, clamped at zero.
std::vector<MeasurementRecord> simulate_set(const DensityMatrix& rho,
                                            const std::vector<MeasurementSetting>& plan,
                                            const SetNoiseModel& noise);

/// Parameters needed to turn raw powers back into Born-probability
/// estimates; counts pass through unchanged.
struct PowerNormalization {
    double gain = SetNoiseModel{}.gain;
    double detector_floor = 0.0;
};

struct NormalizedRecord {
    MeasurementSetting setting;
    ValueKind kind = ValueKind::Counts;
    double value = 0.0;   // counts, or (power - floor) / (gain * seed_power)
    double weight = 1.0;  // inverse-variance weight (uniform for powers)
};

/// Records must share one value_kind. Counts keep their scale (the fit
/// estimates the pair number); weights follow Poisson statistics with a
/// one-count variance floor. Powers are normalized per record by their
/// measured seed power.
std::vector<NormalizedRecord> normalize_records(
    const std::vector<MeasurementRecord>& records,
    const PowerNormalization& norm = {});

}  // namespace pairtomo

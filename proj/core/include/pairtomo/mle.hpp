#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "pairtomo/measurement.hpp"
#include "pairtomo/qstate.hpp"

namespace pairtomo {

/// 16 real parameters of a lower-triangular complex T with real diagonal;
/// rho = T^dag T / Tr(T^dag T) is Hermitian, PSD and unit-trace for any
/// nonzero parameter vector. Layout: t[0..3] diagonal, then (re, im) pairs
/// for the strict lower triangle in row-major order
/// (1,0) (2,0) (2,1) (3,0) (3,1) (3,2).
struct TParams {
    std::array<double, 16> t{};
};

Eigen::Matrix4cd t_to_matrix(const TParams& p);
DensityMatrix rho_from_t(const TParams& p);

/// Inverse map used for initialization: eigenvalues below 1e-12 are lifted
/// to 1e-12 before factorization, so rho_from_t(t_from_rho(rho)) matches
/// rho to ~1e-6 even for rank-deficient (pure) states.
TParams t_from_rho(const DensityMatrix& rho);

struct LinearInversionResult {
    Eigen::Matrix4cd rho;  // Hermitian, unit trace, possibly not PSD
    bool physical = true;  // min eigenvalue >= -1e-8
    double min_eigenvalue = 0.0;
};

/// Unconstrained least-squares solution of Tr(rho Pi_k) = y_k over Hermitian
/// matrices, renormalized to unit trace. Throws IncompletePlanError when the
/// settings do not span the 16-dimensional operator space.
LinearInversionResult linear_inversion(const std::vector<NormalizedRecord>& data);

/// Nearest physical state: eigenvalues clamped to >= 0, trace renormalized.
/// Falls back to the maximally mixed state for an all-zero candidate.
DensityMatrix physicalize(const Eigen::Matrix4cd& candidate);

enum class FitMethod { Mle, Linear };

struct FitOptions {
    bool poisson_likelihood = false;  // exact Poisson NLL instead of the Gaussian form
    int max_evaluations = 50000;
    double objective_tol = 1e-10;
    double step_tol = 1e-9;
    double power_sigma = 1e-4;  // uniform sigma for normalized power residuals
    PowerNormalization normalization;
};

struct ReconstructionResult {
    DensityMatrix rho;
    double objective = 0.0;
    int iterations = 0;  // objective evaluations consumed
    bool converged = false;
    FitMethod method = FitMethod::Mle;
};

/// Weighted least-squares objective at an (unnormalized) model matrix:
/// sum_k (y_k - mu_k)^2 / (2 sigma_k^2) with mu_k = Tr(rho_tilde Pi_k).
/// Counts use sigma_k^2 = max(mu_k, 1); powers use the uniform power_sigma.
double fit_objective(const std::vector<NormalizedRecord>& data,
                     const Eigen::Matrix4cd& rho_tilde, const FitOptions& opts = {});

/// Maximum-likelihood reconstruction over the T parametrization, seeded by
/// physicalized linear inversion (or `init`). The overall scale of T^dag T
/// absorbs the unknown pair number, so counts need no separate
/// normalization; the returned state is trace-normalized.
ReconstructionResult mle_fit(const std::vector<MeasurementRecord>& records,
                             const std::optional<DensityMatrix>& init = {},
                             const FitOptions& opts = {});

ReconstructionResult mle_fit_normalized(const std::vector<NormalizedRecord>& data,
                                        const std::optional<DensityMatrix>& init = {},
                                        const FitOptions& opts = {});

/// Linear inversion followed by eigenvalue clamping; the cheap alternative
/// reconstruction method exposed by the CLI.
ReconstructionResult linear_reconstruct(const std::vector<MeasurementRecord>& records,
                                        const FitOptions& opts = {});

struct BootstrapOptions {
    int n_resamples = 100;
    std::uint64_t rng_seed = 0;
    // Relative sigma for Gaussian resampling of power records; counts are
    // always resampled as Poisson(observed).
    double power_noise_rel = 0.0;
    std::optional<DensityMatrix> fidelity_target;
    FitOptions fit;
};

struct BootstrapStats {
    std::string metric;
    double mean = 0.0;
    double std_dev = 0.0;
    int n_resamples = 0;
    int skipped = 0;
};

/// Parametric bootstrap: resample records from the fitted noise model,
/// refit, and report mean/std of each named metric. Metric names:
/// "fidelity" (needs fidelity_target), "concurrence", "purity",
/// "relative_phase". Resamples whose metric is undefined are skipped and
/// counted; more than 50% skipped raises UnstableMetricError.
std::vector<BootstrapStats> bootstrap(const std::vector<MeasurementRecord>& records,
                                      const std::vector<std::string>& metrics,
                                      const BootstrapOptions& opts);

}  // namespace pairtomo

#include "pairtomo/mle.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <random>
#include <thread>

#include "pairtomo/rng.hpp"

namespace pairtomo {

namespace {

// Strict lower-triangle order (row, col) matching the TParams layout.
constexpr int kLowerRow[6] = {1, 2, 2, 3, 3, 3};
constexpr int kLowerCol[6] = {0, 0, 1, 0, 1, 2};

// Complex Cholesky m = L L^dag with nonpositive pivots clamped; m must be
// Hermitian and (numerically) PSD.
Eigen::Matrix4cd cholesky_lower(const Eigen::Matrix4cd& m) {
    Eigen::Matrix4cd L = Eigen::Matrix4cd::Zero();
    for (int j = 0; j < 4; ++j) {
        double d = m(j, j).real();
        for (int k = 0; k < j; ++k) d -= std::norm(L(j, k));
        L(j, j) = std::sqrt(std::max(d, 1e-300));
        for (int i = j + 1; i < 4; ++i) {
            Complex s = m(i, j);
            for (int k = 0; k < j; ++k) s -= L(i, k) * std::conj(L(j, k));
            L(i, j) = s / L(j, j);
        }
    }
    return L;
}

// Orthogonal basis of 4x4 Hermitian matrices: 4 diagonal units, then
// symmetric and antisymmetric units per off-diagonal pair.
std::array<Eigen::Matrix4cd, 16> hermitian_basis() {
    std::array<Eigen::Matrix4cd, 16> basis;
    int n = 0;
    for (int i = 0; i < 4; ++i) {
        basis[n] = Eigen::Matrix4cd::Zero();
        basis[n](i, i) = 1.0;
        ++n;
    }
    for (int p = 0; p < 6; ++p) {
        const int i = kLowerRow[p], j = kLowerCol[p];
        basis[n] = Eigen::Matrix4cd::Zero();
        basis[n](i, j) = 1.0;
        basis[n](j, i) = 1.0;
        ++n;
        basis[n] = Eigen::Matrix4cd::Zero();
        basis[n](i, j) = Complex(0.0, 1.0);
        basis[n](j, i) = Complex(0.0, -1.0);
        ++n;
    }
    return basis;
}

double trace_product(const Eigen::Matrix4cd& a, const Eigen::Matrix4cd& b) {
    return a.cwiseProduct(b.transpose()).sum().real();
}

struct FitProblem {
    std::vector<Eigen::Matrix4cd> projectors;
    std::vector<double> values;
    ValueKind kind = ValueKind::Counts;
    double power_sigma = 1e-4;
    bool poisson = false;

    double objective(const Eigen::Matrix4cd& rho_tilde) const {
        double f = 0.0;
        if (kind == ValueKind::Counts && poisson) {
            for (std::size_t k = 0; k < values.size(); ++k) {
                const double mu = trace_product(rho_tilde, projectors[k]);
                f += mu - values[k] * std::log(std::max(mu, 1e-300));
            }
        } else if (kind == ValueKind::Counts) {
            for (std::size_t k = 0; k < values.size(); ++k) {
                const double mu = trace_product(rho_tilde, projectors[k]);
                const double r = values[k] - mu;
                f += r * r / (2.0 * std::max(mu, 1.0));
            }
        } else {
            const double s2 = 2.0 * power_sigma * power_sigma;
            for (std::size_t k = 0; k < values.size(); ++k) {
                const double r = values[k] - trace_product(rho_tilde, projectors[k]);
                f += r * r / s2;
            }
        }
        return f;
    }
};

FitProblem make_problem(const std::vector<NormalizedRecord>& data,
                        const FitOptions& opts) {
    FitProblem prob;
    prob.kind = data.empty() ? ValueKind::Counts : data.front().kind;
    prob.power_sigma = std::max(opts.power_sigma, 1e-4);
    prob.poisson = opts.poisson_likelihood;
    prob.projectors.reserve(data.size());
    prob.values.reserve(data.size());
    for (const auto& d : data) {
        prob.projectors.push_back(setting_projector(d.setting));
        prob.values.push_back(d.value);
    }
    return prob;
}

// Canonical record order makes the fit independent of input permutation.
std::vector<NormalizedRecord> canonical_order(std::vector<NormalizedRecord> data) {
    std::stable_sort(data.begin(), data.end(),
                     [](const NormalizedRecord& a, const NormalizedRecord& b) {
                         const int ia = plan_index(a.setting), ib = plan_index(b.setting);
                         if (ia != ib) return ia < ib;
                         return a.value < b.value;
                     });
    return data;
}

int design_rank(const std::vector<NormalizedRecord>& data,
                Eigen::MatrixXd* design_out = nullptr) {
    const auto basis = hermitian_basis();
    Eigen::MatrixXd A(static_cast<int>(data.size()), 16);
    for (std::size_t k = 0; k < data.size(); ++k) {
        const auto pi = setting_projector(data[k].setting);
        for (int a = 0; a < 16; ++a) A(static_cast<int>(k), a) = trace_product(basis[a], pi);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
    const auto& sv = svd.singularValues();
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > 1e-10 * sv(0)) ++rank;
    if (design_out) *design_out = std::move(A);
    return rank;
}

// ----- Nelder-Mead simplex -----

struct SimplexResult {
    Eigen::VectorXd x;
    double fx = 0.0;
    int evaluations = 0;
    bool converged = false;
};

template <typename F>
SimplexResult nelder_mead(const F& f, const Eigen::VectorXd& x0,
                          const Eigen::VectorXd& steps, double obj_tol,
                          double step_tol, int max_evals) {
    const int n = static_cast<int>(x0.size());
    std::vector<Eigen::VectorXd> v(n + 1, x0);
    std::vector<double> fv(n + 1);
    int evals = 0;
    auto eval = [&](const Eigen::VectorXd& x) {
        ++evals;
        return f(x);
    };
    for (int i = 0; i < n; ++i) v[i + 1](i) += steps(i);
    for (int i = 0; i <= n; ++i) fv[i] = eval(v[i]);

    std::vector<int> order(n + 1);
    bool converged = false;
    while (evals < max_evals) {
        for (int i = 0; i <= n; ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](int a, int b) { return fv[a] < fv[b]; });
        const int best = order[0], worst = order[n], second = order[n - 1];

        double diam = 0.0;
        for (int i = 1; i <= n; ++i)
            diam = std::max(diam, (v[order[i]] - v[best]).norm());
        if (fv[worst] - fv[best] <= obj_tol * (1.0 + std::abs(fv[best])) ||
            diam <= step_tol * (1.0 + v[best].norm())) {
            converged = true;
            break;
        }

        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
        for (int i = 0; i <= n; ++i)
            if (i != worst) centroid += v[i];
        centroid /= n;

        const Eigen::VectorXd xr = centroid + (centroid - v[worst]);  // reflect
        const double fr = eval(xr);
        if (fr < fv[best]) {
            const Eigen::VectorXd xe = centroid + 2.0 * (centroid - v[worst]);
            const double fe = eval(xe);
            if (fe < fr) {
                v[worst] = xe;
                fv[worst] = fe;
            } else {
                v[worst] = xr;
                fv[worst] = fr;
            }
        } else if (fr < fv[second]) {
            v[worst] = xr;
            fv[worst] = fr;
        } else {
            const Eigen::VectorXd xc =
                centroid + 0.5 * ((fr < fv[worst] ? xr : v[worst]) - centroid);
            const double fc = eval(xc);
            if (fc < std::min(fr, fv[worst])) {
                v[worst] = xc;
                fv[worst] = fc;
            } else {  // shrink toward best
                for (int i = 0; i <= n; ++i) {
                    if (i == best) continue;
                    v[i] = v[best] + 0.5 * (v[i] - v[best]);
                    fv[i] = eval(v[i]);
                    if (evals >= max_evals) break;
                }
            }
        }
    }

    int best = 0;
    for (int i = 1; i <= n; ++i)
        if (fv[i] < fv[best]) best = i;
    return {v[best], fv[best], evals, converged};
}

Eigen::VectorXd t_to_vec(const TParams& p) {
    Eigen::VectorXd x(16);
    for (int i = 0; i < 16; ++i) x(i) = p.t[i];
    return x;
}

TParams vec_to_t(const Eigen::VectorXd& x) {
    TParams p;
    for (int i = 0; i < 16; ++i) p.t[i] = x(i);
    return p;
}

// Least-squares scale s minimizing sum (y - s*mu)^2, floored to stay positive.
double scale_estimate(const FitProblem& prob, const Eigen::Matrix4cd& rho) {
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < prob.values.size(); ++k) {
        const double mu = trace_product(rho, prob.projectors[k]);
        num += prob.values[k] * mu;
        den += mu * mu;
    }
    return std::max(den > 0.0 ? num / den : 1.0, 1e-12);
}

double metric_by_name(const std::string& name, const DensityMatrix& rho,
                      const std::optional<DensityMatrix>& target) {
    if (name == "concurrence") return concurrence(rho);
    if (name == "purity") return purity(rho);
    if (name == "relative_phase") return relative_phase(rho);
    if (name == "fidelity") {
        if (!target)
            throw std::invalid_argument("bootstrap: metric 'fidelity' needs a target");
        if (std::abs(purity(*target) - 1.0) <= 1e-8)
            return fidelity_to_pure(rho, *target);
        return fidelity_mixed(rho, *target);
    }
    throw std::invalid_argument("bootstrap: unknown metric '" + name + "'");
}

}  // namespace

Eigen::Matrix4cd t_to_matrix(const TParams& p) {
    Eigen::Matrix4cd T = Eigen::Matrix4cd::Zero();
    for (int i = 0; i < 4; ++i) T(i, i) = p.t[i];
    for (int k = 0; k < 6; ++k)
        T(kLowerRow[k], kLowerCol[k]) = Complex(p.t[4 + 2 * k], p.t[5 + 2 * k]);
    return T;
}

DensityMatrix rho_from_t(const TParams& p) {
    const Eigen::Matrix4cd T = t_to_matrix(p);
    const Eigen::Matrix4cd m = T.adjoint() * T;
    const double tr = m.trace().real();
    if (!(tr > 0.0))
        throw std::invalid_argument("rho_from_t: all parameters zero");
    return DensityMatrix(m / tr);
}

TParams t_from_rho(const DensityMatrix& rho) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(rho.matrix());
    const Eigen::Vector4d ev = es.eigenvalues().cwiseMax(1e-12);
    const Eigen::Matrix4cd lifted =
        es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();

    // rho = T^dag T with T lower-triangular: flip, factor, flip back.
    Eigen::Matrix4cd flipped;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) flipped(i, j) = lifted(3 - i, 3 - j);
    const Eigen::Matrix4cd L = cholesky_lower(flipped);
    Eigen::Matrix4cd T;
    const Eigen::Matrix4cd U = L.adjoint();
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) T(i, j) = U(3 - i, 3 - j);

    // The flip leaves the diagonal with a phase only if the pivots did;
    // cholesky_lower keeps them real positive, so T has a real diagonal.
    TParams p;
    for (int i = 0; i < 4; ++i) p.t[i] = T(i, i).real();
    for (int k = 0; k < 6; ++k) {
        p.t[4 + 2 * k] = T(kLowerRow[k], kLowerCol[k]).real();
        p.t[5 + 2 * k] = T(kLowerRow[k], kLowerCol[k]).imag();
    }
    return p;
}

LinearInversionResult linear_inversion(const std::vector<NormalizedRecord>& data) {
    if (data.empty())
        throw IncompletePlanError("linear_inversion: no records");
    Eigen::MatrixXd A;
    if (design_rank(data, &A) < 16)
        throw IncompletePlanError(
            "linear_inversion: settings span fewer than 16 operator dimensions");
    Eigen::VectorXd y(static_cast<int>(data.size()));
    for (std::size_t k = 0; k < data.size(); ++k) y(static_cast<int>(k)) = data[k].value;

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd x = svd.solve(y);

    const auto basis = hermitian_basis();
    Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
    for (int a = 0; a < 16; ++a) rho += x(a) * basis[a];

    const double tr = rho.trace().real();
    LinearInversionResult out;
    if (std::abs(tr) < 1e-300) {
        out.rho = Eigen::Matrix4cd::Identity() * 0.25;  // all-zero data
    } else {
        out.rho = rho / tr;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(out.rho, Eigen::EigenvaluesOnly);
    out.min_eigenvalue = es.eigenvalues().minCoeff();
    out.physical = out.min_eigenvalue >= -1e-8;
    return out;
}

DensityMatrix physicalize(const Eigen::Matrix4cd& candidate) {
    const Eigen::Matrix4cd herm = 0.5 * (candidate + candidate.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(herm);
    Eigen::Vector4d ev = es.eigenvalues().cwiseMax(0.0);
    if (ev.sum() <= 0.0) return maximally_mixed();
    ev /= ev.sum();
    return DensityMatrix(es.eigenvectors() * ev.asDiagonal() *
                         es.eigenvectors().adjoint());
}

double fit_objective(const std::vector<NormalizedRecord>& data,
                     const Eigen::Matrix4cd& rho_tilde, const FitOptions& opts) {
    return make_problem(data, opts).objective(rho_tilde);
}

ReconstructionResult mle_fit(const std::vector<MeasurementRecord>& records,
                             const std::optional<DensityMatrix>& init,
                             const FitOptions& opts) {
    return mle_fit_normalized(normalize_records(records, opts.normalization), init,
                              opts);
}

ReconstructionResult mle_fit_normalized(const std::vector<NormalizedRecord>& input,
                                        const std::optional<DensityMatrix>& init,
                                        const FitOptions& opts) {
    const auto data = canonical_order(input);
    const auto prob = make_problem(data, opts);

    if (design_rank(data) < 16)
        throw IncompletePlanError(
            "mle_fit: settings span fewer than 16 operator dimensions");
    const DensityMatrix rho0 = init ? *init : physicalize(linear_inversion(data).rho);

    // T is fit unnormalized: Tr(T^dag T) carries the pair number (counts)
    // or the residual normalization slack (powers).
    double scale = scale_estimate(prob, rho0.matrix());
    TParams t0 = t_from_rho(rho0);
    Eigen::VectorXd x0 = t_to_vec(t0) * std::sqrt(scale);

    auto f = [&prob](const Eigen::VectorXd& x) {
        const Eigen::Matrix4cd T = t_to_matrix(vec_to_t(x));
        return prob.objective(T.adjoint() * T);
    };

    const double x_rms = std::max(x0.norm() / 4.0, 1e-6);
    int evals_total = 0;
    bool converged = false;
    Eigen::VectorXd best = x0;
    double fbest = f(best);
    ++evals_total;

    double step_frac = 0.10;
    for (int round = 0; round < 4 && evals_total < opts.max_evaluations; ++round) {
        Eigen::VectorXd steps(16);
        for (int i = 0; i < 16; ++i)
            steps(i) = step_frac * (std::abs(best(i)) + 0.25 * x_rms);
        auto res = nelder_mead(f, best, steps, opts.objective_tol, opts.step_tol,
                               opts.max_evaluations - evals_total);
        evals_total += res.evaluations;
        const double improvement = fbest - res.fx;
        if (res.fx <= fbest) {
            best = res.x;
            fbest = res.fx;
        }
        converged = res.converged;
        if (res.converged && improvement <= opts.objective_tol * (1.0 + std::abs(fbest)))
            break;
        step_frac *= 0.25;
    }

    ReconstructionResult out{rho_from_t(vec_to_t(best)), fbest, evals_total,
                             converged, FitMethod::Mle};
    return out;
}

ReconstructionResult linear_reconstruct(const std::vector<MeasurementRecord>& records,
                                        const FitOptions& opts) {
    const auto data = canonical_order(normalize_records(records, opts.normalization));
    const auto lin = linear_inversion(data);
    DensityMatrix rho = physicalize(lin.rho);
    const double scale = scale_estimate(make_problem(data, opts), rho.matrix());
    const double obj = fit_objective(data, scale * rho.matrix(), opts);
    return {rho, obj, 0, true, FitMethod::Linear};
}

std::vector<BootstrapStats> bootstrap(const std::vector<MeasurementRecord>& records,
                                      const std::vector<std::string>& metrics,
                                      const BootstrapOptions& opts) {
    if (opts.n_resamples < 2)
        throw std::invalid_argument("bootstrap: n_resamples must be >= 2");
    if (metrics.empty())
        throw std::invalid_argument("bootstrap: no metrics requested");

    const auto base = mle_fit(records, {}, opts.fit);

    const int n = opts.n_resamples;
    const int m = static_cast<int>(metrics.size());
    std::vector<double> values(static_cast<std::size_t>(n) * m, 0.0);
    std::vector<char> ok(static_cast<std::size_t>(n) * m, 0);

    auto run_one = [&](int r) {
        auto gen = rng::stream(opts.rng_seed, "bootstrap", static_cast<std::uint64_t>(r));
        std::vector<MeasurementRecord> resampled = records;
        for (auto& rec : resampled) {
            if (rec.kind == ValueKind::Counts) {
                rec.value = rec.value > 0.0
                                ? static_cast<double>(std::poisson_distribution<long long>(
                                      rec.value)(gen))
                                : 0.0;
            } else if (opts.power_noise_rel > 0.0) {
                std::normal_distribution<double> g(rec.value,
                                                   opts.power_noise_rel * rec.value);
                rec.value = std::max(g(gen), 0.0);
            }
        }
        const auto fit = mle_fit(resampled, base.rho, opts.fit);
        for (int j = 0; j < m; ++j) {
            try {
                values[static_cast<std::size_t>(r) * m + j] =
                    metric_by_name(metrics[j], fit.rho, opts.fidelity_target);
                ok[static_cast<std::size_t>(r) * m + j] = 1;
            } catch (const UndefinedPhaseError&) {
                // metric undefined on this resample: skipped and counted
            }
        }
    };

    const unsigned workers =
        std::min<unsigned>(std::max(1u, std::thread::hardware_concurrency()),
                           static_cast<unsigned>(n));
    if (workers > 1) {
        std::vector<std::future<void>> jobs;
        jobs.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            jobs.push_back(std::async(std::launch::async, [&, w] {
                for (int r = static_cast<int>(w); r < n; r += static_cast<int>(workers))
                    run_one(r);
            }));
        }
        for (auto& j : jobs) j.get();
    } else {
        for (int r = 0; r < n; ++r) run_one(r);
    }

    std::vector<BootstrapStats> stats;
    stats.reserve(metrics.size());
    for (int j = 0; j < m; ++j) {
        BootstrapStats s;
        s.metric = metrics[j];
        s.n_resamples = n;
        double sum = 0.0;
        int good = 0;
        for (int r = 0; r < n; ++r) {
            if (ok[static_cast<std::size_t>(r) * m + j]) {
                sum += values[static_cast<std::size_t>(r) * m + j];
                ++good;
            }
        }
        s.skipped = n - good;
        if (s.skipped * 2 > n)
            throw UnstableMetricError("bootstrap: metric '" + metrics[j] +
                                      "' undefined on more than half the resamples");
        s.mean = sum / good;
        double lo = values[static_cast<std::size_t>(0)], hi = lo;
        double ss = 0.0;
        bool first = true;
        for (int r = 0; r < n; ++r) {
            if (!ok[static_cast<std::size_t>(r) * m + j]) continue;
            const double v = values[static_cast<std::size_t>(r) * m + j];
            lo = first ? v : std::min(lo, v);
            hi = first ? v : std::max(hi, v);
            first = false;
            const double d = v - s.mean;
            ss += d * d;
        }
        // identical resamples (noise-free data) report exactly zero spread
        s.std_dev = (good > 1 && hi > lo) ? std::sqrt(ss / (good - 1)) : 0.0;
        stats.push_back(std::move(s));
    }
    return stats;
}

}  // namespace pairtomo

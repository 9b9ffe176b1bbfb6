#include "pairtomo/qstate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace pairtomo {

namespace {

constexpr Complex kI{0.0, 1.0};

// Hermitian square root with negative round-off eigenvalues clamped to zero.
Eigen::Matrix4cd psd_sqrt(const Eigen::Matrix4cd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(m);
    Eigen::Vector4d ev = es.eigenvalues().cwiseMax(0.0);
    return es.eigenvectors() * ev.cwiseSqrt().asDiagonal() *
           es.eigenvectors().adjoint();
}

}  // namespace

BasisState basis_from_label(std::string_view label) {
    if (label == "H") return BasisState::H;
    if (label == "V") return BasisState::V;
    if (label == "D") return BasisState::D;
    if (label == "A") return BasisState::A;
    if (label == "R") return BasisState::R;
    if (label == "L") return BasisState::L;
    throw std::invalid_argument("unknown basis label: " + std::string(label));
}

JonesVector::JonesVector(Complex h, Complex v) : v_(h, v) {
    if (std::abs(v_.squaredNorm() - 1.0) > kNormTol)
        throw std::invalid_argument("JonesVector must have unit norm");
}

JonesVector::JonesVector(const Eigen::Vector2cd& v) : JonesVector(v(0), v(1)) {}

JonesVector jones(BasisState s) {
    const double r = 1.0 / std::numbers::sqrt2;
    switch (s) {
        case BasisState::H: return {1.0, 0.0};
        case BasisState::V: return {0.0, 1.0};
        case BasisState::D: return {r, r};
        case BasisState::A: return {r, -r};
        case BasisState::R: return {r, -kI * r};
        case BasisState::L: return {r, kI * r};
    }
    throw std::invalid_argument("invalid BasisState");
}

DensityMatrix::DensityMatrix(const Eigen::Matrix4cd& m) : m_(m) {
    if (!m_.allFinite())
        throw std::invalid_argument("DensityMatrix entries must be finite");
    if ((m_ - m_.adjoint()).cwiseAbs().maxCoeff() > kHermitianTol)
        throw std::invalid_argument("DensityMatrix must be Hermitian");
    if (std::abs(m_.trace() - Complex(1.0)) > kTraceTol)
        throw std::invalid_argument("DensityMatrix must have unit trace");
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(m_, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < kEigenvalueFloor)
        throw std::invalid_argument("DensityMatrix must be positive semidefinite");
}

DensityMatrix bell_state(double theta) {
    if (!std::isfinite(theta))
        throw std::invalid_argument("bell_state: theta must be finite");
    Eigen::Vector4cd psi = Eigen::Vector4cd::Zero();
    psi(0) = 1.0 / std::numbers::sqrt2;
    psi(3) = std::exp(kI * theta) / std::numbers::sqrt2;
    return DensityMatrix(psi * psi.adjoint());
}

DensityMatrix maximally_mixed() {
    return DensityMatrix(Eigen::Matrix4cd::Identity() * 0.25);
}

DensityMatrix werner_state(double p) {
    if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument("werner_state: p must be in [0, 1]");
    return DensityMatrix(p * bell_state(0.0).matrix() +
                         (1.0 - p) * 0.25 * Eigen::Matrix4cd::Identity());
}

TwoQubitOperator projector2q(const JonesVector& signal, const JonesVector& idler) {
    Eigen::Matrix2cd ps = signal.vec() * signal.vec().adjoint();
    Eigen::Matrix2cd pi = idler.vec() * idler.vec().adjoint();
    TwoQubitOperator out;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            out.block<2, 2>(2 * i, 2 * j) = ps(i, j) * pi;
    return out;
}

double born_probability(const DensityMatrix& rho, const TwoQubitOperator& op) {
    const double p = (rho.matrix() * op).trace().real();
    return std::clamp(p, 0.0, 1.0);
}

double fidelity_to_pure(const DensityMatrix& rho, const DensityMatrix& target) {
    if (std::abs(purity(target) - 1.0) > 1e-8)
        throw std::invalid_argument(
            "fidelity_to_pure: target is mixed, use fidelity_mixed");
    // <psi|rho|psi> = Tr(rho |psi><psi|) for the pure target
    const double f = (rho.matrix() * target.matrix()).trace().real();
    return std::clamp(f, 0.0, 1.0);
}

double fidelity_mixed(const DensityMatrix& a, const DensityMatrix& b) {
    const Eigen::Matrix4cd sa = psd_sqrt(a.matrix());
    const Eigen::Matrix4cd inner = sa * b.matrix() * sa;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(inner, Eigen::EigenvaluesOnly);
    // round-off eigenvalues ~1e-17 would contribute ~1e-8 through the square
    // root; a relative floor keeps F(rho, pure) consistent with the direct
    // pure-state formula
    const double floor = 1e-14 * std::max(es.eigenvalues().maxCoeff(), 0.0);
    double tr = 0.0;
    for (int i = 0; i < 4; ++i)
        if (es.eigenvalues()(i) > floor) tr += std::sqrt(es.eigenvalues()(i));
    return std::clamp(tr * tr, 0.0, 1.0);
}

double concurrence(const DensityMatrix& rho) {
    // sigma_y (x) sigma_y in the (HH, HV, VH, VV) order
    Eigen::Matrix4cd yy = Eigen::Matrix4cd::Zero();
    yy(0, 3) = -1.0;
    yy(1, 2) = 1.0;
    yy(2, 1) = 1.0;
    yy(3, 0) = -1.0;
    // eigenvalues of rho YY rho* YY equal those of the Hermitian matrix
    // sqrt(rho) YY rho* YY sqrt(rho); the latter is numerically safer
    const Eigen::Matrix4cd sr = psd_sqrt(rho.matrix());
    const Eigen::Matrix4cd herm = sr * yy * rho.matrix().conjugate() * yy * sr;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(herm, Eigen::EigenvaluesOnly);
    Eigen::Vector4d lam = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    // ascending order: largest is lam(3)
    return std::max(0.0, lam(3) - lam(2) - lam(1) - lam(0));
}

double purity(const DensityMatrix& rho) {
    return (rho.matrix() * rho.matrix()).trace().real();
}

double relative_phase(const DensityMatrix& rho, double coherence_floor) {
    const Complex c = rho(3, 0);  // <VV| rho |HH>
    if (std::abs(c) <= coherence_floor)
        throw UndefinedPhaseError(
            "relative_phase: |<VV|rho|HH>| below coherence floor");
    return std::arg(c);
}

}  // namespace pairtomo

#pragma once

#include <Eigen/Dense>
#include <complex>

#include "pairtomo/errors.hpp"

namespace pairtomo {

using Complex = std::complex<double>;

/// The six preparation/analysis polarizations used by the 36-setting plan.
enum class BasisState { H, V, D, A, R, L };

constexpr const char* to_label(BasisState s) {
    switch (s) {
        case BasisState::H: return "H";
        case BasisState::V: return "V";
        case BasisState::D: return "D";
        case BasisState::A: return "A";
        case BasisState::R: return "R";
        case BasisState::L: return "L";
    }
    return "?";
}
BasisState basis_from_label(std::string_view label);

/// Unit-norm two-component polarization state (H and V amplitudes).
class JonesVector {
public:
    static constexpr double kNormTol = 1e-12;

    JonesVector(Complex h, Complex v);
    explicit JonesVector(const Eigen::Vector2cd& v);

    const Eigen::Vector2cd& vec() const { return v_; }
    Complex h() const { return v_(0); }
    Complex v() const { return v_(1); }

    JonesVector conjugated() const { return JonesVector(v_.conjugate()); }

private:
    Eigen::Vector2cd v_;
};

/// Fixed Jones vector for each basis label. Circular convention:
/// R = (1, -i)/sqrt(2), L = (1, i)/sqrt(2).
JonesVector jones(BasisState s);

/// 4x4 operator on the signal (x) idler space; basis order (HH, HV, VH, VV).
using TwoQubitOperator = Eigen::Matrix4cd;

/// Validated two-qubit state: Hermitian, unit trace, positive semidefinite
/// within the documented tolerances. Basis order (HH, HV, VH, VV).
class DensityMatrix {
public:
    static constexpr double kHermitianTol = 1e-10;
    static constexpr double kTraceTol = 1e-10;
    static constexpr double kEigenvalueFloor = -1e-10;

    explicit DensityMatrix(const Eigen::Matrix4cd& m);

    const Eigen::Matrix4cd& matrix() const { return m_; }
    Complex operator()(int i, int j) const { return m_(i, j); }

private:
    Eigen::Matrix4cd m_;
};

/// (|HH> + e^{i theta} |VV>) / sqrt(2) as a density matrix.
DensityMatrix bell_state(double theta);

/// I/4.
DensityMatrix maximally_mixed();

/// p |Psi><Psi| + (1-p) I/4 with Psi = bell_state(0); p in [0, 1].
DensityMatrix werner_state(double p);

/// Rank-1 product projector |s><s| (x) |i><i|.
TwoQubitOperator projector2q(const JonesVector& signal, const JonesVector& idler);

/// Tr(rho Pi), real part, clamped to [0, 1].
double born_probability(const DensityMatrix& rho, const TwoQubitOperator& op);

/// <psi| rho |psi> against the pure state of `target` (purity 1 within 1e-8,
/// otherwise invalid_argument — use fidelity_mixed for mixed targets).
double fidelity_to_pure(const DensityMatrix& rho, const DensityMatrix& target);

/// Uhlmann fidelity (Tr sqrt(sqrt(a) b sqrt(a)))^2.
double fidelity_mixed(const DensityMatrix& a, const DensityMatrix& b);

/// Wootters concurrence: max(0, l1 - l2 - l3 - l4) with l_i the decreasing
/// square roots of the eigenvalues of rho (YY) rho* (YY).
double concurrence(const DensityMatrix& rho);

/// Tr(rho^2), in [0.25, 1] for a valid state.
double purity(const DensityMatrix& rho);

/// arg(<VV| rho |HH>), the phase between the |HH> and |VV> populations.
/// Throws UndefinedPhaseError when the coherence magnitude is below the floor.
double relative_phase(const DensityMatrix& rho, double coherence_floor = 1e-6);

}  // namespace pairtomo

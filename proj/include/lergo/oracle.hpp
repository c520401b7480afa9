#pragma once

// Brute-force reference in the full 2^L Hilbert space.
//
// Basis convention: bit (s-1) of a basis index holds site s, bit value 1 is
// spin up (an excitation). Single-site 2x2 matrices use the local order
// (up, down), so sz = diag(1, -1).

#include "lergo/ergotropy.hpp"
#include "lergo/model.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace lergo::oracle {

inline constexpr int kDefaultCap = 14;
inline constexpr int kExplicitMatrixMaxL = 10;

class CapExceeded : public std::runtime_error {
public:
    CapExceeded(int L, int cap);
};

using Mat2 = Eigen::Matrix2cd;

/// coeff * prod_s P_s with P in {I, X, Y, Z}, stored as site masks.
struct PauliString {
    double coeff = 0.0;
    std::uint32_t x_mask = 0;
    std::uint32_t y_mask = 0;
    std::uint32_t z_mask = 0;

    std::uint32_t support() const { return x_mask | y_mask | z_mask; }
    bool acts_on(int site) const { return (support() >> (site - 1)) & 1U; }
};

class DenseState {
public:
    DenseState(int L, std::vector<cplx> amplitudes);

    int sites() const { return L_; }
    std::size_t dim() const { return amp_.size(); }
    std::span<const cplx> amplitudes() const { return amp_; }
    std::span<cplx> amplitudes() { return amp_; }
    double norm() const;

private:
    int L_;
    std::vector<cplx> amp_;
};

/// Real linear combination of Pauli strings with matrix-free application.
class PauliOperator {
public:
    explicit PauliOperator(int L, int cap = kDefaultCap);

    int sites() const { return L_; }
    std::size_t dim() const { return std::size_t{1} << L_; }
    const std::vector<PauliString>& terms() const { return terms_; }

    void add(const PauliString& term);
    /// J (sx_i sx_j + sy_i sy_j)
    void add_exchange(int i, int j, double J);
    void add_field(int site, double Delta);

    void apply(std::span<const cplx> in, std::span<cplx> out) const;
    std::vector<cplx> apply(std::span<const cplx> in) const;
    double expectation(const DenseState& psi) const;
    cplx matrix_element(std::span<const cplx> bra, std::span<const cplx> ket) const;

    /// Dense matrix, only for L <= kExplicitMatrixMaxL.
    Eigen::MatrixXcd explicit_matrix() const;

private:
    int L_;
    std::vector<PauliString> terms_;
};

struct Bond {
    int i = 0;
    int j = 0;
    double J = 0.0;
};

/// Bond-list Hamiltonian; repeated bonds add up.
PauliOperator hamiltonian_from_bonds(int L, std::span<const Bond> bonds, double Delta, int cap = kDefaultCap);

/// Ring Hamiltonian of spec. Throws CapExceeded above cap.
PauliOperator build_hamiltonian(const RingSpec& spec, double Delta, int cap = kDefaultCap);
PauliOperator build_hamiltonian(const CouplingTable& table, int cap = kDefaultCap);

DenseState embed_1x(const PureState1x& state, int cap = kDefaultCap);

/// U = cos(theta/2) 1 - i sin(theta/2) n.sigma
struct LocalUnitaryParams {
    double theta = 0.0;
    std::array<double, 3> n{0.0, 0.0, 1.0};

    Mat2 matrix() const;
    /// Inverse of matrix() for special-unitary input; theta is folded into [0, 2pi).
    static LocalUnitaryParams from_matrix(const Mat2& U);
    static LocalUnitaryParams pauli_x() { return {kPi, {1.0, 0.0, 0.0}}; }
    static LocalUnitaryParams pauli_z() { return {kPi, {0.0, 0.0, 1.0}}; }
};

DenseState apply_local(const DenseState& psi, int S, const Mat2& U);

/// <psi|H|psi> - <U_S psi|H|U_S psi>
double extracted_work(const DenseState& psi, const PauliOperator& H, int S, const LocalUnitaryParams& u);

/// Pre-contracted energy of U_S psi as a function of the 2x2 matrix U.
class LocalEnergyLandscape {
public:
    LocalEnergyLandscape(const DenseState& psi, const PauliOperator& H, int S);

    double initial_energy() const { return e0_; }
    double energy_after(const Mat2& U) const;
    double work(const Mat2& U) const { return e0_ - energy_after(U); }

private:
    // q_[i][j][k][l] = <i (x) psi_k| H |j (x) psi_l>
    std::array<std::array<std::array<std::array<cplx, 2>, 2>, 2>, 2> q_{};
    double e0_ = 0.0;
};

struct GridResolution {
    int theta = 64;
    int polar = 32;
    int azimuth = 64;
};

struct BruteForceResult {
    double work = 0.0;
    LocalUnitaryParams argmax;
    double best_grid_work = 0.0;
    int refinement_cycles = 0;
};

/// Grid search over (theta, polar, azimuth) followed by coordinate-wise
/// golden-section refinement down to a 1e-10 step.
BruteForceResult brute_force_ergotropy(const DenseState& psi, const PauliOperator& H, int S,
                                       GridResolution grid = {});

struct SiteDecomposition {
    PauliOperator H_S;
    PauliOperator H_E;
    PauliOperator V_SE;
};

/// Sort the terms of H by whether they act only on S, avoid S, or couple S to the rest.
SiteDecomposition split_at_site(const PauliOperator& H, int S);

/// M_jk = -(r_j h_k + 1/2 Tr{rho_E^(j) V_E^(k)}) from explicit partial traces.
/// Throws std::invalid_argument if the parts do not reproduce H within 1e-10
/// or are not supported where their role requires.
MMatrix3 m_matrix_direct(const DenseState& psi, const PauliOperator& H, const SiteDecomposition& parts, int S);

/// exp(-i H t) on the full space through a dense eigendecomposition (L <= 10).
class DensePropagator {
public:
    explicit DensePropagator(const PauliOperator& H);
    DenseState evolve(const DenseState& psi, double t) const;
    const Eigen::VectorXd& eigenvalues() const { return evals_; }

private:
    int L_;
    Eigen::VectorXd evals_;
    Eigen::MatrixXcd evecs_;
};

/// Normalized random one-excitation state with Gaussian amplitudes.
PureState1x random_state_1x(int L, std::mt19937_64& rng);

/// Weight of psi in each excitation-number sector 0..L.
std::vector<double> sector_weights(const DenseState& psi);

} // namespace lergo::oracle

#pragma once

// Ring geometry, coupling tables and one-excitation states of the XY ring
//
//   H = sum_{i<j} J_ij (sx_i sx_j + sy_i sy_j) + Delta sum_j sz_j
//
// Sites are labelled 1..L with periodic wraparound.

#include <complex>
#include <optional>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

namespace lergo {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

struct NearestNeighbor {
    double J = 1.0;
};

/// J_k = 2g / d_k^alpha with chord length d_k = 2R sin(pi k / L).
/// alpha = +inf is the nearest-neighbour limit with J_1 = 2g.
struct PowerLaw {
    double g = 0.5;
    double alpha = 3.0;
    double R = 1.0;
};

using Coupling = std::variant<NearestNeighbor, PowerLaw>;

/// Radius for which neighbouring sites sit at unit distance.
double unit_spacing_radius(int L);

struct RingSpec {
    int L = 11;
    Coupling coupling = NearestNeighbor{};

    static RingSpec nearest_neighbor(int L, double J);
    /// R defaults to unit_spacing_radius(L) so that J_1 = 2g.
    static RingSpec power_law(int L, double g, double alpha, std::optional<double> R = std::nullopt);

    /// Throws std::invalid_argument on L < 3, alpha <= 0 or R <= 0.
    void validate() const;
    bool is_nearest_neighbor() const;
};

/// Couplings indexed by chord distance k = 1..floor(L/2), plus the field.
struct CouplingTable {
    int L = 0;
    std::vector<double> J;
    double Delta = 0.0;

    double at_distance(int k) const;
    double between(int i, int j) const;
    double nearest() const { return J.front(); }
    bool nearest_only() const;
};

CouplingTable coupling_table(const RingSpec& spec, double Delta);

/// Wrap any integer site label onto 1..L.
int wrap_site(int s, int L);
/// min(|i-j|, L-|i-j|) on the ring.
int chord_distance(int i, int j, int L);

/// Normalized one-excitation wavefunction sum_j f_j |j>.
class PureState1x {
public:
    static constexpr double kNormTolerance = 1e-12;

    /// Throws std::invalid_argument if the norm deviates from 1 by more than tol.
    explicit PureState1x(std::vector<cplx> f, double tol = kNormTolerance);

    /// Rescale arbitrary nonzero amplitudes to unit norm.
    static PureState1x normalized(std::vector<cplx> f);

    int size() const { return static_cast<int>(f_.size()); }
    /// Amplitude at site s, periodic in s.
    cplx amp(int s) const { return f_[static_cast<std::size_t>(wrap_site(s, size()) - 1)]; }
    std::span<const cplx> amplitudes() const { return f_; }
    double norm() const;

private:
    std::vector<cplx> f_;
};

struct Winding {
    int ell = 0;
    double phi = 0.0;
};

/// Plane-wave components of a current superposition.
struct WindingSet {
    std::vector<Winding> entries;

    /// Throws std::invalid_argument when empty or windings coincide modulo L.
    void validate(int L) const;
    double normalization() const;
};

PureState1x current_state(int L, int ell);
PureState1x superposition_state(int L, const WindingSet& windings);
/// Two-current superposition (|l1> + e^{i phi21}|l2>)/sqrt(2).
PureState1x two_current_state(int L, int ell1, int ell2, double phi21);
PureState1x bell_state(int L, int i, int j);
PureState1x localized_state(int L, int site);

std::vector<double> population(const PureState1x& state);

struct StateEnergy {
    double total = 0.0;
    double hop = 0.0;
    double field = 0.0;
};

StateEnergy state_energy(const PureState1x& state, const CouplingTable& table);

/// E_j = sum_{k != j} J_jk (f_j^* f_k + c.c.) + Delta M^z_j; each pair energy is
/// split evenly between its endpoints, which for nearest-neighbour rings is
/// J C^xx_j + Delta M^z_j.
std::vector<double> per_site_energy(const PureState1x& state, const CouplingTable& table);

/// |Delta/J| at which the two-current energy (and LE) profile changes shape:
/// cos k1 + cos k2. Returned without a sign guard.
double shape_threshold(int L, int ell1, int ell2);

} // namespace lergo

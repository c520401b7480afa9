#pragma once

// Exact time evolution in the one-excitation sector.
//
// The hopping block of the ring is circulant, so plane waves |l> diagonalize
// it with E_l = sum_{j != 0} 2 J_{0j} cos(2 pi l j / L). The field adds
// Delta (2 - L) to every one-excitation state and is dropped as a global phase.

#include "lergo/ergotropy.hpp"
#include "lergo/model.hpp"

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace lergo {

struct Spectrum {
    std::vector<double> E; // indexed by winding l = 0..L-1

    double at(int ell) const;
};

/// Antipodal chord (k = L/2, even L) is counted once.
Spectrum spectrum(const CouplingTable& table);
Spectrum spectrum(const RingSpec& spec);

/// Real symmetric L x L hopping block, entries 2 J_ij (field omitted).
Eigen::MatrixXd hopping_block(const CouplingTable& table);

class Propagator {
public:
    explicit Propagator(CouplingTable table);

    const CouplingTable& table() const { return table_; }
    const Spectrum& energies() const { return spectrum_; }
    PureState1x evolve(const PureState1x& state, double t) const;

private:
    CouplingTable table_;
    Spectrum spectrum_;
};

PureState1x evolve_1x(const PureState1x& state, const CouplingTable& table, double t);
PureState1x evolve_1x(const PureState1x& state, const RingSpec& spec, double Delta, double t);

/// Plane-wave amplitudes c_l = <l|psi>.
std::vector<cplx> plane_wave_components(const PureState1x& state);

struct TwoCurrent {
    int ell1 = 0;
    int ell2 = 0;
    double phi21 = 0.0;
};

/// Recognize (|l1> + e^{i phi21}|l2>)/sqrt(2) up to a global phase.
std::optional<TwoCurrent> detect_two_current(const PureState1x& state, double tol = 1e-10);

struct Trajectory {
    CouplingTable table;
    std::vector<double> times;
    std::vector<PureState1x> states;
    std::vector<ErgotropyProfile> profiles;
};

/// Times must be strictly increasing. Each time point is evolved directly from state0.
Trajectory ergotropy_trajectory(const PureState1x& state0, const CouplingTable& table, const std::vector<double>& times);
Trajectory ergotropy_trajectory(const PureState1x& state0, const RingSpec& spec, double Delta,
                                const std::vector<double>& times);

/// 0, dt, 2dt, ... up to t_max (inclusive within dt/2).
std::vector<double> time_grid(double t_max, double dt);

struct ShiftTime {
    double t = 0.0;
    int shift = 0; // profile(t, S) = profile(0, S - shift)
};

/// Times in [0, t_max] at which a two-current profile is an exact lattice
/// translation of the initial one.
std::vector<ShiftTime> lattice_shift_times(const CouplingTable& table, int ell1, int ell2, double t_max);

struct DriftPoint {
    double t = 0.0;
    double deviation = 0.0;
    bool applicable = false; // trajectory started from a two-current state
    int shift = -1;          // lattice shift used, -1 when compared to the analytic profile
};

/// Chirality diagnostic. For two-current trajectories, profiles at lattice-shift
/// times (recognized within phase_window radians) are compared with the shifted
/// initial profile, other times with the analytic profile at phi21(t). For any
/// other initial state the deviation is the smallest max-deviation over all
/// circular shifts of the initial profile.
std::vector<DriftPoint> chirality_drift(const Trajectory& trajectory, double phase_window = 1e-9);

/// Mean spacing of successive local maxima (parabolic interpolation); NaN if
/// fewer than two maxima are found.
double oscillation_period(const std::vector<double>& times, const std::vector<double>& values);

} // namespace lergo

#pragma once

// Closed-form single-site local ergotropy (LE).
//
// For a single qubit S the LE follows from the real 3x3 matrix M:
//
//   LE = Tr(|M| - M)                     if det M >= 0
//   LE = Tr(|M| - M) - 2 sigma_min(M)    if det M <  0
//
// On one-excitation states M has the block form
//
//   [ m_xx  m_xy  0    ]
//   [-m_xy  m_xx  0    ]
//   [ 0     0     m_zz ]
//
// so that LE = 2[sqrt(m_xx^2 + m_xy^2) - m_xx] for m_zz >= 0 and
// LE = 2[max(sqrt(m_xx^2 + m_xy^2), |m_zz|) - m_xx] otherwise.

#include "lergo/model.hpp"

#include <array>
#include <string_view>
#include <vector>

namespace lergo {

/// Nearest-neighbour correlators at a site. C^yy = C^xx and C^yx = -C^xy are implied.
struct CorrelationSet {
    double Cxx = 0.0;
    double Cxy = 0.0;
    double Mz = 0.0;
};

struct MMatrix3 {
    std::array<std::array<double, 3>, 3> m{};

    double& operator()(int j, int k) { return m[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)]; }
    double operator()(int j, int k) const { return m[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)]; }

    double xx() const { return m[0][0]; }
    double xy() const { return m[0][1]; }
    double zz() const { return m[2][2]; }

    double determinant() const;
    /// Zero z-row/column off-diagonals, m_xx = m_yy and m_xy = -m_yx, up to tol.
    bool is_one_excitation_block(double tol = 0.0) const;
    /// Largest absolute difference between entries.
    double max_abs_diff(const MMatrix3& other) const;

    static MMatrix3 block(double mxx, double mxy, double mzz);
};

enum class Branch { PositiveDet, NegativeDet };

std::string_view to_string(Branch b);

struct LocalErgotropy {
    double value = 0.0;
    Branch branch = Branch::PositiveDet;
};

CorrelationSet correlations_1x(const PureState1x& state, int S);

MMatrix3 m_matrix_1x(const PureState1x& state, const CouplingTable& table, int S);

/// General 3x3 evaluation. det M = 0 is assigned to the positive branch.
LocalErgotropy ergotropy_from_m(const MMatrix3& M);

LocalErgotropy local_ergotropy_1x(const PureState1x& state, const CouplingTable& table, int S);

/// Closed two-current expressions (E^> / E^<) for (|l1> + e^{i phi21}|l2>)/sqrt(2)
/// on a nearest-neighbour ring. Requires L > 4 and J != 0.
double two_current_ergotropy(int L, int ell1, int ell2, double phi21, double J, double Delta, int S);

/// Site-independent LE of a single current |l> on a nearest-neighbour ring.
double single_current_ergotropy(int L, int ell, double J, double Delta);

/// Branch threshold of single_current_ergotropy, 4|cos(2 pi l/L)|/(L-2).
double single_current_threshold(int L, int ell);

struct PauliWork {
    double Wx = 0.0;
    double Wz = 0.0;
};

/// Work extracted by sx_S and sz_S on a one-excitation state.
PauliWork xz_work(const PureState1x& state, const CouplingTable& table, int S);

/// g_S = sqrt(m_xx^2 + m_xy^2) / (|J_1| |M^z_S|); +inf when |M^z_S| <= 1e-14.
double branch_ratio(const PureState1x& state, const CouplingTable& table, int S);

struct SiteErgotropy {
    int site = 0;
    double le = 0.0;
    Branch branch = Branch::PositiveDet;
    double gS = 0.0;
    double Wx = 0.0;
    double Wz = 0.0;
    double deltaX = 0.0;
    double deltaZ = 0.0;
    double convexity = 0.0;
};

struct ErgotropyProfile {
    std::vector<SiteErgotropy> sites;
    double mean_le = 0.0;
    double mean_deltaX = 0.0;
    double mean_deltaZ = 0.0;
    double max_le = 0.0;
    int argmax_site = 1;

    const SiteErgotropy& at(int S) const { return sites.at(static_cast<std::size_t>(S - 1)); }
    std::vector<double> le_values() const;
};

ErgotropyProfile profile(const PureState1x& state, const CouplingTable& table);

/// Periodic second difference LE_{S+1} - 2 LE_S + LE_{S-1}.
std::vector<double> convexity(const std::vector<double>& le);

enum class Transform { XOptimal, ZOptimal, ZQuasi, Other };

std::string_view to_string(Transform t);

inline constexpr double kOptimalityTolerance = 1e-9;

std::vector<Transform> optimal_transform_map(const ErgotropyProfile& profile,
                                             double tol = kOptimalityTolerance);

} // namespace lergo

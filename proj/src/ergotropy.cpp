#include "lergo/ergotropy.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace lergo {

double MMatrix3::determinant() const
{
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
         + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

bool MMatrix3::is_one_excitation_block(double tol) const
{
    return std::abs(m[0][2]) <= tol && std::abs(m[1][2]) <= tol && std::abs(m[2][0]) <= tol
        && std::abs(m[2][1]) <= tol && std::abs(m[0][0] - m[1][1]) <= tol && std::abs(m[0][1] + m[1][0]) <= tol;
}

double MMatrix3::max_abs_diff(const MMatrix3& other) const
{
    double d = 0.0;
    for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k)
            d = std::max(d, std::abs((*this)(j, k) - other(j, k)));
    return d;
}

MMatrix3 MMatrix3::block(double mxx, double mxy, double mzz)
{
    MMatrix3 M;
    M.m = {{{mxx, mxy, 0.0}, {-mxy, mxx, 0.0}, {0.0, 0.0, mzz}}};
    return M;
}

std::string_view to_string(Branch b) { return b == Branch::PositiveDet ? "psd" : "nd"; }

std::string_view to_string(Transform t)
{
    switch (t) {
    case Transform::XOptimal: return "X";
    case Transform::ZOptimal: return "Z";
    case Transform::ZQuasi: return "Z-quasi";
    case Transform::Other: return "other";
    }
    return "other";
}

CorrelationSet correlations_1x(const PureState1x& state, int S)
{
    const cplx fs = state.amp(S);
    const cplx z = std::conj(fs) * (state.amp(S - 1) + state.amp(S + 1));
    return CorrelationSet{2.0 * z.real(), -2.0 * z.imag(), 2.0 * std::norm(fs) - 1.0};
}

MMatrix3 m_matrix_1x(const PureState1x& state, const CouplingTable& table, int S)
{
    const int L = state.size();
    if (L != table.L)
        throw std::invalid_argument("state and coupling table sizes differ");
    const cplx fs = state.amp(S);
    // sum_j J_Sj f_S^* f_j; m_xx = -2 Re, m_xy = 2 Im.
    cplx acc = 0.0;
    for (int j = 1; j <= L; ++j) {
        if (j == wrap_site(S, L))
            continue;
        const double Jsj = table.between(S, j);
        if (Jsj != 0.0)
            acc += Jsj * std::conj(fs) * state.amp(j);
    }
    return MMatrix3::block(-2.0 * acc.real(), 2.0 * acc.imag(), table.Delta * (1.0 - 2.0 * std::norm(fs)));
}

LocalErgotropy ergotropy_from_m(const MMatrix3& M)
{
    if (M.is_one_excitation_block()) {
        const double a = M.xx();
        const double r = std::hypot(M.xx(), M.xy());
        const double c = M.zz();
        if (c >= 0.0 || r == 0.0)
            return {2.0 * (r - a) + (std::abs(c) - c), Branch::PositiveDet};
        return {2.0 * (std::max(r, -c) - a), Branch::NegativeDet};
    }

    Eigen::Matrix3d A;
    for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k)
            A(j, k) = M(j, k);
    const Eigen::JacobiSVD<Eigen::Matrix3d> svd(A);
    const Eigen::Vector3d sv = svd.singularValues();
    const double base = sv.sum() - A.trace();
    if (M.determinant() >= 0.0)
        return {base, Branch::PositiveDet};
    return {base - 2.0 * sv.minCoeff(), Branch::NegativeDet};
}

LocalErgotropy local_ergotropy_1x(const PureState1x& state, const CouplingTable& table, int S)
{
    return ergotropy_from_m(m_matrix_1x(state, table, S));
}

double two_current_ergotropy(int L, int ell1, int ell2, double phi21, double J, double Delta, int S)
{
    if (L <= 4)
        throw std::invalid_argument("two-current closed form needs L > 4; use local_ergotropy_1x");
    if (J == 0.0)
        throw std::invalid_argument("two-current closed form needs J != 0; use local_ergotropy_1x");
    const double k1 = 2.0 * kPi * ell1 / L;
    const double k2 = 2.0 * kPi * ell2 / L;
    const double c1 = std::cos(k1);
    const double c2 = std::cos(k2);
    const double Phi = (k1 - k2) * S - phi21;
    const double one_plus = 1.0 + std::cos(Phi);

    const double hop = (c1 + c2) * one_plus;
    const double root = std::sqrt(hop * hop + (c1 - c2) * (c1 - c2) * std::sin(Phi) * std::sin(Phi));
    const double e_greater = 4.0 / L * (std::abs(J) * root + J * hop);

    const double mz = 2.0 / L * one_plus - 1.0;
    if (Delta >= 0.0)
        return e_greater;
    const double g = (2.0 / L) * root / std::abs(mz);
    if (std::abs(Delta / J) < g)
        return e_greater;
    return 2.0 * std::abs(Delta * mz) + 4.0 * J / L * hop;
}

double single_current_threshold(int L, int ell)
{
    return 4.0 * std::abs(std::cos(2.0 * kPi * ell / L)) / (L - 2);
}

double single_current_ergotropy(int L, int ell, double J, double Delta)
{
    if (L < 3)
        throw std::invalid_argument("ring needs at least 3 sites");
    const double Jc = J * std::cos(2.0 * kPi * ell / L);
    if (Delta >= 0.0 || std::abs(Delta) * (L - 2) <= 4.0 * std::abs(Jc))
        return 8.0 / L * (std::abs(Jc) + Jc);
    return 2.0 / L * (std::abs(Delta) * (L - 2) + 4.0 * Jc);
}

PauliWork xz_work(const PureState1x& state, const CouplingTable& table, int S)
{
    const MMatrix3 M = m_matrix_1x(state, table, S);
    const double mz = 2.0 * std::norm(state.amp(S)) - 1.0;
    return PauliWork{2.0 * (-M.xx() + table.Delta * mz), -4.0 * M.xx()};
}

double branch_ratio(const PureState1x& state, const CouplingTable& table, int S)
{
    const double mz = std::abs(2.0 * std::norm(state.amp(S)) - 1.0);
    // |f_S|^2 = 1/2 rarely squares to exactly 0.5
    if (mz <= 1e-14)
        return std::numeric_limits<double>::infinity();
    const double J1 = table.nearest();
    if (J1 == 0.0) {
        const CorrelationSet c = correlations_1x(state, S);
        return std::hypot(c.Cxx, c.Cxy) / mz;
    }
    const MMatrix3 M = m_matrix_1x(state, table, S);
    return std::hypot(M.xx(), M.xy()) / (std::abs(J1) * mz);
}

std::vector<double> ErgotropyProfile::le_values() const
{
    std::vector<double> v;
    v.reserve(sites.size());
    for (const auto& s : sites)
        v.push_back(s.le);
    return v;
}

std::vector<double> convexity(const std::vector<double>& le)
{
    const std::size_t n = le.size();
    std::vector<double> c(n);
    for (std::size_t s = 0; s < n; ++s) {
        const double prev = le[(s + n - 1) % n];
        const double next = le[(s + 1) % n];
        c[s] = (next - le[s]) - (le[s] - prev);
    }
    return c;
}

ErgotropyProfile profile(const PureState1x& state, const CouplingTable& table)
{
    const int L = state.size();
    ErgotropyProfile p;
    p.sites.resize(static_cast<std::size_t>(L));
    for (int S = 1; S <= L; ++S) {
        auto& site = p.sites[static_cast<std::size_t>(S - 1)];
        const LocalErgotropy le = local_ergotropy_1x(state, table, S);
        const PauliWork w = xz_work(state, table, S);
        site.site = S;
        site.le = le.value;
        site.branch = le.branch;
        site.gS = branch_ratio(state, table, S);
        site.Wx = w.Wx;
        site.Wz = w.Wz;
        site.deltaX = le.value - w.Wx;
        site.deltaZ = le.value - w.Wz;
    }
    const std::vector<double> conv = convexity(p.le_values());
    double sum_le = 0.0, sum_dx = 0.0, sum_dz = 0.0;
    p.max_le = -std::numeric_limits<double>::infinity();
    for (auto& site : p.sites) {
        site.convexity = conv[static_cast<std::size_t>(site.site - 1)];
        sum_le += site.le;
        sum_dx += site.deltaX;
        sum_dz += site.deltaZ;
        if (site.le > p.max_le) {
            p.max_le = site.le;
            p.argmax_site = site.site;
        }
    }
    p.mean_le = sum_le / L;
    p.mean_deltaX = sum_dx / L;
    p.mean_deltaZ = sum_dz / L;
    return p;
}

std::vector<Transform> optimal_transform_map(const ErgotropyProfile& profile, double tol)
{
    std::vector<Transform> tags;
    tags.reserve(profile.sites.size());
    for (const auto& s : profile.sites) {
        if (s.deltaX <= tol)
            tags.push_back(Transform::XOptimal);
        else if (s.deltaZ <= tol)
            tags.push_back(Transform::ZOptimal);
        else if (s.deltaZ < s.deltaX)
            tags.push_back(Transform::ZQuasi);
        else
            tags.push_back(Transform::Other);
    }
    return tags;
}

} // namespace lergo

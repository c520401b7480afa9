#include "lergo/dynamics.hpp"

#include "lergo/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace lergo {

namespace {

cplx plane_wave(int ell, int j, int L)
{
    const long long r = ((static_cast<long long>(ell) * j) % L + L) % L;
    const double a = 2.0 * kPi * static_cast<double>(r) / L;
    return {std::cos(a), std::sin(a)};
}

// Angle folded into (-pi, pi].
double wrap_angle(double a)
{
    a = std::remainder(a, 2.0 * kPi);
    return a <= -kPi ? a + 2.0 * kPi : a;
}

// Multiplicity of chord k among the other L-1 sites.
int chord_multiplicity(int k, int L) { return 2 * k == L ? 1 : 2; }

} // namespace

double Spectrum::at(int ell) const
{
    const int L = static_cast<int>(E.size());
    return E[static_cast<std::size_t>(((ell % L) + L) % L)];
}

Spectrum spectrum(const CouplingTable& table)
{
    const int L = table.L;
    Spectrum s;
    s.E.assign(static_cast<std::size_t>(L), 0.0);
    for (int ell = 0; ell < L; ++ell) {
        double e = 0.0;
        for (int k = 1; k <= L / 2; ++k) {
            const long long r = (static_cast<long long>(ell) * k) % L;
            e += chord_multiplicity(k, L) * 2.0 * table.at_distance(k) * std::cos(2.0 * kPi * static_cast<double>(r) / L);
        }
        s.E[static_cast<std::size_t>(ell)] = e;
    }
    return s;
}

Spectrum spectrum(const RingSpec& spec) { return spectrum(coupling_table(spec, 0.0)); }

Eigen::MatrixXd hopping_block(const CouplingTable& table)
{
    const int L = table.L;
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(L, L);
    for (int i = 1; i <= L; ++i)
        for (int j = 1; j <= L; ++j)
            if (i != j)
                H(i - 1, j - 1) = 2.0 * table.between(i, j);
    return H;
}

std::vector<cplx> plane_wave_components(const PureState1x& state)
{
    const int L = state.size();
    const double s = 1.0 / std::sqrt(static_cast<double>(L));
    std::vector<cplx> c(static_cast<std::size_t>(L), 0.0);
    for (int ell = 0; ell < L; ++ell) {
        cplx acc = 0.0;
        for (int j = 1; j <= L; ++j)
            acc += std::conj(plane_wave(ell, j, L)) * state.amp(j);
        c[static_cast<std::size_t>(ell)] = s * acc;
    }
    return c;
}

Propagator::Propagator(CouplingTable table) : table_(std::move(table)), spectrum_(spectrum(table_)) {}

PureState1x Propagator::evolve(const PureState1x& state, double t) const
{
    const int L = state.size();
    if (L != table_.L)
        throw std::invalid_argument("state and coupling table sizes differ");
    auto c = plane_wave_components(state);
    for (int ell = 0; ell < L; ++ell)
        c[static_cast<std::size_t>(ell)] *= std::polar(1.0, -spectrum_.E[static_cast<std::size_t>(ell)] * t);
    const double s = 1.0 / std::sqrt(static_cast<double>(L));
    std::vector<cplx> f(static_cast<std::size_t>(L));
    for (int j = 1; j <= L; ++j) {
        cplx acc = 0.0;
        for (int ell = 0; ell < L; ++ell)
            acc += c[static_cast<std::size_t>(ell)] * plane_wave(ell, j, L);
        f[static_cast<std::size_t>(j - 1)] = s * acc;
    }
    // Unitary up to rounding; renormalize so long step chains stay on the unit sphere.
    return PureState1x::normalized(std::move(f));
}

PureState1x evolve_1x(const PureState1x& state, const CouplingTable& table, double t)
{
    return Propagator(table).evolve(state, t);
}

PureState1x evolve_1x(const PureState1x& state, const RingSpec& spec, double Delta, double t)
{
    return evolve_1x(state, coupling_table(spec, Delta), t);
}

std::optional<TwoCurrent> detect_two_current(const PureState1x& state, double tol)
{
    const auto c = plane_wave_components(state);
    std::vector<int> present;
    for (std::size_t ell = 0; ell < c.size(); ++ell) {
        const double w = std::norm(c[ell]);
        if (std::abs(w - 0.5) <= tol)
            present.push_back(static_cast<int>(ell));
        else if (w > tol)
            return std::nullopt;
    }
    if (present.size() != 2)
        return std::nullopt;
    const cplx c1 = c[static_cast<std::size_t>(present[0])];
    const cplx c2 = c[static_cast<std::size_t>(present[1])];
    return TwoCurrent{present[0], present[1], wrap_angle(std::arg(c2) - std::arg(c1))};
}

Trajectory ergotropy_trajectory(const PureState1x& state0, const CouplingTable& table, const std::vector<double>& times)
{
    if (times.empty())
        throw std::invalid_argument("time grid must not be empty");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1]))
            throw std::invalid_argument("times must be strictly increasing");
    const Propagator prop(table);
    Trajectory traj{table, times, {}, {}};
    std::vector<std::optional<PureState1x>> states(times.size());
    std::vector<ErgotropyProfile> profiles(times.size());
    parallel_for(times.size(), [&](std::size_t i) {
        states[i] = prop.evolve(state0, times[i]);
        profiles[i] = profile(*states[i], table);
    });
    traj.states.reserve(times.size());
    for (auto& s : states)
        traj.states.push_back(std::move(*s));
    traj.profiles = std::move(profiles);
    return traj;
}

Trajectory ergotropy_trajectory(const PureState1x& state0, const RingSpec& spec, double Delta,
                                const std::vector<double>& times)
{
    return ergotropy_trajectory(state0, coupling_table(spec, Delta), times);
}

std::vector<double> time_grid(double t_max, double dt)
{
    if (!(dt > 0.0) || !(t_max >= 0.0))
        throw std::invalid_argument("time grid needs dt > 0 and t_max >= 0");
    std::vector<double> t;
    const auto n = static_cast<std::size_t>(std::floor(t_max / dt + 0.5));
    for (std::size_t i = 0; i <= n; ++i)
        t.push_back(static_cast<double>(i) * dt);
    return t;
}

std::vector<ShiftTime> lattice_shift_times(const CouplingTable& table, int ell1, int ell2, double t_max)
{
    const int L = table.L;
    const int dl = ((ell1 - ell2) % L + L) % L;
    if (dl == 0)
        throw std::invalid_argument("windings must differ modulo L");
    const Spectrum sp = spectrum(table);
    const double omega = sp.at(ell1) - sp.at(ell2);
    std::vector<ShiftTime> out{{0.0, 0}};
    if (omega == 0.0)
        return out;
    const int g = std::gcd(dl, L);
    const double step = 2.0 * kPi * g / (L * std::abs(omega));
    const int sign = omega > 0 ? 1 : -1;
    for (int n = 1; n * step <= t_max; ++n) {
        const long long target = ((static_cast<long long>(sign) * n * g) % L + L) % L;
        int shift = -1;
        for (int m = 0; m < L; ++m)
            if ((static_cast<long long>(dl) * m) % L == target) {
                shift = m;
                break;
            }
        out.push_back({n * step, shift});
    }
    return out;
}

namespace {

double shifted_deviation(const std::vector<double>& now, const std::vector<double>& initial, int m)
{
    const int L = static_cast<int>(now.size());
    double d = 0.0;
    for (int S = 1; S <= L; ++S)
        d = std::max(d, std::abs(now[static_cast<std::size_t>(S - 1)]
                                 - initial[static_cast<std::size_t>(wrap_site(S - m, L) - 1)]));
    return d;
}

std::vector<double> analytic_two_current_profile(const CouplingTable& table, const TwoCurrent& tc, double phi21)
{
    const int L = table.L;
    std::vector<double> le(static_cast<std::size_t>(L));
    if (table.nearest_only() && L > 4 && table.nearest() != 0.0) {
        for (int S = 1; S <= L; ++S)
            le[static_cast<std::size_t>(S - 1)]
                = two_current_ergotropy(L, tc.ell1, tc.ell2, phi21, table.nearest(), table.Delta, S);
        return le;
    }
    const PureState1x psi = two_current_state(L, tc.ell1, tc.ell2, phi21);
    for (int S = 1; S <= L; ++S)
        le[static_cast<std::size_t>(S - 1)] = local_ergotropy_1x(psi, table, S).value;
    return le;
}

} // namespace

std::vector<DriftPoint> chirality_drift(const Trajectory& trajectory, double phase_window)
{
    std::vector<DriftPoint> out;
    if (trajectory.times.empty())
        return out;
    const int L = trajectory.table.L;
    const std::vector<double> initial = trajectory.profiles.front().le_values();
    const auto tc = detect_two_current(trajectory.states.front());

    if (!tc) {
        for (std::size_t i = 0; i < trajectory.times.size(); ++i) {
            const auto now = trajectory.profiles[i].le_values();
            DriftPoint p{trajectory.times[i], std::numeric_limits<double>::infinity(), false, 0};
            for (int m = 0; m < L; ++m) {
                const double d = shifted_deviation(now, initial, m);
                if (d < p.deviation) {
                    p.deviation = d;
                    p.shift = m;
                }
            }
            out.push_back(p);
        }
        return out;
    }

    const Spectrum sp = spectrum(trajectory.table);
    const double omega = sp.at(tc->ell1) - sp.at(tc->ell2);
    const double t0 = trajectory.times.front();
    for (std::size_t i = 0; i < trajectory.times.size(); ++i) {
        const double t = trajectory.times[i];
        const double advance = omega * (t - t0);
        const auto now = trajectory.profiles[i].le_values();
        DriftPoint p{t, 0.0, true, -1};
        for (int m = 0; m < L; ++m) {
            const double lattice = 2.0 * kPi * static_cast<double>(tc->ell1 - tc->ell2) * m / L;
            if (std::abs(wrap_angle(advance - lattice)) <= phase_window) {
                p.shift = m;
                break;
            }
        }
        if (p.shift >= 0) {
            p.deviation = shifted_deviation(now, initial, p.shift);
        } else {
            const auto ref = analytic_two_current_profile(trajectory.table, *tc, tc->phi21 + omega * t);
            for (std::size_t s = 0; s < now.size(); ++s)
                p.deviation = std::max(p.deviation, std::abs(now[s] - ref[s]));
        }
        out.push_back(p);
    }
    return out;
}

double oscillation_period(const std::vector<double>& times, const std::vector<double>& values)
{
    if (times.size() != values.size())
        throw std::invalid_argument("times and values differ in length");
    std::vector<double> peaks;
    for (std::size_t i = 1; i + 1 < values.size(); ++i) {
        const double a = values[i - 1], b = values[i], c = values[i + 1];
        if (b > a && b >= c) {
            const double denom = a - 2.0 * b + c;
            double offset = 0.0;
            if (denom != 0.0)
                offset = 0.5 * (a - c) / denom;
            const double h = times[i + 1] - times[i];
            peaks.push_back(times[i] + offset * h);
        }
    }
    if (peaks.size() < 2)
        return std::numeric_limits<double>::quiet_NaN();
    return (peaks.back() - peaks.front()) / static_cast<double>(peaks.size() - 1);
}

} // namespace lergo

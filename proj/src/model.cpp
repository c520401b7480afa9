#include "lergo/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace lergo {

double unit_spacing_radius(int L) { return 1.0 / (2.0 * std::sin(kPi / L)); }

RingSpec RingSpec::nearest_neighbor(int L, double J) { return RingSpec{L, NearestNeighbor{J}}; }

RingSpec RingSpec::power_law(int L, double g, double alpha, std::optional<double> R)
{
    return RingSpec{L, PowerLaw{g, alpha, R.value_or(unit_spacing_radius(L))}};
}

void RingSpec::validate() const
{
    if (L < 3)
        throw std::invalid_argument("ring needs at least 3 sites, got L=" + std::to_string(L));
    if (const auto* p = std::get_if<PowerLaw>(&coupling)) {
        if (!(p->alpha > 0.0))
            throw std::invalid_argument("power-law exponent alpha must be positive");
        if (!(p->R > 0.0) || !std::isfinite(p->R))
            throw std::invalid_argument("ring radius R must be positive and finite");
        if (!std::isfinite(p->g))
            throw std::invalid_argument("coupling g must be finite");
    } else if (!std::isfinite(std::get<NearestNeighbor>(coupling).J)) {
        throw std::invalid_argument("coupling J must be finite");
    }
}

bool RingSpec::is_nearest_neighbor() const
{
    if (std::holds_alternative<NearestNeighbor>(coupling))
        return true;
    return std::isinf(std::get<PowerLaw>(coupling).alpha);
}

double CouplingTable::at_distance(int k) const
{
    if (k <= 0 || k > static_cast<int>(J.size()))
        return 0.0;
    return J[static_cast<std::size_t>(k - 1)];
}

double CouplingTable::between(int i, int j) const { return at_distance(chord_distance(i, j, L)); }

bool CouplingTable::nearest_only() const
{
    return std::all_of(J.begin() + 1, J.end(), [](double v) { return v == 0.0; });
}

CouplingTable coupling_table(const RingSpec& spec, double Delta)
{
    spec.validate();
    if (!std::isfinite(Delta))
        throw std::invalid_argument("field Delta must be finite");
    CouplingTable table;
    table.L = spec.L;
    table.Delta = Delta;
    table.J.assign(static_cast<std::size_t>(spec.L / 2), 0.0);

    if (const auto* nn = std::get_if<NearestNeighbor>(&spec.coupling)) {
        table.J[0] = nn->J;
        return table;
    }
    const auto& p = std::get<PowerLaw>(spec.coupling);
    if (std::isinf(p.alpha)) {
        table.J[0] = 2.0 * p.g;
        return table;
    }
    for (int k = 1; k <= spec.L / 2; ++k) {
        const double d = 2.0 * p.R * std::sin(kPi * k / spec.L);
        table.J[static_cast<std::size_t>(k - 1)] = 2.0 * p.g / std::pow(d, p.alpha);
    }
    return table;
}

int wrap_site(int s, int L)
{
    const int r = ((s - 1) % L + L) % L;
    return r + 1;
}

int chord_distance(int i, int j, int L)
{
    const int d = std::abs(wrap_site(i, L) - wrap_site(j, L));
    return std::min(d, L - d);
}

PureState1x::PureState1x(std::vector<cplx> f, double tol) : f_(std::move(f))
{
    if (f_.empty())
        throw std::invalid_argument("empty amplitude vector");
    const double n2 = norm() * norm();
    if (!(std::abs(n2 - 1.0) <= tol))
        throw std::invalid_argument("state is not normalized: sum |f|^2 = " + std::to_string(n2));
}

PureState1x PureState1x::normalized(std::vector<cplx> f)
{
    double n2 = 0.0;
    for (const auto& a : f)
        n2 += std::norm(a);
    if (!(n2 > 0.0) || !std::isfinite(n2))
        throw std::invalid_argument("cannot normalize a zero or non-finite amplitude vector");
    const double s = 1.0 / std::sqrt(n2);
    for (auto& a : f)
        a *= s;
    return PureState1x(std::move(f));
}

double PureState1x::norm() const
{
    double n2 = 0.0;
    for (const auto& a : f_)
        n2 += std::norm(a);
    return std::sqrt(n2);
}

void WindingSet::validate(int L) const
{
    if (entries.empty())
        throw std::invalid_argument("winding set must not be empty");
    std::vector<int> reduced;
    for (const auto& w : entries)
        reduced.push_back(((w.ell % L) + L) % L);
    std::sort(reduced.begin(), reduced.end());
    if (std::adjacent_find(reduced.begin(), reduced.end()) != reduced.end())
        throw std::invalid_argument("winding numbers must be distinct modulo L");
}

double WindingSet::normalization() const { return 1.0 / std::sqrt(static_cast<double>(entries.size())); }

namespace {

void require_ring(int L)
{
    if (L < 3)
        throw std::invalid_argument("ring needs at least 3 sites, got L=" + std::to_string(L));
}

// e^{i 2 pi ell j / L} with the integer product reduced mod L first.
cplx plane_wave(int ell, int j, int L)
{
    const long long r = ((static_cast<long long>(ell) * j) % L + L) % L;
    const double a = 2.0 * kPi * static_cast<double>(r) / L;
    return {std::cos(a), std::sin(a)};
}

} // namespace

PureState1x current_state(int L, int ell)
{
    require_ring(L);
    std::vector<cplx> f(static_cast<std::size_t>(L));
    const double s = 1.0 / std::sqrt(static_cast<double>(L));
    for (int j = 1; j <= L; ++j)
        f[static_cast<std::size_t>(j - 1)] = s * plane_wave(ell, j, L);
    return PureState1x(std::move(f));
}

PureState1x superposition_state(int L, const WindingSet& windings)
{
    require_ring(L);
    windings.validate(L);
    const double s = windings.normalization() / std::sqrt(static_cast<double>(L));
    std::vector<cplx> f(static_cast<std::size_t>(L));
    for (int j = 1; j <= L; ++j) {
        cplx acc = 0.0;
        for (const auto& w : windings.entries)
            acc += plane_wave(w.ell, j, L) * std::polar(1.0, w.phi);
        f[static_cast<std::size_t>(j - 1)] = s * acc;
    }
    return PureState1x(std::move(f));
}

PureState1x two_current_state(int L, int ell1, int ell2, double phi21)
{
    return superposition_state(L, WindingSet{{{ell1, 0.0}, {ell2, phi21}}});
}

PureState1x bell_state(int L, int i, int j)
{
    require_ring(L);
    if (i < 1 || i > L || j < 1 || j > L)
        throw std::invalid_argument("Bell sites must lie in 1..L");
    if (i == j)
        throw std::invalid_argument("Bell state needs two distinct sites");
    std::vector<cplx> f(static_cast<std::size_t>(L), 0.0);
    f[static_cast<std::size_t>(i - 1)] = 1.0 / std::sqrt(2.0);
    f[static_cast<std::size_t>(j - 1)] = 1.0 / std::sqrt(2.0);
    return PureState1x(std::move(f));
}

PureState1x localized_state(int L, int site)
{
    require_ring(L);
    if (site < 1 || site > L)
        throw std::invalid_argument("site must lie in 1..L");
    std::vector<cplx> f(static_cast<std::size_t>(L), 0.0);
    f[static_cast<std::size_t>(site - 1)] = 1.0;
    return PureState1x(std::move(f));
}

std::vector<double> population(const PureState1x& state)
{
    std::vector<double> p;
    p.reserve(state.amplitudes().size());
    for (const auto& a : state.amplitudes())
        p.push_back(std::norm(a));
    return p;
}

StateEnergy state_energy(const PureState1x& state, const CouplingTable& table)
{
    const int L = state.size();
    if (L != table.L)
        throw std::invalid_argument("state and coupling table sizes differ");
    StateEnergy e;
    // Each unordered pair carries J_ij <sx sx + sy sy> = 2 J_ij (f_i^* f_j + c.c.).
    for (int i = 1; i <= L; ++i) {
        for (int j = i + 1; j <= L; ++j) {
            const double Jij = table.between(i, j);
            if (Jij == 0.0)
                continue;
            e.hop += 4.0 * Jij * std::real(std::conj(state.amp(i)) * state.amp(j));
        }
    }
    e.field = table.Delta * (2.0 - L);
    e.total = e.hop + e.field;
    return e;
}

std::vector<double> per_site_energy(const PureState1x& state, const CouplingTable& table)
{
    const int L = state.size();
    if (L != table.L)
        throw std::invalid_argument("state and coupling table sizes differ");
    std::vector<double> e(static_cast<std::size_t>(L));
    for (int s = 1; s <= L; ++s) {
        double hop = 0.0;
        for (int j = 1; j <= L; ++j) {
            if (j == s)
                continue;
            hop += 2.0 * table.between(s, j) * std::real(std::conj(state.amp(s)) * state.amp(j));
        }
        const double mz = 2.0 * std::norm(state.amp(s)) - 1.0;
        e[static_cast<std::size_t>(s - 1)] = hop + table.Delta * mz;
    }
    return e;
}

double shape_threshold(int L, int ell1, int ell2)
{
    return std::cos(2.0 * kPi * ell1 / L) + std::cos(2.0 * kPi * ell2 / L);
}

} // namespace lergo

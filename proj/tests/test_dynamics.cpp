#include "lergo/dynamics.hpp"
#include "lergo/oracle.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

using namespace lergo;

namespace {

CouplingTable nn(int L, double J, double Delta) { return coupling_table(RingSpec::nearest_neighbor(L, J), Delta); }

double state_distance(const PureState1x& a, const PureState1x& b)
{
    double d = 0.0;
    for (int j = 1; j <= a.size(); ++j)
        d = std::max(d, std::abs(a.amp(j) - b.amp(j)));
    return d;
}

} // namespace

TEST_CASE("spectrum")
{
    SUBCASE("nearest neighbour band")
    {
        const auto sp = spectrum(nn(11, 1.0, 0.0));
        for (int ell = 0; ell < 11; ++ell)
            CHECK(sp.at(ell) == doctest::Approx(4.0 * std::cos(2 * kPi * ell / 11)).epsilon(1e-14));
        CHECK(sp.at(1) - sp.at(2) == doctest::Approx(1.703354).epsilon(1e-6));
        CHECK(sp.at(-1) == sp.at(10));
    }
    SUBCASE("dipolar reference values")
    {
        const auto sp = spectrum(RingSpec::power_law(11, 0.5, 3.0));
        CHECK(sp.at(1) == doctest::Approx(3.40434).epsilon(1e-5));
        CHECK(sp.at(2) == doctest::Approx(1.15284).epsilon(1e-5));
        CHECK(sp.at(1) - sp.at(2) == doctest::Approx(2.251501).epsilon(1e-6));
    }
    SUBCASE("matches diagonalization of the hopping block")
    {
        for (int L : {4, 8, 11, 12})
            for (double alpha : {1.5, 3.0, std::numeric_limits<double>::infinity()}) {
                const auto t = coupling_table(RingSpec::power_law(L, 0.5, alpha), 0.0);
                auto E = spectrum(t).E;
                std::sort(E.begin(), E.end());
                const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(hopping_block(t));
                for (int i = 0; i < L; ++i)
                    CHECK(std::abs(E[static_cast<std::size_t>(i)] - eig.eigenvalues()(i)) < 1e-10);
            }
    }
}

TEST_CASE("evolution")
{
    const auto t = nn(11, 1.0, -0.4);
    const auto sp = spectrum(t);

    SUBCASE("current states only pick up a phase")
    {
        const auto psi = current_state(11, 3);
        const auto out = evolve_1x(psi, t, 2.5);
        for (int j = 1; j <= 11; ++j)
            CHECK(std::abs(out.amp(j) - std::polar(1.0, -sp.at(3) * 2.5) * psi.amp(j)) < 1e-13);
    }
    SUBCASE("two-current state advances its relative phase")
    {
        for (double time : {0.0, 0.7, 4.2, 10.0}) {
            const auto out = evolve_1x(two_current_state(11, 1, 2, 0.3), t, time);
            const auto ref = two_current_state(11, 1, 2, 0.3 + (sp.at(1) - sp.at(2)) * time);
            // remove the global phase carried by |l1>
            std::vector<cplx> f(out.amplitudes().begin(), out.amplitudes().end());
            for (auto& a : f)
                a *= std::polar(1.0, sp.at(1) * time);
            CHECK(state_distance(PureState1x(f, 1e-10), ref) < 1e-12);
            const auto tc = detect_two_current(out);
            REQUIRE(tc.has_value());
            CHECK(tc->ell1 == 1);
            CHECK(tc->ell2 == 2);
        }
    }
    SUBCASE("agrees with dense propagation in the full space")
    {
        std::mt19937_64 rng(8);
        for (int L : {5, 8}) {
            const auto table = coupling_table(RingSpec::power_law(L, 0.5, 3.0), 0.7);
            const auto psi = oracle::random_state_1x(L, rng);
            const oracle::DensePropagator dense(oracle::build_hamiltonian(table));
            for (double time : {0.3, 5.0}) {
                const auto a = evolve_1x(psi, table, time);
                const auto b = dense.evolve(oracle::embed_1x(psi), time);
                // the dense run keeps the field phase e^{-i Delta (2-L) t}
                const cplx field = std::polar(1.0, -table.Delta * (2.0 - L) * time);
                for (int j = 1; j <= L; ++j)
                    CHECK(std::abs(field * a.amp(j) - b.amplitudes()[std::size_t{1} << (j - 1)]) < 1e-11);
            }
        }
    }
    SUBCASE("norm survives a long chain of small steps")
    {
        const Propagator prop(t);
        auto psi = bell_state(11, 2, 7);
        for (int i = 0; i < 10000; ++i)
            psi = prop.evolve(psi, 1e-3);
        CHECK(std::abs(psi.norm() - 1.0) < 1e-10);
        CHECK(state_distance(psi, evolve_1x(bell_state(11, 2, 7), t, 10.0)) < 1e-9);
    }
}

TEST_CASE("two-current detection")
{
    CHECK_FALSE(detect_two_current(bell_state(9, 1, 4)).has_value());
    CHECK_FALSE(detect_two_current(current_state(9, 4)).has_value());
    const auto tc = detect_two_current(two_current_state(9, 2, 7, -1.1));
    REQUIRE(tc.has_value());
    CHECK(tc->phi21 == doctest::Approx(-1.1).epsilon(1e-12));
}

TEST_CASE("trajectories")
{
    const auto t = nn(11, 1.0, -0.5);
    CHECK_THROWS_AS(ergotropy_trajectory(current_state(11, 1), t, {0.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(ergotropy_trajectory(current_state(11, 1), t, {}), std::invalid_argument);
    CHECK_THROWS_AS(time_grid(1.0, 0.0), std::invalid_argument);
    CHECK(time_grid(1.0, 0.25).size() == 5);

    const auto traj = ergotropy_trajectory(bell_state(11, 1, 11), t, time_grid(5.0, 0.05));
    const double e0 = state_energy(traj.states.front(), t).total;
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        CHECK(std::abs(traj.states[i].norm() - 1.0) < 1e-10);
        CHECK(std::abs(state_energy(traj.states[i], t).total - e0) < 1e-10);
    }
    const auto drift = chirality_drift(traj);
    CHECK_FALSE(drift.front().applicable);
    CHECK(drift.front().deviation == 0.0);
    const double worst = std::max_element(drift.begin(), drift.end(), [](auto& a, auto& b) {
                             return a.deviation < b.deviation;
                         })->deviation;
    CHECK(worst > 1e-2);
}

TEST_CASE("chiral flow of a two-current state")
{
    const auto t = nn(11, 1.0, -0.3);
    const auto psi0 = two_current_state(11, 1, 2, 0.0);
    const auto shifts = lattice_shift_times(t, 1, 2, 10.0);
    REQUIRE(shifts.size() > 3);
    CHECK(shifts[1].t == doctest::Approx(2 * kPi / (11 * 1.703354)).epsilon(1e-6));

    std::vector<double> times;
    for (const auto& s : shifts)
        times.push_back(s.t);
    const auto traj = ergotropy_trajectory(psi0, t, times);
    const auto initial = traj.profiles.front().le_values();
    for (std::size_t i = 0; i < shifts.size(); ++i)
        for (int S = 1; S <= 11; ++S)
            CHECK(std::abs(traj.profiles[i].at(S).le - initial[static_cast<std::size_t>(wrap_site(S - shifts[i].shift, 11) - 1)])
                  < 1e-8);

    const auto drift = chirality_drift(traj);
    for (const auto& d : drift) {
        CHECK(d.applicable);
        CHECK(d.shift >= 0);
        CHECK(d.deviation < 1e-8);
    }

    const auto dense = ergotropy_trajectory(psi0, t, time_grid(10.0, 0.01));
    for (const auto& d : chirality_drift(dense))
        CHECK(d.deviation < 1e-8);

    // The envelope moves rigidly; its maximum sampled on lattice sites is only
    // pinned at the shift times.
    for (const auto& p : traj.profiles)
        CHECK(std::abs(p.max_le - traj.profiles.front().max_le) < 1e-8);
    double spread = 0.0;
    for (const auto& p : dense.profiles)
        spread = std::max(spread, std::abs(p.max_le - dense.profiles.front().max_le));
    CHECK(spread > 1e-3);
}

TEST_CASE("shift direction follows the sign of the band gap")
{
    // J < 0 reverses E_1 - E_2 and hence the direction of travel.
    const auto a = lattice_shift_times(nn(11, 1.0, 0.0), 1, 2, 5.0);
    const auto b = lattice_shift_times(nn(11, -1.0, 0.0), 1, 2, 5.0);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 1; i < a.size(); ++i) {
        CHECK(a[i].t == doctest::Approx(b[i].t));
        CHECK((a[i].shift + b[i].shift) % 11 == 0);
    }
    CHECK_THROWS_AS(lattice_shift_times(nn(11, 1.0, 0.0), 3, 14, 1.0), std::invalid_argument);
}

TEST_CASE("oscillation period")
{
    std::vector<double> ts, v;
    for (double x = 0.0; x <= 20.0; x += 0.01) {
        ts.push_back(x);
        v.push_back(std::cos(2 * kPi * x / 3.3));
    }
    CHECK(oscillation_period(ts, v) == doctest::Approx(3.3).epsilon(1e-4));
    CHECK(std::isnan(oscillation_period({0.0, 1.0}, {1.0, 2.0})));

    const auto psi = two_current_state(11, 1, 2, 0.0);
    auto site1 = [&](const RingSpec& spec) {
        const auto traj = ergotropy_trajectory(psi, spec, 0.0, time_grid(20.0, 0.005));
        std::vector<double> le;
        for (const auto& p : traj.profiles)
            le.push_back(p.at(1).le);
        return oscillation_period(traj.times, le);
    };
    const double nn_period = site1(RingSpec::power_law(11, 0.5, std::numeric_limits<double>::infinity()));
    const double dip_period = site1(RingSpec::power_law(11, 0.5, 3.0));
    CHECK(nn_period == doctest::Approx(3.688709).epsilon(1e-4));
    CHECK(dip_period == doctest::Approx(2.790665).epsilon(1e-4));
    CHECK(dip_period < nn_period);
}

#include "lergo/model.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace lergo;

TEST_CASE("coupling tables")
{
    SUBCASE("nearest neighbour keeps only k = 1")
    {
        const auto t = coupling_table(RingSpec::nearest_neighbor(11, -0.7), 0.3);
        CHECK(t.J.size() == 5);
        CHECK(t.nearest() == -0.7);
        CHECK(t.nearest_only());
        CHECK(t.between(1, 11) == -0.7);
        CHECK(t.between(1, 3) == 0.0);
        CHECK(t.Delta == 0.3);
    }
    SUBCASE("default radius gives unit nearest spacing")
    {
        const auto t = coupling_table(RingSpec::power_law(12, 0.5, 3.0), 0.0);
        CHECK(t.nearest() == doctest::Approx(1.0).epsilon(1e-14));
        // chord 2 has length 2 sin(2pi/12) / (2 sin(pi/12)) = 1.9318...
        const double d2 = std::sin(2 * kPi / 12) / std::sin(kPi / 12);
        CHECK(t.at_distance(2) == doctest::Approx(1.0 / std::pow(d2, 3)).epsilon(1e-14));
        CHECK_FALSE(t.nearest_only());
        CHECK(t.J.size() == 6);
    }
    SUBCASE("alpha = inf collapses to nearest neighbour with J = 2g")
    {
        const auto spec = RingSpec::power_law(8, 0.25, std::numeric_limits<double>::infinity());
        CHECK(spec.is_nearest_neighbor());
        const auto t = coupling_table(spec, 0.0);
        CHECK(t.nearest() == 0.5);
        CHECK(t.nearest_only());
    }
    SUBCASE("large alpha approaches the nearest-neighbour table")
    {
        const auto t = coupling_table(RingSpec::power_law(9, 0.5, 60.0), 0.0);
        CHECK(t.nearest() == doctest::Approx(1.0));
        CHECK(t.at_distance(2) < 1e-15);
    }
    SUBCASE("invalid specs")
    {
        CHECK_THROWS_AS(coupling_table(RingSpec::nearest_neighbor(2, 1.0), 0.0), std::invalid_argument);
        CHECK_THROWS_AS(coupling_table(RingSpec::power_law(8, 0.5, -1.0), 0.0), std::invalid_argument);
        CHECK_THROWS_AS(coupling_table(RingSpec::power_law(8, 0.5, 3.0, 0.0), 0.0), std::invalid_argument);
        CHECK_THROWS_AS(coupling_table(RingSpec::nearest_neighbor(8, 1.0), NAN), std::invalid_argument);
    }
}

TEST_CASE("site arithmetic")
{
    CHECK(wrap_site(0, 11) == 11);
    CHECK(wrap_site(12, 11) == 1);
    CHECK(wrap_site(-11, 11) == 11);
    CHECK(chord_distance(1, 11, 11) == 1);
    CHECK(chord_distance(1, 6, 10) == 5);
    CHECK(chord_distance(2, 9, 10) == 3);
}

TEST_CASE("states")
{
    SUBCASE("normalization is enforced")
    {
        CHECK_THROWS_AS(PureState1x({1.0, 1.0}), std::invalid_argument);
        CHECK_THROWS_AS(PureState1x::normalized({0.0, 0.0}), std::invalid_argument);
        const auto s = PureState1x::normalized({3.0, cplx(0, 4)});
        CHECK(s.norm() == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(std::abs(s.amp(2) - cplx(0, 0.8)) < 1e-15);
        CHECK(s.amp(3) == s.amp(1));
    }
    SUBCASE("current states are uniform")
    {
        const auto s = current_state(7, 3);
        for (double p : population(s))
            CHECK(p == doctest::Approx(1.0 / 7).epsilon(1e-14));
    }
    SUBCASE("coinciding windings are rejected")
    {
        CHECK_THROWS_AS(two_current_state(11, 1, 12, 0.0), std::invalid_argument);
        CHECK_THROWS_AS(superposition_state(11, WindingSet{}), std::invalid_argument);
    }
    SUBCASE("Bell and localized states")
    {
        const auto b = bell_state(11, 1, 11);
        const auto p = population(b);
        CHECK(p[0] == doctest::Approx(0.5));
        CHECK(p[10] == doctest::Approx(0.5));
        CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(1.0));
        CHECK_THROWS_AS(bell_state(11, 3, 3), std::invalid_argument);
        CHECK_THROWS_AS(bell_state(11, 0, 3), std::invalid_argument);
        CHECK_THROWS_AS(localized_state(5, 6), std::invalid_argument);
    }
}

TEST_CASE("energies")
{
    const auto t = coupling_table(RingSpec::nearest_neighbor(11, 1.0), -2.0);

    SUBCASE("current state energy is the band energy plus the field offset")
    {
        for (int ell = 0; ell < 11; ++ell) {
            const auto e = state_energy(current_state(11, ell), t);
            CHECK(e.hop == doctest::Approx(4.0 * std::cos(2 * kPi * ell / 11)).epsilon(1e-13));
            CHECK(e.field == doctest::Approx(-2.0 * (2.0 - 11)));
        }
    }
    SUBCASE("per-site energies sum to the total")
    {
        const auto psi = two_current_state(11, 1, 2, 0.4);
        const auto e = per_site_energy(psi, t);
        const double sum = std::accumulate(e.begin(), e.end(), 0.0);
        CHECK(sum == doctest::Approx(state_energy(psi, t).total).epsilon(1e-13));
    }
    SUBCASE("two-current per-site energy at S = L")
    {
        const auto e = per_site_energy(two_current_state(11, 1, 2, 0.0), t);
        CHECK(e[10] == doctest::Approx(1.729698).epsilon(1e-6));
    }
}

TEST_CASE("shape thresholds")
{
    const double expected[] = {1.118, 1.257, 1.366, 1.454, 1.524, 1.583, 1.631, 1.671, 1.706};
    for (int L = 10; L <= 18; ++L)
        CHECK(std::abs(shape_threshold(L, 1, 2) - expected[L - 10]) < 5e-4);
}

#include "epimob/indicators.hpp"

#include "epimob/geo.hpp"
#include "test_fixtures.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace epimob;
using namespace epimob::testutil;

namespace {

const Instant kBase = *parse_iso8601("2014-03-03T08:00:00Z");

Trajectory visits_at(std::vector<int> areas)
{
    Trajectory t;
    t.user_id = "u1";
    Instant ts = kBase;
    for (int a : areas) {
        t.visits.push_back(Visit{ts, a, a});
        ts += 3600;
    }
    return t;
}

// Straight recomputation of the visit-weighted RMS centroid distance,
// independent of the library path.
double brute_force_radius(const Trajectory& traj, const std::vector<LatLon>& centroids)
{
    double lat = 0, lon = 0;
    for (const Visit& v : traj.visits) {
        lat += centroids[static_cast<std::size_t>(v.area)].lat;
        lon += centroids[static_cast<std::size_t>(v.area)].lon;
    }
    const LatLon cm{lat / static_cast<double>(traj.visits.size()), lon / static_cast<double>(traj.visits.size())};
    double acc = 0;
    for (const Visit& v : traj.visits) {
        const double d = haversine_km(centroids[static_cast<std::size_t>(v.area)], cm);
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(traj.visits.size()));
}

double brute_force_entropy(const Trajectory& traj)
{
    std::map<int, double> counts;
    for (const Visit& v : traj.visits)
        counts[v.area] += 1.0;
    double s = 0;
    for (const auto& [_, c] : counts) {
        const double p = c / static_cast<double>(traj.visits.size());
        s -= p * std::log(p);
    }
    return s;
}

double brute_force_progmosis(const OccupancyProfile& prof, const EpidemicSnapshot& snap, double beta)
{
    double acc = 0;
    for (const auto& [l, tl] : prof.fractions)
        for (const auto& [m, tm] : prof.fractions)
            acc += tl * tm * (snap.infected_frac(l) * snap.susceptible_frac(m) +
                              snap.infected_frac(m) * snap.susceptible_frac(l));
    return beta * acc;
}

} // namespace

TEST_CASE("radius of gyration")
{
    const AreaRegistry areas     = toy_areas(3);
    const TowerRegistry towers   = toy_towers(areas);
    const std::vector<LatLon> cs = towers.area_centroids(3);
    const double d01             = haversine_km(cs[0], cs[1]); // ~10 km

    SUBCASE("all visits at one centroid")
    {
        CHECK(radius_of_gyration_km(visits_at({1, 1, 1}), cs) == 0.0);
    }

    SUBCASE("two centroids, one visit each: half the separation")
    {
        const double r = radius_of_gyration_km(visits_at({0, 1}), cs);
        CHECK(r == doctest::Approx(d01 / 2.0).epsilon(1e-6));
    }

    SUBCASE("3:1 visit split against the flat-geometry hand value")
    {
        // Centroids ~10 km apart: center of mass 2.5 km from the heavy end,
        // r_g = sqrt((3 * 2.5^2 + 7.5^2) / 4) = 4.3301... scaled by d/10.
        const double r = radius_of_gyration_km(visits_at({0, 0, 0, 1}), cs);
        const double expected = std::sqrt((3 * 2.5 * 2.5 + 7.5 * 7.5) / 4.0) * (d01 / 10.0);
        CHECK(r == doctest::Approx(expected).epsilon(1e-6));
        CHECK(r == doctest::Approx(4.330127018922194).epsilon(2e-3));
    }

    SUBCASE("matches the brute-force oracle on random toys")
    {
        std::mt19937_64 rng(31);
        for (int round = 0; round < 30; ++round) {
            std::vector<int> stops;
            const int len = 1 + static_cast<int>(rng() % 5);
            for (int k = 0; k < len; ++k)
                stops.push_back(static_cast<int>(rng() % 3));
            const Trajectory t = visits_at(stops);
            const double got   = radius_of_gyration_km(t, cs);
            const double want  = brute_force_radius(t, cs);
            CHECK(got == doctest::Approx(want).epsilon(1e-12));
        }
    }

    SUBCASE("invariant under zero-visit areas appended to the registry")
    {
        std::vector<LatLon> extended = cs;
        extended.push_back(LatLon{45.0, 45.0});
        const Trajectory t = visits_at({0, 1, 1, 2});
        CHECK(radius_of_gyration_km(t, cs) == radius_of_gyration_km(t, extended));
    }

    SUBCASE("invariant under relabeling of area indices")
    {
        // Swap labels 0 <-> 2 in both the visits and the centroid table.
        const Trajectory t         = visits_at({0, 1, 1, 2, 0});
        const Trajectory relabeled = visits_at({2, 1, 1, 0, 2});
        const std::vector<LatLon> swapped{cs[2], cs[1], cs[0]};
        CHECK(radius_of_gyration_km(t, cs) ==
              doctest::Approx(radius_of_gyration_km(relabeled, swapped)).epsilon(1e-12));
    }

    SUBCASE("empty trajectory is an error")
    {
        CHECK_THROWS(radius_of_gyration_km(visits_at({}), cs));
    }
}

TEST_CASE("movement entropy")
{
    SUBCASE("single area has zero entropy")
    {
        CHECK(movement_entropy(visits_at({2, 2, 2, 2})) == 0.0);
    }
    SUBCASE("four equiprobable areas reach ln 4")
    {
        CHECK(movement_entropy(visits_at({0, 1, 2, 3})) == doctest::Approx(std::log(4.0)).epsilon(1e-12));
    }
    SUBCASE("hand-evaluated asymmetric distribution")
    {
        // p = (0.5, 0.25, 0.25) -> 1.0397...
        const double s = movement_entropy(visits_at({0, 0, 1, 2}));
        CHECK(s == doctest::Approx(1.0397207708399179).epsilon(1e-12));
        CHECK(s == doctest::Approx(1.0397).epsilon(1e-4));
    }
    SUBCASE("bounded by the log of the support size, matches brute force")
    {
        std::mt19937_64 rng(32);
        for (int round = 0; round < 30; ++round) {
            std::vector<int> stops;
            const int len = 1 + static_cast<int>(rng() % 5);
            for (int k = 0; k < len; ++k)
                stops.push_back(static_cast<int>(rng() % 4));
            const Trajectory t = visits_at(stops);
            const double s     = movement_entropy(t);
            CHECK(s >= 0.0);
            CHECK(s <= std::log(static_cast<double>(t.area_visit_counts().size())) + 1e-12);
            CHECK(s == doctest::Approx(brute_force_entropy(t)).epsilon(1e-12));
        }
    }
    SUBCASE("empty trajectory is an error")
    {
        CHECK_THROWS(movement_entropy(visits_at({})));
    }
}

TEST_CASE("home staying")
{
    const HomeAssignment home{"u1", 1, 3};
    CHECK(home_staying(visits_at({1, 1, 1}), home) == 1.0);
    CHECK(home_staying(visits_at({0, 2, 0}), home) == 0.0);
    CHECK(home_staying(visits_at({1, 1, 1, 0}), home) == 0.75);
    CHECK_THROWS(home_staying(visits_at({}), home));
}

TEST_CASE("contagion risk")
{
    EpidemicSnapshot snap;
    snap.infected_frac    = Eigen::VectorXd::Zero(3);
    snap.susceptible_frac = Eigen::VectorXd::Constant(3, 0.8);

    SUBCASE("no infection anywhere means no risk")
    {
        const OccupancyProfile p = OccupancyProfile::from_trajectory(visits_at({0, 1, 2}));
        CHECK(progmosis_risk(p, snap, 0.45) == 0.0);
    }

    SUBCASE("zero contagion rate means no risk")
    {
        snap.infected_frac(0)    = 0.1;
        const OccupancyProfile p = OccupancyProfile::from_trajectory(visits_at({0, 1}));
        CHECK(progmosis_risk(p, snap, 0.0) == 0.0);
    }

    SUBCASE("single-area hand case")
    {
        snap.infected_frac(0) = 0.1;
        const OccupancyProfile p = OccupancyProfile::from_trajectory(visits_at({0, 0}));
        // 0.45 * 1 * 1 * (0.1*0.8 + 0.1*0.8) = 0.072
        CHECK(progmosis_risk(p, snap, 0.45) == doctest::Approx(0.072).epsilon(1e-9));
    }

    SUBCASE("matches brute force and is invariant to pair order")
    {
        std::mt19937_64 rng(33);
        for (int round = 0; round < 30; ++round) {
            std::vector<int> stops;
            const int len = 1 + static_cast<int>(rng() % 5);
            for (int k = 0; k < len; ++k)
                stops.push_back(static_cast<int>(rng() % 3));
            EpidemicSnapshot s;
            s.infected_frac    = Eigen::VectorXd::Zero(3);
            s.susceptible_frac = Eigen::VectorXd::Zero(3);
            for (int a = 0; a < 3; ++a) {
                s.infected_frac(a)    = static_cast<double>(rng() % 30) / 100.0;
                s.susceptible_frac(a) = static_cast<double>(rng() % 60) / 100.0;
            }
            const OccupancyProfile p = OccupancyProfile::from_trajectory(visits_at(stops));
            const double got         = progmosis_risk(p, s, 0.45);
            CHECK(got == doctest::Approx(brute_force_progmosis(p, s, 0.45)).epsilon(1e-12));

            OccupancyProfile reversed = p;
            std::reverse(reversed.fractions.begin(), reversed.fractions.end());
            CHECK(progmosis_risk(reversed, s, 0.45) == doctest::Approx(got).epsilon(1e-12));
        }
    }

    SUBCASE("unnormalized profiles are rejected")
    {
        OccupancyProfile p;
        p.user_id   = "u1";
        p.fractions = {{0, 0.5}, {1, 0.4}};
        CHECK_THROWS(progmosis_risk(p, snap, 0.45));
    }

    SUBCASE("invalid snapshots are rejected")
    {
        EpidemicSnapshot bad;
        bad.infected_frac    = Eigen::VectorXd::Constant(2, 0.7);
        bad.susceptible_frac = Eigen::VectorXd::Constant(2, 0.7);
        const OccupancyProfile p = OccupancyProfile::from_trajectory(visits_at({0}));
        CHECK_THROWS(progmosis_risk(p, bad, 0.45));
    }
}

TEST_CASE("user ranking")
{
    const std::vector<std::pair<std::string, double>> vals{
        {"u1", 9.0}, {"u2", 7.0}, {"u3", 7.0}, {"u4", 1.0}};

    SUBCASE("full fraction returns everyone")
    {
        CHECK(rank_users(vals, RankDirection::highest, 1.0).size() == 4);
    }
    SUBCASE("ties break to the lower user id")
    {
        const auto top = rank_users(vals, RankDirection::highest, 0.5);
        CHECK(top == std::vector<std::string>{"u1", "u2"});
    }
    SUBCASE("lowest direction mirrors highest on negated values")
    {
        std::mt19937_64 rng(34);
        for (int round = 0; round < 10; ++round) {
            std::vector<std::pair<std::string, double>> v;
            for (int u = 0; u < 12; ++u)
                v.emplace_back("u" + std::to_string(u), static_cast<double>(rng() % 6));
            std::vector<std::pair<std::string, double>> neg = v;
            for (auto& [_, x] : neg)
                x = -x;
            auto hi = rank_users(v, RankDirection::highest, 0.4);
            auto lo = rank_users(neg, RankDirection::lowest, 0.4);
            std::sort(hi.begin(), hi.end());
            std::sort(lo.begin(), lo.end());
            CHECK(hi == lo);
        }
    }
    SUBCASE("ceil sizing")
    {
        CHECK(rank_users(vals, RankDirection::highest, 0.26).size() == 2); // ceil(1.04)
        CHECK(rank_users(vals, RankDirection::lowest, 0.25).size() == 1);
    }
    SUBCASE("errors")
    {
        CHECK_THROWS(rank_users({}, RankDirection::highest, 0.5));
        CHECK_THROWS(rank_users(vals, RankDirection::highest, 0.0));
        CHECK_THROWS(rank_users(vals, RankDirection::highest, 1.5));
    }
}

TEST_CASE("random isolation draws")
{
    std::vector<std::string> ids;
    for (int u = 0; u < 40; ++u)
        ids.push_back("u" + std::to_string(u));

    std::mt19937_64 a(77), b(77), c(78);
    const auto s1 = sample_users(ids, 0.25, a);
    const auto s2 = sample_users(ids, 0.25, b);
    const auto s3 = sample_users(ids, 0.25, c);
    CHECK(s1.size() == 10);
    CHECK(s1 == s2);
    CHECK(s1 != s3);

    std::set<std::string> unique(s1.begin(), s1.end());
    CHECK(unique.size() == s1.size());
    CHECK_THROWS(sample_users({}, 0.5, a));
}

#pragma once

#include "epimob/cdr.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace epimob::testutil {

inline bool exact_equal(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b)
{
    return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

// Three areas (a, b, c -> indices 0, 1, 2), one tower each, 10 km apart
// along the equator.
inline AreaRegistry toy_areas(int n = 3)
{
    std::vector<Area> entries;
    for (int i = 0; i < n; ++i)
        entries.push_back(Area{std::string(1, static_cast<char>('a' + i)), "Zone", 1000});
    return AreaRegistry::from_entries(std::move(entries));
}

inline TowerRegistry toy_towers(const AreaRegistry& areas, double spacing_deg = 0.0899321605918)
{
    std::vector<Tower> entries;
    for (int i = 0; i < areas.size(); ++i)
        entries.push_back(Tower{"t" + std::to_string(i), LatLon{0.0, spacing_deg * i}, i});
    return TowerRegistry::from_entries(std::move(entries));
}

inline CdrRecord rec(const std::string& user, const std::string& iso, const std::string& tower)
{
    CdrRecord r;
    r.caller_id = user;
    r.callee_id = "x";
    r.timestamp = *parse_iso8601(iso);
    r.kind      = EventKind::call;
    r.duration_s = 30;
    r.tower_id  = tower;
    return r;
}

inline Trajectory traj(const std::string& user, std::vector<std::pair<Instant, int>> stops)
{
    Trajectory t;
    t.user_id = user;
    for (const auto& [ts, area] : stops)
        t.visits.push_back(Visit{ts, area, area});
    return t;
}

} // namespace epimob::testutil

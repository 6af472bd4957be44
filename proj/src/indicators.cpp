#include "epimob/indicators.hpp"

#include "epimob/io_util.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace epimob {

OccupancyProfile OccupancyProfile::from_trajectory(const Trajectory& traj)
{
    if (traj.visits.empty())
        throw std::invalid_argument("cannot build an occupancy profile from an empty trajectory");
    OccupancyProfile p;
    p.user_id     = traj.user_id;
    const auto counts = traj.area_visit_counts();
    const double total = static_cast<double>(traj.total_visits());
    p.fractions.reserve(counts.size());
    for (const auto& [area, n] : counts)
        p.fractions.emplace_back(area, static_cast<double>(n) / total);
    return p;
}

void OccupancyProfile::validate(double tol) const
{
    double sum = 0.0;
    for (const auto& [area, f] : fractions) {
        if (area < 0 || f < 0.0)
            throw std::invalid_argument("occupancy profile has a negative entry");
        sum += f;
    }
    if (std::abs(sum - 1.0) > tol)
        throw std::invalid_argument("occupancy profile of " + user_id + " sums to " + format_double(sum));
}

EpidemicSnapshot EpidemicSnapshot::from_state(const MetaPopState& state)
{
    const int n = state.n_areas();
    EpidemicSnapshot s;
    s.infected_frac    = Eigen::VectorXd::Zero(n);
    s.susceptible_frac = Eigen::VectorXd::Zero(n);
    const Eigen::VectorXd pop = state.population();
    for (int i = 0; i < n; ++i) {
        if (pop(i) > 0.0) {
            s.infected_frac(i)    = state.infected(i) / pop(i);
            s.susceptible_frac(i) = state.susceptible(i) / pop(i);
        }
    }
    return s;
}

void EpidemicSnapshot::validate() const
{
    if (infected_frac.size() != susceptible_frac.size())
        throw std::invalid_argument("snapshot vectors differ in length");
    for (int i = 0; i < infected_frac.size(); ++i) {
        const double inf = infected_frac(i);
        const double sus = susceptible_frac(i);
        if (inf < 0.0 || inf > 1.0 || sus < 0.0 || sus > 1.0 || inf + sus > 1.0 + 1e-12)
            throw std::invalid_argument("snapshot fractions out of range at area " + std::to_string(i));
    }
}

double radius_of_gyration_km(const Trajectory& traj, const std::vector<LatLon>& area_centroids)
{
    if (traj.visits.empty())
        throw std::invalid_argument("cannot compute the radius of gyration of an empty trajectory");
    const auto counts = traj.area_visit_counts();
    const double total = static_cast<double>(traj.total_visits());

    LatLon center{0.0, 0.0};
    for (const auto& [area, n] : counts) {
        const LatLon& c = area_centroids.at(static_cast<std::size_t>(area));
        center.lat += static_cast<double>(n) * c.lat;
        center.lon += static_cast<double>(n) * c.lon;
    }
    center.lat /= total;
    center.lon /= total;

    double mean_sq = 0.0;
    for (const auto& [area, n] : counts) {
        const double d = haversine_km(area_centroids.at(static_cast<std::size_t>(area)), center);
        mean_sq += static_cast<double>(n) * d * d;
    }
    return std::sqrt(mean_sq / total);
}

double movement_entropy(const Trajectory& traj)
{
    if (traj.visits.empty())
        throw std::invalid_argument("cannot compute the entropy of an empty trajectory");
    const auto counts = traj.area_visit_counts();
    const double total = static_cast<double>(traj.total_visits());
    double entropy = 0.0;
    for (const auto& [area, n] : counts) {
        const double p = static_cast<double>(n) / total;
        if (p > 0.0)
            entropy -= p * std::log(p);
    }
    return std::max(0.0, entropy);
}

double home_staying(const Trajectory& traj, const HomeAssignment& home)
{
    if (traj.visits.empty())
        throw std::invalid_argument("cannot compute home staying with zero events");
    std::int64_t at_home = 0;
    for (const Visit& v : traj.visits)
        if (v.area == home.home_area)
            ++at_home;
    return static_cast<double>(at_home) / static_cast<double>(traj.total_visits());
}

double progmosis_risk(const OccupancyProfile& profile, const EpidemicSnapshot& snapshot, double beta)
{
    profile.validate(1e-9);
    snapshot.validate();
    if (beta < 0.0)
        throw std::invalid_argument("contagion rate must be non-negative");

    double risk = 0.0;
    for (const auto& [l, t_l] : profile.fractions) {
        const double i_l = snapshot.infected_frac(l);
        const double s_l = snapshot.susceptible_frac(l);
        for (const auto& [m, t_m] : profile.fractions) {
            const double i_m = snapshot.infected_frac(m);
            const double s_m = snapshot.susceptible_frac(m);
            risk += t_l * t_m * (i_l * s_m + i_m * s_l);
        }
    }
    return beta * risk;
}

std::vector<std::string> rank_users(const std::vector<std::pair<std::string, double>>& values,
                                    RankDirection direction, double fraction)
{
    if (values.empty())
        throw std::invalid_argument("cannot rank an empty indicator table");
    if (fraction <= 0.0 || fraction > 1.0)
        throw std::invalid_argument("isolation fraction must lie in (0, 1]");

    std::vector<std::pair<std::string, double>> sorted = values;
    std::sort(sorted.begin(), sorted.end(), [&](const auto& a, const auto& b) {
        if (a.second != b.second)
            return direction == RankDirection::highest ? a.second > b.second : a.second < b.second;
        return a.first < b.first;
    });
    const std::size_t k =
        static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(values.size())));
    std::vector<std::string> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k && i < sorted.size(); ++i)
        out.push_back(sorted[i].first);
    return out;
}

std::vector<std::string> sample_users(const std::vector<std::string>& user_ids, double fraction,
                                      std::mt19937_64& rng)
{
    if (user_ids.empty())
        throw std::invalid_argument("cannot sample from an empty user list");
    if (fraction <= 0.0 || fraction > 1.0)
        throw std::invalid_argument("isolation fraction must lie in (0, 1]");
    const std::size_t k =
        static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(user_ids.size())));

    // Partial Fisher-Yates over a copy keeps the draw order-independent of k.
    std::vector<std::string> pool = user_ids;
    std::sort(pool.begin(), pool.end());
    for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
        std::swap(pool[i], pool[pick(rng)]);
    }
    pool.resize(k);
    std::sort(pool.begin(), pool.end());
    return pool;
}

void save_indicators_csv(const std::string& path, const std::vector<IndicatorSet>& indicators,
                         const AreaRegistry& areas)
{
    std::ostringstream out;
    out << "user_id,radius_km,entropy_nats,home_staying,progmosis_risk,home_area\n";
    for (const IndicatorSet& s : indicators)
        out << s.user_id << ',' << format_double(s.radius_km) << ',' << format_double(s.entropy_nats) << ','
            << format_double(s.home_staying) << ',' << format_double(s.progmosis_risk) << ','
            << areas.id_of(s.home_area) << '\n';
    write_text_file(path, out.str());
}

} // namespace epimob

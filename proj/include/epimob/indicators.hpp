#pragma once

#include "epimob/cdr.hpp"
#include "epimob/epidemic.hpp"
#include "epimob/geo.hpp"

#include <random>
#include <string>
#include <vector>

namespace epimob {

// Fraction of the user's events falling in each visited area, normalized to 1.
struct OccupancyProfile {
    std::string user_id;
    std::vector<std::pair<int, double>> fractions; // (area, T), area-index ascending

    static OccupancyProfile from_trajectory(const Trajectory& traj);
    void validate(double tol = 1e-9) const;
};

// Per-area infected and susceptible fractions on a given day.
struct EpidemicSnapshot {
    Eigen::VectorXd infected_frac;
    Eigen::VectorXd susceptible_frac;

    static EpidemicSnapshot from_state(const MetaPopState& state);
    void validate() const;
};

struct IndicatorSet {
    std::string user_id;
    double radius_km      = 0.0;
    double entropy_nats   = 0.0;
    double home_staying   = 0.0;
    double progmosis_risk = 0.0;
    int home_area         = -1;
};

// Visit-weighted RMS great-circle distance of visited area centroids from
// their visit-weighted mean coordinate.
double radius_of_gyration_km(const Trajectory& traj, const std::vector<LatLon>& area_centroids);

// Shannon entropy (natural log) of the visit distribution over areas.
double movement_entropy(const Trajectory& traj);

// Fraction of the user's events located in the home area.
double home_staying(const Trajectory& traj, const HomeAssignment& home);

// beta * sum over ordered area pairs (l, m), l = m included, of
// T_l * T_m * (i_l * s_m + i_m * s_l).
double progmosis_risk(const OccupancyProfile& profile, const EpidemicSnapshot& snapshot, double beta);

enum class RankDirection { highest, lowest };

// ceil(fraction * user count) users at the chosen extreme; ties broken by
// lower user_id.
std::vector<std::string> rank_users(const std::vector<std::pair<std::string, double>>& values,
                                    RankDirection direction, double fraction);

// Uniform draw without replacement for the random-isolation baseline.
std::vector<std::string> sample_users(const std::vector<std::string>& user_ids, double fraction,
                                      std::mt19937_64& rng);

// CSV `user_id,radius_km,entropy_nats,home_staying,progmosis_risk,home_area`.
void save_indicators_csv(const std::string& path, const std::vector<IndicatorSet>& indicators,
                         const AreaRegistry& areas);

} // namespace epimob

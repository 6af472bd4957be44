#pragma once

#include "epimob/mobility.hpp"
#include "epimob/time_util.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace epimob {

// Per-day rates. rho is the infection mortality probability; nu is an
// absolute per-area daily birth count; mu a per-capita daily death rate.
struct EpidemicParams {
    double beta  = 0.0;
    double sigma = 0.0;
    double gamma = 0.0;
    double rho   = 0.0;
    double nu    = 0.0;
    double mu    = 0.0;
    // When non-empty, overrides the scalar nu with one birth count per area.
    Eigen::VectorXd nu_per_area;

    double births_in(int area) const
    {
        return nu_per_area.size() > 0 ? nu_per_area(area) : nu;
    }
    // (mu + gamma) / (1 - rho): per-step outflow probability from I. Must not
    // exceed 1 or the stochastic chain is ill-defined.
    double infectious_outflow() const { return (mu + gamma) / (1.0 - rho); }
    void validate() const;
};

struct MetaPopState {
    Eigen::VectorXd susceptible;
    Eigen::VectorXd exposed;
    Eigen::VectorXd infected;
    Eigen::VectorXd recovered;
    int step              = 0;
    double cum_infections = 0.0; // seeded infections plus every later S->E entry

    int n_areas() const { return static_cast<int>(susceptible.size()); }
    Eigen::VectorXd population() const { return susceptible + exposed + infected + recovered; }
    double total_population() const { return population().sum(); }

    static MetaPopState from_population(const std::vector<std::int64_t>& per_area);
    bool is_integral() const;
    void check_valid() const; // non-negativity and finite values
};

struct SeedReport {
    int area                = -1;
    std::int64_t requested  = 0;
    std::int64_t realized   = 0; // capped at the seed area's susceptibles
};

// Moves round(seed_fraction * total population) individuals from S to I in
// seed_area; the area is drawn uniformly among populated areas when not
// given. The realized count is capped at S_seed.
SeedReport seed_outbreak(MetaPopState& state, std::optional<int> seed_area, double seed_fraction,
                         std::mt19937_64& rng);

struct StepStats {
    double new_exposures = 0.0;
    int clamped          = 0; // deterministic mode: negative brackets clamped to zero
};

StepStats step_deterministic(MetaPopState& state, const MobilityMatrix& matrix, const EpidemicParams& params);
StepStats step_stochastic(MetaPopState& state, const MobilityMatrix& matrix, const EpidemicParams& params,
                          std::mt19937_64& rng);

class SimulationCalendar {
public:
    static SimulationCalendar from_start(Instant start, int horizon_days);
    static SimulationCalendar uniform(DayClass day_class, int horizon_days);
    static SimulationCalendar from_sequence(std::vector<DayClass> classes);

    DayClass at(int day) const { return classes_.at(static_cast<std::size_t>(day)); }
    int horizon() const { return static_cast<int>(classes_.size()); }

private:
    std::vector<DayClass> classes_;
};

enum class SimMode { deterministic, stochastic };

// From start_day onward the replacement matrices are used instead of the
// baseline ones.
struct InterventionSchedule {
    int start_day = 0;
    MobilityMatrix weekday;
    MobilityMatrix weekend;
};

struct RunResult {
    std::vector<MetaPopState> series; // horizon + 1 entries, day 0 = initial
    long clamp_events = 0;
};

// Steps day by day; the transition from day d to d+1 uses the calendar class
// of day d and, once d >= intervention start, the replacement matrices.
RunResult run(const MetaPopState& initial, const SimulationCalendar& calendar, const MobilityMatrix& weekday,
              const MobilityMatrix& weekend, const EpidemicParams& params, int horizon_days, SimMode mode,
              std::mt19937_64& rng, const std::optional<InterventionSchedule>& intervention = std::nullopt);

// Time-series CSV `run_id,day,area_id,S,E,I,R,cum_infections`; the aggregated
// variant sums compartments over areas.
void write_timeseries_csv(const std::string& path, const std::vector<std::pair<int, const RunResult*>>& runs,
                          const AreaRegistry& areas);
void write_aggregated_timeseries_csv(const std::string& path,
                                     const std::vector<std::pair<int, const RunResult*>>& runs);

} // namespace epimob

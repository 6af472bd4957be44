#pragma once

#include "epimob/cdr.hpp"
#include "epimob/epidemic.hpp"
#include "epimob/geo_targeting.hpp"
#include "epimob/indicators.hpp"
#include "epimob/mobility.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace epimob {

enum class ScenarioKind {
    none,
    geo_centrality,
    geo_placerank,
    indiv_random,
    indiv_radius,
    indiv_entropy,
    indiv_homestay,
    indiv_progmosis,
};

const char* to_string(ScenarioKind k);
std::optional<ScenarioKind> scenario_kind_from_string(const std::string& s);

struct ScenarioSpec {
    ScenarioKind kind = ScenarioKind::none;
    int top_k         = 1;   // geographic kinds: number of areas to quarantine
    double fraction   = 0.0; // individual kinds: share of users to isolate
    int delay_days    = 3;
    std::string label;       // defaults to the kind name

    std::string name() const;
};

struct SimulationSettings {
    int horizon_days        = 210;
    int run_count           = 1;
    SimMode mode            = SimMode::stochastic;
    double seed_fraction    = 0.001;
    std::optional<int> seed_area; // drawn per run when absent
    std::uint64_t base_seed = 0;
    int workers             = 0; // 0 = hardware concurrency

    bool isolation_shrinks_population = false; // remove isolated users' population share
    bool centrality_on_raw_flows      = false; // score on flow counts instead of probabilities
    double targeting_tolerance        = 1e-9;
    int targeting_max_iters           = 10000;
    bool keep_full_series             = false; // retain per-area states (per-area CSV output)
};

struct Dataset {
    AreaRegistry areas;
    TowerRegistry towers;
    std::vector<CdrRecord> records;
    std::size_t rejected_rows = 0;
};

Dataset load_dataset(const std::string& cdr_path, const std::string& towers_path, const std::string& areas_path);

// Everything derived from the training window that scenarios share.
struct TrainingArtifacts {
    int n_areas = 0;
    std::vector<Trajectory> trajectories; // training window, ordered by user_id
    std::vector<HomeAssignment> homes;
    std::vector<OccupancyProfile> profiles;
    std::vector<LatLon> centroids;
    MobilityMatrix weekday;
    MobilityMatrix weekend;
    TransitionCounts pooled_weekday;
    TransitionCounts pooled_weekend;
    // Per-user counts aligned with `trajectories`, for fast user exclusion.
    std::vector<TransitionCounts> user_weekday;
    std::vector<TransitionCounts> user_weekend;
    FlowTable flows;
    std::vector<IndicatorSet> indicators; // progmosis left at 0 (needs a snapshot)
    std::vector<std::int64_t> population; // N_i(0)
    std::int64_t total_population = 0;
    Instant sim_start             = 0;    // split instant; the evaluation calendar starts here
};

TrainingArtifacts build_training_artifacts(const Dataset& data, Instant split_instant, const NightWindow& night,
                                           std::int64_t total_population);

// Pooled counts minus the excluded users' counts; exactly equal to
// re-estimating from the surviving trajectories.
MobilityMatrix matrix_excluding(const TrainingArtifacts& art, const std::set<std::string>& excluded_users,
                                DayClass day_class);

std::vector<std::pair<std::string, double>> progmosis_values(const TrainingArtifacts& art,
                                                             const EpidemicSnapshot& snapshot, double beta);

struct RunSeries {
    std::vector<double> susceptible; // horizon + 1, summed over areas
    std::vector<double> exposed;
    std::vector<double> infected;
    std::vector<double> recovered;
    std::vector<double> cum_infections;
    SeedReport seed;
    long clamp_events = 0;
    std::optional<RunResult> full; // only with keep_full_series
};

struct AggregateSeries {
    std::vector<double> mean;
    std::vector<double> ci_lo;
    std::vector<double> ci_hi;
    int run_count = 0;
};

// Pointwise mean with empirical 2.5th/97.5th percentile bands (linear
// interpolation between order statistics).
AggregateSeries aggregate_runs(const std::vector<std::vector<double>>& per_run_series);

// Linear-interpolation percentile of a sorted sample, p in [0, 1].
double percentile_sorted(const std::vector<double>& sorted, double p);

struct ScenarioResult {
    ScenarioSpec spec;
    std::vector<RunSeries> runs;
    AggregateSeries aggregate; // over cumulative infections
};

ScenarioResult run_scenario(const ScenarioSpec& spec, const TrainingArtifacts& art, const EpidemicParams& params,
                            const SimulationSettings& settings);

struct ComparisonRow {
    std::string scenario;
    double final_mean = 0.0;
    double ci_lo      = 0.0;
    double ci_hi      = 0.0;
    std::optional<double> reduction_vs_none; // absent when no baseline scenario was run
};

std::vector<ComparisonRow> compare_scenarios(const std::vector<ScenarioResult>& results);

void write_aggregate_csv(const std::string& path, const AggregateSeries& agg);
void write_runs_csv(const std::string& path, const ScenarioResult& result);
void write_comparison_csv(const std::string& path, const std::vector<ComparisonRow>& rows);

// Derives an independent engine stream; identical (seed, run, stream) tuples
// always yield identical draws.
std::mt19937_64 scenario_rng(std::uint64_t base_seed, std::uint64_t run_index, std::uint32_t stream);

} // namespace epimob

#include "epimob/scenario.hpp"

#include "epimob/io_util.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace epimob {

const char* to_string(ScenarioKind k)
{
    switch (k) {
    case ScenarioKind::none: return "none";
    case ScenarioKind::geo_centrality: return "geo_centrality";
    case ScenarioKind::geo_placerank: return "geo_placerank";
    case ScenarioKind::indiv_random: return "indiv_random";
    case ScenarioKind::indiv_radius: return "indiv_radius";
    case ScenarioKind::indiv_entropy: return "indiv_entropy";
    case ScenarioKind::indiv_homestay: return "indiv_homestay";
    case ScenarioKind::indiv_progmosis: return "indiv_progmosis";
    }
    return "unknown";
}

std::optional<ScenarioKind> scenario_kind_from_string(const std::string& s)
{
    for (ScenarioKind k : {ScenarioKind::none, ScenarioKind::geo_centrality, ScenarioKind::geo_placerank,
                           ScenarioKind::indiv_random, ScenarioKind::indiv_radius, ScenarioKind::indiv_entropy,
                           ScenarioKind::indiv_homestay, ScenarioKind::indiv_progmosis})
        if (s == to_string(k))
            return k;
    return std::nullopt;
}

std::string ScenarioSpec::name() const
{
    return label.empty() ? to_string(kind) : label;
}

std::mt19937_64 scenario_rng(std::uint64_t base_seed, std::uint64_t run_index, std::uint32_t stream)
{
    std::seed_seq seq{static_cast<std::uint32_t>(base_seed & 0xffffffffu),
                      static_cast<std::uint32_t>(base_seed >> 32),
                      static_cast<std::uint32_t>(run_index & 0xffffffffu),
                      static_cast<std::uint32_t>(run_index >> 32), stream};
    return std::mt19937_64(seq);
}

Dataset load_dataset(const std::string& cdr_path, const std::string& towers_path, const std::string& areas_path)
{
    Dataset d;
    d.areas  = AreaRegistry::load_csv(areas_path);
    d.towers = TowerRegistry::load_csv(towers_path, d.areas);
    CdrParseResult parsed = parse_cdr_file(cdr_path, d.towers);
    d.records       = std::move(parsed.records);
    d.rejected_rows = parsed.rejected_rows;
    return d;
}

TrainingArtifacts build_training_artifacts(const Dataset& data, Instant split_instant, const NightWindow& night,
                                           std::int64_t total_population)
{
    TrainingArtifacts art;
    art.n_areas   = data.areas.size();
    art.sim_start = split_instant;
    art.total_population = total_population;

    const SplitResult split = split_by_period(data.records, split_instant);
    if (split.training.empty())
        throw std::invalid_argument("the training window contains no records");

    art.trajectories = build_trajectories(split.training, data.towers);
    art.homes        = detect_homes(art.trajectories, night);
    art.centroids    = data.towers.area_centroids(art.n_areas);

    art.pooled_weekday = count_transitions(art.trajectories, DayClass::weekday, art.n_areas);
    art.pooled_weekend = count_transitions(art.trajectories, DayClass::weekend, art.n_areas);
    art.weekday        = matrix_from_counts(art.pooled_weekday, DayClass::weekday);
    art.weekend        = matrix_from_counts(art.pooled_weekend, DayClass::weekend);
    art.flows          = FlowTable::from_counts(count_transitions(art.trajectories, std::nullopt, art.n_areas));

    art.user_weekday.reserve(art.trajectories.size());
    art.user_weekend.reserve(art.trajectories.size());
    for (const Trajectory& t : art.trajectories) {
        const std::vector<Trajectory> one{t};
        art.user_weekday.push_back(count_transitions(one, DayClass::weekday, art.n_areas));
        art.user_weekend.push_back(count_transitions(one, DayClass::weekend, art.n_areas));
    }

    art.profiles.reserve(art.trajectories.size());
    art.indicators.reserve(art.trajectories.size());
    for (std::size_t u = 0; u < art.trajectories.size(); ++u) {
        const Trajectory& traj = art.trajectories[u];
        art.profiles.push_back(OccupancyProfile::from_trajectory(traj));
        IndicatorSet ind;
        ind.user_id      = traj.user_id;
        ind.radius_km    = radius_of_gyration_km(traj, art.centroids);
        ind.entropy_nats = movement_entropy(traj);
        ind.home_staying = home_staying(traj, art.homes[u]);
        ind.home_area    = art.homes[u].home_area;
        art.indicators.push_back(std::move(ind));
    }

    art.population = allocate_population(art.homes, art.n_areas, total_population);
    return art;
}

MobilityMatrix matrix_excluding(const TrainingArtifacts& art, const std::set<std::string>& excluded_users,
                                DayClass day_class)
{
    const TransitionCounts& pooled = day_class == DayClass::weekday ? art.pooled_weekday : art.pooled_weekend;
    const auto& per_user           = day_class == DayClass::weekday ? art.user_weekday : art.user_weekend;

    TransitionCounts reduced = pooled;
    std::size_t surviving    = art.trajectories.size();
    for (std::size_t u = 0; u < art.trajectories.size(); ++u) {
        if (!excluded_users.count(art.trajectories[u].user_id))
            continue;
        --surviving;
        for (const auto& [ij, c] : per_user[u].counts) {
            auto it = reduced.counts.find(ij);
            if (it == reduced.counts.end() || it->second < c)
                throw std::logic_error("per-user transition counts exceed the pooled counts");
            it->second -= c;
            if (it->second == 0)
                reduced.counts.erase(it);
        }
    }
    if (surviving == 0)
        throw std::invalid_argument("user exclusion removed every trajectory");
    return matrix_from_counts(reduced, day_class);
}

std::vector<std::pair<std::string, double>> progmosis_values(const TrainingArtifacts& art,
                                                             const EpidemicSnapshot& snapshot, double beta)
{
    std::vector<std::pair<std::string, double>> out;
    out.reserve(art.profiles.size());
    for (const OccupancyProfile& p : art.profiles)
        out.emplace_back(p.user_id, progmosis_risk(p, snapshot, beta));
    return out;
}

double percentile_sorted(const std::vector<double>& sorted, double p)
{
    if (sorted.empty())
        throw std::invalid_argument("percentile of an empty sample");
    if (p <= 0.0)
        return sorted.front();
    if (p >= 1.0)
        return sorted.back();
    const double h        = p * static_cast<double>(sorted.size() - 1);
    const std::size_t lo  = static_cast<std::size_t>(std::floor(h));
    const double frac     = h - static_cast<double>(lo);
    if (lo + 1 >= sorted.size())
        return sorted.back();
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

AggregateSeries aggregate_runs(const std::vector<std::vector<double>>& per_run_series)
{
    if (per_run_series.empty())
        throw std::invalid_argument("cannot aggregate zero runs");
    const std::size_t len = per_run_series.front().size();
    for (const auto& s : per_run_series)
        if (s.size() != len)
            throw std::invalid_argument("per-run series differ in length");

    AggregateSeries agg;
    agg.run_count = static_cast<int>(per_run_series.size());
    agg.mean.resize(len);
    agg.ci_lo.resize(len);
    agg.ci_hi.resize(len);
    std::vector<double> column(per_run_series.size());
    for (std::size_t t = 0; t < len; ++t) {
        double sum = 0.0;
        for (std::size_t r = 0; r < per_run_series.size(); ++r) {
            column[r] = per_run_series[r][t];
            sum += column[r];
        }
        std::sort(column.begin(), column.end());
        agg.mean[t]  = sum / static_cast<double>(per_run_series.size());
        agg.ci_lo[t] = percentile_sorted(column, 0.025);
        agg.ci_hi[t] = percentile_sorted(column, 0.975);
    }
    return agg;
}

namespace {

struct InterventionMatrices {
    MobilityMatrix weekday;
    MobilityMatrix weekend;
};

InterventionMatrices quarantine_pair(const TrainingArtifacts& art, const std::vector<int>& areas)
{
    return InterventionMatrices{quarantine_areas(art.weekday, areas), quarantine_areas(art.weekend, areas)};
}

InterventionMatrices exclusion_pair(const TrainingArtifacts& art, const std::set<std::string>& users)
{
    return InterventionMatrices{matrix_excluding(art, users, DayClass::weekday),
                                matrix_excluding(art, users, DayClass::weekend)};
}

std::vector<std::pair<std::string, double>> indicator_values(const TrainingArtifacts& art, ScenarioKind kind)
{
    std::vector<std::pair<std::string, double>> vals;
    vals.reserve(art.indicators.size());
    for (const IndicatorSet& ind : art.indicators) {
        double v = 0.0;
        if (kind == ScenarioKind::indiv_radius)
            v = ind.radius_km;
        else if (kind == ScenarioKind::indiv_entropy)
            v = ind.entropy_nats;
        else if (kind == ScenarioKind::indiv_homestay)
            v = ind.home_staying;
        vals.emplace_back(ind.user_id, v);
    }
    return vals;
}

std::vector<std::int64_t> shrunk_population(const TrainingArtifacts& art, const std::set<std::string>& isolated)
{
    std::vector<HomeAssignment> surviving;
    surviving.reserve(art.homes.size());
    for (const HomeAssignment& h : art.homes)
        if (!isolated.count(h.user_id))
            surviving.push_back(h);
    if (surviving.empty())
        throw std::invalid_argument("isolation removed the entire population");
    const double share = static_cast<double>(surviving.size()) / static_cast<double>(art.homes.size());
    const std::int64_t total =
        std::max<std::int64_t>(1, std::llround(share * static_cast<double>(art.total_population)));
    return allocate_population(surviving, art.n_areas, total);
}

void validate_spec(const ScenarioSpec& spec, const TrainingArtifacts& art, const SimulationSettings& settings)
{
    if (settings.run_count < 1)
        throw std::invalid_argument("run count must be at least 1");
    if (settings.horizon_days < 1)
        throw std::invalid_argument("horizon must be at least one day");
    if (spec.kind != ScenarioKind::none && spec.delay_days >= settings.horizon_days)
        throw std::invalid_argument("intervention delay must lie before the horizon");
    if (spec.kind == ScenarioKind::geo_centrality || spec.kind == ScenarioKind::geo_placerank) {
        if (spec.top_k < 1 || spec.top_k > art.n_areas)
            throw std::invalid_argument("top_k must lie in [1, area count]");
    }
    if (spec.kind == ScenarioKind::indiv_random || spec.kind == ScenarioKind::indiv_radius ||
        spec.kind == ScenarioKind::indiv_entropy || spec.kind == ScenarioKind::indiv_homestay ||
        spec.kind == ScenarioKind::indiv_progmosis) {
        if (spec.fraction < 0.0 || spec.fraction > 1.0)
            throw std::invalid_argument("isolation fraction must lie in [0, 1]");
    }
}

} // namespace

ScenarioResult run_scenario(const ScenarioSpec& spec, const TrainingArtifacts& art, const EpidemicParams& params,
                            const SimulationSettings& settings)
{
    validate_spec(spec, art, settings);
    params.validate();
    art.weekday.check_row_stochastic();
    art.weekend.check_row_stochastic();

    const SimulationCalendar calendar = SimulationCalendar::from_start(art.sim_start, settings.horizon_days);

    // Scenario-constant intervention inputs are resolved once; per-run kinds
    // (random draw, snapshot-dependent risk) are resolved inside the loop.
    std::optional<InterventionMatrices> fixed_matrices;
    std::optional<std::set<std::string>> fixed_isolated;
    const bool individual_kind =
        spec.kind == ScenarioKind::indiv_random || spec.kind == ScenarioKind::indiv_radius ||
        spec.kind == ScenarioKind::indiv_entropy || spec.kind == ScenarioKind::indiv_homestay ||
        spec.kind == ScenarioKind::indiv_progmosis;

    if (spec.kind == ScenarioKind::geo_centrality) {
        const AreaScores scores =
            settings.centrality_on_raw_flows
                ? compute_eigenvector_centrality(art.flows.flows, settings.targeting_tolerance,
                                                 settings.targeting_max_iters)
                : compute_eigenvector_centrality(art.weekday.m, settings.targeting_tolerance,
                                                 settings.targeting_max_iters);
        fixed_matrices = quarantine_pair(art, select_top_areas(scores, spec.top_k));
    } else if (spec.kind == ScenarioKind::geo_placerank) {
        const AreaScores scores =
            compute_place_rank(art.flows, settings.targeting_tolerance, settings.targeting_max_iters);
        fixed_matrices = quarantine_pair(art, select_top_areas(scores, spec.top_k));
    } else if ((spec.kind == ScenarioKind::indiv_radius || spec.kind == ScenarioKind::indiv_entropy ||
                spec.kind == ScenarioKind::indiv_homestay) &&
               spec.fraction > 0.0) {
        const RankDirection dir =
            spec.kind == ScenarioKind::indiv_homestay ? RankDirection::lowest : RankDirection::highest;
        const auto ranked = rank_users(indicator_values(art, spec.kind), dir, spec.fraction);
        fixed_isolated    = std::set<std::string>(ranked.begin(), ranked.end());
        fixed_matrices    = exclusion_pair(art, *fixed_isolated);
    }

    std::vector<std::string> user_ids;
    user_ids.reserve(art.trajectories.size());
    for (const Trajectory& t : art.trajectories)
        user_ids.push_back(t.user_id);

    const int n_runs = settings.run_count;
    std::vector<RunSeries> runs(static_cast<std::size_t>(n_runs));
    std::vector<std::exception_ptr> failures(static_cast<std::size_t>(n_runs));

    const auto execute_run = [&](int r) {
        auto rng_epidemic = scenario_rng(settings.base_seed, static_cast<std::uint64_t>(r), 0);
        auto rng_seedarea = scenario_rng(settings.base_seed, static_cast<std::uint64_t>(r), 1);
        auto rng_isolate  = scenario_rng(settings.base_seed, static_cast<std::uint64_t>(r), 2);

        // Resolve this run's isolated set (individual kinds only).
        std::set<std::string> isolated;
        std::optional<InterventionMatrices> matrices = fixed_matrices;
        if (fixed_isolated)
            isolated = *fixed_isolated;
        if (spec.kind == ScenarioKind::indiv_random && spec.fraction > 0.0) {
            const auto drawn = sample_users(user_ids, spec.fraction, rng_isolate);
            isolated         = std::set<std::string>(drawn.begin(), drawn.end());
            matrices         = exclusion_pair(art, isolated);
        }

        // Initial state; individual isolation optionally removes the isolated
        // users' population share.
        std::vector<std::int64_t> population = art.population;
        if (settings.isolation_shrinks_population && individual_kind && !isolated.empty() &&
            spec.kind != ScenarioKind::indiv_progmosis)
            population = shrunk_population(art, isolated);

        MetaPopState initial = MetaPopState::from_population(population);
        SeedReport seed = seed_outbreak(initial, settings.seed_area, settings.seed_fraction, rng_seedarea);

        if (spec.kind == ScenarioKind::indiv_progmosis && spec.fraction > 0.0) {
            // Rank on this run's own epidemic snapshot at the intervention
            // day, then replay the identical stream for the full run.
            EpidemicSnapshot snapshot;
            if (spec.delay_days == 0) {
                snapshot = EpidemicSnapshot::from_state(initial);
            } else {
                auto rng_prefix        = scenario_rng(settings.base_seed, static_cast<std::uint64_t>(r), 0);
                const RunResult prefix = run(initial, calendar, art.weekday, art.weekend, params, spec.delay_days,
                                             settings.mode, rng_prefix);
                snapshot               = EpidemicSnapshot::from_state(prefix.series.back());
            }
            const auto ranked =
                rank_users(progmosis_values(art, snapshot, params.beta), RankDirection::highest, spec.fraction);
            isolated = std::set<std::string>(ranked.begin(), ranked.end());
            matrices = exclusion_pair(art, isolated);
            if (settings.isolation_shrinks_population && !isolated.empty()) {
                population = shrunk_population(art, isolated);
                initial    = MetaPopState::from_population(population);
                auto rng_reseed = scenario_rng(settings.base_seed, static_cast<std::uint64_t>(r), 1);
                seed = seed_outbreak(initial, settings.seed_area, settings.seed_fraction, rng_reseed);
            }
        }

        std::optional<InterventionSchedule> schedule;
        if (spec.kind != ScenarioKind::none && matrices)
            schedule = InterventionSchedule{spec.delay_days, matrices->weekday, matrices->weekend};

        const RunResult rr = run(initial, calendar, art.weekday, art.weekend, params, settings.horizon_days,
                                 settings.mode, rng_epidemic, schedule);

        RunSeries series;
        series.seed         = seed;
        series.clamp_events = rr.clamp_events;
        const std::size_t len = rr.series.size();
        series.susceptible.resize(len);
        series.exposed.resize(len);
        series.infected.resize(len);
        series.recovered.resize(len);
        series.cum_infections.resize(len);
        for (std::size_t d = 0; d < len; ++d) {
            const MetaPopState& st   = rr.series[d];
            series.susceptible[d]    = st.susceptible.sum();
            series.exposed[d]        = st.exposed.sum();
            series.infected[d]       = st.infected.sum();
            series.recovered[d]      = st.recovered.sum();
            series.cum_infections[d] = st.cum_infections;
        }
        if (settings.keep_full_series)
            series.full = rr;
        runs[static_cast<std::size_t>(r)] = std::move(series);
    };

    int workers = settings.workers > 0 ? settings.workers : static_cast<int>(std::thread::hardware_concurrency());
    workers     = std::max(1, std::min(workers, n_runs));
    if (workers == 1) {
        for (int r = 0; r < n_runs; ++r) {
            try {
                execute_run(r);
            } catch (...) {
                failures[static_cast<std::size_t>(r)] = std::current_exception();
                break;
            }
        }
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&]() {
                while (true) {
                    const int r = next.fetch_add(1);
                    if (r >= n_runs)
                        return;
                    try {
                        execute_run(r);
                    } catch (...) {
                        failures[static_cast<std::size_t>(r)] = std::current_exception();
                    }
                }
            });
        }
        for (std::thread& t : pool)
            t.join();
    }
    for (int r = 0; r < n_runs; ++r) {
        if (failures[static_cast<std::size_t>(r)]) {
            try {
                std::rethrow_exception(failures[static_cast<std::size_t>(r)]);
            } catch (const std::exception& e) {
                throw std::runtime_error("run " + std::to_string(r) + ": " + e.what());
            }
        }
    }

    ScenarioResult result;
    result.spec = spec;
    std::vector<std::vector<double>> cum;
    cum.reserve(runs.size());
    for (const RunSeries& s : runs)
        cum.push_back(s.cum_infections);
    result.aggregate = aggregate_runs(cum);
    result.runs      = std::move(runs);
    return result;
}

std::vector<ComparisonRow> compare_scenarios(const std::vector<ScenarioResult>& results)
{
    if (results.empty())
        throw std::invalid_argument("nothing to compare");
    const std::size_t len = results.front().aggregate.mean.size();
    for (const ScenarioResult& r : results)
        if (r.aggregate.mean.size() != len)
            throw std::invalid_argument("compared scenarios have mismatched horizons");

    std::optional<double> baseline;
    for (const ScenarioResult& r : results) {
        if (r.spec.kind == ScenarioKind::none) {
            baseline = r.aggregate.mean.back();
            break;
        }
    }

    std::vector<ComparisonRow> rows;
    rows.reserve(results.size());
    for (const ScenarioResult& r : results) {
        ComparisonRow row;
        row.scenario   = r.spec.name();
        row.final_mean = r.aggregate.mean.back();
        row.ci_lo      = r.aggregate.ci_lo.back();
        row.ci_hi      = r.aggregate.ci_hi.back();
        if (baseline && *baseline != 0.0)
            row.reduction_vs_none = (*baseline - row.final_mean) / *baseline;
        else if (baseline)
            row.reduction_vs_none = 0.0;
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_aggregate_csv(const std::string& path, const AggregateSeries& agg)
{
    std::ostringstream out;
    out << "day,mean_cum_infections,ci_lo,ci_hi\n";
    for (std::size_t d = 0; d < agg.mean.size(); ++d)
        out << d << ',' << format_double(agg.mean[d]) << ',' << format_double(agg.ci_lo[d]) << ','
            << format_double(agg.ci_hi[d]) << '\n';
    write_text_file(path, out.str());
}

void write_runs_csv(const std::string& path, const ScenarioResult& result)
{
    std::ostringstream out;
    out << "run_id,day,S,E,I,R,cum_infections\n";
    for (std::size_t r = 0; r < result.runs.size(); ++r) {
        const RunSeries& s = result.runs[r];
        for (std::size_t d = 0; d < s.cum_infections.size(); ++d)
            out << r << ',' << d << ',' << format_double(s.susceptible[d]) << ',' << format_double(s.exposed[d])
                << ',' << format_double(s.infected[d]) << ',' << format_double(s.recovered[d]) << ','
                << format_double(s.cum_infections[d]) << '\n';
    }
    write_text_file(path, out.str());
}

void write_comparison_csv(const std::string& path, const std::vector<ComparisonRow>& rows)
{
    std::ostringstream out;
    out << "scenario,final_mean,ci_lo,ci_hi,reduction_vs_none\n";
    for (const ComparisonRow& r : rows) {
        out << r.scenario << ',' << format_double(r.final_mean) << ',' << format_double(r.ci_lo) << ','
            << format_double(r.ci_hi) << ',';
        if (r.reduction_vs_none)
            out << format_double(*r.reduction_vs_none);
        out << '\n';
    }
    write_text_file(path, out.str());
}

} // namespace epimob

#include "epimob/config.hpp"
#include "epimob/io_util.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonOptions {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> runs;
    std::optional<int> horizon;
    std::optional<std::string> mode;
    std::optional<int> workers;
};

void add_common(CLI::App* cmd, CommonOptions& opts)
{
    cmd->add_option("--config", opts.config_path, "experiment config file (JSON)")->required();
    cmd->add_option("--out", opts.out_dir, "output directory")->required();
    cmd->add_option("--seed", opts.seed, "base RNG seed (overrides the config)");
    cmd->add_option("--runs", opts.runs, "Monte Carlo run count (overrides the config)");
    cmd->add_option("--horizon-days", opts.horizon, "simulation horizon in days (overrides the config)");
    cmd->add_option("--mode", opts.mode, "deterministic or stochastic (overrides the config)");
    cmd->add_option("--workers", opts.workers, "parallel run workers (overrides the config)");
}

epimob::ExperimentConfig load_config(const CommonOptions& opts)
{
    epimob::ExperimentConfig cfg = epimob::ExperimentConfig::from_json_file(opts.config_path);
    if (opts.seed)
        cfg.sim.base_seed = *opts.seed;
    if (opts.runs)
        cfg.sim.run_count = *opts.runs;
    if (opts.horizon)
        cfg.sim.horizon_days = *opts.horizon;
    if (opts.workers)
        cfg.sim.workers = *opts.workers;
    if (opts.mode) {
        if (*opts.mode == "deterministic")
            cfg.sim.mode = epimob::SimMode::deterministic;
        else if (*opts.mode == "stochastic")
            cfg.sim.mode = epimob::SimMode::stochastic;
        else
            throw std::invalid_argument("unknown mode: " + *opts.mode);
    }
    return cfg;
}

struct ResolvedDataset {
    epimob::Dataset data;
    epimob::ExperimentConfig::DatasetPaths paths;
};

// Loads the configured dataset; without one, generates a synthetic dataset
// into <out>/dataset and uses it.
ResolvedDataset resolve_dataset(const epimob::ExperimentConfig& cfg, const std::string& out_dir)
{
    ResolvedDataset r;
    if (cfg.dataset) {
        r.paths = *cfg.dataset;
        r.data  = epimob::load_dataset(r.paths.cdr, r.paths.towers, r.paths.areas);
        return r;
    }
    if (!cfg.generate)
        throw std::invalid_argument("config needs either a dataset section or a generate section");
    const epimob::SynthOutput synth = epimob::generate_synthetic_cdr(*cfg.generate, cfg.sim.base_seed);
    const fs::path dir              = fs::path(out_dir) / "dataset";
    epimob::write_synth_dataset(synth, dir.string());
    r.paths.cdr    = (dir / "cdr.csv").string();
    r.paths.towers = (dir / "towers.csv").string();
    r.paths.areas  = (dir / "areas.csv").string();
    r.data = epimob::Dataset{synth.areas, synth.towers, synth.records, 0};
    return r;
}

std::int64_t resolved_population(const epimob::ExperimentConfig& cfg, const epimob::AreaRegistry& areas)
{
    if (cfg.total_population > 0)
        return cfg.total_population;
    std::int64_t total = 0;
    for (const epimob::Area& a : areas.entries())
        total += a.base_population;
    return total;
}

epimob::Instant require_split(const epimob::ExperimentConfig& cfg)
{
    if (!cfg.split_instant)
        throw std::invalid_argument("config needs split_instant for this command");
    return *cfg.split_instant;
}

// The configurable birth/death defaults: mu = 10/1000/365 per day and
// per-area births proportional to the initial allocation at 36/1000/365.
void apply_vital_rates(epimob::EpidemicParams& params, const std::vector<std::int64_t>& population)
{
    params.mu = 10.0 / 1000.0 / 365.0;
    params.nu_per_area.resize(static_cast<Eigen::Index>(population.size()));
    for (std::size_t i = 0; i < population.size(); ++i)
        params.nu_per_area(static_cast<Eigen::Index>(i)) =
            static_cast<double>(population[i]) * 36.0 / 1000.0 / 365.0;
}

json manifest_skeleton(const std::string& command, const epimob::ExperimentConfig& cfg)
{
    json m;
    m["command"] = command;
    m["seed"]    = cfg.sim.base_seed;
    m["config"]  = json::parse(cfg.to_json_text());
    m["inputs"]  = json::object();
    m["outputs"] = json::array();
    return m;
}

void add_input_digests(json& manifest, const epimob::ExperimentConfig::DatasetPaths& paths)
{
    manifest["inputs"]["cdr"]    = epimob::fnv1a_file_digest(paths.cdr);
    manifest["inputs"]["towers"] = epimob::fnv1a_file_digest(paths.towers);
    manifest["inputs"]["areas"]  = epimob::fnv1a_file_digest(paths.areas);
}

void write_manifest(const json& manifest, const std::string& out_dir)
{
    epimob::write_text_file((fs::path(out_dir) / "manifest.json").string(), manifest.dump(2) + "\n");
}

json scenario_summary(const epimob::ScenarioResult& result)
{
    json s;
    s["scenario"] = result.spec.name();
    s["runs"]     = static_cast<int>(result.runs.size());
    std::int64_t requested = 0;
    int capped             = 0;
    long clamps            = 0;
    for (const epimob::RunSeries& r : result.runs) {
        requested = r.seed.requested;
        if (r.seed.realized < r.seed.requested)
            ++capped;
        clamps += r.clamp_events;
    }
    s["seed_requested"]        = requested;
    s["runs_with_capped_seed"] = capped;
    s["clamp_events"]          = clamps;
    return s;
}

int cmd_generate(const CommonOptions& opts)
{
    const epimob::ExperimentConfig cfg = load_config(opts);
    if (!cfg.generate)
        throw std::invalid_argument("config has no generate section");
    fs::create_directories(opts.out_dir);
    const epimob::SynthOutput synth = epimob::generate_synthetic_cdr(*cfg.generate, cfg.sim.base_seed);
    epimob::write_synth_dataset(synth, opts.out_dir);

    json manifest = manifest_skeleton("generate", cfg);
    for (const char* f : {"cdr.csv", "towers.csv", "areas.csv", "homes_truth.csv"}) {
        manifest["outputs"].push_back(f);
        manifest["inputs"][f] = epimob::fnv1a_file_digest((fs::path(opts.out_dir) / f).string());
    }
    manifest["records"] = static_cast<std::int64_t>(synth.records.size());
    write_manifest(manifest, opts.out_dir);
    std::cout << "generated " << synth.records.size() << " records for " << cfg.generate->users << " users over "
              << cfg.generate->areas << " areas\n";
    return 0;
}

int cmd_estimate(const CommonOptions& opts)
{
    const epimob::ExperimentConfig cfg = load_config(opts);
    fs::create_directories(opts.out_dir);
    const ResolvedDataset ds = resolve_dataset(cfg, opts.out_dir);
    const epimob::Instant split = require_split(cfg);

    const epimob::SplitResult parts = epimob::split_by_period(ds.data.records, split);
    const auto trajectories         = epimob::build_trajectories(parts.training, ds.data.towers);
    const std::string digest        = epimob::fnv1a_file_digest(ds.paths.cdr);

    json manifest = manifest_skeleton("estimate", cfg);
    add_input_digests(manifest, ds.paths);
    for (const epimob::DayClass dc : {epimob::DayClass::weekday, epimob::DayClass::weekend}) {
        const epimob::MobilityMatrix m = epimob::estimate_matrix(trajectories, dc, ds.data.areas.size());
        const std::string stem         = std::string("matrix_") + epimob::to_string(dc);
        epimob::save_matrix_csv(m, ds.data.areas, (fs::path(opts.out_dir) / (stem + ".csv")).string(),
                                (fs::path(opts.out_dir) / (stem + ".meta.json")).string(), digest);
        manifest["outputs"].push_back(stem + ".csv");
        manifest["outputs"].push_back(stem + ".meta.json");
    }
    write_manifest(manifest, opts.out_dir);
    std::cout << "estimated weekday/weekend matrices over " << trajectories.size() << " users\n";
    return 0;
}

int cmd_indicators(const CommonOptions& opts)
{
    epimob::ExperimentConfig cfg = load_config(opts);
    fs::create_directories(opts.out_dir);
    const ResolvedDataset ds = resolve_dataset(cfg, opts.out_dir);

    epimob::TrainingArtifacts art = epimob::build_training_artifacts(
        ds.data, require_split(cfg), cfg.night, resolved_population(cfg, ds.data.areas));
    if (cfg.vital_rates)
        apply_vital_rates(cfg.params, art.population);

    // The risk column needs epidemic context: a baseline run, deterministic
    // for reproducibility, snapshotted on the configured day.
    epimob::MetaPopState state = epimob::MetaPopState::from_population(art.population);
    auto rng                   = epimob::scenario_rng(cfg.sim.base_seed, 0, 1);
    epimob::seed_outbreak(state, cfg.sim.seed_area, cfg.sim.seed_fraction, rng);
    epimob::EpidemicSnapshot snapshot;
    if (cfg.progmosis_delay_days == 0) {
        snapshot = epimob::EpidemicSnapshot::from_state(state);
    } else {
        const epimob::SimulationCalendar cal =
            epimob::SimulationCalendar::from_start(art.sim_start, cfg.progmosis_delay_days);
        auto rng_run = epimob::scenario_rng(cfg.sim.base_seed, 0, 0);
        const epimob::RunResult rr = epimob::run(state, cal, art.weekday, art.weekend, cfg.params,
                                                 cfg.progmosis_delay_days, epimob::SimMode::deterministic, rng_run);
        snapshot = epimob::EpidemicSnapshot::from_state(rr.series.back());
    }
    const auto risks = epimob::progmosis_values(art, snapshot, cfg.params.beta);
    for (std::size_t u = 0; u < art.indicators.size(); ++u)
        art.indicators[u].progmosis_risk = risks[u].second;

    epimob::save_indicators_csv((fs::path(opts.out_dir) / "indicators.csv").string(), art.indicators,
                                ds.data.areas);

    json manifest = manifest_skeleton("indicators", cfg);
    add_input_digests(manifest, ds.paths);
    manifest["outputs"].push_back("indicators.csv");
    write_manifest(manifest, opts.out_dir);
    std::cout << "wrote indicators for " << art.indicators.size() << " users\n";
    return 0;
}

int cmd_rank_areas(const CommonOptions& opts)
{
    const epimob::ExperimentConfig cfg = load_config(opts);
    fs::create_directories(opts.out_dir);
    const ResolvedDataset ds = resolve_dataset(cfg, opts.out_dir);

    const epimob::TrainingArtifacts art = epimob::build_training_artifacts(
        ds.data, require_split(cfg), cfg.night, resolved_population(cfg, ds.data.areas));

    std::vector<epimob::AreaScores> sets;
    for (const std::string& method : cfg.targeting.methods) {
        if (method == "placerank")
            sets.push_back(epimob::compute_place_rank(art.flows, cfg.targeting.tolerance, cfg.targeting.max_iters));
        else if (method == "centrality")
            sets.push_back(epimob::compute_eigenvector_centrality(
                cfg.targeting.raw_flows ? art.flows.flows : art.weekday.m, cfg.targeting.tolerance,
                cfg.targeting.max_iters));
        else
            throw std::invalid_argument("unknown targeting method: " + method);
    }
    epimob::save_scores_csv((fs::path(opts.out_dir) / "scores.csv").string(), sets, ds.data.areas);

    json manifest = manifest_skeleton("rank-areas", cfg);
    add_input_digests(manifest, ds.paths);
    manifest["outputs"].push_back("scores.csv");
    write_manifest(manifest, opts.out_dir);
    for (const epimob::AreaScores& s : sets) {
        const auto top = epimob::select_top_areas(s, std::min(cfg.targeting.top_k, ds.data.areas.size()));
        std::cout << s.method << " top:";
        for (int a : top)
            std::cout << ' ' << ds.data.areas.id_of(a);
        std::cout << (s.converged ? "" : "  [not converged]") << '\n';
    }
    return 0;
}

int cmd_simulate(const CommonOptions& opts)
{
    epimob::ExperimentConfig cfg = load_config(opts);
    fs::create_directories(opts.out_dir);
    const ResolvedDataset ds = resolve_dataset(cfg, opts.out_dir);

    const epimob::TrainingArtifacts art = epimob::build_training_artifacts(
        ds.data, require_split(cfg), cfg.night, resolved_population(cfg, ds.data.areas));
    if (cfg.vital_rates)
        apply_vital_rates(cfg.params, art.population);

    const epimob::ScenarioResult result = epimob::run_scenario(cfg.scenario, art, cfg.params, cfg.sim);
    epimob::write_aggregate_csv((fs::path(opts.out_dir) / "aggregate.csv").string(), result.aggregate);
    epimob::write_runs_csv((fs::path(opts.out_dir) / "runs.csv").string(), result);

    json manifest = manifest_skeleton("simulate", cfg);
    add_input_digests(manifest, ds.paths);
    manifest["outputs"].push_back("aggregate.csv");
    manifest["outputs"].push_back("runs.csv");
    if (cfg.sim.keep_full_series) {
        std::vector<std::pair<int, const epimob::RunResult*>> full;
        for (std::size_t r = 0; r < result.runs.size(); ++r)
            if (result.runs[r].full)
                full.emplace_back(static_cast<int>(r), &*result.runs[r].full);
        epimob::write_timeseries_csv((fs::path(opts.out_dir) / "timeseries.csv").string(), full, ds.data.areas);
        manifest["outputs"].push_back("timeseries.csv");
    }
    manifest["scenarios"].push_back(scenario_summary(result));
    write_manifest(manifest, opts.out_dir);
    std::cout << result.spec.name() << ": mean final cumulative infections "
              << epimob::format_double(result.aggregate.mean.back()) << " over " << result.runs.size() << " runs\n";
    return 0;
}

int cmd_compare(const CommonOptions& opts)
{
    epimob::ExperimentConfig cfg = load_config(opts);
    if (cfg.scenarios.empty())
        throw std::invalid_argument("config has no scenarios list to compare");
    fs::create_directories(opts.out_dir);
    const ResolvedDataset ds = resolve_dataset(cfg, opts.out_dir);

    const epimob::TrainingArtifacts art = epimob::build_training_artifacts(
        ds.data, require_split(cfg), cfg.night, resolved_population(cfg, ds.data.areas));
    if (cfg.vital_rates)
        apply_vital_rates(cfg.params, art.population);

    json manifest = manifest_skeleton("compare", cfg);
    add_input_digests(manifest, ds.paths);

    std::vector<epimob::ScenarioResult> results;
    results.reserve(cfg.scenarios.size());
    for (const epimob::ScenarioSpec& spec : cfg.scenarios) {
        results.push_back(epimob::run_scenario(spec, art, cfg.params, cfg.sim));
        const epimob::ScenarioResult& res = results.back();
        const fs::path sub                = fs::path(opts.out_dir) / res.spec.name();
        fs::create_directories(sub);
        epimob::write_aggregate_csv((sub / "aggregate.csv").string(), res.aggregate);
        epimob::write_runs_csv((sub / "runs.csv").string(), res);
        manifest["outputs"].push_back(res.spec.name() + "/aggregate.csv");
        manifest["outputs"].push_back(res.spec.name() + "/runs.csv");
        manifest["scenarios"].push_back(scenario_summary(res));
        std::cout << res.spec.name() << ": mean final cumulative infections "
                  << epimob::format_double(res.aggregate.mean.back()) << '\n';
    }

    const auto rows = epimob::compare_scenarios(results);
    epimob::write_comparison_csv((fs::path(opts.out_dir) / "comparison.csv").string(), rows);
    manifest["outputs"].push_back("comparison.csv");
    write_manifest(manifest, opts.out_dir);
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"CDR-driven meta-population epidemic simulation and targeting toolkit"};
    app.require_subcommand(1);

    CommonOptions generate_opts, estimate_opts, indicators_opts, rank_opts, simulate_opts, compare_opts;
    add_common(app.add_subcommand("generate", "generate a synthetic CDR dataset"), generate_opts);
    add_common(app.add_subcommand("estimate", "estimate weekday/weekend mobility matrices"), estimate_opts);
    add_common(app.add_subcommand("indicators", "compute per-user mobility indicators"), indicators_opts);
    add_common(app.add_subcommand("rank-areas", "score areas by spreading influence"), rank_opts);
    add_common(app.add_subcommand("simulate", "run one scenario across Monte Carlo replicates"), simulate_opts);
    add_common(app.add_subcommand("compare", "run and compare a list of scenarios"), compare_opts);

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("generate"))
            return cmd_generate(generate_opts);
        if (app.got_subcommand("estimate"))
            return cmd_estimate(estimate_opts);
        if (app.got_subcommand("indicators"))
            return cmd_indicators(indicators_opts);
        if (app.got_subcommand("rank-areas"))
            return cmd_rank_areas(rank_opts);
        if (app.got_subcommand("simulate"))
            return cmd_simulate(simulate_opts);
        if (app.got_subcommand("compare"))
            return cmd_compare(compare_opts);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

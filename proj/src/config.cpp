#include "epimob/config.hpp"

#include "epimob/io_util.hpp"

#include <json.hpp>

#include <stdexcept>

namespace epimob {

namespace {

using nlohmann::json;

Instant parse_instant_field(const json& j, const std::string& key)
{
    const auto t = parse_iso8601(j.get<std::string>());
    if (!t)
        throw std::invalid_argument("bad timestamp for " + key + ": " + j.get<std::string>());
    return *t;
}

ScenarioSpec parse_scenario(const json& j)
{
    ScenarioSpec s;
    for (const auto& [key, value] : j.items()) {
        if (key == "kind") {
            const auto k = scenario_kind_from_string(value.get<std::string>());
            if (!k)
                throw std::invalid_argument("unknown scenario kind: " + value.get<std::string>());
            s.kind = *k;
        } else if (key == "top_k")
            s.top_k = value.get<int>();
        else if (key == "fraction")
            s.fraction = value.get<double>();
        else if (key == "delay_days")
            s.delay_days = value.get<int>();
        else if (key == "label")
            s.label = value.get<std::string>();
        else
            throw std::invalid_argument("unknown scenario key: " + key);
    }
    return s;
}

json scenario_to_json(const ScenarioSpec& s)
{
    json j;
    j["kind"]       = to_string(s.kind);
    j["top_k"]      = s.top_k;
    j["fraction"]   = s.fraction;
    j["delay_days"] = s.delay_days;
    if (!s.label.empty())
        j["label"] = s.label;
    return j;
}

} // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text)
{
    const json root = json::parse(text);
    ExperimentConfig c;
    // Reference worst-case parameterization; overridden by the params block.
    c.params.beta  = 0.45;
    c.params.sigma = 0.18;
    c.params.gamma = 0.2;
    c.params.rho   = 0.48;

    for (const auto& [key, value] : root.items()) {
        if (key == "generate") {
            c.generate = SynthConfig::from_json_text(value.dump());
        } else if (key == "dataset") {
            DatasetPaths p;
            p.cdr    = value.at("cdr").get<std::string>();
            p.towers = value.at("towers").get<std::string>();
            p.areas  = value.at("areas").get<std::string>();
            c.dataset = p;
        } else if (key == "split_instant") {
            c.split_instant = parse_instant_field(value, key);
        } else if (key == "night_window") {
            c.night.start_hour = value.value("start_hour", 19);
            c.night.end_hour   = value.value("end_hour", 7);
        } else if (key == "total_population") {
            c.total_population = value.get<std::int64_t>();
        } else if (key == "params") {
            for (const auto& [pk, pv] : value.items()) {
                if (pk == "beta")
                    c.params.beta = pv.get<double>();
                else if (pk == "sigma")
                    c.params.sigma = pv.get<double>();
                else if (pk == "gamma")
                    c.params.gamma = pv.get<double>();
                else if (pk == "rho")
                    c.params.rho = pv.get<double>();
                else if (pk == "nu")
                    c.params.nu = pv.get<double>();
                else if (pk == "mu")
                    c.params.mu = pv.get<double>();
                else
                    throw std::invalid_argument("unknown params key: " + pk);
            }
        } else if (key == "vital_rates") {
            c.vital_rates = value.get<bool>();
        } else if (key == "simulation") {
            for (const auto& [sk, sv] : value.items()) {
                if (sk == "horizon_days")
                    c.sim.horizon_days = sv.get<int>();
                else if (sk == "runs")
                    c.sim.run_count = sv.get<int>();
                else if (sk == "mode") {
                    const std::string m = sv.get<std::string>();
                    if (m == "deterministic")
                        c.sim.mode = SimMode::deterministic;
                    else if (m == "stochastic")
                        c.sim.mode = SimMode::stochastic;
                    else
                        throw std::invalid_argument("unknown simulation mode: " + m);
                } else if (sk == "seed_fraction")
                    c.sim.seed_fraction = sv.get<double>();
                else if (sk == "seed_area") {
                    if (!sv.is_null())
                        c.sim.seed_area = sv.get<int>();
                } else if (sk == "workers")
                    c.sim.workers = sv.get<int>();
                else if (sk == "per_area_output")
                    c.sim.keep_full_series = sv.get<bool>();
                else if (sk == "isolation_shrinks_population")
                    c.sim.isolation_shrinks_population = sv.get<bool>();
                else
                    throw std::invalid_argument("unknown simulation key: " + sk);
            }
        } else if (key == "targeting") {
            for (const auto& [tk, tv] : value.items()) {
                if (tk == "tolerance")
                    c.targeting.tolerance = tv.get<double>();
                else if (tk == "max_iters")
                    c.targeting.max_iters = tv.get<int>();
                else if (tk == "centrality_on_raw_flows")
                    c.targeting.raw_flows = tv.get<bool>();
                else if (tk == "methods")
                    c.targeting.methods = tv.get<std::vector<std::string>>();
                else if (tk == "top_k")
                    c.targeting.top_k = tv.get<int>();
                else
                    throw std::invalid_argument("unknown targeting key: " + tk);
            }
        } else if (key == "indicators") {
            for (const auto& [ik, iv] : value.items()) {
                if (ik == "progmosis_delay_days")
                    c.progmosis_delay_days = iv.get<int>();
                else
                    throw std::invalid_argument("unknown indicators key: " + ik);
            }
        } else if (key == "scenario") {
            c.scenario = parse_scenario(value);
        } else if (key == "scenarios") {
            for (const auto& s : value)
                c.scenarios.push_back(parse_scenario(s));
        } else if (key == "seed") {
            c.sim.base_seed = value.get<std::uint64_t>();
        } else {
            throw std::invalid_argument("unknown config key: " + key);
        }
    }
    c.sim.targeting_tolerance     = c.targeting.tolerance;
    c.sim.targeting_max_iters     = c.targeting.max_iters;
    c.sim.centrality_on_raw_flows = c.targeting.raw_flows;
    return c;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path)
{
    return from_json_text(read_text_file(path));
}

std::string ExperimentConfig::to_json_text() const
{
    json root;
    if (generate)
        root["generate"] = json::parse(generate->to_json_text());
    if (dataset) {
        root["dataset"]["cdr"]    = dataset->cdr;
        root["dataset"]["towers"] = dataset->towers;
        root["dataset"]["areas"]  = dataset->areas;
    }
    if (split_instant)
        root["split_instant"] = format_iso8601(*split_instant);
    root["night_window"]["start_hour"] = night.start_hour;
    root["night_window"]["end_hour"]   = night.end_hour;
    root["total_population"]           = total_population;
    root["params"]                     = {{"beta", params.beta}, {"sigma", params.sigma}, {"gamma", params.gamma},
                                          {"rho", params.rho},   {"nu", params.nu},       {"mu", params.mu}};
    root["vital_rates"]                = vital_rates;
    root["simulation"] = {{"horizon_days", sim.horizon_days},
                          {"runs", sim.run_count},
                          {"mode", sim.mode == SimMode::deterministic ? "deterministic" : "stochastic"},
                          {"seed_fraction", sim.seed_fraction},
                          {"workers", sim.workers},
                          {"per_area_output", sim.keep_full_series},
                          {"isolation_shrinks_population", sim.isolation_shrinks_population}};
    if (sim.seed_area)
        root["simulation"]["seed_area"] = *sim.seed_area;
    root["targeting"] = {{"tolerance", targeting.tolerance},
                         {"max_iters", targeting.max_iters},
                         {"centrality_on_raw_flows", targeting.raw_flows},
                         {"methods", targeting.methods},
                         {"top_k", targeting.top_k}};
    root["indicators"] = {{"progmosis_delay_days", progmosis_delay_days}};
    root["scenario"]   = scenario_to_json(scenario);
    if (!scenarios.empty()) {
        root["scenarios"] = json::array();
        for (const ScenarioSpec& s : scenarios)
            root["scenarios"].push_back(scenario_to_json(s));
    }
    root["seed"] = sim.base_seed;
    return root.dump(2);
}

} // namespace epimob

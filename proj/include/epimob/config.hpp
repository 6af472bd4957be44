#pragma once

#include "epimob/scenario.hpp"
#include "epimob/synth.hpp"

#include <optional>
#include <string>
#include <vector>

namespace epimob {

// One structured file drives every subcommand; irrelevant sections are
// ignored. The schema is documented in the README.
struct ExperimentConfig {
    std::optional<SynthConfig> generate;

    struct DatasetPaths {
        std::string cdr;
        std::string towers;
        std::string areas;
    };
    std::optional<DatasetPaths> dataset;

    std::optional<Instant> split_instant;
    NightWindow night;
    std::int64_t total_population = 0; // 0 = sum of area base populations
    EpidemicParams params;             // beta/sigma/gamma/rho default to the reference scenario
    bool vital_rates = false;          // enable birth/death defaults scaled to the allocation

    SimulationSettings sim;
    ScenarioSpec scenario;               // `simulate`
    std::vector<ScenarioSpec> scenarios; // `compare`

    struct Targeting {
        double tolerance = 1e-9;
        int max_iters    = 10000;
        bool raw_flows   = false;
        std::vector<std::string> methods{"placerank", "centrality"};
        int top_k = 10;
    };
    Targeting targeting;

    int progmosis_delay_days = 3; // standalone `indicators` snapshot day

    static ExperimentConfig from_json_text(const std::string& text);
    static ExperimentConfig from_json_file(const std::string& path);
    std::string to_json_text() const; // resolved config, for the run manifest
};

} // namespace epimob

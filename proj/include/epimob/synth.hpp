#pragma once

#include "epimob/cdr.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace epimob {

// Exploration-with-preferential-return movement anchored at a home area.
// Every field has a config-file equivalent documented in the README.
struct SynthConfig {
    int users           = 500;
    int areas           = 20;
    int towers_per_area = 2;
    Instant window_start = 0; // half-open [start, end)
    Instant window_end   = 0;

    double mean_daily_events = 3.0; // mean of the per-user rate distribution
    double event_rate_sigma  = 0.5; // log-space spread across users

    double move_prob           = 0.35; // chance an event relocates the user first (weekday)
    double weekend_move_factor = 0.6;  // multiplies move_prob on weekends
    double explore_prob        = 0.10; // exploration vs return, given a move
    double return_home_bias    = 0.7;  // home vs preferential return, given a return
    double distance_decay      = 1.6;  // exponent on distance for exploration targets
    double night_home_prob     = 0.9;  // chance a night event is at home

    std::int64_t total_population = 100000; // allocated across areas

    // Bounding box for area centers (defaults roughly cover Ivory Coast).
    double lat_min = 4.3, lat_max = 10.7;
    double lon_min = -8.6, lon_max = -2.5;

    void validate() const;

    static SynthConfig from_json_text(const std::string& text);
    std::string to_json_text() const;
};

struct SynthOutput {
    AreaRegistry areas;
    TowerRegistry towers;
    std::vector<CdrRecord> records; // globally time-sorted
    std::vector<HomeAssignment> true_homes;
};

// Pure function of (config, seed).
SynthOutput generate_synthetic_cdr(const SynthConfig& config, std::uint64_t seed);

// Writes cdr.csv, towers.csv, areas.csv and homes_truth.csv under dir.
void write_synth_dataset(const SynthOutput& out, const std::string& dir);

} // namespace epimob

#pragma once

#include "epimob/geo.hpp"
#include "epimob/time_util.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace epimob {

enum class EventKind { call, sms };

struct CdrRecord {
    std::string caller_id;
    std::string callee_id; // empty when absent
    Instant timestamp     = 0;
    std::int32_t duration_s = 0;
    EventKind kind        = EventKind::call;
    std::string tower_id;
};

struct Area {
    std::string area_id;
    std::string name;
    std::int64_t base_population = 0;
};

// Areas are indexed in ascending area_id order, so every "lowest area_id"
// tie-break in the toolkit reduces to lowest index.
class AreaRegistry {
public:
    AreaRegistry() = default;
    static AreaRegistry from_entries(std::vector<Area> entries);
    static AreaRegistry load_csv(const std::string& path);
    void save_csv(const std::string& path) const;

    int size() const { return static_cast<int>(entries_.size()); }
    const Area& at(int idx) const { return entries_.at(static_cast<std::size_t>(idx)); }
    const std::string& id_of(int idx) const { return at(idx).area_id; }
    // -1 when unknown.
    int index_of(const std::string& area_id) const;
    const std::vector<Area>& entries() const { return entries_; }

private:
    std::vector<Area> entries_;
    std::unordered_map<std::string, int> index_;
};

struct Tower {
    std::string tower_id;
    LatLon position;
    int area = -1; // dense area index
};

class TowerRegistry {
public:
    TowerRegistry() = default;
    static TowerRegistry from_entries(std::vector<Tower> entries);
    static TowerRegistry load_csv(const std::string& path, const AreaRegistry& areas);
    void save_csv(const std::string& path, const AreaRegistry& areas) const;

    int size() const { return static_cast<int>(entries_.size()); }
    const Tower& at(int idx) const { return entries_.at(static_cast<std::size_t>(idx)); }
    int index_of(const std::string& tower_id) const;
    const std::vector<Tower>& entries() const { return entries_; }

    // Arithmetic mean of tower coordinates per area; areas without towers
    // keep (0, 0) and are reported in the second output.
    std::vector<LatLon> area_centroids(int n_areas) const;

private:
    std::vector<Tower> entries_;
    std::unordered_map<std::string, int> index_;
};

struct Visit {
    Instant timestamp = 0;
    int tower         = -1;
    int area          = -1;
};

struct Trajectory {
    std::string user_id;
    std::vector<Visit> visits; // time-sorted; input order preserved on ties

    // Per-area visit counts n_i; keys ordered by area index.
    std::map<int, std::int64_t> area_visit_counts() const;
    std::int64_t total_visits() const { return static_cast<std::int64_t>(visits.size()); }
};

// Local-clock window, wrapping midnight when start_hour > end_hour.
// A visit at hour h is in the window iff h >= start_hour or h < end_hour.
struct NightWindow {
    int start_hour = 19;
    int end_hour   = 7;
    bool contains(Instant t) const;
};

struct HomeAssignment {
    std::string user_id;
    int home_area             = -1;
    std::int64_t night_visits = 0; // 0 when the daytime fallback was used
};

struct CdrParseResult {
    std::vector<CdrRecord> records;
    std::size_t total_rows    = 0;
    std::size_t rejected_rows = 0;
};

// CSV with header `caller_id,callee_id,timestamp,duration_s,kind,tower_id`.
// Malformed rows and rows with unknown towers are rejected and counted;
// rejecting more than half of the rows is a hard error.
CdrParseResult parse_cdr_file(const std::string& path, const TowerRegistry& towers);
void write_cdr_csv(const std::string& path, const std::vector<CdrRecord>& records);

// One trajectory per distinct caller_id, ordered by user_id. Visits are
// sorted by timestamp with ties broken by input order.
std::vector<Trajectory> build_trajectories(const std::vector<CdrRecord>& records, const TowerRegistry& towers);

// Home = area with the most night-window visits, ties to the lowest area
// index; falls back to the overall most-visited area when the trajectory has
// no night visits at all.
HomeAssignment detect_home(const Trajectory& traj, const NightWindow& window);

std::vector<HomeAssignment> detect_homes(const std::vector<Trajectory>& trajectories, const NightWindow& window);

struct SplitResult {
    std::vector<CdrRecord> training;   // timestamp < split_instant
    std::vector<CdrRecord> evaluation; // timestamp >= split_instant
};

// The observation window is half-open [start, end); when not supplied it is
// inferred as [min timestamp, max timestamp + 1]. split_instant must lie
// inside the window (start <= split <= end).
SplitResult split_by_period(const std::vector<CdrRecord>& records, Instant split_instant,
                            std::optional<std::pair<Instant, Instant>> window = std::nullopt);

const char* to_string(EventKind k);
std::optional<EventKind> event_kind_from_string(const std::string& s);

} // namespace epimob

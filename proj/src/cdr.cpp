#include "epimob/cdr.hpp"

#include "epimob/io_util.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace epimob {

namespace {

bool parse_int64(const std::string& s, std::int64_t& out)
{
    const char* begin = s.data();
    const char* end   = s.data() + s.size();
    auto res          = std::from_chars(begin, end, out);
    return res.ec == std::errc() && res.ptr == end;
}

bool parse_double(const std::string& s, double& out)
{
    try {
        std::size_t pos = 0;
        out             = std::stod(s, &pos);
        return pos == s.size();
    } catch (const std::exception&) {
        return false;
    }
}

} // namespace

AreaRegistry AreaRegistry::from_entries(std::vector<Area> entries)
{
    if (entries.empty())
        throw std::invalid_argument("area registry must not be empty");
    std::sort(entries.begin(), entries.end(), [](const Area& a, const Area& b) { return a.area_id < b.area_id; });
    AreaRegistry reg;
    reg.entries_ = std::move(entries);
    for (int i = 0; i < reg.size(); ++i) {
        const Area& a = reg.entries_[static_cast<std::size_t>(i)];
        if (a.base_population <= 0)
            throw std::invalid_argument("area " + a.area_id + " has non-positive base population");
        if (!reg.index_.emplace(a.area_id, i).second)
            throw std::invalid_argument("duplicate area_id: " + a.area_id);
    }
    return reg;
}

AreaRegistry AreaRegistry::load_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open area file: " + path);
    std::string line;
    if (!std::getline(in, line) || split_csv_line(line) != std::vector<std::string>{"area_id", "name", "population"})
        throw std::runtime_error("area file has unexpected header: " + path);
    std::vector<Area> entries;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 3)
            throw std::runtime_error("malformed area row: " + line);
        Area a;
        a.area_id = fields[0];
        a.name    = fields[1];
        if (!parse_int64(fields[2], a.base_population))
            throw std::runtime_error("bad population in area row: " + line);
        entries.push_back(std::move(a));
    }
    return from_entries(std::move(entries));
}

void AreaRegistry::save_csv(const std::string& path) const
{
    std::ostringstream out;
    out << "area_id,name,population\n";
    for (const Area& a : entries_)
        out << a.area_id << ',' << a.name << ',' << a.base_population << '\n';
    write_text_file(path, out.str());
}

int AreaRegistry::index_of(const std::string& area_id) const
{
    const auto it = index_.find(area_id);
    return it == index_.end() ? -1 : it->second;
}

TowerRegistry TowerRegistry::from_entries(std::vector<Tower> entries)
{
    TowerRegistry reg;
    reg.entries_ = std::move(entries);
    for (int i = 0; i < reg.size(); ++i) {
        const Tower& t = reg.entries_[static_cast<std::size_t>(i)];
        if (t.position.lat < -90.0 || t.position.lat > 90.0)
            throw std::invalid_argument("tower " + t.tower_id + " latitude out of range");
        if (t.position.lon < -180.0 || t.position.lon > 180.0)
            throw std::invalid_argument("tower " + t.tower_id + " longitude out of range");
        if (t.area < 0)
            throw std::invalid_argument("tower " + t.tower_id + " has no area");
        if (!reg.index_.emplace(t.tower_id, i).second)
            throw std::invalid_argument("duplicate tower_id: " + t.tower_id);
    }
    return reg;
}

TowerRegistry TowerRegistry::load_csv(const std::string& path, const AreaRegistry& areas)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open tower file: " + path);
    std::string line;
    if (!std::getline(in, line) || split_csv_line(line) != std::vector<std::string>{"tower_id", "lat", "lon", "area_id"})
        throw std::runtime_error("tower file has unexpected header: " + path);
    std::vector<Tower> entries;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 4)
            throw std::runtime_error("malformed tower row: " + line);
        Tower t;
        t.tower_id = fields[0];
        if (!parse_double(fields[1], t.position.lat) || !parse_double(fields[2], t.position.lon))
            throw std::runtime_error("bad coordinates in tower row: " + line);
        t.area = areas.index_of(fields[3]);
        if (t.area < 0)
            throw std::runtime_error("tower " + t.tower_id + " references unknown area " + fields[3]);
        entries.push_back(std::move(t));
    }
    return from_entries(std::move(entries));
}

void TowerRegistry::save_csv(const std::string& path, const AreaRegistry& areas) const
{
    std::ostringstream out;
    out << "tower_id,lat,lon,area_id\n";
    for (const Tower& t : entries_)
        out << t.tower_id << ',' << format_double(t.position.lat) << ',' << format_double(t.position.lon) << ','
            << areas.id_of(t.area) << '\n';
    write_text_file(path, out.str());
}

int TowerRegistry::index_of(const std::string& tower_id) const
{
    const auto it = index_.find(tower_id);
    return it == index_.end() ? -1 : it->second;
}

std::vector<LatLon> TowerRegistry::area_centroids(int n_areas) const
{
    std::vector<LatLon> sums(static_cast<std::size_t>(n_areas));
    std::vector<std::int64_t> counts(static_cast<std::size_t>(n_areas), 0);
    for (const Tower& t : entries_) {
        if (t.area >= n_areas)
            throw std::invalid_argument("tower area index out of range");
        sums[static_cast<std::size_t>(t.area)].lat += t.position.lat;
        sums[static_cast<std::size_t>(t.area)].lon += t.position.lon;
        ++counts[static_cast<std::size_t>(t.area)];
    }
    for (int i = 0; i < n_areas; ++i) {
        if (counts[static_cast<std::size_t>(i)] > 0) {
            sums[static_cast<std::size_t>(i)].lat /= static_cast<double>(counts[static_cast<std::size_t>(i)]);
            sums[static_cast<std::size_t>(i)].lon /= static_cast<double>(counts[static_cast<std::size_t>(i)]);
        }
    }
    return sums;
}

std::map<int, std::int64_t> Trajectory::area_visit_counts() const
{
    std::map<int, std::int64_t> counts;
    for (const Visit& v : visits)
        ++counts[v.area];
    return counts;
}

bool NightWindow::contains(Instant t) const
{
    const int h = hour_of_day(t);
    if (start_hour <= end_hour)
        return h >= start_hour && h < end_hour;
    return h >= start_hour || h < end_hour;
}

const char* to_string(EventKind k)
{
    return k == EventKind::call ? "call" : "sms";
}

std::optional<EventKind> event_kind_from_string(const std::string& s)
{
    if (s == "call")
        return EventKind::call;
    if (s == "sms")
        return EventKind::sms;
    return std::nullopt;
}

CdrParseResult parse_cdr_file(const std::string& path, const TowerRegistry& towers)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open CDR file: " + path);
    std::string line;
    if (!std::getline(in, line) ||
        split_csv_line(line) !=
            std::vector<std::string>{"caller_id", "callee_id", "timestamp", "duration_s", "kind", "tower_id"})
        throw std::runtime_error("CDR file has unexpected header: " + path);

    CdrParseResult result;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        ++result.total_rows;
        const auto fields = split_csv_line(line);
        if (fields.size() != 6) {
            ++result.rejected_rows;
            continue;
        }
        CdrRecord rec;
        rec.caller_id = fields[0];
        rec.callee_id = fields[1];
        const auto ts = parse_iso8601(fields[2]);
        std::int64_t dur = 0;
        const auto kind  = event_kind_from_string(fields[4]);
        const int tower  = towers.index_of(fields[5]);
        if (rec.caller_id.empty() || !ts || !parse_int64(fields[3], dur) || dur < 0 || !kind || tower < 0) {
            ++result.rejected_rows;
            continue;
        }
        rec.timestamp  = *ts;
        rec.duration_s = static_cast<std::int32_t>(dur);
        rec.kind       = *kind;
        rec.tower_id   = fields[5];
        result.records.push_back(std::move(rec));
    }
    if (result.total_rows > 0 && 2 * result.rejected_rows > result.total_rows)
        throw std::runtime_error("more than half of the CDR rows were rejected (" +
                                 std::to_string(result.rejected_rows) + " of " + std::to_string(result.total_rows) +
                                 "): " + path);
    return result;
}

void write_cdr_csv(const std::string& path, const std::vector<CdrRecord>& records)
{
    std::ostringstream out;
    out << "caller_id,callee_id,timestamp,duration_s,kind,tower_id\n";
    for (const CdrRecord& r : records)
        out << r.caller_id << ',' << r.callee_id << ',' << format_iso8601(r.timestamp) << ',' << r.duration_s << ','
            << to_string(r.kind) << ',' << r.tower_id << '\n';
    write_text_file(path, out.str());
}

std::vector<Trajectory> build_trajectories(const std::vector<CdrRecord>& records, const TowerRegistry& towers)
{
    std::unordered_map<std::string, std::vector<Visit>> by_user;
    for (const CdrRecord& r : records) {
        const int tower = towers.index_of(r.tower_id);
        if (tower < 0)
            throw std::invalid_argument("record references unknown tower " + r.tower_id);
        by_user[r.caller_id].push_back(Visit{r.timestamp, tower, towers.at(tower).area});
    }
    std::vector<Trajectory> out;
    out.reserve(by_user.size());
    for (auto& [user, visits] : by_user) {
        std::stable_sort(visits.begin(), visits.end(),
                         [](const Visit& a, const Visit& b) { return a.timestamp < b.timestamp; });
        out.push_back(Trajectory{user, std::move(visits)});
    }
    std::sort(out.begin(), out.end(), [](const Trajectory& a, const Trajectory& b) { return a.user_id < b.user_id; });
    return out;
}

HomeAssignment detect_home(const Trajectory& traj, const NightWindow& window)
{
    if (traj.visits.empty())
        throw std::invalid_argument("cannot detect home of an empty trajectory");

    std::map<int, std::int64_t> night_counts;
    for (const Visit& v : traj.visits)
        if (window.contains(v.timestamp))
            ++night_counts[v.area];

    const auto argmax = [](const std::map<int, std::int64_t>& counts) {
        int best              = -1;
        std::int64_t best_cnt = 0;
        for (const auto& [area, cnt] : counts) {
            if (cnt > best_cnt) { // map iterates areas ascending, so first max wins ties
                best     = area;
                best_cnt = cnt;
            }
        }
        return std::pair<int, std::int64_t>{best, best_cnt};
    };

    if (!night_counts.empty()) {
        const auto [area, cnt] = argmax(night_counts);
        return HomeAssignment{traj.user_id, area, cnt};
    }
    const auto [area, cnt] = argmax(traj.area_visit_counts());
    (void)cnt;
    return HomeAssignment{traj.user_id, area, 0};
}

std::vector<HomeAssignment> detect_homes(const std::vector<Trajectory>& trajectories, const NightWindow& window)
{
    std::vector<HomeAssignment> out;
    out.reserve(trajectories.size());
    for (const Trajectory& t : trajectories)
        out.push_back(detect_home(t, window));
    return out;
}

SplitResult split_by_period(const std::vector<CdrRecord>& records, Instant split_instant,
                            std::optional<std::pair<Instant, Instant>> window)
{
    Instant start, end;
    if (window) {
        start = window->first;
        end   = window->second;
    } else {
        if (records.empty())
            throw std::invalid_argument("cannot infer an observation window from zero records");
        start = end = records.front().timestamp;
        for (const CdrRecord& r : records) {
            start = std::min(start, r.timestamp);
            end   = std::max(end, r.timestamp);
        }
        end += 1; // half-open
    }
    if (split_instant < start || split_instant > end)
        throw std::invalid_argument("split instant " + format_iso8601(split_instant) +
                                    " outside the observation window [" + format_iso8601(start) + ", " +
                                    format_iso8601(end) + ")");
    SplitResult result;
    for (const CdrRecord& r : records) {
        if (r.timestamp < split_instant)
            result.training.push_back(r);
        else
            result.evaluation.push_back(r);
    }
    return result;
}

} // namespace epimob

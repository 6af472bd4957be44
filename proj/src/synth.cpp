#include "epimob/synth.hpp"

#include "epimob/io_util.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <stdexcept>

namespace epimob {

namespace {

std::string padded_id(char prefix, int index, int count)
{
    int width = 1;
    for (int v = count - 1; v >= 10; v /= 10)
        ++width;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%c%0*d", prefix, width, index);
    return buf;
}

std::mt19937_64 make_rng(std::uint64_t seed, std::uint32_t stream, std::uint32_t substream)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32), stream,
                      substream};
    return std::mt19937_64(seq);
}

} // namespace

void SynthConfig::validate() const
{
    if (users <= 0)
        throw std::invalid_argument("synthetic generator needs at least one user");
    if (areas <= 0)
        throw std::invalid_argument("synthetic generator needs at least one area");
    if (towers_per_area <= 0)
        throw std::invalid_argument("towers_per_area must be positive");
    if (window_end <= window_start)
        throw std::invalid_argument("observation window must be non-empty");
    if (mean_daily_events <= 0.0)
        throw std::invalid_argument("mean_daily_events must be positive");
    if (event_rate_sigma < 0.0)
        throw std::invalid_argument("event_rate_sigma must be non-negative");
    for (double p : {move_prob, explore_prob, return_home_bias, night_home_prob})
        if (p < 0.0 || p > 1.0)
            throw std::invalid_argument("probabilities must lie in [0, 1]");
    if (weekend_move_factor < 0.0)
        throw std::invalid_argument("weekend_move_factor must be non-negative");
    if (distance_decay < 0.0)
        throw std::invalid_argument("distance_decay must be non-negative");
    if (total_population <= 0)
        throw std::invalid_argument("total_population must be positive");
    if (lat_max <= lat_min || lon_max <= lon_min)
        throw std::invalid_argument("bounding box is degenerate");
}

SynthConfig SynthConfig::from_json_text(const std::string& text)
{
    const nlohmann::json j = nlohmann::json::parse(text);
    SynthConfig c;
    for (const auto& [key, value] : j.items()) {
        if (key == "users")
            c.users = value.get<int>();
        else if (key == "areas")
            c.areas = value.get<int>();
        else if (key == "towers_per_area")
            c.towers_per_area = value.get<int>();
        else if (key == "window_start" || key == "window_end") {
            const auto t = parse_iso8601(value.get<std::string>());
            if (!t)
                throw std::invalid_argument("bad timestamp for " + key + ": " + value.get<std::string>());
            (key == "window_start" ? c.window_start : c.window_end) = *t;
        } else if (key == "mean_daily_events")
            c.mean_daily_events = value.get<double>();
        else if (key == "event_rate_sigma")
            c.event_rate_sigma = value.get<double>();
        else if (key == "move_prob")
            c.move_prob = value.get<double>();
        else if (key == "weekend_move_factor")
            c.weekend_move_factor = value.get<double>();
        else if (key == "explore_prob")
            c.explore_prob = value.get<double>();
        else if (key == "return_home_bias")
            c.return_home_bias = value.get<double>();
        else if (key == "distance_decay")
            c.distance_decay = value.get<double>();
        else if (key == "night_home_prob")
            c.night_home_prob = value.get<double>();
        else if (key == "total_population")
            c.total_population = value.get<std::int64_t>();
        else if (key == "lat_min")
            c.lat_min = value.get<double>();
        else if (key == "lat_max")
            c.lat_max = value.get<double>();
        else if (key == "lon_min")
            c.lon_min = value.get<double>();
        else if (key == "lon_max")
            c.lon_max = value.get<double>();
        else
            throw std::invalid_argument("unknown generator config key: " + key);
    }
    c.validate();
    return c;
}

std::string SynthConfig::to_json_text() const
{
    nlohmann::json j;
    j["users"]               = users;
    j["areas"]               = areas;
    j["towers_per_area"]     = towers_per_area;
    j["window_start"]        = format_iso8601(window_start);
    j["window_end"]          = format_iso8601(window_end);
    j["mean_daily_events"]   = mean_daily_events;
    j["event_rate_sigma"]    = event_rate_sigma;
    j["move_prob"]           = move_prob;
    j["weekend_move_factor"] = weekend_move_factor;
    j["explore_prob"]        = explore_prob;
    j["return_home_bias"]    = return_home_bias;
    j["distance_decay"]      = distance_decay;
    j["night_home_prob"]     = night_home_prob;
    j["total_population"]    = total_population;
    j["lat_min"]             = lat_min;
    j["lat_max"]             = lat_max;
    j["lon_min"]             = lon_min;
    j["lon_max"]             = lon_max;
    return j.dump(2);
}

SynthOutput generate_synthetic_cdr(const SynthConfig& config, std::uint64_t seed)
{
    config.validate();
    const int n = config.areas;

    // Geography: random area centers, towers scattered around them,
    // log-normal population weights scaled to the configured total.
    auto geo_rng = make_rng(seed, 0xa7ea5u, 0);
    std::uniform_real_distribution<double> lat_dist(config.lat_min, config.lat_max);
    std::uniform_real_distribution<double> lon_dist(config.lon_min, config.lon_max);
    std::vector<LatLon> centers(static_cast<std::size_t>(n));
    for (auto& c : centers)
        c = LatLon{lat_dist(geo_rng), lon_dist(geo_rng)};

    std::lognormal_distribution<double> pop_weight(0.0, 1.0);
    std::vector<double> weights(static_cast<std::size_t>(n));
    double weight_sum = 0.0;
    for (double& w : weights) {
        w = pop_weight(geo_rng);
        weight_sum += w;
    }
    std::vector<Area> areas(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        areas[static_cast<std::size_t>(i)].area_id = padded_id('a', i, n);
        areas[static_cast<std::size_t>(i)].name    = "Zone " + padded_id('a', i, n).substr(1);
        areas[static_cast<std::size_t>(i)].base_population = std::max<std::int64_t>(
            1, std::llround(static_cast<double>(config.total_population) * weights[static_cast<std::size_t>(i)] /
                            weight_sum));
    }
    AreaRegistry area_reg = AreaRegistry::from_entries(areas);

    std::normal_distribution<double> scatter(0.0, 0.03);
    std::vector<Tower> towers;
    towers.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(config.towers_per_area));
    const int n_towers = n * config.towers_per_area;
    for (int i = 0; i < n; ++i) {
        const int area_index = area_reg.index_of(padded_id('a', i, n));
        for (int k = 0; k < config.towers_per_area; ++k) {
            Tower t;
            t.tower_id = padded_id('t', i * config.towers_per_area + k, n_towers);
            t.position = LatLon{std::clamp(centers[static_cast<std::size_t>(i)].lat + scatter(geo_rng), -90.0, 90.0),
                                std::clamp(centers[static_cast<std::size_t>(i)].lon + scatter(geo_rng), -180.0, 180.0)};
            t.area     = area_index;
            towers.push_back(std::move(t));
        }
    }
    TowerRegistry tower_reg = TowerRegistry::from_entries(std::move(towers));

    // Home areas sampled proportionally to population.
    std::vector<double> cum(static_cast<std::size_t>(n));
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        acc += static_cast<double>(area_reg.at(i).base_population);
        cum[static_cast<std::size_t>(i)] = acc;
    }

    const std::int64_t n_days = (config.window_end - config.window_start + 86399) / 86400;
    const NightWindow night;

    // Exploration destinations are drawn with a distance-decay kernel from
    // the current area; precomputing all n^2 kernels is fine at toy scales.
    std::vector<std::vector<double>> explore_cum(static_cast<std::size_t>(n),
                                                 std::vector<double>(static_cast<std::size_t>(n), 0.0));
    const std::vector<LatLon> centroids = tower_reg.area_centroids(n);
    for (int i = 0; i < n; ++i) {
        double total = 0.0;
        for (int j = 0; j < n; ++j) {
            if (j != i) {
                const double d = haversine_km(centroids[static_cast<std::size_t>(i)],
                                              centroids[static_cast<std::size_t>(j)]);
                total += std::pow(d + 1.0, -config.distance_decay);
            }
            explore_cum[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = total;
        }
    }

    SynthOutput out;
    out.areas  = std::move(area_reg);
    out.towers = std::move(tower_reg);
    out.true_homes.reserve(static_cast<std::size_t>(config.users));

    std::vector<std::vector<int>> towers_by_area(static_cast<std::size_t>(n));
    for (int t = 0; t < out.towers.size(); ++t)
        towers_by_area[static_cast<std::size_t>(out.towers.at(t).area)].push_back(t);

    const double mu_log = std::log(config.mean_daily_events) - 0.5 * config.event_rate_sigma * config.event_rate_sigma;

    for (int u = 0; u < config.users; ++u) {
        auto rng = make_rng(seed, 0x05e7u, static_cast<std::uint32_t>(u));
        std::uniform_real_distribution<double> unit(0.0, 1.0);

        const std::string user_id = padded_id('u', u, config.users);
        const double home_pick    = unit(rng) * acc;
        const int home            = static_cast<int>(std::lower_bound(cum.begin(), cum.end(), home_pick) - cum.begin());
        out.true_homes.push_back(HomeAssignment{user_id, home, 0});

        std::lognormal_distribution<double> rate_dist(mu_log, config.event_rate_sigma);
        const double daily_rate = rate_dist(rng);

        int current = home;
        std::map<int, std::int64_t> visit_counts;
        std::vector<CdrRecord> user_records;

        for (std::int64_t day = 0; day < n_days; ++day) {
            const Instant day_start = config.window_start + day * 86400;
            std::poisson_distribution<int> n_events_dist(daily_rate);
            int n_events = n_events_dist(rng);
            std::vector<Instant> times(static_cast<std::size_t>(n_events));
            std::uniform_int_distribution<std::int64_t> sec(0, 86399);
            for (auto& t : times)
                t = std::min(day_start + sec(rng), config.window_end - 1);
            std::sort(times.begin(), times.end());

            const bool weekend = day_class_of(day_start) == DayClass::weekend;
            const double p_move =
                std::min(1.0, config.move_prob * (weekend ? config.weekend_move_factor : 1.0));

            for (Instant ts : times) {
                if (night.contains(ts) && unit(rng) < config.night_home_prob) {
                    current = home;
                } else if (unit(rng) < p_move) {
                    if (n > 1 && unit(rng) < config.explore_prob) {
                        const auto& kern   = explore_cum[static_cast<std::size_t>(current)];
                        const double pick  = unit(rng) * kern.back();
                        const int dest     = static_cast<int>(
                            std::lower_bound(kern.begin(), kern.end(), pick) - kern.begin());
                        current = std::min(dest, n - 1);
                    } else if (unit(rng) < config.return_home_bias || visit_counts.empty()) {
                        current = home;
                    } else {
                        std::int64_t total = 0;
                        for (const auto& [_, c] : visit_counts)
                            total += c;
                        std::uniform_int_distribution<std::int64_t> pick(0, total - 1);
                        std::int64_t r = pick(rng);
                        for (const auto& [a, c] : visit_counts) {
                            if (r < c) {
                                current = a;
                                break;
                            }
                            r -= c;
                        }
                    }
                }
                ++visit_counts[current];

                const auto& area_towers = towers_by_area[static_cast<std::size_t>(current)];
                std::uniform_int_distribution<std::size_t> tpick(0, area_towers.size() - 1);
                const int tower = area_towers[tpick(rng)];

                CdrRecord rec;
                rec.caller_id = user_id;
                std::uniform_int_distribution<int> cpick(0, std::max(0, config.users - 2));
                int callee = cpick(rng);
                if (callee >= u)
                    ++callee; // skip self
                rec.callee_id = config.users > 1 ? padded_id('u', callee, config.users) : std::string{};
                rec.timestamp = ts;
                if (unit(rng) < 0.8) {
                    rec.kind = EventKind::call;
                    std::exponential_distribution<double> dur(1.0 / 90.0);
                    rec.duration_s = static_cast<std::int32_t>(1.0 + dur(rng));
                } else {
                    rec.kind       = EventKind::sms;
                    rec.duration_s = 0;
                }
                rec.tower_id = out.towers.at(tower).tower_id;
                user_records.push_back(std::move(rec));
            }
        }
        out.records.insert(out.records.end(), std::make_move_iterator(user_records.begin()),
                           std::make_move_iterator(user_records.end()));
    }

    std::stable_sort(out.records.begin(), out.records.end(),
                     [](const CdrRecord& a, const CdrRecord& b) { return a.timestamp < b.timestamp; });
    return out;
}

void write_synth_dataset(const SynthOutput& out, const std::string& dir)
{
    std::filesystem::create_directories(dir);
    const std::filesystem::path base(dir);
    out.areas.save_csv((base / "areas.csv").string());
    out.towers.save_csv((base / "towers.csv").string(), out.areas);
    write_cdr_csv((base / "cdr.csv").string(), out.records);

    std::string homes = "user_id,home_area\n";
    for (const HomeAssignment& h : out.true_homes)
        homes += h.user_id + "," + out.areas.id_of(h.home_area) + "\n";
    write_text_file((base / "homes_truth.csv").string(), homes);
}

} // namespace epimob

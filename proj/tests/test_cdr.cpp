#include "epimob/cdr.hpp"

#include "epimob/io_util.hpp"
#include "test_fixtures.hpp"

#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <random>

using namespace epimob;
using namespace epimob::testutil;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir()
    {
        path = std::filesystem::temp_directory_path() /
               ("epimob_test_" + std::to_string(std::random_device{}()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

constexpr const char* kCdrHeader = "caller_id,callee_id,timestamp,duration_s,kind,tower_id\n";

} // namespace

TEST_CASE("registry loading and validation")
{
    TempDir tmp;
    write_text_file(tmp.file("areas.csv"), "area_id,name,population\nb,B town,200\na,A town,100\n");
    const AreaRegistry areas = AreaRegistry::load_csv(tmp.file("areas.csv"));
    // Indexed in ascending id order regardless of file order.
    CHECK(areas.size() == 2);
    CHECK(areas.id_of(0) == "a");
    CHECK(areas.id_of(1) == "b");
    CHECK(areas.index_of("b") == 1);
    CHECK(areas.index_of("zzz") == -1);

    write_text_file(tmp.file("towers.csv"), "tower_id,lat,lon,area_id\nt0,5.5,-4.2,a\nt1,6.0,-5.0,b\n");
    const TowerRegistry towers = TowerRegistry::load_csv(tmp.file("towers.csv"), areas);
    CHECK(towers.size() == 2);
    CHECK(towers.at(towers.index_of("t1")).area == 1);

    write_text_file(tmp.file("bad_towers.csv"), "tower_id,lat,lon,area_id\nt0,95.0,-4.2,a\n");
    CHECK_THROWS(TowerRegistry::load_csv(tmp.file("bad_towers.csv"), areas));
    write_text_file(tmp.file("unknown_area.csv"), "tower_id,lat,lon,area_id\nt0,5.0,-4.2,nope\n");
    CHECK_THROWS(TowerRegistry::load_csv(tmp.file("unknown_area.csv"), areas));
    write_text_file(tmp.file("dup.csv"), "tower_id,lat,lon,area_id\nt0,5.0,-4.2,a\nt0,5.1,-4.1,b\n");
    CHECK_THROWS(TowerRegistry::load_csv(tmp.file("dup.csv"), areas));
}

TEST_CASE("cdr parsing")
{
    TempDir tmp;
    const AreaRegistry areas   = toy_areas();
    const TowerRegistry towers = toy_towers(areas);

    SUBCASE("well-formed file")
    {
        write_text_file(tmp.file("ok.csv"), std::string(kCdrHeader) +
                                                "u1,u2,2014-03-01T08:00:00Z,30,call,t0\n"
                                                "u1,u2,2014-03-01T09:00:00Z,0,sms,t1\n"
                                                "u2,u1,2014-03-01T10:00:00Z,120,call,t2\n");
        const CdrParseResult r = parse_cdr_file(tmp.file("ok.csv"), towers);
        CHECK(r.records.size() == 3);
        CHECK(r.rejected_rows == 0);
        CHECK(r.records[1].kind == EventKind::sms);
        CHECK(r.records[2].duration_s == 120);
    }

    SUBCASE("unknown tower is rejected and counted")
    {
        write_text_file(tmp.file("unk.csv"), std::string(kCdrHeader) +
                                                 "u1,u2,2014-03-01T08:00:00Z,30,call,t0\n"
                                                 "u1,u2,2014-03-01T09:00:00Z,30,call,t9\n");
        const CdrParseResult r = parse_cdr_file(tmp.file("unk.csv"), towers);
        CHECK(r.records.size() == 1);
        CHECK(r.rejected_rows == 1);
    }

    SUBCASE("rejection threshold")
    {
        std::string six_bad = kCdrHeader;
        for (int i = 0; i < 4; ++i)
            six_bad += "u1,u2,2014-03-01T08:00:00Z,30,call,t0\n";
        for (int i = 0; i < 6; ++i)
            six_bad += "u1,u2,not-a-time,30,call,t0\n";
        write_text_file(tmp.file("bad6.csv"), six_bad);
        CHECK_THROWS(parse_cdr_file(tmp.file("bad6.csv"), towers));

        // Exactly half rejected is still tolerated.
        std::string five_bad = kCdrHeader;
        for (int i = 0; i < 5; ++i)
            five_bad += "u1,u2,2014-03-01T08:00:00Z,30,call,t0\n";
        for (int i = 0; i < 5; ++i)
            five_bad += "u1,u2,not-a-time,30,call,t0\n";
        write_text_file(tmp.file("bad5.csv"), five_bad);
        const CdrParseResult r = parse_cdr_file(tmp.file("bad5.csv"), towers);
        CHECK(r.records.size() == 5);
        CHECK(r.rejected_rows == 5);
    }

    SUBCASE("missing file and wrong header")
    {
        CHECK_THROWS(parse_cdr_file(tmp.file("absent.csv"), towers));
        write_text_file(tmp.file("hdr.csv"), "wrong,header\n");
        CHECK_THROWS(parse_cdr_file(tmp.file("hdr.csv"), towers));
    }

    SUBCASE("write and reparse round-trips")
    {
        const std::vector<CdrRecord> records{rec("u1", "2014-03-01T08:00:00Z", "t0"),
                                             rec("u2", "2014-03-02T09:30:05Z", "t2")};
        write_cdr_csv(tmp.file("out.csv"), records);
        const CdrParseResult r = parse_cdr_file(tmp.file("out.csv"), towers);
        REQUIRE(r.records.size() == 2);
        CHECK(r.records[0].timestamp == records[0].timestamp);
        CHECK(r.records[1].tower_id == "t2");
    }
}

TEST_CASE("trajectory building")
{
    const AreaRegistry areas   = toy_areas();
    const TowerRegistry towers = toy_towers(areas);

    SUBCASE("single user A,B,A")
    {
        const std::vector<CdrRecord> records{rec("u1", "2014-03-01T08:00:00Z", "t0"),
                                             rec("u1", "2014-03-01T09:00:00Z", "t1"),
                                             rec("u1", "2014-03-01T10:00:00Z", "t0")};
        const auto trajs = build_trajectories(records, towers);
        REQUIRE(trajs.size() == 1);
        const auto counts = trajs[0].area_visit_counts();
        CHECK(trajs[0].visits.size() == 3);
        CHECK(counts.at(0) == 2);
        CHECK(counts.at(1) == 1);
        CHECK(trajs[0].total_visits() == 3);
        CHECK(trajs[0].visits[0].area == 0);
        CHECK(trajs[0].visits[1].area == 1);
        CHECK(trajs[0].visits[2].area == 0);
    }

    SUBCASE("two interleaved users come out sorted and separated")
    {
        const std::vector<CdrRecord> records{rec("u2", "2014-03-01T09:00:00Z", "t1"),
                                             rec("u1", "2014-03-01T10:00:00Z", "t0"),
                                             rec("u2", "2014-03-01T08:00:00Z", "t2"),
                                             rec("u1", "2014-03-01T07:00:00Z", "t1")};
        const auto trajs = build_trajectories(records, towers);
        REQUIRE(trajs.size() == 2);
        CHECK(trajs[0].user_id == "u1");
        CHECK(trajs[1].user_id == "u2");
        for (const Trajectory& t : trajs)
            CHECK(std::is_sorted(t.visits.begin(), t.visits.end(),
                                 [](const Visit& a, const Visit& b) { return a.timestamp < b.timestamp; }));
        CHECK(trajs[1].visits[0].area == 2);
        CHECK(trajs[1].visits[1].area == 1);
    }

    SUBCASE("simultaneous events keep input order")
    {
        const std::vector<CdrRecord> records{rec("u1", "2014-03-01T08:00:00Z", "t2"),
                                             rec("u1", "2014-03-01T08:00:00Z", "t1")};
        const auto trajs = build_trajectories(records, towers);
        REQUIRE(trajs.size() == 1);
        REQUIRE(trajs[0].visits.size() == 2);
        CHECK(trajs[0].visits[0].area == 2);
        CHECK(trajs[0].visits[1].area == 1);
    }

    SUBCASE("order-invariant for distinct timestamps")
    {
        std::mt19937_64 rng(7);
        std::vector<CdrRecord> records;
        for (int i = 0; i < 40; ++i) {
            CdrRecord r = rec(i % 2 ? "u1" : "u2", "2014-03-01T00:00:00Z", "t0");
            r.timestamp += i * 137; // all distinct
            r.tower_id = "t" + std::to_string(static_cast<int>(rng() % 3));
            records.push_back(r);
        }
        const auto baseline = build_trajectories(records, towers);
        for (int round = 0; round < 5; ++round) {
            std::shuffle(records.begin(), records.end(), rng);
            const auto shuffled = build_trajectories(records, towers);
            REQUIRE(shuffled.size() == baseline.size());
            for (std::size_t k = 0; k < baseline.size(); ++k) {
                CHECK(shuffled[k].user_id == baseline[k].user_id);
                REQUIRE(shuffled[k].visits.size() == baseline[k].visits.size());
                for (std::size_t v = 0; v < baseline[k].visits.size(); ++v) {
                    CHECK(shuffled[k].visits[v].timestamp == baseline[k].visits[v].timestamp);
                    CHECK(shuffled[k].visits[v].area == baseline[k].visits[v].area);
                }
            }
        }
    }

    SUBCASE("visit counts always sum to the total")
    {
        std::mt19937_64 rng(11);
        std::vector<CdrRecord> records;
        for (int i = 0; i < 200; ++i) {
            CdrRecord r = rec("u" + std::to_string(rng() % 5), "2014-03-01T00:00:00Z",
                              "t" + std::to_string(rng() % 3));
            r.timestamp += static_cast<Instant>(rng() % 100000);
            records.push_back(r);
        }
        for (const Trajectory& t : build_trajectories(records, towers)) {
            std::int64_t sum = 0;
            for (const auto& [_, n] : t.area_visit_counts())
                sum += n;
            CHECK(sum == t.total_visits());
        }
    }

    SUBCASE("empty input gives an empty collection")
    {
        CHECK(build_trajectories({}, towers).empty());
    }
}

TEST_CASE("home detection")
{
    const NightWindow night; // 19:00-07:00

    SUBCASE("unanimous night visits")
    {
        Trajectory t = traj("u1", {});
        for (int i = 0; i < 5; ++i)
            t.visits.push_back(Visit{*parse_iso8601("2014-03-01T22:00:00Z") + i * 60, 0, 0});
        const HomeAssignment h = detect_home(t, night);
        CHECK(h.home_area == 0);
        CHECK(h.night_visits == 5);
    }

    SUBCASE("majority of night visits wins")
    {
        Trajectory t = traj("u1", {});
        for (int i = 0; i < 3; ++i)
            t.visits.push_back(Visit{*parse_iso8601("2014-03-01T21:00:00Z") + i, 0, 0});
        for (int i = 0; i < 2; ++i)
            t.visits.push_back(Visit{*parse_iso8601("2014-03-01T23:00:00Z") + i, 1, 1});
        for (int i = 0; i < 10; ++i) // daytime visits to area 2 never count
            t.visits.push_back(Visit{*parse_iso8601("2014-03-02T12:00:00Z") + i, 2, 2});
        const HomeAssignment h = detect_home(t, night);
        CHECK(h.home_area == 0);
        CHECK(h.night_visits == 3);
    }

    SUBCASE("no night visits falls back to the overall majority")
    {
        Trajectory t = traj("u1", {});
        t.visits.push_back(Visit{*parse_iso8601("2014-03-01T10:00:00Z"), 0, 0});
        for (int i = 0; i < 3; ++i)
            t.visits.push_back(Visit{*parse_iso8601("2014-03-01T12:00:00Z") + i, 2, 2});
        const HomeAssignment h = detect_home(t, night);
        CHECK(h.home_area == 2);
        CHECK(h.night_visits == 0);
    }

    SUBCASE("night ties break to the lowest area index")
    {
        Trajectory t = traj("u1", {});
        t.visits.push_back(Visit{*parse_iso8601("2014-03-01T22:00:00Z"), 2, 2});
        t.visits.push_back(Visit{*parse_iso8601("2014-03-02T22:00:00Z"), 1, 1});
        CHECK(detect_home(t, night).home_area == 1);
    }

    SUBCASE("detected home never has fewer night visits than any other area")
    {
        std::mt19937_64 rng(3);
        for (int round = 0; round < 20; ++round) {
            Trajectory t = traj("u1", {});
            for (int i = 0; i < 30; ++i) {
                const int area = static_cast<int>(rng() % 4);
                t.visits.push_back(
                    Visit{*parse_iso8601("2014-03-01T00:00:00Z") + static_cast<Instant>(rng() % 864000), area, area});
            }
            const HomeAssignment h = detect_home(t, night);
            std::map<int, std::int64_t> night_counts;
            for (const Visit& v : t.visits)
                if (night.contains(v.timestamp))
                    ++night_counts[v.area];
            if (!night_counts.empty())
                for (const auto& [area, cnt] : night_counts)
                    CHECK(night_counts[h.home_area] >= cnt);
        }
    }

    SUBCASE("empty trajectory is an error")
    {
        CHECK_THROWS(detect_home(traj("u1", {}), night));
    }
}

TEST_CASE("train/eval split")
{
    std::vector<CdrRecord> records;
    for (int i = 0; i < 10; ++i) {
        CdrRecord r  = rec("u1", "2014-03-01T00:00:00Z", "t0");
        r.timestamp += i * 3600;
        records.push_back(r);
    }
    const Instant start = records.front().timestamp;
    const Instant end   = records.back().timestamp + 1;

    SUBCASE("split at window start")
    {
        const SplitResult s = split_by_period(records, start);
        CHECK(s.training.empty());
        CHECK(s.evaluation.size() == 10);
    }
    SUBCASE("split at window end")
    {
        const SplitResult s = split_by_period(records, end);
        CHECK(s.training.size() == 10);
        CHECK(s.evaluation.empty());
    }
    SUBCASE("interior split by hand count")
    {
        const SplitResult s = split_by_period(records, start + 4 * 3600);
        CHECK(s.training.size() == 4);
        CHECK(s.evaluation.size() == 6);
    }
    SUBCASE("split outside the window is an error")
    {
        CHECK_THROWS(split_by_period(records, start - 1));
        CHECK_THROWS(split_by_period(records, end + 1));
        CHECK_NOTHROW(split_by_period(records, start + 1, std::pair<Instant, Instant>{start, end}));
        CHECK_THROWS(split_by_period(records, end + 5, std::pair<Instant, Instant>{start, end}));
    }
}

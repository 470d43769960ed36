#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "transepi/feed.hpp"
#include "transepi/synthgen.hpp"

#include "helpers.hpp"

using namespace transepi;
using namespace testutil;

TEST_CASE("smallest runnable city") {
    CityParams p;
    p.n_stops = 2;
    p.n_routes = 1;
    p.trips_per_route = 1;
    p.n_persons = 1;
    p.commute_peaks = {{8.0 * 3600, 600.0}};
    SyntheticCity city = generate_city(p);
    CHECK(city.network.stops.size() == 2);
    CHECK(city.network.trips.size() == 1);
    CHECK(city.demand.requests.size() == 1);
}

TEST_CASE("infeasible parameters rejected") {
    CityParams p;
    p.n_stops = 1;
    CHECK_THROWS_AS(generate_city(p), InfeasibleParams);
    p = CityParams{};
    p.service_span = 60;
    CHECK_THROWS_AS(generate_city(p), InfeasibleParams);
    p = CityParams{};
    p.commute_peaks = {{2.0 * 3600, 600.0}};  // before service start
    CHECK_THROWS_AS(generate_city(p), InfeasibleParams);
}

TEST_CASE("same seed gives byte-identical files") {
    CityParams p;
    p.n_persons = 40;
    p.seed = 99;
    std::string dir1 = scratch_dir("synth_det_1");
    std::string dir2 = scratch_dir("synth_det_2");
    generate_city_files(p, dir1);
    generate_city_files(p, dir2);
    for (const char* name : {"stops.txt", "routes.txt", "trips.txt", "stop_times.txt",
                             "transfers.txt", "vehicles.txt", "demand.csv", "manifest.json"}) {
        CAPTURE(name);
        CHECK(read_file((std::filesystem::path(dir1) / name).string()) ==
              read_file((std::filesystem::path(dir2) / name).string()));
    }
}

TEST_CASE("different seeds change the demand") {
    CityParams p;
    p.seed = 1;
    std::string a = serialize_demand(generate_city(p).demand);
    p.seed = 2;
    std::string b = serialize_demand(generate_city(p).demand);
    CHECK(a != b);
}

TEST_CASE("generated feeds always parse and validate cleanly") {
    for (uint64_t seed : {3u, 17u, 90u}) {
        CityParams p;
        p.seed = seed;
        p.n_stops = 12 + int(seed % 30);
        p.n_routes = 6 + int(seed % 7);
        std::string dir = scratch_dir("synth_clean_" + std::to_string(seed));
        CityManifest m = generate_city_files(p, dir);
        TransitNetwork net = parse_transit_feed(dir);
        CHECK(validate_feed(net).clean());
        CHECK(net.trips.size() == m.n_trips);
    }
}

TEST_CASE("two commute peaks give a bimodal arrival histogram") {
    CityParams p;
    p.n_persons = 2000;
    p.commute_peaks = {{7.0 * 3600, 1800.0}, {17.0 * 3600, 1800.0}};
    SyntheticCity city = generate_city(p);

    // Hour histogram of preferred arrivals.
    std::vector<int> by_hour(30, 0);
    for (const auto& q : city.demand.requests) by_hour[size_t(q.preferred_arrival / 3600)]++;

    int at_7 = by_hour[7] + by_hour[6];
    int at_17 = by_hour[17] + by_hour[16];
    int at_12 = by_hour[12] + by_hour[11];
    CHECK(at_7 > 4 * std::max(1, at_12));
    CHECK(at_17 > 4 * std::max(1, at_12));
    // both peaks populated on the same order of magnitude
    CHECK(at_7 > 1000);
    CHECK(at_17 > 1000);
}

TEST_CASE("manifest counts equal parsed counts exactly") {
    CityParams p;
    p.n_stops = 30;
    p.n_routes = 11;
    p.trips_per_route = 7;
    p.n_persons = 123;
    std::string dir = scratch_dir("synth_manifest");
    CityManifest m = generate_city_files(p, dir);
    TransitNetwork net = parse_transit_feed(dir);
    DemandSet demand = parse_demand((std::filesystem::path(dir) / "demand.csv").string());
    CHECK(m.n_stops == net.stops.size());
    CHECK(m.n_routes == net.routes.size());
    CHECK(m.n_trips == net.trips.size());
    CHECK(m.n_transfers == net.transfers.size());
    CHECK(m.n_requests == demand.requests.size());
    CHECK(m.n_persons == demand.distinct_persons);
}

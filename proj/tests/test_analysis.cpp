#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "transepi/analysis.hpp"
#include "transepi/synthgen.hpp"

#include "helpers.hpp"

using namespace transepi;
using namespace testutil;

namespace {

// One trip per route, riders a/b on T1, c on T2 of the same route R2.
struct Fixture {
    TransitNetwork net;
    std::vector<Trajectory> trajectories;
    ContactNetwork contacts;
    InfectionEstimates estimates;

    explicit Fixture(std::vector<std::pair<std::string, double>> probs,
                     std::vector<std::pair<std::string, std::vector<std::string>>> rides) {
        NetBuilder b;
        b.trip("T1", "R1", 40, {{"A", 8 * 3600}, {"B", 8 * 3600 + 600}});
        b.trip("T2", "R2", 40, {{"A", 9 * 3600}, {"B", 9 * 3600 + 600}});
        b.trip("T3", "R2", 40, {{"A", 10 * 3600}, {"B", 10 * 3600 + 600}});
        net = b.build();

        for (auto& [person, trips] : rides) {
            Trajectory t;
            t.person_id = person;
            t.completed = true;
            for (const auto& trip_id : trips) {
                int trip = net.trip_index(trip_id);
                const auto& st = net.trips[size_t(trip)].stop_times;
                t.segments.push_back({uint32_t(trip), st[0].stop, st[1].stop, 0, 1,
                                      st[0].departure, st[1].arrival});
            }
            trajectories.push_back(std::move(t));
        }
        contacts = build_contact_network(trajectories);
        estimates.n_runs = 1000;
        estimates.infected_runs.assign(contacts.node_count(), 0);
        for (auto& [person, p] : probs) {
            int node = contacts.person_index(person);
            REQUIRE(node >= 0);
            estimates.infected_runs[size_t(node)] = uint64_t(p * 1000.0);
        }
    }
};

}  // namespace

TEST_CASE("trip risk: mean over distinct passengers") {
    Fixture f({{"a", 1.0}, {"b", 0.0}}, {{"a", {"T1"}}, {"b", {"T1"}}});
    auto risks = trip_risk_ranking(f.trajectories, f.net, f.contacts, f.estimates, 0, 1);
    REQUIRE(risks.size() == 1);
    CHECK(risks[0].trip_id == "T1");
    CHECK(risks[0].passenger_count == 2);
    CHECK(risks[0].mean_probability == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("trips below the passenger floor are excluded") {
    Fixture f({{"a", 1.0}, {"b", 0.0}, {"c", 0.8}},
              {{"a", {"T1"}}, {"b", {"T1"}}, {"c", {"T2"}}});
    auto risks = trip_risk_ranking(f.trajectories, f.net, f.contacts, f.estimates, 0, 2);
    REQUIRE(risks.size() == 1);  // T2 has a single rider
    CHECK(risks[0].trip_id == "T1");
}

TEST_CASE("ranking equals a brute-force recompute on a synthetic city") {
    CityParams cp;
    cp.n_persons = 200;
    cp.seed = 19;
    SyntheticCity city = generate_city(cp);
    auto result = simulate_loading(city.network, city.demand, {});
    auto contacts = build_contact_network(result.trajectories);
    auto weighted = weight_network(std::move(contacts), {0.163, 7200});
    EpiConfig cfg;
    cfg.n_seeds = 5;
    cfg.horizon = 5;
    cfg.n_runs = 200;
    cfg.master_seed = 3;
    auto est = run_epidemic(weighted, cfg);

    auto risks = trip_risk_ranking(result.trajectories, city.network, weighted.graph, est, 0, 1);

    // brute force: trip -> distinct persons -> mean, then check order
    std::map<std::string, std::set<std::string>> riders;
    for (const auto& t : result.trajectories)
        for (const auto& s : t.segments)
            riders[city.network.trips[s.trip].trip_id].insert(t.person_id);
    CHECK(risks.size() == riders.size());
    double last = 2.0;
    for (const auto& r : risks) {
        auto& persons = riders[r.trip_id];
        CHECK(r.passenger_count == persons.size());
        double total = 0;
        for (const auto& p : persons)
            total += est.probability(uint32_t(weighted.graph.person_index(p)));
        CHECK(r.mean_probability == doctest::Approx(total / double(persons.size())).epsilon(1e-12));
        CHECK(r.mean_probability <= last + 1e-15);
        last = r.mean_probability;
    }
}

TEST_CASE("route risk of a single-trip route equals the trip risk") {
    Fixture f({{"a", 0.9}, {"b", 0.3}}, {{"a", {"T1"}}, {"b", {"T1"}}});
    auto trips = trip_risk_ranking(f.trajectories, f.net, f.contacts, f.estimates, 0, 1);
    auto routes = route_risk_ranking(f.trajectories, f.net, f.contacts, f.estimates, 0, 1);
    REQUIRE(trips.size() == 1);
    REQUIRE(routes.size() == 1);
    CHECK(routes[0].route_id == "R1");
    CHECK(routes[0].passenger_count == trips[0].passenger_count);
    CHECK(routes[0].mean_probability == doctest::Approx(trips[0].mean_probability).epsilon(1e-15));
}

TEST_CASE("a passenger on two trips of one route is counted once") {
    Fixture f({{"a", 0.9}, {"b", 0.1}}, {{"a", {"T2", "T3"}}, {"b", {"T2"}}});
    auto routes = route_risk_ranking(f.trajectories, f.net, f.contacts, f.estimates, 0, 1);
    REQUIRE(routes.size() == 1);
    CHECK(routes[0].route_id == "R2");
    CHECK(routes[0].passenger_count == 2);
    CHECK(routes[0].mean_probability == doctest::Approx(0.5).epsilon(1e-12));

    // sensitivity variant: per trip incidence, a weighs twice
    auto per_incidence =
        route_risk_ranking(f.trajectories, f.net, f.contacts, f.estimates, 0, 1, true);
    REQUIRE(per_incidence.size() == 1);
    CHECK(per_incidence[0].passenger_count == 3);
    CHECK(per_incidence[0].mean_probability ==
          doctest::Approx((0.9 + 0.9 + 0.1) / 3.0).epsilon(1e-12));
}

TEST_CASE("rankings are invariant under monotone rescaling of probabilities") {
    Fixture f({{"a", 0.8}, {"b", 0.2}, {"c", 0.5}},
              {{"a", {"T1"}}, {"b", {"T2"}}, {"c", {"T3"}}});
    auto before = trip_risk_ranking(f.trajectories, f.net, f.contacts, f.estimates, 0, 1);
    InfectionEstimates scaled = f.estimates;
    for (auto& c : scaled.infected_runs) c = c / 2;  // halve every probability
    auto after = trip_risk_ranking(f.trajectories, f.net, f.contacts, scaled, 0, 1);
    REQUIRE(before.size() == after.size());
    for (size_t i = 0; i < before.size(); ++i) CHECK(before[i].trip_id == after[i].trip_id);
}

namespace {

ScenarioReport tiny_report(const std::string& id, double demand, double capacity,
                           std::vector<RouteRisk> routes) {
    ScenarioReport r;
    r.spec = {demand, capacity, id, 1};
    r.route_risks = std::move(routes);
    r.stranded = 10;
    r.endangered = 3;
    r.global_infection_rate = 0.25;
    return r;
}

}  // namespace

TEST_CASE("risk trend matrix") {
    NetBuilder b;
    b.trip("T1", "R1", 40, {{"A", 8 * 3600}, {"B", 8 * 3600 + 600}});
    b.trip("T2", "R2", 40, {{"A", 9 * 3600}, {"B", 9 * 3600 + 600}});
    TransitNetwork net = b.build();

    SUBCASE("single scenario, single route") {
        auto reports = std::vector<ScenarioReport>{
            tiny_report("only", 1.0, 1.0, {{"R1", 5, 0.42}})};
        auto m = risk_trend_matrix(reports, {"R1"}, net);
        REQUIRE(m.values.size() == 1);
        REQUIRE(m.values[0].size() == 1);
        CHECK(m.values[0][0].value() == doctest::Approx(0.42));
    }
    SUBCASE("a route absent from a scenario is missing, not zero") {
        std::vector<ScenarioReport> reports = {
            tiny_report("s1", 1.0, 1.0, {{"R1", 5, 0.42}, {"R2", 4, 0.3}}),
            tiny_report("s2", 0.5, 0.9, {{"R1", 5, 0.2}})};
        auto m = risk_trend_matrix(reports, {"R1", "R2"}, net);
        CHECK(m.values[1][0].has_value());
        CHECK(!m.values[1][1].has_value());
        std::string csv = serialize_trend_matrix(m, "");
        CHECK(csv.find("R2,0.3,\n") != std::string::npos);
    }
    SUBCASE("unknown route") {
        std::vector<ScenarioReport> reports = {tiny_report("s1", 1.0, 1.0, {})};
        CHECK_THROWS_AS(risk_trend_matrix(reports, {"R9"}, net), UnknownRoute);
    }
}

TEST_CASE("grid tables put demand in rows and capacity in columns") {
    std::vector<ScenarioReport> reports = {
        tiny_report("d100_c100", 1.0, 1.0, {}),
        tiny_report("d100_c090", 1.0, 0.9, {}),
        tiny_report("d050_c090", 0.5, 0.9, {}),
    };
    reports[1].stranded = 20;
    reports[2].stranded = 5;
    std::string csv = grid_table_csv(reports, "stranded", "");
    CHECK(csv.find("demand_keep,capacity_1.000,capacity_0.900\n") != std::string::npos);
    CHECK(csv.find("1.000,10,20\n") != std::string::npos);
    CHECK(csv.find("0.500,,5\n") != std::string::npos);  // no 0.5/1.0 cell
}

TEST_CASE("top-route risks decline when demand is cut, at every capacity level") {
    // Needs the default-sized city: on much smaller systems the epidemic is
    // seed-dominated and route-level risk stops responding to demand.
    CityParams cp;
    SyntheticCity city = generate_city(cp);
    PipelineConfig cfg;
    cfg.assignment.seed = 4;
    cfg.epi.n_seeds = 5;
    cfg.epi.n_runs = 2000;
    cfg.epi.master_seed = 12;

    GridResult grid =
        run_grid(make_grid({1.0, 0.5}, {0.9, 0.5}, 17), city.network, city.demand, cfg);
    REQUIRE(grid.failures.empty());

    auto cell = [&](double d, double c) -> const ScenarioReport& {
        for (const auto& r : grid.reports) {
            if (std::abs(r.spec.demand_keep - d) < 1e-9 &&
                std::abs(r.spec.capacity_fraction - c) < 1e-9)
                return r;
        }
        FAIL("missing cell");
        return grid.reports.front();
    };

    // rows: the ten riskiest baseline routes
    std::vector<std::string> top;
    for (const auto& rr : cell(1.0, 1.0).route_risks) {
        if (rr.passenger_count < 5) continue;
        top.push_back(rr.route_id);
        if (top.size() == 10) break;
    }
    REQUIRE(!top.empty());

    for (double c : {0.9, 0.5}) {
        auto m = risk_trend_matrix({cell(1.0, c), cell(0.5, c)}, top, city.network);
        for (size_t r = 0; r < top.size(); ++r) {
            CAPTURE(top[r]);
            CAPTURE(c);
            REQUIRE(m.values[r][0].has_value());
            REQUIRE(m.values[r][1].has_value());
            CHECK(*m.values[r][1] < *m.values[r][0]);
        }
    }
}

TEST_CASE("emit_reports writes a deterministic file set with stable hashes") {
    CityParams cp;
    cp.n_persons = 120;
    cp.seed = 4;
    SyntheticCity city = generate_city(cp);
    PipelineConfig cfg;
    cfg.assignment.seed = 2;
    cfg.epi.n_seeds = 3;
    cfg.epi.n_runs = 100;
    cfg.epi.master_seed = 6;

    GridResult grid = run_grid(make_grid({1.0, 0.5}, {0.9}, 11), city.network, city.demand, cfg);
    REQUIRE(grid.failures.empty());
    REQUIRE(grid.reports.size() == 3);

    std::string dir1 = scratch_dir("emit_1");
    std::string dir2 = scratch_dir("emit_2");
    auto m1 = emit_reports(grid.reports, city.network, dir1, "{\"run\":1}");
    auto m2 = emit_reports(grid.reports, city.network, dir2, "{\"run\":1}");
    CHECK(m1 == m2);

    for (const char* expected :
         {"config.json", "grid_stats.csv", "grid_stranded.csv", "grid_infection.csv",
          "grid_endangered.csv", "risk_trends.csv", "manifest.json",
          "scenarios/d100_c100/stats.json", "scenarios/d100_c100/infection_estimates.csv",
          "scenarios/d100_c100/trip_risk.csv", "scenarios/d100_c100/route_risk.csv",
          "scenarios/d100_c100/stranded.csv", "scenarios/d050_c090/stats.json"}) {
        CAPTURE(expected);
        CHECK(m1.count(expected) == 1);
        CHECK(std::filesystem::exists(std::filesystem::path(dir1) / expected));
    }
}

TEST_CASE("empty report list emits only the config echo and manifest") {
    std::string dir = scratch_dir("emit_empty");
    NetBuilder b;
    b.trip("T1", "R1", 40, {{"A", 8 * 3600}, {"B", 8 * 3600 + 600}});
    auto m = emit_reports({}, b.build(), dir, "{\"run\":2}");
    CHECK(m.size() == 2);
    CHECK(m.count("config.json") == 1);
    CHECK(m.count("manifest.json") == 1);
}

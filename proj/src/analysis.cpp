#include "transepi/analysis.hpp"

#include <algorithm>
#include <filesystem>
#include <set>

#include <json.hpp>

#include "transepi/csv.hpp"

namespace transepi {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// person -> node estimate, shared by both rankings.
double estimate_of(const ContactNetwork& contacts, const InfectionEstimates& estimates,
                   const std::string& person) {
    int node = contacts.person_index(person);
    if (node < 0)
        throw std::runtime_error("estimates do not cover trajectory person: " + person);
    return estimates.probability(uint32_t(node));
}

}  // namespace

std::vector<TripRisk> trip_risk_ranking(const std::vector<Trajectory>& trajectories,
                                        const TransitNetwork& net, const ContactNetwork& contacts,
                                        const InfectionEstimates& estimates, size_t top_n,
                                        size_t min_passengers) {
    // Distinct (trip, person) incidences.
    std::map<uint32_t, std::set<std::string>> riders;
    for (const auto& t : trajectories) {
        for (const auto& s : t.segments) riders[s.trip].insert(t.person_id);
    }
    std::vector<TripRisk> risks;
    for (const auto& [trip, persons] : riders) {
        if (persons.size() < min_passengers) continue;
        double total = 0.0;
        for (const auto& p : persons) total += estimate_of(contacts, estimates, p);
        risks.push_back({net.trips[trip].trip_id, persons.size(), total / double(persons.size())});
    }
    std::sort(risks.begin(), risks.end(), [](const TripRisk& a, const TripRisk& b) {
        if (a.mean_probability != b.mean_probability) return a.mean_probability > b.mean_probability;
        return a.trip_id < b.trip_id;
    });
    if (top_n > 0 && risks.size() > top_n) risks.resize(top_n);
    return risks;
}

std::vector<RouteRisk> route_risk_ranking(const std::vector<Trajectory>& trajectories,
                                          const TransitNetwork& net, const ContactNetwork& contacts,
                                          const InfectionEstimates& estimates, size_t top_n,
                                          size_t min_passengers, bool per_incidence) {
    std::map<uint32_t, std::vector<std::string>> riders;  // route -> rider incidences
    for (const auto& t : trajectories) {
        std::set<std::pair<uint32_t, uint32_t>> seen;  // (route, trip) pairs of this person
        for (const auto& s : t.segments) {
            uint32_t route = net.trips[s.trip].route;
            if (per_incidence) {
                if (seen.insert({route, s.trip}).second)
                    riders[route].push_back(t.person_id);
            } else {
                riders[route].push_back(t.person_id);
            }
        }
    }
    std::vector<RouteRisk> risks;
    for (auto& [route, persons] : riders) {
        if (!per_incidence) {
            std::sort(persons.begin(), persons.end());
            persons.erase(std::unique(persons.begin(), persons.end()), persons.end());
        }
        if (persons.size() < min_passengers) continue;
        double total = 0.0;
        for (const auto& p : persons) total += estimate_of(contacts, estimates, p);
        risks.push_back(
            {net.routes[route].route_id, persons.size(), total / double(persons.size())});
    }
    std::sort(risks.begin(), risks.end(), [](const RouteRisk& a, const RouteRisk& b) {
        if (a.mean_probability != b.mean_probability) return a.mean_probability > b.mean_probability;
        return a.route_id < b.route_id;
    });
    if (top_n > 0 && risks.size() > top_n) risks.resize(top_n);
    return risks;
}

RiskTrendMatrix risk_trend_matrix(const std::vector<ScenarioReport>& reports,
                                  const std::vector<std::string>& route_ids,
                                  const TransitNetwork& net) {
    RiskTrendMatrix m;
    m.route_ids = route_ids;
    for (const auto& id : route_ids) {
        if (net.route_index(id) < 0) throw UnknownRoute(id);
    }
    for (const auto& r : reports) m.scenario_ids.push_back(r.spec.scenario_id);
    m.values.assign(route_ids.size(), std::vector<std::optional<double>>(reports.size()));
    for (size_t c = 0; c < reports.size(); ++c) {
        for (size_t r = 0; r < route_ids.size(); ++r) {
            for (const auto& rr : reports[c].route_risks) {
                if (rr.route_id == route_ids[r]) {
                    m.values[r][c] = rr.mean_probability;
                    break;
                }
            }
        }
    }
    return m;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

std::string serialize_trip_risks(const std::vector<TripRisk>& risks,
                                 const std::string& config_echo) {
    CsvWriter w;
    if (!config_echo.empty()) w.comment("config " + config_echo);
    w.row({"trip_id", "passenger_count", "mean_infection_probability"});
    for (const auto& r : risks)
        w.row({r.trip_id, std::to_string(r.passenger_count), format_double(r.mean_probability)});
    return w.str();
}

std::string serialize_route_risks(const std::vector<RouteRisk>& risks,
                                  const std::string& config_echo) {
    CsvWriter w;
    if (!config_echo.empty()) w.comment("config " + config_echo);
    w.row({"route_id", "distinct_passenger_count", "mean_infection_probability"});
    for (const auto& r : risks)
        w.row({r.route_id, std::to_string(r.passenger_count), format_double(r.mean_probability)});
    return w.str();
}

std::string serialize_trend_matrix(const RiskTrendMatrix& m, const std::string& config_echo) {
    CsvWriter w;
    if (!config_echo.empty()) w.comment("config " + config_echo);
    std::vector<std::string> header{"route_id"};
    header.insert(header.end(), m.scenario_ids.begin(), m.scenario_ids.end());
    w.row(header);
    for (size_t r = 0; r < m.route_ids.size(); ++r) {
        std::vector<std::string> row{m.route_ids[r]};
        for (const auto& cell : m.values[r]) {
            row.push_back(cell ? format_double(*cell) : "");
        }
        w.row(row);
    }
    return w.str();
}

namespace {

std::string format_fraction(double f) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", f);
    return buf;
}

std::vector<double> sorted_levels(const std::vector<ScenarioReport>& reports,
                                  bool capacity_axis) {
    std::vector<double> levels;
    for (const auto& r : reports)
        levels.push_back(capacity_axis ? r.spec.capacity_fraction : r.spec.demand_keep);
    std::sort(levels.begin(), levels.end(), std::greater<>());
    levels.erase(std::unique(levels.begin(), levels.end(),
                             [](double a, double b) { return std::abs(a - b) < 1e-9; }),
                 levels.end());
    return levels;
}

const ScenarioReport* find_cell(const std::vector<ScenarioReport>& reports, double d, double c) {
    for (const auto& r : reports) {
        if (std::abs(r.spec.demand_keep - d) < 1e-9 &&
            std::abs(r.spec.capacity_fraction - c) < 1e-9)
            return &r;
    }
    return nullptr;
}

}  // namespace

std::string grid_table_csv(const std::vector<ScenarioReport>& reports,
                           const std::string& value_name, const std::string& config_echo) {
    auto demand_levels = sorted_levels(reports, false);
    auto capacity_levels = sorted_levels(reports, true);

    CsvWriter w;
    if (!config_echo.empty()) w.comment("config " + config_echo);
    std::vector<std::string> header{"demand_keep"};
    for (double c : capacity_levels) header.push_back("capacity_" + format_fraction(c));
    w.row(header);
    for (double d : demand_levels) {
        std::vector<std::string> row{format_fraction(d)};
        for (double c : capacity_levels) {
            const ScenarioReport* cell = find_cell(reports, d, c);
            if (!cell) {
                row.push_back("");
            } else if (value_name == "stranded") {
                row.push_back(std::to_string(cell->stranded));
            } else if (value_name == "endangered") {
                row.push_back(std::to_string(cell->endangered));
            } else {
                row.push_back(format_double(cell->global_infection_rate));
            }
        }
        w.row(row);
    }
    return w.str();
}

std::string grid_stats_csv(const std::vector<ScenarioReport>& reports,
                           const std::string& config_echo) {
    CsvWriter w;
    if (!config_echo.empty()) w.comment("config " + config_echo);
    w.row({"demand_keep", "capacity_fraction", "max_degree", "median_degree", "mean_degree",
           "max_clique", "median_clique", "mean_clique", "nodes", "edges"});
    for (const auto& r : reports) {
        w.row({format_fraction(r.spec.demand_keep), format_fraction(r.spec.capacity_fraction),
               std::to_string(r.stats.max_degree), format_double(r.stats.median_degree),
               format_double(r.stats.mean_degree), std::to_string(r.stats.max_clique),
               format_double(r.stats.median_clique), format_double(r.stats.mean_clique),
               std::to_string(r.stats.nodes), std::to_string(r.stats.edges)});
    }
    return w.str();
}

// ---------------------------------------------------------------------------
// Emission
// ---------------------------------------------------------------------------

namespace {

json stats_json(const ScenarioReport& r, const std::string& config_echo) {
    json j;
    j["scenario"] = {{"id", r.spec.scenario_id},
                     {"demand_keep", r.spec.demand_keep},
                     {"capacity_fraction", r.spec.capacity_fraction},
                     {"seed", r.spec.seed}};
    j["p_max"] = r.p_max;
    j["network"] = {{"nodes", r.stats.nodes},
                    {"edges", r.stats.edges},
                    {"max_degree", r.stats.max_degree},
                    {"median_degree", r.stats.median_degree},
                    {"mean_degree", r.stats.mean_degree},
                    {"max_clique", r.stats.max_clique},
                    {"median_clique", r.stats.median_clique},
                    {"mean_clique", r.stats.mean_clique}};
    j["requests"] = r.requests;
    j["stranded"] = r.stranded;
    j["global_infection_rate"] = r.global_infection_rate;
    j["endangered"] = r.endangered;
    if (!config_echo.empty()) j["config"] = json::parse(config_echo);
    return j;
}

}  // namespace

std::map<std::string, std::string> emit_reports(const std::vector<ScenarioReport>& reports,
                                                const TransitNetwork& net,
                                                const std::string& out_dir,
                                                const std::string& config_echo,
                                                const ReportOptions& options) {
    fs::create_directories(out_dir);
    std::map<std::string, std::string> manifest;

    auto emit = [&](const std::string& rel, const std::string& content) {
        fs::path path = fs::path(out_dir) / rel;
        fs::create_directories(path.parent_path());
        write_file(path.string(), content);
        manifest[rel] = "fnv1a64:" + to_hex(fnv1a64(content.data(), content.size()));
    };

    emit("config.json", config_echo.empty() ? "{}\n" : config_echo + "\n");

    for (const auto& r : reports) {
        std::string dir = "scenarios/" + r.spec.scenario_id + "/";
        emit(dir + "stats.json", stats_json(r, config_echo).dump(2) + "\n");
        {
            CsvWriter w;
            if (!config_echo.empty()) w.comment("config " + config_echo);
            w.row({"person_id", "probability"});
            for (size_t i = 0; i < r.persons.size(); ++i)
                w.row({r.persons[i], format_double(r.estimates[i])});
            emit(dir + "infection_estimates.csv", w.str());
        }
        emit(dir + "stranded.csv", serialize_stranded(r.stranded_persons, config_echo));
        {
            auto filtered = r.trip_risks;
            std::erase_if(filtered, [&](const TripRisk& t) {
                return t.passenger_count < options.min_passengers;
            });
            if (filtered.size() > options.top_trips) filtered.resize(options.top_trips);
            emit(dir + "trip_risk.csv", serialize_trip_risks(filtered, config_echo));
        }
        {
            auto filtered = r.route_risks;
            std::erase_if(filtered, [&](const RouteRisk& t) {
                return t.passenger_count < options.min_passengers;
            });
            if (filtered.size() > options.top_routes) filtered.resize(options.top_routes);
            emit(dir + "route_risk.csv", serialize_route_risks(filtered, config_echo));
        }
    }

    if (!reports.empty()) {
        emit("grid_stats.csv", grid_stats_csv(reports, config_echo));
        emit("grid_stranded.csv", grid_table_csv(reports, "stranded", config_echo));
        emit("grid_infection.csv", grid_table_csv(reports, "infection", config_echo));
        emit("grid_endangered.csv", grid_table_csv(reports, "endangered", config_echo));

        // Trend rows: the top routes of the baseline (or first) report.
        const ScenarioReport* baseline = find_cell(reports, 1.0, 1.0);
        if (!baseline) baseline = &reports.front();
        std::vector<std::string> top_routes;
        for (const auto& rr : baseline->route_risks) {
            if (rr.passenger_count < options.min_passengers) continue;
            top_routes.push_back(rr.route_id);
            if (top_routes.size() >= options.top_routes) break;
        }
        RiskTrendMatrix trend = risk_trend_matrix(reports, top_routes, net);
        emit("risk_trends.csv", serialize_trend_matrix(trend, config_echo));
    }

    emit("manifest.json", manifest_json(manifest, config_echo));
    return manifest;
}

std::string manifest_json(const std::map<std::string, std::string>& files,
                          const std::string& config_echo) {
    json j;
    j["files"] = json::object();
    for (const auto& [path, hash] : files) j["files"][path] = hash;
    if (!config_echo.empty()) j["config"] = json::parse(config_echo);
    return j.dump(2) + "\n";
}

}  // namespace transepi

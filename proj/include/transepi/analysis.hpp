#ifndef TRANSEPI_ANALYSIS_HPP
#define TRANSEPI_ANALYSIS_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "transepi/scenario.hpp"

namespace transepi {

struct UnknownRoute : std::runtime_error {
    explicit UnknownRoute(const std::string& id) : std::runtime_error("unknown route: " + id) {}
};

// Mean infection probability over the distinct passengers whose trajectories
// used each vehicle trip. Trips carrying fewer than min_passengers are
// dropped; ranked by descending mean, trip id breaking ties; truncated to
// top_n when top_n > 0.
std::vector<TripRisk> trip_risk_ranking(const std::vector<Trajectory>& trajectories,
                                        const TransitNetwork& net, const ContactNetwork& contacts,
                                        const InfectionEstimates& estimates, size_t top_n,
                                        size_t min_passengers);

// Same metric aggregated per route. A passenger using several trips of one
// route is counted once; with per_incidence they contribute once per used
// trip instead (sensitivity variant).
std::vector<RouteRisk> route_risk_ranking(const std::vector<Trajectory>& trajectories,
                                          const TransitNetwork& net, const ContactNetwork& contacts,
                                          const InfectionEstimates& estimates, size_t top_n,
                                          size_t min_passengers, bool per_incidence = false);

// Route x scenario matrix of mean infection probabilities. A route with no
// passengers in a scenario yields an empty cell, not zero.
struct RiskTrendMatrix {
    std::vector<std::string> route_ids;                            // rows
    std::vector<std::string> scenario_ids;                         // columns
    std::vector<std::vector<std::optional<double>>> values;        // [route][scenario]
};

RiskTrendMatrix risk_trend_matrix(const std::vector<ScenarioReport>& reports,
                                  const std::vector<std::string>& route_ids,
                                  const TransitNetwork& net);

std::string serialize_trip_risks(const std::vector<TripRisk>& risks,
                                 const std::string& config_echo);
std::string serialize_route_risks(const std::vector<RouteRisk>& risks,
                                  const std::string& config_echo);
std::string serialize_trend_matrix(const RiskTrendMatrix& m, const std::string& config_echo);

// Grid tables shaped with demand levels as rows and capacity levels as
// columns; cells outside the grid (reduced demand at full capacity) are empty.
std::string grid_table_csv(const std::vector<ScenarioReport>& reports,
                           const std::string& value_name, const std::string& config_echo);
std::string grid_stats_csv(const std::vector<ScenarioReport>& reports,
                           const std::string& config_echo);

// Writes every report artifact under out_dir and returns the manifest:
// relative path -> fnv1a64 content hash. Deterministic for identical input.
struct ReportOptions {
    size_t top_trips = 100;
    size_t top_routes = 10;
    size_t min_passengers = 5;
};

std::map<std::string, std::string> emit_reports(const std::vector<ScenarioReport>& reports,
                                                const TransitNetwork& net,
                                                const std::string& out_dir,
                                                const std::string& config_echo,
                                                const ReportOptions& options = {});

std::string manifest_json(const std::map<std::string, std::string>& files,
                          const std::string& config_echo);

}  // namespace transepi

#endif

#ifndef TRANSEPI_SCENARIO_HPP
#define TRANSEPI_SCENARIO_HPP

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "transepi/assignment.hpp"
#include "transepi/contact.hpp"
#include "transepi/epidemic.hpp"
#include "transepi/feed.hpp"

namespace transepi {

struct UnmappedCapacityFraction : std::runtime_error {
    explicit UnmappedCapacityFraction(double f)
        : std::runtime_error("no p_max mapping for capacity fraction " + std::to_string(f) +
                             "; mapped fractions are 1.0 0.9 0.8 0.7 0.5 "
                             "(enable interpolation to cover other values)") {}
};

struct ScenarioSpec {
    double demand_keep = 1.0;        // fraction of persons retained
    double capacity_fraction = 1.0;  // fraction of every vehicle capacity
    std::string scenario_id;
    uint64_t seed = 1;               // demand sampling seed
};

struct RouteRisk {
    std::string route_id;
    size_t passenger_count = 0;       // distinct passengers over all the route's trips
    double mean_probability = 0.0;
};

struct TripRisk {
    std::string trip_id;
    size_t passenger_count = 0;
    double mean_probability = 0.0;
};

struct ScenarioReport {
    ScenarioSpec spec;
    double p_max = 0.0;
    NetworkStats stats;
    size_t stranded = 0;
    size_t requests = 0;
    double global_infection_rate = 0.0;
    size_t endangered = 0;
    // Full per-entity risk tables (unfiltered); rankings truncate these.
    std::vector<RouteRisk> route_risks;
    std::vector<TripRisk> trip_risks;
    // Per-node estimates for emission.
    std::vector<std::string> persons;
    std::vector<double> estimates;
    std::vector<StrandedPerson> stranded_persons;
};

// Uniformly retains floor(keep_fraction * persons) whole persons, dropping
// every request of the others. The same seed yields nested subsets across
// fractions, which keeps scenario comparisons paired.
DemandSet reduce_demand(const DemandSet& demand, double keep_fraction, uint64_t seed);

// capacity <- max(1, floor(capacity * fraction)) on every trip.
TransitNetwork scale_capacities(const TransitNetwork& net, double fraction);

// Exact table mapping capacity fraction -> maximum transmission probability;
// only 1.0, 0.9, 0.8, 0.7, 0.5 are defined. No interpolation.
double pmax_for_capacity(double capacity_fraction);

// Piecewise-linear extension over [0.5, 1.0]; an explicit opt-in, since the
// table values come from an external epidemiological model.
double pmax_for_capacity_interpolated(double capacity_fraction);

struct PipelineConfig {
    AssignmentParams assignment;
    EpiConfig epi;
    Seconds d_max = 7200;
    bool interpolate_pmax = false;
    bool simple_graph = false;
    int min_passengers = 5;  // risk-ranking floor
};

// base_plans, when given, are preference lists planned on (base_network,
// base_demand); they stay valid for every capacity variant because planning
// reads only the timetable. The grid runner shares one plan across cells.
ScenarioReport run_scenario(const ScenarioSpec& spec, const TransitNetwork& base_network,
                            const DemandSet& base_demand, const PipelineConfig& config,
                            const PreferenceLists* base_plans = nullptr);

// The demand x capacity grid: every demand fraction paired with every
// reduced-capacity fraction, plus the unreduced baseline.
std::vector<ScenarioSpec> make_grid(const std::vector<double>& demand_fractions,
                                    const std::vector<double>& capacity_fractions, uint64_t seed);

struct ScenarioFailure {
    std::string scenario_id;
    std::string error;
};

struct GridResult {
    std::vector<ScenarioReport> reports;
    std::vector<ScenarioFailure> failures;
};

// Runs every scenario; a failing cell is recorded and the rest still run.
GridResult run_grid(const std::vector<ScenarioSpec>& specs, const TransitNetwork& base_network,
                    const DemandSet& base_demand, const PipelineConfig& config);

std::string scenario_label(const ScenarioSpec& spec);

}  // namespace transepi

#endif

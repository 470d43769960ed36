#include "transepi/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "transepi/analysis.hpp"
#include "transepi/rng.hpp"

namespace transepi {

DemandSet reduce_demand(const DemandSet& demand, double keep_fraction, uint64_t seed) {
    if (keep_fraction >= 1.0) return demand;

    std::vector<std::string> persons;
    persons.reserve(demand.requests.size());
    for (const auto& q : demand.requests) persons.push_back(q.person_id);
    std::sort(persons.begin(), persons.end());
    persons.erase(std::unique(persons.begin(), persons.end()), persons.end());

    // floor with a small nudge so 0.59 * 100 lands on 59 despite the binary
    // representation of the fraction.
    size_t keep = size_t(std::floor(keep_fraction * double(persons.size()) + 1e-9));

    // Fisher-Yates, then take the prefix: the permutation does not depend on
    // keep_fraction, so lower fractions select nested subsets.
    RandomStream stream(derive_seed(seed, 0xdecade));
    for (size_t i = persons.size(); i > 1; --i) {
        size_t j = size_t(stream.next_below(i));
        std::swap(persons[i - 1], persons[j]);
    }
    persons.resize(keep);
    std::sort(persons.begin(), persons.end());

    DemandSet out;
    for (const auto& q : demand.requests) {
        if (std::binary_search(persons.begin(), persons.end(), q.person_id))
            out.requests.push_back(q);
    }
    out.distinct_persons = keep;
    return out;
}

TransitNetwork scale_capacities(const TransitNetwork& net, double fraction) {
    if (fraction >= 1.0) return net;
    TransitNetwork out = net;
    for (auto& t : out.trips) {
        int scaled = int(std::floor(double(t.capacity) * fraction + 1e-9));
        t.capacity = std::max(1, scaled);
    }
    out.build_index();
    return out;
}

namespace {

// Capacity fraction -> P_max. Derived from per-vehicle reproductive-number
// estimates for a 48-seat bus; fixed constants, not a fitted curve.
constexpr struct {
    double fraction;
    double p_max;
} kPmaxTable[] = {
    {1.0, 0.163}, {0.9, 0.160}, {0.8, 0.158}, {0.7, 0.156}, {0.5, 0.140},
};

}  // namespace

double pmax_for_capacity(double capacity_fraction) {
    for (const auto& row : kPmaxTable) {
        if (std::abs(capacity_fraction - row.fraction) < 1e-9) return row.p_max;
    }
    throw UnmappedCapacityFraction(capacity_fraction);
}

double pmax_for_capacity_interpolated(double capacity_fraction) {
    if (capacity_fraction < 0.5 - 1e-9 || capacity_fraction > 1.0 + 1e-9)
        throw UnmappedCapacityFraction(capacity_fraction);
    double f = std::clamp(capacity_fraction, 0.5, 1.0);
    for (size_t i = 0; i + 1 < std::size(kPmaxTable); ++i) {
        double hi = kPmaxTable[i].fraction, lo = kPmaxTable[i + 1].fraction;
        if (f <= hi + 1e-12 && f >= lo - 1e-12) {
            double t = (f - lo) / (hi - lo);
            return kPmaxTable[i + 1].p_max + t * (kPmaxTable[i].p_max - kPmaxTable[i + 1].p_max);
        }
    }
    throw UnmappedCapacityFraction(capacity_fraction);
}

std::string scenario_label(const ScenarioSpec& spec) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "d%03d_c%03d", int(std::lround(spec.demand_keep * 100)),
                  int(std::lround(spec.capacity_fraction * 100)));
    return buf;
}

namespace {

// Preference lists for a demand subset, pulled out of the plans computed on
// the base demand. The subset preserves base order, so a two-pointer walk
// matches each request to its original slot.
PreferenceLists subset_preferences(const DemandSet& base, const PreferenceLists& base_plans,
                                   const DemandSet& subset) {
    PreferenceLists out(subset.requests.size());
    size_t bi = 0;
    for (size_t i = 0; i < subset.requests.size(); ++i) {
        const TripRequest& q = subset.requests[i];
        while (bi < base.requests.size()) {
            const TripRequest& b = base.requests[bi];
            if (b.person_id == q.person_id && b.origin_stop == q.origin_stop &&
                b.destination_stop == q.destination_stop &&
                b.preferred_arrival == q.preferred_arrival)
                break;
            ++bi;
        }
        if (bi >= base.requests.size())
            throw std::runtime_error("demand subset request not found in base demand");
        out[i] = base_plans[bi];
        ++bi;
    }
    return out;
}

}  // namespace

ScenarioReport run_scenario(const ScenarioSpec& spec, const TransitNetwork& base_network,
                            const DemandSet& base_demand, const PipelineConfig& config,
                            const PreferenceLists* base_plans) {
    ScenarioReport report;
    report.spec = spec;
    report.p_max = config.interpolate_pmax ? pmax_for_capacity_interpolated(spec.capacity_fraction)
                                           : pmax_for_capacity(spec.capacity_fraction);

    TransitNetwork net = scale_capacities(base_network, spec.capacity_fraction);
    DemandSet demand = reduce_demand(base_demand, spec.demand_keep, spec.seed);
    report.requests = demand.requests.size();

    AssignmentResult assignment =
        base_plans ? load_with_preferences(
                         net, demand, subset_preferences(base_demand, *base_plans, demand))
                   : simulate_loading(net, demand, config.assignment);
    report.stranded = stranded_count(assignment);
    report.stranded_persons = assignment.stranded;

    ContactNetwork contact = build_contact_network(assignment.trajectories, config.simple_graph);
    auto cliques = segment_clique_sizes(assignment.trajectories, net);
    report.stats = network_stats(contact, cliques);

    WeightedContactNetwork weighted =
        weight_network(std::move(contact), {report.p_max, config.d_max});
    InfectionEstimates estimates = run_epidemic(weighted, config.epi);
    report.global_infection_rate = global_infection_rate(estimates);
    report.endangered = endangered_count(estimates, 0.5);

    report.persons = weighted.graph.persons();
    report.estimates = estimates.probabilities();

    // Unfiltered risk tables; rankings and trend matrices derive from these.
    report.trip_risks =
        trip_risk_ranking(assignment.trajectories, net, weighted.graph, estimates,
                          /*top_n=*/0, /*min_passengers=*/1);
    report.route_risks =
        route_risk_ranking(assignment.trajectories, net, weighted.graph, estimates,
                           /*top_n=*/0, /*min_passengers=*/1);
    return report;
}

std::vector<ScenarioSpec> make_grid(const std::vector<double>& demand_fractions,
                                    const std::vector<double>& capacity_fractions, uint64_t seed) {
    std::vector<ScenarioSpec> specs;
    ScenarioSpec baseline{1.0, 1.0, "", seed};
    baseline.scenario_id = scenario_label(baseline);
    specs.push_back(baseline);
    for (double d : demand_fractions) {
        for (double c : capacity_fractions) {
            if (d >= 1.0 - 1e-12 && c >= 1.0 - 1e-12) continue;  // that's the baseline
            ScenarioSpec s{d, c, "", seed};
            s.scenario_id = scenario_label(s);
            specs.push_back(s);
        }
    }
    return specs;
}

GridResult run_grid(const std::vector<ScenarioSpec>& specs, const TransitNetwork& base_network,
                    const DemandSet& base_demand, const PipelineConfig& config) {
    GridResult result;
    PreferenceLists plans = plan_preferences(base_network, base_demand, config.assignment);
    for (const auto& spec : specs) {
        try {
            result.reports.push_back(run_scenario(spec, base_network, base_demand, config, &plans));
        } catch (const std::exception& e) {
            result.failures.push_back({spec.scenario_id, e.what()});
        }
    }
    return result;
}

}  // namespace transepi

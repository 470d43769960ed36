#ifndef TRANSEPI_EPIDEMIC_HPP
#define TRANSEPI_EPIDEMIC_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "transepi/contact.hpp"

namespace transepi {

struct SeedCountExceedsNodes : std::runtime_error {
    SeedCountExceedsNodes(size_t seeds, size_t nodes)
        : std::runtime_error("seed count " + std::to_string(seeds) + " exceeds node count " +
                             std::to_string(nodes)) {}
};

struct TransmissionParams {
    double p_max = 0.163;      // cap on the per-contact transmission probability
    Seconds d_max = 7200;      // contact duration at which the cap is reached
};

// w = min(p_max, p_max / d_max * duration)
double edge_probability(Seconds duration, const TransmissionParams& params);

struct WeightedContactNetwork {
    ContactNetwork graph;
    std::vector<double> weights;     // one per edge
    std::vector<uint64_t> edge_keys; // stable draw identity per edge
    TransmissionParams params;

    // Incidence entries with the weight and draw key packed next to the
    // neighbor, mirroring graph.adjacency_offsets(). The simulation streams
    // these instead of chasing per-edge arrays.
    struct IncidentContact {
        uint32_t neighbor;
        float weight;
        uint64_t key;
    };
    std::vector<IncidentContact> incidence;

    std::span<const IncidentContact> incident(uint32_t node) const {
        const auto& offsets = graph.adjacency_offsets();
        return {incidence.data() + offsets[node], offsets[node + 1] - offsets[node]};
    }
};

WeightedContactNetwork weight_network(ContactNetwork net, const TransmissionParams& params);

struct EpiConfig {
    int n_seeds = 100;          // initially infected passengers per run
    int horizon = 5;            // iterations (one iteration = one day)
    int infectious_period = 5;  // iterations a node stays infectious
    int n_runs = 100000;
    uint64_t master_seed = 1;
    int threads = 0;            // 0 = hardware concurrency
    std::vector<std::string> fixed_seed_persons;  // overrides random seeding
};

struct InfectionEstimates {
    std::vector<uint64_t> infected_runs;  // per node
    uint64_t n_runs = 0;
    double probability(uint32_t node) const {
        return double(infected_runs[node]) / double(n_runs);
    }
    std::vector<double> probabilities() const;
};

// Discrete-time Monte Carlo over the weighted contact network. Each run
// seeds n_seeds distinct nodes uniformly at random (or the fixed set), then
// iterates: every infectious node attempts each incident edge; a susceptible
// endpoint becomes infected with the edge weight and turns infectious the
// next iteration; a node stays infectious for infectious_period iterations.
// Every random draw is keyed by (master_seed, run, iteration, edge), so
// results are bit-identical for any thread count and attempt order.
InfectionEstimates run_epidemic(const WeightedContactNetwork& wnet, const EpiConfig& config);

// Mean per-node infection probability (expected infected share of nodes).
double global_infection_rate(const InfectionEstimates& est);

// Nodes whose estimate strictly exceeds the threshold.
size_t endangered_count(const InfectionEstimates& est, double threshold = 0.5);

std::string serialize_estimates(const ContactNetwork& net, const InfectionEstimates& est,
                                const std::string& config_echo);

}  // namespace transepi

#endif

#ifndef TRANSEPI_CONTACT_HPP
#define TRANSEPI_CONTACT_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "transepi/assignment.hpp"
#include "transepi/feed.hpp"

namespace transepi {

struct DifferentTrips : std::runtime_error {
    DifferentTrips() : std::runtime_error("segments ride different vehicle trips") {}
};

// One co-travel contact: two passengers on the same vehicle trip for a
// strictly positive time. Node order is canonical (u < v); parallel edges
// across distinct trips are kept, so the structure is a multigraph.
struct ContactEdge {
    uint32_t u = 0;
    uint32_t v = 0;
    uint32_t trip = 0;
    Seconds t_start = 0;
    Seconds t_end = 0;
    Seconds duration() const { return t_end - t_start; }
};

class ContactNetwork {
public:
    // Node ids are dense indices into persons(), which is sorted by person id.
    const std::vector<std::string>& persons() const { return persons_; }
    const std::vector<ContactEdge>& edges() const { return edges_; }
    size_t node_count() const { return persons_.size(); }
    size_t edge_count() const { return edges_.size(); }

    // Incident (neighbor, edge index) pairs; parallel edges appear once each.
    std::span<const std::pair<uint32_t, uint32_t>> incident(uint32_t node) const {
        return {adjacency_.data() + offsets_[node], offsets_[node + 1] - offsets_[node]};
    }

    size_t degree(uint32_t node) const { return offsets_[node + 1] - offsets_[node]; }

    // Adjacency slice boundaries, for structures mirroring the incidence
    // layout (the weighted network keeps a packed copy for the hot loop).
    const std::vector<size_t>& adjacency_offsets() const { return offsets_; }

    int person_index(const std::string& id) const;

    // Builds the frozen adjacency index; called by the builders.
    void freeze(std::vector<std::string> persons, std::vector<ContactEdge> edges);

private:
    std::vector<std::string> persons_;
    std::vector<ContactEdge> edges_;  // sorted by (trip, u, v, t_start, t_end)
    std::vector<size_t> offsets_;
    std::vector<std::pair<uint32_t, uint32_t>> adjacency_;
};

// Common ride interval of two segments on the same trip, when strictly
// positive: (max of boards, min of alights).
std::optional<std::pair<Seconds, Seconds>> overlap(const RideSegment& a, const RideSegment& b);

// Builds the contact multigraph from completed trajectories with a per-trip
// boarding/alighting sweep. With simple_graph, parallel edges between a
// passenger pair collapse to the single longest contact (sensitivity variant;
// the multigraph is the primary definition).
ContactNetwork build_contact_network(const std::vector<Trajectory>& trajectories,
                                     bool simple_graph = false);

// Onboard passenger count for every (trip, consecutive-stop segment) with at
// least two riders. These onboard sets are complete subgraphs by construction.
std::vector<uint32_t> segment_clique_sizes(const std::vector<Trajectory>& trajectories,
                                           const TransitNetwork& net);

struct NetworkStats {
    size_t nodes = 0;
    size_t edges = 0;
    size_t max_degree = 0;
    double median_degree = 0.0;
    double mean_degree = 0.0;  // 2 edges / nodes
    size_t max_clique = 0;
    double median_clique = 0.0;
    double mean_clique = 0.0;
};

NetworkStats network_stats(const ContactNetwork& net, const std::vector<uint32_t>& clique_sizes);

struct Histogram {
    Seconds bin_width = 1;
    std::vector<uint64_t> counts;  // bin i covers [i*width, (i+1)*width)
};

struct ContactHistograms {
    Histogram contact_start;      // quarter-hour bins over the day (96 bins)
    Histogram contact_duration;   // one-minute bins
    Histogram degree;             // unit bins
    Histogram clique_size;        // unit bins
};

ContactHistograms temporal_histograms(const ContactNetwork& net,
                                      const std::vector<uint32_t>& clique_sizes);

std::string serialize_histogram(const Histogram& h, const std::string& config_echo);

// contact_edges.csv / contact_nodes.csv round-trip.
std::string serialize_contact_edges(const ContactNetwork& net, const TransitNetwork& feed,
                                    const std::string& config_echo);
std::string serialize_contact_nodes(const ContactNetwork& net, const std::string& config_echo);
ContactNetwork read_contact_network(const TransitNetwork& feed, const std::string& edges_path,
                                    const std::string& nodes_path);

}  // namespace transepi

#endif

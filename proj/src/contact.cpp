#include "transepi/contact.hpp"

#include <algorithm>
#include <map>

#include "transepi/csv.hpp"

namespace transepi {

std::optional<std::pair<Seconds, Seconds>> overlap(const RideSegment& a, const RideSegment& b) {
    if (a.trip != b.trip) throw DifferentTrips();
    Seconds start = std::max(a.board_time, b.board_time);
    Seconds end = std::min(a.alight_time, b.alight_time);
    if (end <= start) return std::nullopt;
    return std::make_pair(start, end);
}

int ContactNetwork::person_index(const std::string& id) const {
    auto it = std::lower_bound(persons_.begin(), persons_.end(), id);
    if (it == persons_.end() || *it != id) return -1;
    return int(it - persons_.begin());
}

void ContactNetwork::freeze(std::vector<std::string> persons, std::vector<ContactEdge> edges) {
    persons_ = std::move(persons);
    edges_ = std::move(edges);
    std::sort(edges_.begin(), edges_.end(), [](const ContactEdge& a, const ContactEdge& b) {
        if (a.trip != b.trip) return a.trip < b.trip;
        if (a.u != b.u) return a.u < b.u;
        if (a.v != b.v) return a.v < b.v;
        if (a.t_start != b.t_start) return a.t_start < b.t_start;
        return a.t_end < b.t_end;
    });

    offsets_.assign(persons_.size() + 1, 0);
    for (const auto& e : edges_) {
        ++offsets_[e.u + 1];
        ++offsets_[e.v + 1];
    }
    for (size_t i = 1; i < offsets_.size(); ++i) offsets_[i] += offsets_[i - 1];
    adjacency_.resize(edges_.size() * 2);
    std::vector<size_t> cursor(offsets_.begin(), offsets_.end() - 1);
    for (uint32_t i = 0; i < edges_.size(); ++i) {
        const auto& e = edges_[i];
        adjacency_[cursor[e.u]++] = {e.v, i};
        adjacency_[cursor[e.v]++] = {e.u, i};
    }
}

// ---------------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------------

namespace {

struct RideInterval {
    Seconds board;
    Seconds alight;
    uint32_t node;
};

}  // namespace

ContactNetwork build_contact_network(const std::vector<Trajectory>& trajectories,
                                     bool simple_graph) {
    // Node set: persons with at least one completed trajectory.
    std::vector<std::string> persons;
    persons.reserve(trajectories.size());
    for (const auto& t : trajectories) persons.push_back(t.person_id);
    std::sort(persons.begin(), persons.end());
    persons.erase(std::unique(persons.begin(), persons.end()), persons.end());
    auto node_of = [&](const std::string& id) {
        return uint32_t(std::lower_bound(persons.begin(), persons.end(), id) - persons.begin());
    };

    // Ride intervals grouped per vehicle trip.
    std::map<uint32_t, std::vector<RideInterval>> per_trip;
    for (const auto& t : trajectories) {
        uint32_t node = node_of(t.person_id);
        for (const auto& s : t.segments) {
            per_trip[s.trip].push_back({s.board_time, s.alight_time, node});
        }
    }

    // Per-trip sweep: intervals in board order; an interval only meets the
    // still-active earlier boarders, so each overlapping pair is emitted once.
    std::vector<ContactEdge> edges;
    std::vector<RideInterval> active;
    for (auto& [trip, intervals] : per_trip) {
        std::sort(intervals.begin(), intervals.end(),
                  [](const RideInterval& a, const RideInterval& b) {
                      if (a.board != b.board) return a.board < b.board;
                      if (a.node != b.node) return a.node < b.node;
                      return a.alight < b.alight;
                  });
        active.clear();
        for (const auto& in : intervals) {
            size_t w = 0;
            for (size_t i = 0; i < active.size(); ++i) {
                if (active[i].alight <= in.board) continue;  // expired, drop
                active[w++] = active[i];
                if (active[i].node == in.node) continue;  // same person twice on one trip
                Seconds end = std::min(active[i].alight, in.alight);
                if (end <= in.board) continue;
                ContactEdge e;
                e.u = std::min(active[i].node, in.node);
                e.v = std::max(active[i].node, in.node);
                e.trip = trip;
                e.t_start = in.board;
                e.t_end = end;
                edges.push_back(e);
            }
            active.resize(w);
            if (in.alight > in.board) active.push_back(in);
        }
    }

    if (simple_graph) {
        // Keep one edge per passenger pair: the longest contact, earliest
        // start then lowest trip breaking ties.
        std::sort(edges.begin(), edges.end(), [](const ContactEdge& a, const ContactEdge& b) {
            if (a.u != b.u) return a.u < b.u;
            if (a.v != b.v) return a.v < b.v;
            if (a.duration() != b.duration()) return a.duration() > b.duration();
            if (a.t_start != b.t_start) return a.t_start < b.t_start;
            return a.trip < b.trip;
        });
        std::vector<ContactEdge> unique_edges;
        for (const auto& e : edges) {
            if (!unique_edges.empty() && unique_edges.back().u == e.u &&
                unique_edges.back().v == e.v)
                continue;
            unique_edges.push_back(e);
        }
        edges = std::move(unique_edges);
    }

    ContactNetwork net;
    net.freeze(std::move(persons), std::move(edges));
    return net;
}

std::vector<uint32_t> segment_clique_sizes(const std::vector<Trajectory>& trajectories,
                                           const TransitNetwork& net) {
    // Onboard count per consecutive-stop segment via a boarding/alighting
    // difference array per trip.
    std::map<uint32_t, std::vector<int>> diffs;
    for (const auto& t : trajectories) {
        for (const auto& s : t.segments) {
            auto& d = diffs[s.trip];
            if (d.empty()) d.assign(net.trips[s.trip].stop_times.size(), 0);
            d[s.board_pos] += 1;
            d[s.alight_pos] -= 1;
        }
    }
    std::vector<uint32_t> sizes;
    for (const auto& [trip, d] : diffs) {
        int onboard = 0;
        for (size_t seg = 0; seg + 1 < d.size(); ++seg) {
            onboard += d[seg];
            if (onboard >= 2) sizes.push_back(uint32_t(onboard));
        }
    }
    return sizes;
}

// ---------------------------------------------------------------------------
// Statistics
// ---------------------------------------------------------------------------

namespace {

double median_of_sorted(const std::vector<size_t>& v) {
    if (v.empty()) return 0.0;
    size_t n = v.size();
    if (n % 2 == 1) return double(v[n / 2]);
    return (double(v[n / 2 - 1]) + double(v[n / 2])) / 2.0;
}

}  // namespace

NetworkStats network_stats(const ContactNetwork& net, const std::vector<uint32_t>& clique_sizes) {
    NetworkStats s;
    s.nodes = net.node_count();
    s.edges = net.edge_count();

    std::vector<size_t> degrees(s.nodes);
    for (uint32_t i = 0; i < s.nodes; ++i) degrees[i] = net.degree(i);
    std::sort(degrees.begin(), degrees.end());
    s.max_degree = degrees.empty() ? 0 : degrees.back();
    s.median_degree = median_of_sorted(degrees);
    s.mean_degree = s.nodes == 0 ? 0.0 : 2.0 * double(s.edges) / double(s.nodes);

    std::vector<size_t> cliques(clique_sizes.begin(), clique_sizes.end());
    std::sort(cliques.begin(), cliques.end());
    s.max_clique = cliques.empty() ? 0 : cliques.back();
    s.median_clique = median_of_sorted(cliques);
    double total = 0.0;
    for (size_t c : cliques) total += double(c);
    s.mean_clique = cliques.empty() ? 0.0 : total / double(cliques.size());
    return s;
}

ContactHistograms temporal_histograms(const ContactNetwork& net,
                                      const std::vector<uint32_t>& clique_sizes) {
    ContactHistograms h;
    h.contact_start.bin_width = 15 * 60;
    h.contact_start.counts.assign(96, 0);
    h.contact_duration.bin_width = 60;
    h.degree.bin_width = 1;
    h.clique_size.bin_width = 1;

    for (const auto& e : net.edges()) {
        // Over-midnight starts fold back onto the service-day clock.
        Seconds start = e.t_start % kSecondsPerDay;
        if (start < 0) start += kSecondsPerDay;
        h.contact_start.counts[size_t(start) / (15 * 60)]++;
        size_t dbin = size_t(e.duration()) / 60;
        if (h.contact_duration.counts.size() <= dbin) h.contact_duration.counts.resize(dbin + 1, 0);
        h.contact_duration.counts[dbin]++;
    }
    for (uint32_t i = 0; i < net.node_count(); ++i) {
        size_t d = net.degree(i);
        if (h.degree.counts.size() <= d) h.degree.counts.resize(d + 1, 0);
        h.degree.counts[d]++;
    }
    for (uint32_t c : clique_sizes) {
        if (h.clique_size.counts.size() <= c) h.clique_size.counts.resize(c + 1, 0);
        h.clique_size.counts[c]++;
    }
    return h;
}

std::string serialize_histogram(const Histogram& h, const std::string& config_echo) {
    CsvWriter w;
    if (!config_echo.empty()) w.comment("config " + config_echo);
    w.row({"bin_start", "count"});
    for (size_t i = 0; i < h.counts.size(); ++i) {
        w.row({std::to_string(Seconds(i) * h.bin_width), std::to_string(h.counts[i])});
    }
    return w.str();
}

// ---------------------------------------------------------------------------
// csv round-trip
// ---------------------------------------------------------------------------

std::string serialize_contact_edges(const ContactNetwork& net, const TransitNetwork& feed,
                                    const std::string& config_echo) {
    CsvWriter w;
    if (!config_echo.empty()) w.comment("config " + config_echo);
    w.row({"u", "v", "trip_id", "t_start", "t_end", "duration_sec"});
    for (const auto& e : net.edges()) {
        w.row({net.persons()[e.u], net.persons()[e.v], feed.trips[e.trip].trip_id,
               std::to_string(e.t_start), std::to_string(e.t_end),
               std::to_string(e.duration())});
    }
    return w.str();
}

std::string serialize_contact_nodes(const ContactNetwork& net, const std::string& config_echo) {
    CsvWriter w;
    if (!config_echo.empty()) w.comment("config " + config_echo);
    w.row({"person_id"});
    for (const auto& p : net.persons()) w.row({p});
    return w.str();
}

ContactNetwork read_contact_network(const TransitNetwork& feed, const std::string& edges_path,
                                    const std::string& nodes_path) {
    std::vector<std::string> persons;
    {
        CsvReader r(nodes_path);
        int c = r.column("person_id");
        if (c < 0) throw std::runtime_error(nodes_path + ": missing person_id column");
        std::vector<std::string> row;
        while (r.next(row)) persons.push_back(row[size_t(c)]);
        std::sort(persons.begin(), persons.end());
        persons.erase(std::unique(persons.begin(), persons.end()), persons.end());
    }
    auto node_of = [&](const std::string& id) -> uint32_t {
        auto it = std::lower_bound(persons.begin(), persons.end(), id);
        if (it == persons.end() || *it != id)
            throw std::runtime_error(edges_path + ": edge endpoint not in node file: " + id);
        return uint32_t(it - persons.begin());
    };

    std::vector<ContactEdge> edges;
    CsvReader r(edges_path);
    int c_u = r.column("u"), c_v = r.column("v"), c_trip = r.column("trip_id");
    int c_start = r.column("t_start"), c_end = r.column("t_end");
    for (int c : {c_u, c_v, c_trip, c_start, c_end}) {
        if (c < 0) throw std::runtime_error(edges_path + ": missing edge column");
    }
    std::vector<std::string> row;
    while (r.next(row)) {
        ContactEdge e;
        uint32_t a = node_of(row[size_t(c_u)]);
        uint32_t b = node_of(row[size_t(c_v)]);
        e.u = std::min(a, b);
        e.v = std::max(a, b);
        int trip = feed.trip_index(row[size_t(c_trip)]);
        if (trip < 0) throw std::runtime_error(edges_path + ": unknown trip " + row[size_t(c_trip)]);
        e.trip = uint32_t(trip);
        e.t_start = Seconds(std::stol(row[size_t(c_start)]));
        e.t_end = Seconds(std::stol(row[size_t(c_end)]));
        edges.push_back(e);
    }
    ContactNetwork net;
    net.freeze(std::move(persons), std::move(edges));
    return net;
}

}  // namespace transepi

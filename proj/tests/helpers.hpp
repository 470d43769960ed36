// Shared fixtures and independent oracles for the test suites. Everything
// here is deliberately brute force and separate from the library
// implementations it checks.

#ifndef TRANSEPI_TESTS_HELPERS_HPP
#define TRANSEPI_TESTS_HELPERS_HPP

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "transepi/assignment.hpp"
#include "transepi/feed.hpp"
#include "transepi/rng.hpp"

namespace testutil {

using namespace transepi;

// Scratch directory unique to a test tag, wiped on creation.
inline std::string scratch_dir(const std::string& tag) {
    auto dir = std::filesystem::temp_directory_path() / ("transepi_test_" + tag);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir.string();
}

inline void write(const std::string& dir, const std::string& name, const std::string& content) {
    std::ofstream out(std::filesystem::path(dir) / name, std::ios::binary);
    out << content;
}

// Two-stop, one-trip feed: the smallest legal network.
inline std::string write_minimal_feed(const std::string& tag) {
    std::string dir = scratch_dir(tag);
    write(dir, "stops.txt",
          "stop_id,stop_name,stop_lat,stop_lon\n"
          "A,Alpha,47.0,8.0\n"
          "B,Beta,47.01,8.0\n");
    write(dir, "routes.txt", "route_id,agency_id,route_type\nR1,demo,3\n");
    write(dir, "trips.txt", "route_id,trip_id\nR1,T1\n");
    write(dir, "stop_times.txt",
          "trip_id,arrival_time,departure_time,stop_id,stop_sequence\n"
          "T1,08:00:00,08:00:00,A,0\n"
          "T1,08:15:00,08:15:00,B,1\n");
    write(dir, "transfers.txt", "from_stop_id,to_stop_id,min_transfer_time\n");
    write(dir, "vehicles.txt", "trip_id,capacity\nT1,40\n");
    return dir;
}

// In-memory network builder for assignment tests.
struct NetBuilder {
    TransitNetwork net;
    std::map<std::string, uint32_t> stop_ix;

    uint32_t stop(const std::string& id) {
        auto it = stop_ix.find(id);
        if (it != stop_ix.end()) return it->second;
        uint32_t ix = uint32_t(net.stops.size());
        net.stops.push_back({id, id, 40.0 + 0.001 * double(ix), 8.0});
        stop_ix.emplace(id, ix);
        return ix;
    }

    void route(const std::string& id) { net.routes.push_back({id, TransitMode::bus, "demo"}); }

    // stops_and_times: (stop id, arrival == departure seconds)
    void trip(const std::string& id, const std::string& route_id, int capacity,
              std::vector<std::pair<std::string, Seconds>> stops_and_times) {
        VehicleTrip t;
        t.trip_id = id;
        int r = -1;
        for (size_t i = 0; i < net.routes.size(); ++i)
            if (net.routes[i].route_id == route_id) r = int(i);
        if (r < 0) {
            route(route_id);
            r = int(net.routes.size()) - 1;
        }
        t.route = uint32_t(r);
        t.capacity = capacity;
        for (auto& [sid, at] : stops_and_times) t.stop_times.push_back({stop(sid), at, at});
        net.trips.push_back(std::move(t));
    }

    void transfer(const std::string& from, const std::string& to, Seconds walk) {
        net.transfers.push_back({stop(from), stop(to), walk});
    }

    TransitNetwork build() {
        net.build_index();
        return net;
    }
};

inline TripRequest request(const std::string& person, const std::string& from,
                           const std::string& to, Seconds arrival) {
    return {person, from, to, arrival};
}

// ---------------------------------------------------------------------------
// Exhaustive candidate-path oracle: enumerates every leg sequence up to
// max_transfers by plain recursion over all (trip, board, alight) triples,
// with no pruning, then ranks by utility exactly like the contract states.
// ---------------------------------------------------------------------------

struct OraclePath {
    std::vector<RideLeg> legs;
    double utility = 0.0;
    Seconds arrive = 0;
};

inline double oracle_utility(Seconds ride, Seconds wait, Seconds walk, int transfers) {
    return ride / 60.0 + kWaitWeight * (wait / 60.0) + kWalkWeight * (walk / 60.0) +
           kTransferPenalty * transfers;
}

inline std::vector<OraclePath> oracle_enumerate(const TransitNetwork& net,
                                                const TripRequest& request, Seconds window,
                                                int max_transfers) {
    int origin = net.stop_index(request.origin_stop);
    int dest = net.stop_index(request.destination_stop);
    Seconds lo = request.preferred_arrival - window, hi = request.preferred_arrival;

    std::map<uint32_t, Seconds> access;  // board stop -> walk
    access[uint32_t(origin)] = 0;
    std::map<uint32_t, Seconds> egress;  // alight stop -> walk
    egress[uint32_t(dest)] = 0;
    for (const auto& l : net.transfers) {
        if (l.from_stop == uint32_t(origin)) {
            auto it = access.find(l.to_stop);
            if (it == access.end() || l.walk_time < it->second) access[l.to_stop] = l.walk_time;
        }
        if (l.to_stop == uint32_t(dest)) {
            auto it = egress.find(l.from_stop);
            if (it == egress.end() || l.walk_time < it->second) egress[l.from_stop] = l.walk_time;
        }
    }
    auto walk_between = [&](uint32_t a, uint32_t b) -> Seconds {
        if (a == b) return 0;
        Seconds best = -1;
        for (const auto& l : net.transfers) {
            if (l.from_stop == a && l.to_stop == b && (best < 0 || l.walk_time < best))
                best = l.walk_time;
        }
        return best;  // -1 = no link
    };

    std::vector<OraclePath> found;
    std::vector<RideLeg> legs;

    // Recursively extend by one leg; totals carried explicitly.
    auto extend = [&](auto&& self, Seconds ride, Seconds wait, Seconds walk) -> void {
        const RideLeg& last = legs.back();
        uint32_t alight_stop = net.trips[last.trip].stop_times[last.alight_pos].stop;
        Seconds alight_time = net.trips[last.trip].stop_times[last.alight_pos].arrival;

        auto eg = egress.find(alight_stop);
        if (eg != egress.end()) {
            Seconds arrive = alight_time + eg->second;
            if (arrive >= lo && arrive <= hi) {
                OraclePath p;
                p.legs = legs;
                p.utility =
                    oracle_utility(ride, wait, walk + eg->second, int(legs.size()) - 1);
                p.arrive = arrive;
                found.push_back(p);
            }
        }
        if (int(legs.size()) > max_transfers) return;

        for (uint32_t trip = 0; trip < net.trips.size(); ++trip) {
            bool used = false;
            for (const auto& l : legs)
                if (l.trip == trip) used = true;
            if (used) continue;
            const auto& st = net.trips[trip].stop_times;
            for (uint32_t bp = 0; bp + 1 < st.size(); ++bp) {
                Seconds w = walk_between(alight_stop, st[bp].stop);
                if (w < 0) continue;
                Seconds ready = alight_time + w;
                Seconds dep = st[bp].departure;
                if (dep < ready || dep > hi) continue;
                for (uint32_t ap = bp + 1; ap < st.size(); ++ap) {
                    if (st[ap].arrival > hi) continue;
                    legs.push_back({trip, bp, ap});
                    self(self, ride + (st[ap].arrival - dep), wait + (dep - ready), walk + w);
                    legs.pop_back();
                }
            }
        }
    };

    for (uint32_t trip = 0; trip < net.trips.size(); ++trip) {
        const auto& st = net.trips[trip].stop_times;
        for (uint32_t bp = 0; bp + 1 < st.size(); ++bp) {
            auto ac = access.find(st[bp].stop);
            if (ac == access.end()) continue;
            if (st[bp].departure > hi) continue;
            for (uint32_t ap = bp + 1; ap < st.size(); ++ap) {
                if (st[ap].arrival > hi) continue;
                legs.push_back({trip, bp, ap});
                extend(extend, st[ap].arrival - st[bp].departure, 0, ac->second);
                legs.pop_back();
            }
        }
    }

    std::sort(found.begin(), found.end(), [](const OraclePath& a, const OraclePath& b) {
        if (a.utility != b.utility) return a.utility < b.utility;
        return std::lexicographical_compare(
            a.legs.begin(), a.legs.end(), b.legs.begin(), b.legs.end(),
            [](const RideLeg& x, const RideLeg& y) {
                if (x.trip != y.trip) return x.trip < y.trip;
                if (x.board_pos != y.board_pos) return x.board_pos < y.board_pos;
                return x.alight_pos < y.alight_pos;
            });
    });
    return found;
}

// Random trajectory generator for contact-network oracle tests.
inline std::vector<Trajectory> random_trajectories(uint64_t seed, int n_persons, int n_trips,
                                                   int max_segments) {
    RandomStream rng(derive_seed(seed, 0x7e57));
    std::vector<Trajectory> out;
    for (int p = 0; p < n_persons; ++p) {
        Trajectory t;
        t.person_id = "P" + std::to_string(1000 + p);
        t.completed = true;
        int segs = 1 + int(rng.next_below(uint64_t(max_segments)));
        for (int s = 0; s < segs; ++s) {
            RideSegment seg;
            seg.trip = uint32_t(rng.next_below(uint64_t(n_trips)));
            Seconds board = Seconds(6 * 3600 + rng.next_below(12 * 3600));
            Seconds length = Seconds(rng.next_below(3600));  // up to an hour, may be zero
            seg.board_time = board;
            seg.alight_time = board + length;
            seg.board_pos = 0;
            seg.alight_pos = 1;
            seg.board_stop = 0;
            seg.alight_stop = 1;
            t.segments.push_back(seg);
        }
        out.push_back(std::move(t));
    }
    return out;
}

// O(n^2) contact oracle: all segment pairs, interval intersection.
struct OracleEdge {
    std::string u, v;
    uint32_t trip;
    Seconds t_start, t_end;

    bool operator<(const OracleEdge& o) const {
        return std::tie(trip, u, v, t_start, t_end) <
               std::tie(o.trip, o.u, o.v, o.t_start, o.t_end);
    }
    bool operator==(const OracleEdge& o) const {
        return trip == o.trip && u == o.u && v == o.v && t_start == o.t_start && t_end == o.t_end;
    }
};

inline std::vector<OracleEdge> oracle_contact_edges(const std::vector<Trajectory>& trajs) {
    struct Item {
        std::string person;
        RideSegment seg;
    };
    std::vector<Item> items;
    for (const auto& t : trajs)
        for (const auto& s : t.segments) items.push_back({t.person_id, s});

    std::vector<OracleEdge> edges;
    for (size_t i = 0; i < items.size(); ++i) {
        for (size_t j = i + 1; j < items.size(); ++j) {
            if (items[i].seg.trip != items[j].seg.trip) continue;
            if (items[i].person == items[j].person) continue;
            Seconds start = std::max(items[i].seg.board_time, items[j].seg.board_time);
            Seconds end = std::min(items[i].seg.alight_time, items[j].seg.alight_time);
            if (end <= start) continue;
            OracleEdge e;
            e.u = std::min(items[i].person, items[j].person);
            e.v = std::max(items[i].person, items[j].person);
            e.trip = items[i].seg.trip;
            e.t_start = start;
            e.t_end = end;
            edges.push_back(e);
        }
    }
    std::sort(edges.begin(), edges.end());
    return edges;
}

}  // namespace testutil

#endif

#include "transepi/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <thread>

#include "transepi/csv.hpp"
#include "transepi/rng.hpp"

namespace transepi {

double path_utility(const PathUtilityComponents& c) {
    return c.in_vehicle_min + kWaitWeight * c.waiting_min + kWalkWeight * c.walking_min +
           kTransferPenalty * c.transfers;
}

std::vector<double> logit_probabilities(const std::vector<double>& utilities, double theta) {
    if (utilities.empty()) throw EmptyChoiceSet();
    double min_u = *std::min_element(utilities.begin(), utilities.end());
    std::vector<double> p(utilities.size());
    double total = 0.0;
    for (size_t i = 0; i < utilities.size(); ++i) {
        p[i] = std::exp(-theta * (utilities[i] - min_u));
        total += p[i];
    }
    for (double& v : p) v /= total;
    return p;
}

// ---------------------------------------------------------------------------
// Candidate path enumeration: depth-first search over ride legs with a
// branch-and-bound cutoff. Utility only grows as a path is extended (every
// component weight is >= 1 per minute), so a partial path whose utility plus
// an admissible remaining-time bound already exceeds the current K-th best
// can be discarded without losing any of the true top K.
// ---------------------------------------------------------------------------

namespace {

struct PathSearch {
    const TransitNetwork& net;
    uint32_t dest;
    Seconds arrive_lo, arrive_hi;
    int max_paths;
    int max_legs;
    // Valid upper bound on the K-th best utility, carried in from shallower
    // searches so deep searches start pruned.
    double external_cutoff = std::numeric_limits<double>::infinity();

    std::unordered_map<uint32_t, Seconds> egress;  // stop -> walk to destination
    std::vector<CandidatePath> found;
    std::priority_queue<double> best;  // utilities of the K best so far (max on top)

    std::vector<RideLeg> legs;
    std::vector<Seconds> walks;  // access walk + transfer walk before each leg
    std::vector<char> trip_used;
    Seconds ride_s = 0, wait_s = 0, walk_s = 0;

    PathSearch(const TransitNetwork& n, uint32_t destination, Seconds lo, Seconds hi, int k,
               int legs_cap)
        : net(n), dest(destination), arrive_lo(lo), arrive_hi(hi), max_paths(k),
          max_legs(legs_cap), trip_used(n.trips.size(), 0) {
        egress.emplace(dest, 0);
        for (uint32_t s = 0; s < net.stops.size(); ++s) {
            for (uint32_t li : net.transfers_from(s)) {
                const TransferLink& l = net.transfers[li];
                if (l.to_stop == dest) {
                    auto it = egress.find(s);
                    if (it == egress.end() || l.walk_time < it->second)
                        egress[s] = l.walk_time;
                }
            }
        }
    }

    double cutoff() const {
        double own = int(best.size()) >= max_paths ? best.top()
                                                   : std::numeric_limits<double>::infinity();
        return std::min(own, external_cutoff);
    }

    double utility_of(Seconds ride, Seconds wait, Seconds walk, int transfers) const {
        PathUtilityComponents c{ride / 60.0, wait / 60.0, walk / 60.0, transfers};
        return path_utility(c);
    }

    // Cheapest possible cost of the time still needed to reach the window.
    double remaining_bound(Seconds now) const {
        return now >= arrive_lo ? 0.0 : (arrive_lo - now) / 60.0;
    }

    void emit(uint32_t alight_pos, Seconds leg_wait, Seconds leg_ride, Seconds egress_walk,
              Seconds final_arrival) {
        double u = utility_of(ride_s + leg_ride, wait_s + leg_wait, walk_s + egress_walk,
                              int(legs.size()) - 1);
        if (u > cutoff()) return;
        CandidatePath p;
        p.legs = legs;
        p.legs.back().alight_pos = alight_pos;
        p.access_walk = walks.empty() ? 0 : walks.front();
        p.egress_walk = egress_walk;
        p.components = {(ride_s + leg_ride) / 60.0, (wait_s + leg_wait) / 60.0,
                        (walk_s + egress_walk) / 60.0, int(legs.size()) - 1};
        p.utility = u;
        const auto& first = net.trips[p.legs.front().trip].stop_times[p.legs.front().board_pos];
        p.depart_time = first.departure;
        p.arrive_time = final_arrival;
        found.push_back(std::move(p));
        if (int(best.size()) < max_paths) {
            best.push(u);
        } else if (u < best.top()) {
            best.pop();
            best.push(u);
        }
    }

    size_t first_departure_at_or_after(const std::vector<TripAtStop>& candidates,
                                       Seconds when) const {
        size_t lo = 0, hi = candidates.size();
        while (lo < hi) {
            size_t mid = (lo + hi) / 2;
            const TripAtStop& ts = candidates[mid];
            if (net.trips[ts.trip].stop_times[ts.pos].departure < when) lo = mid + 1;
            else hi = mid;
        }
        return lo;
    }

    // Explore all legs boarding at `stop`, having arrived there at `clock`.
    // The first boarding is timed (passengers show up at the departure), so
    // it carries no waiting cost.
    void explore(uint32_t stop, Seconds clock, bool first_leg) {
        if (clock > arrive_hi) return;
        const auto& candidates = net.trips_at(stop);
        // First legs are scanned latest-departure-first so that paths close
        // to the preferred arrival are found early and tighten the bound;
        // later legs want the earliest feasible departure.
        size_t scan_end = first_departure_at_or_after(candidates, arrive_hi + 1);
        size_t scan_begin = first_leg ? 0 : first_departure_at_or_after(candidates, clock);
        for (size_t ci = scan_begin; ci < scan_end; ++ci) {
            const TripAtStop& ts =
                first_leg ? candidates[scan_end - 1 - (ci - scan_begin)] : candidates[ci];
            const VehicleTrip& trip = net.trips[ts.trip];
            Seconds dep = trip.stop_times[ts.pos].departure;
            if (trip_used[ts.trip]) continue;
            if (ts.pos + 1 >= trip.stop_times.size()) continue;
            Seconds leg_wait = first_leg ? 0 : dep - clock;

            legs.push_back({ts.trip, ts.pos, ts.pos});
            trip_used[ts.trip] = 1;
            for (uint32_t ap = ts.pos + 1; ap < trip.stop_times.size(); ++ap) {
                Seconds arr = trip.stop_times[ap].arrival;
                if (arr > arrive_hi) break;
                Seconds leg_ride = arr - dep;
                double partial = utility_of(ride_s + leg_ride, wait_s + leg_wait, walk_s,
                                            int(legs.size()) - 1);
                if (partial + remaining_bound(arr) > cutoff()) break;

                uint32_t alight_stop = trip.stop_times[ap].stop;
                auto eg = egress.find(alight_stop);
                if (eg != egress.end()) {
                    Seconds final_arrival = arr + eg->second;
                    if (final_arrival >= arrive_lo && final_arrival <= arrive_hi)
                        emit(ap, leg_wait, leg_ride, eg->second, final_arrival);
                }

                if (int(legs.size()) < max_legs) {
                    legs.back().alight_pos = ap;
                    ride_s += leg_ride;
                    wait_s += leg_wait;
                    // Same-stop transfer.
                    walks.push_back(0);
                    explore(alight_stop, arr, false);
                    walks.pop_back();
                    // Walking transfers.
                    for (uint32_t li : net.transfers_from(alight_stop)) {
                        const TransferLink& l = net.transfers[li];
                        walks.push_back(l.walk_time);
                        walk_s += l.walk_time;
                        explore(l.to_stop, arr + l.walk_time, false);
                        walk_s -= l.walk_time;
                        walks.pop_back();
                    }
                    ride_s -= leg_ride;
                    wait_s -= leg_wait;
                }
            }
            trip_used[ts.trip] = 0;
            legs.pop_back();
        }
    }
};

bool leg_less(const RideLeg& a, const RideLeg& b) {
    if (a.trip != b.trip) return a.trip < b.trip;
    if (a.board_pos != b.board_pos) return a.board_pos < b.board_pos;
    return a.alight_pos < b.alight_pos;
}

bool path_order_less(const CandidatePath& a, const CandidatePath& b) {
    if (a.utility != b.utility) return a.utility < b.utility;
    return std::lexicographical_compare(
        a.legs.begin(), a.legs.end(), b.legs.begin(), b.legs.end(),
        [](const RideLeg& x, const RideLeg& y) { return leg_less(x, y); });
}

}  // namespace

std::vector<CandidatePath> enumerate_candidate_paths(const TransitNetwork& net,
                                                     const TripRequest& request, Seconds window,
                                                     int max_paths, int max_transfers) {
    int origin = net.stop_index(request.origin_stop);
    if (origin < 0) throw UnknownStop(request.origin_stop);
    int dest = net.stop_index(request.destination_stop);
    if (dest < 0) throw UnknownStop(request.destination_stop);

    // Iterative deepening on the leg count: the K-th best utility among
    // shorter paths is a valid cutoff for deeper searches, which keeps the
    // exponential tail of the enumeration pruned from the start. The final
    // pass covers the whole path space, so the result is still exact.
    std::vector<CandidatePath> found;
    double carry = std::numeric_limits<double>::infinity();
    for (int legs_cap = 1; legs_cap <= max_transfers + 1; ++legs_cap) {
        PathSearch search(net, uint32_t(dest), request.preferred_arrival - window,
                          request.preferred_arrival, max_paths, legs_cap);
        search.external_cutoff = carry;

        // Access: board at the origin itself or a stop one transfer walk away.
        search.walks.assign(1, 0);
        search.explore(uint32_t(origin), 0, true);
        for (uint32_t li : net.transfers_from(uint32_t(origin))) {
            const TransferLink& l = net.transfers[li];
            search.walks.assign(1, l.walk_time);
            search.walk_s = l.walk_time;
            search.explore(l.to_stop, 0, true);
            search.walk_s = 0;
        }
        carry = search.cutoff();
        found = std::move(search.found);
    }

    std::sort(found.begin(), found.end(), path_order_less);
    if (int(found.size()) > max_paths) found.resize(size_t(max_paths));

    // Fill walk annotations used by the loader for event timing.
    for (auto& p : found) {
        p.transfer_walks.assign(p.legs.size() > 1 ? p.legs.size() - 1 : 0, 0);
        for (size_t k = 1; k < p.legs.size(); ++k) {
            uint32_t from = net.trips[p.legs[k - 1].trip].stop_times[p.legs[k - 1].alight_pos].stop;
            uint32_t to = net.trips[p.legs[k].trip].stop_times[p.legs[k].board_pos].stop;
            if (from == to) continue;
            Seconds w = 0;
            bool found_link = false;
            for (uint32_t li : net.transfers_from(from)) {
                const TransferLink& l = net.transfers[li];
                if (l.to_stop == to && (!found_link || l.walk_time < w)) {
                    w = l.walk_time;
                    found_link = true;
                }
            }
            p.transfer_walks[k - 1] = w;
        }
    }
    return found;
}

Hyperpath build_hyperpath(std::vector<CandidatePath> paths, double theta) {
    Hyperpath h;
    h.paths = std::move(paths);
    std::vector<double> utilities(h.paths.size());
    for (size_t k = 0; k < h.paths.size(); ++k) utilities[k] = h.paths[k].utility;
    h.probabilities = logit_probabilities(utilities, theta);
    return h;
}

// ---------------------------------------------------------------------------
// Loading
// ---------------------------------------------------------------------------

namespace {

struct RequestState {
    std::vector<CandidatePath> prefs;  // sampled first, then ascending utility
    uint32_t round = 0;
    bool completed = false;
    std::vector<RideLeg> occupied;  // legs currently holding capacity
};

struct BoardingEvent {
    uint32_t round;
    Seconds time;
    uint32_t person_rank;
    uint32_t request;
    uint32_t leg;
};

struct EventAfter {
    bool operator()(const BoardingEvent& a, const BoardingEvent& b) const {
        if (a.round != b.round) return a.round > b.round;
        if (a.time != b.time) return a.time > b.time;
        if (a.person_rank != b.person_rank) return a.person_rank > b.person_rank;
        return a.request > b.request;
    }
};

Seconds attempt_time(const TransitNetwork& net, const CandidatePath& p, uint32_t leg) {
    const RideLeg& l = p.legs[leg];
    if (leg == 0) return net.trips[l.trip].stop_times[l.board_pos].departure;
    const RideLeg& prev = p.legs[leg - 1];
    Seconds alight = net.trips[prev.trip].stop_times[prev.alight_pos].arrival;
    return alight + p.transfer_walks[leg - 1];
}

}  // namespace

PreferenceLists plan_preferences(const TransitNetwork& net, const DemandSet& demand,
                                 const AssignmentParams& params) {
    const size_t n = demand.requests.size();
    PreferenceLists preferences(n);

    // Per-person request ordinal keys the choice stream so that one
    // passenger's sampling is unaffected by the presence of others.
    std::vector<uint32_t> request_ordinal(n, 0);
    {
        std::unordered_map<std::string, uint32_t> seen;
        for (size_t i = 0; i < n; ++i) request_ordinal[i] = seen[demand.requests[i].person_id]++;
    }

    // Enumeration and choice sampling read only the immutable network, so
    // requests are partitioned across threads.
    unsigned n_threads = params.threads > 0 ? unsigned(params.threads)
                                            : std::max(1u, std::thread::hardware_concurrency());
    n_threads = std::min<unsigned>(n_threads, std::max<size_t>(n, 1));
    auto prepare = [&](size_t begin, size_t end) {
        for (size_t i = begin; i < end; ++i) {
            const TripRequest& q = demand.requests[i];
            std::vector<CandidatePath> paths;
            try {
                paths = enumerate_candidate_paths(net, q, params.window, params.max_paths,
                                                  params.max_transfers);
            } catch (const UnknownStop&) {
                continue;  // stranded later with no candidates
            }
            if (paths.empty()) continue;
            Hyperpath hyperpath = build_hyperpath(std::move(paths), params.theta);
            RandomStream stream(
                derive_seed(params.seed, hash_string(q.person_id), request_ordinal[i]));
            double u = stream.next_double();
            size_t choice = hyperpath.probabilities.size() - 1;
            double acc = 0.0;
            for (size_t k = 0; k < hyperpath.probabilities.size(); ++k) {
                acc += hyperpath.probabilities[k];
                if (u < acc) {
                    choice = k;
                    break;
                }
            }
            auto& prefs = preferences[i];
            prefs.reserve(hyperpath.paths.size());
            prefs.push_back(hyperpath.paths[choice]);
            for (size_t k = 0; k < hyperpath.paths.size(); ++k)
                if (k != choice) prefs.push_back(hyperpath.paths[k]);
        }
    };
    if (n_threads <= 1 || n < 32) {
        prepare(0, n);
    } else {
        std::vector<std::thread> pool;
        size_t chunk = (n + n_threads - 1) / n_threads;
        for (unsigned t = 0; t < n_threads; ++t) {
            size_t b = t * chunk, e = std::min(n, b + chunk);
            if (b >= e) break;
            pool.emplace_back(prepare, b, e);
        }
        for (auto& th : pool) th.join();
    }
    return preferences;
}

AssignmentResult simulate_loading(const TransitNetwork& net, const DemandSet& demand,
                                  const AssignmentParams& params) {
    return load_with_preferences(net, demand, plan_preferences(net, demand, params));
}

AssignmentResult load_with_preferences(const TransitNetwork& net, const DemandSet& demand,
                                       const PreferenceLists& preferences) {
    const size_t n = demand.requests.size();

    // Person ranks: lexicographic order of distinct ids, for the boarding
    // tiebreak.
    std::map<std::string, uint32_t> person_rank;
    for (const auto& q : demand.requests) person_rank.emplace(q.person_id, 0);
    {
        uint32_t r = 0;
        for (auto& [id, rank] : person_rank) rank = r++;
    }

    std::vector<RequestState> states(n);
    for (size_t i = 0; i < n; ++i) states[i].prefs = preferences[i];

    // Loading: one boarding-attempt event per pending leg, served in
    // (retry round, arrival time at stop, person) order.
    std::vector<std::vector<int>> occupancy(net.trips.size());
    auto occupy = [&](const RideLeg& l, int delta) {
        auto& occ = occupancy[l.trip];
        if (occ.empty()) occ.assign(net.trips[l.trip].stop_times.size() - 1, 0);
        for (uint32_t s = l.board_pos; s < l.alight_pos; ++s) occ[s] += delta;
    };
    auto fits = [&](const RideLeg& l) {
        const auto& occ = occupancy[l.trip];
        if (occ.empty()) return true;
        int cap = net.trips[l.trip].capacity;
        for (uint32_t s = l.board_pos; s < l.alight_pos; ++s)
            if (occ[s] >= cap) return false;
        return true;
    };

    std::unordered_map<std::string, std::string> stranded_reason;
    std::unordered_map<std::string, std::vector<uint32_t>> requests_of;
    for (size_t i = 0; i < n; ++i) requests_of[demand.requests[i].person_id].push_back(uint32_t(i));

    auto strand = [&](const std::string& person, const std::string& reason) {
        if (!stranded_reason.emplace(person, reason).second) return;
        for (uint32_t j : requests_of[person]) {
            for (const RideLeg& l : states[j].occupied) occupy(l, -1);
            states[j].occupied.clear();
        }
    };

    std::priority_queue<BoardingEvent, std::vector<BoardingEvent>, EventAfter> queue;
    for (size_t i = 0; i < n; ++i) {
        const auto& person = demand.requests[i].person_id;
        if (states[i].prefs.empty()) {
            strand(person, "no_feasible_path");
        }
    }
    for (size_t i = 0; i < n; ++i) {
        const auto& person = demand.requests[i].person_id;
        if (stranded_reason.count(person)) continue;
        queue.push({0, attempt_time(net, states[i].prefs[0], 0), person_rank[person], uint32_t(i), 0});
    }

    while (!queue.empty()) {
        BoardingEvent e = queue.top();
        queue.pop();
        const std::string& person = demand.requests[e.request].person_id;
        if (stranded_reason.count(person)) continue;
        RequestState& st = states[e.request];
        const CandidatePath& path = st.prefs[st.round];
        const RideLeg& leg = path.legs[e.leg];
        if (fits(leg)) {
            occupy(leg, +1);
            st.occupied.push_back(leg);
            if (e.leg + 1 < path.legs.size()) {
                queue.push({e.round, attempt_time(net, path, e.leg + 1), e.person_rank, e.request,
                            e.leg + 1});
            } else {
                st.completed = true;
            }
        } else {
            for (const RideLeg& l : st.occupied) occupy(l, -1);
            st.occupied.clear();
            uint32_t next = st.round + 1;
            if (next >= st.prefs.size()) {
                strand(person, "capacity_denied");
            } else {
                st.round = next;
                queue.push({next, attempt_time(net, st.prefs[next], 0), e.person_rank, e.request, 0});
            }
        }
    }

    AssignmentResult result;
    for (size_t i = 0; i < n; ++i) {
        const auto& person = demand.requests[i].person_id;
        if (!states[i].completed || stranded_reason.count(person)) continue;
        const CandidatePath& path = states[i].prefs[states[i].round];
        Trajectory traj;
        traj.person_id = person;
        traj.completed = true;
        for (const RideLeg& l : path.legs) {
            const auto& st = net.trips[l.trip].stop_times;
            traj.segments.push_back({l.trip, st[l.board_pos].stop, st[l.alight_pos].stop,
                                     l.board_pos, l.alight_pos, st[l.board_pos].departure,
                                     st[l.alight_pos].arrival});
        }
        result.trajectories.push_back(std::move(traj));
    }
    for (const auto& [person, reason] : stranded_reason) result.stranded.push_back({person, reason});
    std::sort(result.stranded.begin(), result.stranded.end(),
              [](const StrandedPerson& a, const StrandedPerson& b) {
                  return a.person_id < b.person_id;
              });
    return result;
}

size_t stranded_count(const AssignmentResult& result) { return result.stranded.size(); }

// ---------------------------------------------------------------------------
// csv round-trip
// ---------------------------------------------------------------------------

std::string serialize_trajectories(const TransitNetwork& net, const std::vector<Trajectory>& trajs,
                                   const std::string& config_echo) {
    CsvWriter w;
    if (!config_echo.empty()) w.comment("config " + config_echo);
    w.row({"person_id", "trip_id", "board_stop", "board_time", "alight_stop", "alight_time"});
    for (const auto& t : trajs) {
        for (const auto& s : t.segments) {
            w.row({t.person_id, net.trips[s.trip].trip_id, net.stops[s.board_stop].stop_id,
                   std::to_string(s.board_time), net.stops[s.alight_stop].stop_id,
                   std::to_string(s.alight_time)});
        }
    }
    return w.str();
}

std::vector<Trajectory> read_trajectories(const TransitNetwork& net, const std::string& path) {
    CsvReader r(path);
    int c_person = r.column("person_id");
    int c_trip = r.column("trip_id");
    int c_bstop = r.column("board_stop");
    int c_btime = r.column("board_time");
    int c_astop = r.column("alight_stop");
    int c_atime = r.column("alight_time");
    for (int c : {c_person, c_trip, c_bstop, c_btime, c_astop, c_atime}) {
        if (c < 0) throw std::runtime_error(path + ": missing trajectory column");
    }

    std::vector<Trajectory> out;
    std::unordered_map<std::string, size_t> by_person;
    std::vector<std::string> row;
    while (r.next(row)) {
        const std::string& person = row[size_t(c_person)];
        int trip = net.trip_index(row[size_t(c_trip)]);
        if (trip < 0) throw std::runtime_error(path + ": unknown trip " + row[size_t(c_trip)]);
        int bstop = net.stop_index(row[size_t(c_bstop)]);
        int astop = net.stop_index(row[size_t(c_astop)]);
        if (bstop < 0 || astop < 0) throw std::runtime_error(path + ": unknown stop in trajectory");
        RideSegment seg;
        seg.trip = uint32_t(trip);
        seg.board_stop = uint32_t(bstop);
        seg.alight_stop = uint32_t(astop);
        seg.board_time = Seconds(std::stol(row[size_t(c_btime)]));
        seg.alight_time = Seconds(std::stol(row[size_t(c_atime)]));
        const auto& st = net.trips[size_t(trip)].stop_times;
        bool found_board = false, found_alight = false;
        for (uint32_t p = 0; p < st.size(); ++p) {
            if (!found_board && st[p].stop == seg.board_stop && st[p].departure == seg.board_time) {
                seg.board_pos = p;
                found_board = true;
            } else if (found_board && st[p].stop == seg.alight_stop &&
                       st[p].arrival == seg.alight_time) {
                seg.alight_pos = p;
                found_alight = true;
                break;
            }
        }
        if (!found_board || !found_alight)
            throw std::runtime_error(path + ": segment does not match timetable of trip " +
                                     row[size_t(c_trip)]);
        auto it = by_person.find(person);
        if (it == by_person.end()) {
            by_person.emplace(person, out.size());
            out.push_back({person, {seg}, true});
        } else {
            out[it->second].segments.push_back(seg);
        }
    }
    return out;
}

std::string serialize_stranded(const std::vector<StrandedPerson>& stranded,
                               const std::string& config_echo) {
    CsvWriter w;
    if (!config_echo.empty()) w.comment("config " + config_echo);
    w.row({"person_id", "reason"});
    for (const auto& s : stranded) w.row({s.person_id, s.reason});
    return w.str();
}

}  // namespace transepi

#include "transepi/feed.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>

#include "transepi/csv.hpp"

namespace transepi {

namespace fs = std::filesystem;

const char* mode_name(TransitMode m) {
    switch (m) {
        case TransitMode::bus: return "bus";
        case TransitMode::light_rail: return "light_rail";
        case TransitMode::heavy_rail: return "heavy_rail";
        case TransitMode::ferry: return "ferry";
    }
    return "bus";
}

int default_capacity(TransitMode m) {
    switch (m) {
        case TransitMode::bus: return 48;
        case TransitMode::light_rail: return 200;
        case TransitMode::heavy_rail: return 200;
        case TransitMode::ferry: return 300;
    }
    return 48;
}

// GTFS route_type -> mode. 0 tram/light rail, 1 subway, 2 rail, 3 bus, 4 ferry.
static TransitMode mode_from_route_type(int t) {
    switch (t) {
        case 0: return TransitMode::light_rail;
        case 1: return TransitMode::heavy_rail;
        case 2: return TransitMode::heavy_rail;
        case 3: return TransitMode::bus;
        case 4: return TransitMode::ferry;
        default: return TransitMode::bus;
    }
}

static int route_type_of(TransitMode m) {
    switch (m) {
        case TransitMode::light_rail: return 0;
        case TransitMode::heavy_rail: return 2;
        case TransitMode::bus: return 3;
        case TransitMode::ferry: return 4;
    }
    return 3;
}

void TransitNetwork::build_index() {
    stop_by_id_.clear();
    route_by_id_.clear();
    trip_by_id_.clear();
    for (uint32_t i = 0; i < stops.size(); ++i) stop_by_id_.emplace(stops[i].stop_id, i);
    for (uint32_t i = 0; i < routes.size(); ++i) route_by_id_.emplace(routes[i].route_id, i);
    for (uint32_t i = 0; i < trips.size(); ++i) trip_by_id_.emplace(trips[i].trip_id, i);

    trips_at_stop_.assign(stops.size(), {});
    for (uint32_t t = 0; t < trips.size(); ++t) {
        const auto& st = trips[t].stop_times;
        for (uint32_t p = 0; p < st.size(); ++p) {
            trips_at_stop_[st[p].stop].push_back({t, p});
        }
    }
    for (auto& v : trips_at_stop_) {
        std::sort(v.begin(), v.end(), [&](const TripAtStop& a, const TripAtStop& b) {
            Seconds da = trips[a.trip].stop_times[a.pos].departure;
            Seconds db = trips[b.trip].stop_times[b.pos].departure;
            if (da != db) return da < db;
            if (a.trip != b.trip) return a.trip < b.trip;
            return a.pos < b.pos;
        });
    }

    transfers_from_.assign(stops.size(), {});
    for (uint32_t i = 0; i < transfers.size(); ++i) {
        transfers_from_[transfers[i].from_stop].push_back(i);
    }
}

int TransitNetwork::stop_index(const std::string& id) const {
    auto it = stop_by_id_.find(id);
    return it == stop_by_id_.end() ? -1 : int(it->second);
}
int TransitNetwork::route_index(const std::string& id) const {
    auto it = route_by_id_.find(id);
    return it == route_by_id_.end() ? -1 : int(it->second);
}
int TransitNetwork::trip_index(const std::string& id) const {
    auto it = trip_by_id_.find(id);
    return it == trip_by_id_.end() ? -1 : int(it->second);
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

static std::string feed_path(const std::string& dir, const char* name) {
    return (fs::path(dir) / name).string();
}

static double parse_double_or_throw(const std::string& s, const std::string& file, size_t line,
                                    const char* what) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw FeedValueError(file, line, std::string("bad ") + what + ": '" + s + "'");
    return v;
}

static long parse_int_or_throw(const std::string& s, const std::string& file, size_t line,
                               const char* what) {
    long v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw FeedValueError(file, line, std::string("bad ") + what + ": '" + s + "'");
    return v;
}

static int require_column(const CsvReader& r, const char* name) {
    int c = r.column(name);
    if (c < 0)
        throw FeedValueError(r.path(), 1, std::string("missing required column '") + name + "'");
    return c;
}

static const std::string& field(const std::vector<std::string>& row, int idx) {
    static const std::string empty;
    if (idx < 0 || size_t(idx) >= row.size()) return empty;
    return row[size_t(idx)];
}

TransitNetwork parse_transit_feed(const std::string& directory) {
    TransitNetwork net;

    for (const char* required : {"stops.txt", "routes.txt", "trips.txt", "stop_times.txt"}) {
        if (!file_exists(feed_path(directory, required)))
            throw FeedMissingFile(feed_path(directory, required));
    }

    std::unordered_map<std::string, uint32_t> stop_ix, route_ix, trip_ix;

    {
        CsvReader r(feed_path(directory, "stops.txt"));
        int c_id = require_column(r, "stop_id");
        int c_name = r.column("stop_name");
        int c_lat = require_column(r, "stop_lat");
        int c_lon = require_column(r, "stop_lon");
        std::vector<std::string> row;
        while (r.next(row)) {
            Stop s;
            s.stop_id = field(row, c_id);
            if (s.stop_id.empty())
                throw FeedValueError(r.path(), r.line_number(), "empty stop_id");
            if (stop_ix.count(s.stop_id))
                throw FeedValueError(r.path(), r.line_number(), "duplicate stop_id " + s.stop_id);
            s.name = field(row, c_name);
            s.lat = parse_double_or_throw(field(row, c_lat), r.path(), r.line_number(), "stop_lat");
            s.lon = parse_double_or_throw(field(row, c_lon), r.path(), r.line_number(), "stop_lon");
            if (s.lat < -90.0 || s.lat > 90.0)
                throw FeedValueError(r.path(), r.line_number(), "stop_lat out of range");
            if (s.lon < -180.0 || s.lon > 180.0)
                throw FeedValueError(r.path(), r.line_number(), "stop_lon out of range");
            stop_ix.emplace(s.stop_id, uint32_t(net.stops.size()));
            net.stops.push_back(std::move(s));
        }
    }

    {
        CsvReader r(feed_path(directory, "routes.txt"));
        int c_id = require_column(r, "route_id");
        int c_type = require_column(r, "route_type");
        int c_agency = r.column("agency_id");
        std::vector<std::string> row;
        while (r.next(row)) {
            TransitRoute rt;
            rt.route_id = field(row, c_id);
            if (rt.route_id.empty())
                throw FeedValueError(r.path(), r.line_number(), "empty route_id");
            if (route_ix.count(rt.route_id))
                throw FeedValueError(r.path(), r.line_number(), "duplicate route_id " + rt.route_id);
            rt.mode = mode_from_route_type(
                int(parse_int_or_throw(field(row, c_type), r.path(), r.line_number(), "route_type")));
            rt.agency = field(row, c_agency);
            route_ix.emplace(rt.route_id, uint32_t(net.routes.size()));
            net.routes.push_back(std::move(rt));
        }
    }

    {
        CsvReader r(feed_path(directory, "trips.txt"));
        int c_route = require_column(r, "route_id");
        int c_trip = require_column(r, "trip_id");
        std::vector<std::string> row;
        while (r.next(row)) {
            VehicleTrip t;
            t.trip_id = field(row, c_trip);
            if (t.trip_id.empty())
                throw FeedValueError(r.path(), r.line_number(), "empty trip_id");
            if (trip_ix.count(t.trip_id))
                throw FeedValueError(r.path(), r.line_number(), "duplicate trip_id " + t.trip_id);
            const std::string& route_id = field(row, c_route);
            auto it = route_ix.find(route_id);
            if (it == route_ix.end())
                throw FeedReferenceError(r.path(), r.line_number(),
                                         "trip " + t.trip_id + " references unknown route " + route_id);
            t.route = it->second;
            t.capacity = 0;  // filled from vehicles.txt or mode default below
            trip_ix.emplace(t.trip_id, uint32_t(net.trips.size()));
            net.trips.push_back(std::move(t));
        }
    }

    {
        CsvReader r(feed_path(directory, "stop_times.txt"));
        int c_trip = require_column(r, "trip_id");
        int c_arr = require_column(r, "arrival_time");
        int c_dep = require_column(r, "departure_time");
        int c_stop = require_column(r, "stop_id");
        int c_seq = require_column(r, "stop_sequence");
        std::vector<std::string> row;
        // (trip, sequence, stop_time, line) gathered first, then ordered by sequence.
        struct Entry {
            uint32_t trip;
            long seq;
            StopTime st;
            size_t line;
        };
        std::vector<Entry> entries;
        while (r.next(row)) {
            Entry e;
            const std::string& trip_id = field(row, c_trip);
            auto it = trip_ix.find(trip_id);
            if (it == trip_ix.end())
                throw FeedReferenceError(r.path(), r.line_number(),
                                         "stop_time references unknown trip " + trip_id);
            e.trip = it->second;
            const std::string& stop_id = field(row, c_stop);
            auto sit = stop_ix.find(stop_id);
            if (sit == stop_ix.end())
                throw FeedReferenceError(r.path(), r.line_number(),
                                         "stop_time references unknown stop " + stop_id);
            e.st.stop = sit->second;
            auto arr = parse_hms(field(row, c_arr));
            auto dep = parse_hms(field(row, c_dep));
            if (!arr) throw FeedValueError(r.path(), r.line_number(), "bad arrival_time");
            if (!dep) throw FeedValueError(r.path(), r.line_number(), "bad departure_time");
            e.st.arrival = *arr;
            e.st.departure = *dep;
            if (e.st.departure < e.st.arrival)
                throw FeedOrderError(r.path(), r.line_number(),
                                     "departure before arrival in trip " + trip_id);
            e.seq = parse_int_or_throw(field(row, c_seq), r.path(), r.line_number(), "stop_sequence");
            e.line = r.line_number();
            entries.push_back(e);
        }
        std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
            if (a.trip != b.trip) return a.trip < b.trip;
            return a.seq < b.seq;
        });
        for (const auto& e : entries) {
            auto& st = net.trips[e.trip].stop_times;
            if (!st.empty()) {
                if (st.back().departure > e.st.arrival)
                    throw FeedOrderError(r.path(), e.line,
                                         "stop_times not time-ordered in trip " +
                                             net.trips[e.trip].trip_id);
            }
            st.push_back(e.st);
        }
        for (const auto& t : net.trips) {
            if (t.stop_times.empty())
                throw FeedValueError(r.path(), 0, "trip " + t.trip_id + " has no stop_times");
        }
    }

    {
        std::string path = feed_path(directory, "transfers.txt");
        if (file_exists(path)) {
            CsvReader r(path);
            int c_from = require_column(r, "from_stop_id");
            int c_to = require_column(r, "to_stop_id");
            int c_time = require_column(r, "min_transfer_time");
            std::vector<std::string> row;
            // Duplicate (from, to) rows collapse to the shortest walk.
            std::unordered_map<uint64_t, size_t> seen;
            while (r.next(row)) {
                TransferLink l;
                const std::string& from = field(row, c_from);
                const std::string& to = field(row, c_to);
                auto fit = stop_ix.find(from);
                if (fit == stop_ix.end())
                    throw FeedReferenceError(r.path(), r.line_number(),
                                             "transfer references unknown stop " + from);
                auto tit = stop_ix.find(to);
                if (tit == stop_ix.end())
                    throw FeedReferenceError(r.path(), r.line_number(),
                                             "transfer references unknown stop " + to);
                l.from_stop = fit->second;
                l.to_stop = tit->second;
                if (l.from_stop == l.to_stop)
                    throw FeedValueError(r.path(), r.line_number(), "transfer from stop to itself");
                long w = parse_int_or_throw(field(row, c_time), r.path(), r.line_number(),
                                            "min_transfer_time");
                if (w < 0)
                    throw FeedValueError(r.path(), r.line_number(), "negative min_transfer_time");
                l.walk_time = Seconds(w);
                uint64_t key = (uint64_t(l.from_stop) << 32) | l.to_stop;
                auto it = seen.find(key);
                if (it != seen.end()) {
                    auto& prev = net.transfers[it->second];
                    prev.walk_time = std::min(prev.walk_time, l.walk_time);
                } else {
                    seen.emplace(key, net.transfers.size());
                    net.transfers.push_back(l);
                }
            }
        }
    }

    {
        std::string path = feed_path(directory, "vehicles.txt");
        if (file_exists(path)) {
            CsvReader r(path);
            int c_trip = require_column(r, "trip_id");
            int c_cap = require_column(r, "capacity");
            std::vector<std::string> row;
            while (r.next(row)) {
                const std::string& trip_id = field(row, c_trip);
                auto it = trip_ix.find(trip_id);
                if (it == trip_ix.end())
                    throw FeedReferenceError(r.path(), r.line_number(),
                                             "vehicle row references unknown trip " + trip_id);
                long cap = parse_int_or_throw(field(row, c_cap), r.path(), r.line_number(), "capacity");
                if (cap < 1)
                    throw FeedValueError(r.path(), r.line_number(),
                                         "capacity must be >= 1 for trip " + trip_id);
                net.trips[it->second].capacity = int(cap);
            }
        }
    }
    for (auto& t : net.trips) {
        if (t.capacity <= 0) t.capacity = default_capacity(net.routes[t.route].mode);
    }

    net.build_index();
    return net;
}

DemandSet parse_demand(const std::string& path) {
    if (!file_exists(path)) throw FeedMissingFile(path);
    CsvReader r(path);
    int c_person = require_column(r, "person_id");
    int c_origin = require_column(r, "origin_stop");
    int c_dest = require_column(r, "destination_stop");
    int c_arr = require_column(r, "preferred_arrival");

    DemandSet demand;
    std::vector<std::string> row;
    while (r.next(row)) {
        TripRequest q;
        q.person_id = field(row, c_person);
        if (q.person_id.empty()) throw DemandParseError(r.line_number(), "empty person_id");
        q.origin_stop = field(row, c_origin);
        q.destination_stop = field(row, c_dest);
        if (q.origin_stop.empty() || q.destination_stop.empty())
            throw DemandParseError(r.line_number(), "empty stop id");
        if (q.origin_stop == q.destination_stop) throw DemandDegenerateTrip(r.line_number());
        auto t = parse_hms(field(row, c_arr));
        if (!t)
            throw DemandParseError(r.line_number(),
                                   "bad preferred_arrival '" + field(row, c_arr) + "'");
        q.preferred_arrival = *t;
        demand.requests.push_back(std::move(q));
    }

    std::stable_sort(demand.requests.begin(), demand.requests.end(),
                     [](const TripRequest& a, const TripRequest& b) {
                         if (a.preferred_arrival != b.preferred_arrival)
                             return a.preferred_arrival < b.preferred_arrival;
                         return a.person_id < b.person_id;
                     });

    std::vector<std::string> persons;
    persons.reserve(demand.requests.size());
    for (const auto& q : demand.requests) persons.push_back(q.person_id);
    std::sort(persons.begin(), persons.end());
    demand.distinct_persons = size_t(std::unique(persons.begin(), persons.end()) - persons.begin());
    return demand;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

ValidationReport validate_feed(const TransitNetwork& net) {
    ValidationReport report;
    for (uint32_t s = 0; s < net.stops.size(); ++s) {
        if (net.trips_at(s).empty()) {
            report.issues.push_back(
                {"unserved_stop", net.stops[s].stop_id, "no trip serves this stop"});
        }
    }
    for (const auto& t : net.trips) {
        if (t.capacity == 1) {
            report.issues.push_back(
                {"degenerate_capacity", t.trip_id, "capacity 1 carries a single passenger"});
        }
    }
    for (const auto& l : net.transfers) {
        if (net.trips_at(l.to_stop).empty()) {
            report.issues.push_back({"unreachable_transfer", net.stops[l.from_stop].stop_id,
                                     "transfer leads to unserved stop " +
                                         net.stops[l.to_stop].stop_id});
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// Canonical serialization
// ---------------------------------------------------------------------------

template <typename T, typename Key>
static std::vector<uint32_t> sorted_indices(const std::vector<T>& v, Key key) {
    std::vector<uint32_t> ix(v.size());
    for (uint32_t i = 0; i < ix.size(); ++i) ix[i] = i;
    std::sort(ix.begin(), ix.end(), [&](uint32_t a, uint32_t b) { return key(v[a]) < key(v[b]); });
    return ix;
}

void serialize_feed(const TransitNetwork& net, const std::string& directory) {
    fs::create_directories(directory);

    auto stop_order = sorted_indices(net.stops, [](const Stop& s) { return s.stop_id; });
    auto route_order = sorted_indices(net.routes, [](const TransitRoute& r) { return r.route_id; });
    auto trip_order = sorted_indices(net.trips, [](const VehicleTrip& t) { return t.trip_id; });

    {
        CsvWriter w;
        w.row({"stop_id", "stop_name", "stop_lat", "stop_lon"});
        for (uint32_t i : stop_order) {
            const Stop& s = net.stops[i];
            w.row({s.stop_id, s.name, format_double(s.lat), format_double(s.lon)});
        }
        write_file(feed_path(directory, "stops.txt"), w.str());
    }
    {
        CsvWriter w;
        w.row({"route_id", "agency_id", "route_type"});
        for (uint32_t i : route_order) {
            const TransitRoute& r = net.routes[i];
            w.row({r.route_id, r.agency, std::to_string(route_type_of(r.mode))});
        }
        write_file(feed_path(directory, "routes.txt"), w.str());
    }
    {
        CsvWriter w;
        w.row({"route_id", "trip_id"});
        for (uint32_t i : trip_order) {
            const VehicleTrip& t = net.trips[i];
            w.row({net.routes[t.route].route_id, t.trip_id});
        }
        write_file(feed_path(directory, "trips.txt"), w.str());
    }
    {
        CsvWriter w;
        w.row({"trip_id", "arrival_time", "departure_time", "stop_id", "stop_sequence"});
        for (uint32_t i : trip_order) {
            const VehicleTrip& t = net.trips[i];
            for (size_t p = 0; p < t.stop_times.size(); ++p) {
                const StopTime& st = t.stop_times[p];
                w.row({t.trip_id, format_hms(st.arrival), format_hms(st.departure),
                       net.stops[st.stop].stop_id, std::to_string(p)});
            }
        }
        write_file(feed_path(directory, "stop_times.txt"), w.str());
    }
    {
        CsvWriter w;
        w.row({"from_stop_id", "to_stop_id", "min_transfer_time"});
        std::vector<uint32_t> order = sorted_indices(net.transfers, [&](const TransferLink& l) {
            return net.stops[l.from_stop].stop_id + "\x01" + net.stops[l.to_stop].stop_id;
        });
        for (uint32_t i : order) {
            const TransferLink& l = net.transfers[i];
            w.row({net.stops[l.from_stop].stop_id, net.stops[l.to_stop].stop_id,
                   std::to_string(l.walk_time)});
        }
        write_file(feed_path(directory, "transfers.txt"), w.str());
    }
    {
        CsvWriter w;
        w.row({"trip_id", "capacity"});
        for (uint32_t i : trip_order) {
            const VehicleTrip& t = net.trips[i];
            w.row({t.trip_id, std::to_string(t.capacity)});
        }
        write_file(feed_path(directory, "vehicles.txt"), w.str());
    }
}

std::string serialize_demand(const DemandSet& demand) {
    CsvWriter w;
    w.row({"person_id", "origin_stop", "destination_stop", "preferred_arrival"});
    for (const auto& q : demand.requests) {
        w.row({q.person_id, q.origin_stop, q.destination_stop, format_hms(q.preferred_arrival)});
    }
    return w.str();
}

void write_demand(const DemandSet& demand, const std::string& path) {
    write_file(path, serialize_demand(demand));
}

}  // namespace transepi

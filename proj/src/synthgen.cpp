#include "transepi/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include <json.hpp>

#include "transepi/rng.hpp"

namespace transepi {

namespace {

std::string zero_padded(const char* prefix, int value, int width) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s%0*d", prefix, width, value);
    return buf;
}

}  // namespace

SyntheticCity generate_city(const CityParams& p) {
    if (p.n_stops < 2) throw InfeasibleParams("need at least 2 stops");
    if (p.n_routes < 1) throw InfeasibleParams("need at least 1 route");
    if (p.trips_per_route < 1) throw InfeasibleParams("need at least 1 trip per route");
    if (p.n_persons < 1) throw InfeasibleParams("need at least 1 person");
    if (p.service_span < p.inter_stop_time * 2)
        throw InfeasibleParams("service span too short for a single trip");
    for (const auto& peak : p.commute_peaks) {
        if (peak.mean_s < p.service_start || peak.mean_s > p.service_start + p.service_span)
            throw InfeasibleParams("commute peak outside the service window");
    }
    if (p.commute_peaks.empty()) throw InfeasibleParams("need at least one commute peak");

    SyntheticCity city;
    TransitNetwork& net = city.network;

    // Stops on a near-square grid, row-major.
    int rows = std::max(1, int(std::floor(std::sqrt(double(p.n_stops)))));
    int cols = (p.n_stops + rows - 1) / rows;
    auto stop_at = [&](int r, int c) { return r * cols + c; };
    for (int i = 0; i < p.n_stops; ++i) {
        Stop s;
        s.stop_id = zero_padded("S", i, 3);
        s.name = "Stop " + std::to_string(i / cols) + "-" + std::to_string(i % cols);
        s.lat = 40.0 + 0.01 * double(i / cols);
        s.lon = -100.0 + 0.01 * double(i % cols);
        net.stops.push_back(std::move(s));
    }

    // Route lines: grid rows, grid columns, then diagonals through the center.
    std::vector<std::vector<uint32_t>> lines;
    for (int r = 0; r < rows && int(lines.size()) < p.n_routes; ++r) {
        std::vector<uint32_t> line;
        for (int c = 0; c < cols; ++c) {
            int s = stop_at(r, c);
            if (s < p.n_stops) line.push_back(uint32_t(s));
        }
        if (line.size() >= 2) lines.push_back(std::move(line));
    }
    for (int c = 0; c < cols && int(lines.size()) < p.n_routes; ++c) {
        std::vector<uint32_t> line;
        for (int r = 0; r < rows; ++r) {
            int s = stop_at(r, c);
            if (s < p.n_stops) line.push_back(uint32_t(s));
        }
        if (line.size() >= 2) lines.push_back(std::move(line));
    }
    {
        // Radial diagonals; repeated with small offsets if more are requested.
        int offset = 0;
        while (int(lines.size()) < p.n_routes) {
            std::vector<uint32_t> d1, d2;
            for (int r = 0; r < rows; ++r) {
                int c1 = (r + offset) % cols;
                int c2 = (cols - 1 - r % cols + offset) % cols;
                int s1 = stop_at(r, c1), s2 = stop_at(r, c2);
                if (s1 < p.n_stops) d1.push_back(uint32_t(s1));
                if (s2 < p.n_stops) d2.push_back(uint32_t(s2));
            }
            if (d1.size() >= 2 && int(lines.size()) < p.n_routes) lines.push_back(d1);
            if (d2.size() >= 2 && int(lines.size()) < p.n_routes) lines.push_back(d2);
            ++offset;
            if (offset > cols) break;  // no more distinct diagonals
        }
    }

    for (size_t li = 0; li < lines.size(); ++li) {
        TransitRoute r;
        r.route_id = zero_padded("R", int(li), 2);
        r.mode = TransitMode::bus;
        r.agency = "synth";
        net.routes.push_back(std::move(r));
    }

    // Timetables: departures evenly spaced over the span, alternating
    // direction, fixed inter-stop run time, zero dwell.
    Seconds headway = std::max<Seconds>(60, p.service_span / p.trips_per_route);
    for (size_t li = 0; li < lines.size(); ++li) {
        for (int k = 0; k < p.trips_per_route; ++k) {
            VehicleTrip t;
            t.trip_id = zero_padded("R", int(li), 2) + zero_padded("_T", k, 3);
            t.route = uint32_t(li);
            t.capacity = p.default_capacity;
            std::vector<uint32_t> seq = lines[li];
            if (k % 2 == 1) std::reverse(seq.begin(), seq.end());
            Seconds dep = p.service_start + Seconds(k) * headway;
            for (size_t s = 0; s < seq.size(); ++s) {
                Seconds at = dep + Seconds(s) * p.inter_stop_time;
                t.stop_times.push_back({seq[s], at, at});
            }
            net.trips.push_back(std::move(t));
        }
    }

    // Walking links between grid neighbors, both directions.
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            int s = stop_at(r, c);
            if (s >= p.n_stops) continue;
            int right = c + 1 < cols ? stop_at(r, c + 1) : -1;
            int down = r + 1 < rows ? stop_at(r + 1, c) : -1;
            for (int other : {right, down}) {
                if (other < 0 || other >= p.n_stops) continue;
                net.transfers.push_back({uint32_t(s), uint32_t(other), p.transfer_walk});
                net.transfers.push_back({uint32_t(other), uint32_t(s), p.transfer_walk});
            }
        }
    }

    net.build_index();

    // Demand: one request per person per commute peak, uniform distinct
    // origin/destination, preferred arrival normal around the peak and
    // clamped to the service window.
    RandomStream stream(derive_seed(p.seed, 0xc17f));
    Seconds window_lo = p.service_start;
    Seconds window_hi = p.service_start + p.service_span;
    for (int person = 0; person < p.n_persons; ++person) {
        std::string person_id = zero_padded("P", person, 5);
        for (const auto& peak : p.commute_peaks) {
            TripRequest q;
            q.person_id = person_id;
            uint32_t o = uint32_t(stream.next_below(uint64_t(p.n_stops)));
            uint32_t d = uint32_t(stream.next_below(uint64_t(p.n_stops - 1)));
            if (d >= o) ++d;
            q.origin_stop = net.stops[o].stop_id;
            q.destination_stop = net.stops[d].stop_id;
            double arrival = peak.mean_s + peak.std_s * stream.next_normal();
            q.preferred_arrival =
                std::clamp(Seconds(std::lround(arrival)), window_lo, window_hi);
            city.demand.requests.push_back(std::move(q));
        }
    }
    std::stable_sort(city.demand.requests.begin(), city.demand.requests.end(),
                     [](const TripRequest& a, const TripRequest& b) {
                         if (a.preferred_arrival != b.preferred_arrival)
                             return a.preferred_arrival < b.preferred_arrival;
                         return a.person_id < b.person_id;
                     });
    city.demand.distinct_persons = size_t(p.n_persons);

    city.manifest.params = p;
    city.manifest.n_stops = net.stops.size();
    city.manifest.n_routes = net.routes.size();
    city.manifest.n_trips = net.trips.size();
    city.manifest.n_transfers = net.transfers.size();
    city.manifest.n_persons = size_t(p.n_persons);
    city.manifest.n_requests = city.demand.requests.size();
    return city;
}

std::string manifest_to_json(const CityManifest& m) {
    nlohmann::json j;
    nlohmann::json peaks = nlohmann::json::array();
    for (const auto& p : m.params.commute_peaks)
        peaks.push_back({{"mean_s", p.mean_s}, {"std_s", p.std_s}});
    j["params"] = {{"n_stops", m.params.n_stops},
                   {"n_routes", m.params.n_routes},
                   {"trips_per_route", m.params.trips_per_route},
                   {"service_start", m.params.service_start},
                   {"service_span", m.params.service_span},
                   {"default_capacity", m.params.default_capacity},
                   {"n_persons", m.params.n_persons},
                   {"commute_peaks", peaks},
                   {"inter_stop_time", m.params.inter_stop_time},
                   {"transfer_walk", m.params.transfer_walk},
                   {"seed", m.params.seed}};
    j["counts"] = {{"stops", m.n_stops},     {"routes", m.n_routes},
                   {"trips", m.n_trips},     {"transfers", m.n_transfers},
                   {"persons", m.n_persons}, {"requests", m.n_requests}};
    return j.dump(2) + "\n";
}

CityManifest generate_city_files(const CityParams& params, const std::string& out_dir) {
    SyntheticCity city = generate_city(params);
    std::filesystem::create_directories(out_dir);
    serialize_feed(city.network, out_dir);
    write_demand(city.demand, (std::filesystem::path(out_dir) / "demand.csv").string());
    write_file((std::filesystem::path(out_dir) / "manifest.json").string(),
               manifest_to_json(city.manifest));
    return city.manifest;
}

}  // namespace transepi

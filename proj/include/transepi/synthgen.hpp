#ifndef TRANSEPI_SYNTHGEN_HPP
#define TRANSEPI_SYNTHGEN_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "transepi/feed.hpp"

namespace transepi {

struct InfeasibleParams : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CommutePeak {
    double mean_s = 0.0;  // seconds since midnight
    double std_s = 3600.0;
};

// Parameters of a generated city. Stops form a near-square grid; routes are
// the grid rows and columns plus diagonals through the center; each person
// files one trip request per commute peak.
struct CityParams {
    int n_stops = 36;
    int n_routes = 14;
    int trips_per_route = 28;       // directions alternate trip by trip
    Seconds service_start = 6 * 3600;
    Seconds service_span = 16 * 3600;
    int default_capacity = 40;
    int n_persons = 2200;
    std::vector<CommutePeak> commute_peaks = {{7.5 * 3600, 3600.0}, {17.5 * 3600, 3600.0}};
    Seconds inter_stop_time = 600;
    Seconds transfer_walk = 120;
    uint64_t seed = 42;
};

struct CityManifest {
    CityParams params;
    size_t n_stops = 0;
    size_t n_routes = 0;
    size_t n_trips = 0;
    size_t n_transfers = 0;
    size_t n_persons = 0;
    size_t n_requests = 0;
};

struct SyntheticCity {
    TransitNetwork network;
    DemandSet demand;
    CityManifest manifest;
};

SyntheticCity generate_city(const CityParams& params);

// Writes the feed files, demand.csv and manifest.json into a directory,
// byte-identical for identical parameters.
CityManifest generate_city_files(const CityParams& params, const std::string& out_dir);

std::string manifest_to_json(const CityManifest& m);

}  // namespace transepi

#endif

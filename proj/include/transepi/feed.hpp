#ifndef TRANSEPI_FEED_HPP
#define TRANSEPI_FEED_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "transepi/util.hpp"

namespace transepi {

// ---------------------------------------------------------------------------
// Errors. Parse diagnostics carry file and 1-based line where applicable.
// ---------------------------------------------------------------------------

struct FeedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct FeedMissingFile : FeedError {
    explicit FeedMissingFile(const std::string& path)
        : FeedError("missing required feed file: " + path) {}
};
struct FeedReferenceError : FeedError {
    FeedReferenceError(const std::string& file, size_t line, const std::string& what)
        : FeedError(file + ":" + std::to_string(line) + ": " + what) {}
};
struct FeedOrderError : FeedError {
    FeedOrderError(const std::string& file, size_t line, const std::string& what)
        : FeedError(file + ":" + std::to_string(line) + ": " + what) {}
};
struct FeedValueError : FeedError {
    FeedValueError(const std::string& file, size_t line, const std::string& what)
        : FeedError(file + ":" + std::to_string(line) + ": " + what) {}
};
struct DemandParseError : FeedError {
    DemandParseError(size_t line, const std::string& what)
        : FeedError("demand line " + std::to_string(line) + ": " + what) {}
};
struct DemandDegenerateTrip : FeedError {
    explicit DemandDegenerateTrip(size_t line)
        : FeedError("demand line " + std::to_string(line) +
                    ": origin equals destination") {}
};

// ---------------------------------------------------------------------------
// Domain types. String ids are the external keys; dense indices are used for
// all internal references.
// ---------------------------------------------------------------------------

enum class TransitMode : uint8_t { bus, light_rail, heavy_rail, ferry };

const char* mode_name(TransitMode m);

// Default vehicle capacity when the feed carries none for a trip.
int default_capacity(TransitMode m);

struct Stop {
    std::string stop_id;
    std::string name;
    double lat = 0.0;
    double lon = 0.0;
};

struct TransitRoute {
    std::string route_id;
    TransitMode mode = TransitMode::bus;
    std::string agency;
};

struct StopTime {
    uint32_t stop = 0;  // index into stops
    Seconds arrival = 0;
    Seconds departure = 0;
};

struct VehicleTrip {
    std::string trip_id;
    uint32_t route = 0;  // index into routes
    int capacity = 1;
    std::vector<StopTime> stop_times;  // time-ordered along the trip
};

struct TransferLink {
    uint32_t from_stop = 0;
    uint32_t to_stop = 0;
    Seconds walk_time = 0;
};

// A (trip, position) pair recorded at every stop the trip serves.
struct TripAtStop {
    uint32_t trip = 0;
    uint32_t pos = 0;  // index into the trip's stop_times
};

class TransitNetwork {
public:
    std::vector<Stop> stops;
    std::vector<TransitRoute> routes;
    std::vector<VehicleTrip> trips;
    std::vector<TransferLink> transfers;

    // Rebuilds lookup tables and the stop -> served-trips index. Must be
    // called after the vectors above are populated or mutated.
    void build_index();

    const std::vector<TripAtStop>& trips_at(uint32_t stop) const { return trips_at_stop_[stop]; }
    const std::vector<uint32_t>& transfers_from(uint32_t stop) const { return transfers_from_[stop]; }

    int stop_index(const std::string& id) const;
    int route_index(const std::string& id) const;
    int trip_index(const std::string& id) const;

private:
    std::unordered_map<std::string, uint32_t> stop_by_id_;
    std::unordered_map<std::string, uint32_t> route_by_id_;
    std::unordered_map<std::string, uint32_t> trip_by_id_;
    std::vector<std::vector<TripAtStop>> trips_at_stop_;  // sorted by departure, trip, pos
    std::vector<std::vector<uint32_t>> transfers_from_;   // indices into transfers
};

struct TripRequest {
    std::string person_id;
    std::string origin_stop;
    std::string destination_stop;
    Seconds preferred_arrival = 0;
};

struct DemandSet {
    std::vector<TripRequest> requests;  // sorted by (preferred_arrival, person_id)
    size_t distinct_persons = 0;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

// Reads stops.txt, routes.txt, trips.txt and stop_times.txt (all required)
// plus transfers.txt and vehicles.txt (optional) from a directory. Trips
// without a vehicles.txt row get the per-mode default capacity.
TransitNetwork parse_transit_feed(const std::string& directory);

// Reads person_id,origin_stop,destination_stop,preferred_arrival (HH:MM:SS).
DemandSet parse_demand(const std::string& path);

struct ValidationIssue {
    std::string kind;     // "unserved_stop" | "degenerate_capacity" | "unreachable_transfer"
    std::string subject;  // id of the offending entity
    std::string detail;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;
    bool clean() const { return issues.empty(); }
};

ValidationReport validate_feed(const TransitNetwork& net);

// Canonical serialization: rows sorted by id, times normalized to HH:MM:SS.
// parse(serialize(net)) reproduces the network; serialize is idempotent on
// canonicalized feeds. Writes the same file set parse_transit_feed reads.
void serialize_feed(const TransitNetwork& net, const std::string& directory);

std::string serialize_demand(const DemandSet& demand);
void write_demand(const DemandSet& demand, const std::string& path);

}  // namespace transepi

#endif

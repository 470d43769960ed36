#ifndef TRANSEPI_ASSIGNMENT_HPP
#define TRANSEPI_ASSIGNMENT_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "transepi/feed.hpp"

namespace transepi {

struct UnknownStop : std::runtime_error {
    explicit UnknownStop(const std::string& id) : std::runtime_error("unknown stop: " + id) {}
};
struct EmptyChoiceSet : std::runtime_error {
    EmptyChoiceSet() : std::runtime_error("logit choice set is empty") {}
};

// Utility weights from a calibrated route choice model: minutes of in-vehicle
// time, waiting, walking, plus a per-transfer penalty.
constexpr double kWaitWeight = 1.77;
constexpr double kWalkWeight = 3.93;
constexpr double kTransferPenalty = 47.73;

struct PathUtilityComponents {
    double in_vehicle_min = 0.0;
    double waiting_min = 0.0;
    double walking_min = 0.0;
    int transfers = 0;
};

// u = t_iv + 1.77 t_wait + 3.93 t_walk + 47.73 transfers
double path_utility(const PathUtilityComponents& c);

struct RideLeg {
    uint32_t trip = 0;
    uint32_t board_pos = 0;   // positions in the trip's stop_times
    uint32_t alight_pos = 0;  // board_pos < alight_pos
};

struct CandidatePath {
    std::vector<RideLeg> legs;
    std::vector<Seconds> transfer_walks;  // walk before leg k+1 (0 = same stop)
    Seconds access_walk = 0;              // origin -> first board stop
    Seconds egress_walk = 0;              // last alight stop -> destination
    PathUtilityComponents components;
    double utility = 0.0;
    Seconds depart_time = 0;  // first boarding departure
    Seconds arrive_time = 0;  // arrival at the destination, egress included
};

struct Hyperpath {
    std::vector<CandidatePath> paths;    // ascending utility
    std::vector<double> probabilities;   // logit weights, sum to 1
};

// All timetable-feasible paths arriving in [preferred - window, preferred],
// ranked by ascending utility and truncated to at most max_paths. Paths use
// at most max_transfers vehicle changes and never reuse a vehicle trip.
// Ties in utility break on the leg sequence so the ranking is total.
std::vector<CandidatePath> enumerate_candidate_paths(const TransitNetwork& net,
                                                     const TripRequest& request, Seconds window,
                                                     int max_paths, int max_transfers = 2);

// Candidate paths plus their logit choice probabilities.
Hyperpath build_hyperpath(std::vector<CandidatePath> paths, double theta);

// p_i = exp(-theta u_i) / sum_j exp(-theta u_j), stabilized by shifting
// utilities so the smallest is zero before exponentiation.
std::vector<double> logit_probabilities(const std::vector<double>& utilities, double theta);

struct RideSegment {
    uint32_t trip = 0;
    uint32_t board_stop = 0;
    uint32_t alight_stop = 0;
    uint32_t board_pos = 0;
    uint32_t alight_pos = 0;
    Seconds board_time = 0;
    Seconds alight_time = 0;
};

struct Trajectory {
    std::string person_id;
    std::vector<RideSegment> segments;
    bool completed = false;
};

struct StrandedPerson {
    std::string person_id;
    std::string reason;  // "no_feasible_path" | "capacity_denied"
};

struct AssignmentResult {
    std::vector<Trajectory> trajectories;   // completed, non-stranded persons only
    std::vector<StrandedPerson> stranded;   // distinct persons, sorted by id
};

struct AssignmentParams {
    double theta = 0.2;
    int max_paths = 10;
    Seconds window = 30 * 60;
    int max_transfers = 2;
    uint64_t seed = 1;
    int threads = 0;  // 0 = hardware concurrency (path enumeration only)
};

// Per-request path preference lists: the logit-sampled choice first, then
// the remaining candidates by ascending utility. Indexed like the demand.
// Sampling streams are keyed per (person, request ordinal), so one person's
// preferences do not depend on who else is in the demand. Enumeration reads
// only the timetable, never capacities.
using PreferenceLists = std::vector<std::vector<CandidatePath>>;

PreferenceLists plan_preferences(const TransitNetwork& net, const DemandSet& demand,
                                 const AssignmentParams& params);

// Assigns every request a logit-sampled candidate path, then loads passengers
// onto vehicles under hard per-segment capacity. Boarding attempts are served
// in order of arrival at the stop (person id breaks ties); a denied passenger
// falls back to the next candidate in logit order; a passenger whose
// candidates are exhausted is stranded and all of their segments for the day
// are withdrawn, including those of already completed requests.
AssignmentResult simulate_loading(const TransitNetwork& net, const DemandSet& demand,
                                  const AssignmentParams& params);

// Loading step alone, with preferences planned beforehand (they are reusable
// across capacity variants of the same timetable).
AssignmentResult load_with_preferences(const TransitNetwork& net, const DemandSet& demand,
                                       const PreferenceLists& preferences);

size_t stranded_count(const AssignmentResult& result);

// trajectories.csv / stranded.csv round-trip (times in integer seconds).
std::string serialize_trajectories(const TransitNetwork& net, const std::vector<Trajectory>& trajs,
                                   const std::string& config_echo);
std::vector<Trajectory> read_trajectories(const TransitNetwork& net, const std::string& path);
std::string serialize_stranded(const std::vector<StrandedPerson>& stranded,
                               const std::string& config_echo);

}  // namespace transepi

#endif

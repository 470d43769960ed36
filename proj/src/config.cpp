#include "transepi/config.hpp"

#include <cmath>
#include <set>

#include <json.hpp>

#include "transepi/util.hpp"

namespace transepi {

using nlohmann::json;

std::string config_echo(const RunConfig& c) {
    json j;
    j["feed"] = c.feed_dir;
    j["demand"] = c.demand_path;
    j["out"] = c.out_dir;
    j["assignment"] = {{"theta", c.pipeline.assignment.theta},
                       {"max_paths", c.pipeline.assignment.max_paths},
                       {"window_s", c.pipeline.assignment.window},
                       {"max_transfers", c.pipeline.assignment.max_transfers},
                       {"seed", c.pipeline.assignment.seed}};
    j["epi"] = {{"n_seeds", c.pipeline.epi.n_seeds},
                {"horizon", c.pipeline.epi.horizon},
                {"infectious_period", c.pipeline.epi.infectious_period},
                {"n_runs", c.pipeline.epi.n_runs},
                {"master_seed", c.pipeline.epi.master_seed},
                {"d_max_s", c.pipeline.d_max}};
    j["grid"] = {{"demand_fractions", c.demand_fractions},
                 {"capacity_fractions", c.capacity_fractions}};
    j["options"] = {{"interpolate_pmax", c.pipeline.interpolate_pmax},
                    {"simple_graph", c.pipeline.simple_graph},
                    {"min_passengers", c.pipeline.min_passengers},
                    {"top_trips", c.report.top_trips},
                    {"top_routes", c.report.top_routes}};
    return j.dump();
}

namespace {

void apply_section(const json& j, const char* section, const std::set<std::string>& known) {
    if (!j.contains(section)) return;
    for (const auto& [key, value] : j.at(section).items()) {
        (void)value;
        if (!known.count(key))
            throw std::runtime_error(std::string("config: unknown key ") + section + "." + key);
    }
}

template <typename T>
void get_if(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

RunConfig load_config(const std::string& path) {
    RunConfig c;
    json j = json::parse(read_file(path));

    static const std::set<std::string> top_keys{"feed",  "demand", "out",    "assignment",
                                                "epi",   "grid",   "options"};
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (!top_keys.count(key)) throw std::runtime_error("config: unknown key " + key);
    }
    apply_section(j, "assignment", {"theta", "max_paths", "window_s", "max_transfers", "seed"});
    apply_section(j, "epi",
                  {"n_seeds", "horizon", "infectious_period", "n_runs", "master_seed", "d_max_s"});
    apply_section(j, "grid", {"demand_fractions", "capacity_fractions"});
    apply_section(j, "options",
                  {"interpolate_pmax", "simple_graph", "min_passengers", "top_trips", "top_routes"});

    get_if(j, "feed", c.feed_dir);
    get_if(j, "demand", c.demand_path);
    get_if(j, "out", c.out_dir);
    if (j.contains("assignment")) {
        const json& a = j["assignment"];
        get_if(a, "theta", c.pipeline.assignment.theta);
        get_if(a, "max_paths", c.pipeline.assignment.max_paths);
        get_if(a, "window_s", c.pipeline.assignment.window);
        get_if(a, "max_transfers", c.pipeline.assignment.max_transfers);
        get_if(a, "seed", c.pipeline.assignment.seed);
    }
    if (j.contains("epi")) {
        const json& e = j["epi"];
        get_if(e, "n_seeds", c.pipeline.epi.n_seeds);
        get_if(e, "horizon", c.pipeline.epi.horizon);
        get_if(e, "infectious_period", c.pipeline.epi.infectious_period);
        get_if(e, "n_runs", c.pipeline.epi.n_runs);
        get_if(e, "master_seed", c.pipeline.epi.master_seed);
        get_if(e, "d_max_s", c.pipeline.d_max);
    }
    if (j.contains("grid")) {
        const json& g = j["grid"];
        get_if(g, "demand_fractions", c.demand_fractions);
        get_if(g, "capacity_fractions", c.capacity_fractions);
    }
    if (j.contains("options")) {
        const json& o = j["options"];
        get_if(o, "interpolate_pmax", c.pipeline.interpolate_pmax);
        get_if(o, "simple_graph", c.pipeline.simple_graph);
        get_if(o, "min_passengers", c.pipeline.min_passengers);
        get_if(o, "top_trips", c.report.top_trips);
        get_if(o, "top_routes", c.report.top_routes);
    }
    return c;
}

std::vector<std::string> validate_config(const RunConfig& c, bool check_paths) {
    std::vector<std::string> errors;
    auto bad = [&](const std::string& field, const std::string& why) {
        errors.push_back(field + ": " + why);
    };

    if (c.pipeline.assignment.theta <= 0.0) bad("assignment.theta", "must be > 0");
    if (c.pipeline.assignment.max_paths < 1) bad("assignment.max_paths", "must be >= 1");
    if (c.pipeline.assignment.window <= 0) bad("assignment.window_s", "must be > 0");
    if (c.pipeline.assignment.max_transfers < 0) bad("assignment.max_transfers", "must be >= 0");

    if (c.pipeline.epi.n_seeds < 1) bad("epi.n_seeds", "must be >= 1");
    if (c.pipeline.epi.horizon < 1) bad("epi.horizon", "must be >= 1");
    if (c.pipeline.epi.infectious_period < 0) bad("epi.infectious_period", "must be >= 0");
    if (c.pipeline.epi.n_runs < 1) bad("epi.n_runs", "must be >= 1");
    if (c.pipeline.d_max <= 0) bad("epi.d_max_s", "must be > 0");

    if (c.pipeline.min_passengers < 1) bad("options.min_passengers", "must be >= 1");

    auto check_fraction = [&](double f, const char* field) {
        if (!(f > 0.0) || f > 1.0) bad(field, "must be in (0, 1]");
    };
    for (double d : c.demand_fractions) check_fraction(d, "grid.demand_fractions");
    for (double f : c.capacity_fractions) {
        check_fraction(f, "grid.capacity_fractions");
        if (!c.pipeline.interpolate_pmax) {
            try {
                pmax_for_capacity(f);
            } catch (const UnmappedCapacityFraction& e) {
                bad("grid.capacity_fractions", e.what());
            }
        }
    }
    if (c.demand_fractions.empty()) bad("grid.demand_fractions", "must not be empty");
    if (c.capacity_fractions.empty()) bad("grid.capacity_fractions", "must not be empty");

    if (check_paths) {
        if (c.feed_dir.empty()) bad("feed", "path required");
        else if (!file_exists(c.feed_dir)) bad("feed", "no such directory: " + c.feed_dir);
        if (c.demand_path.empty()) bad("demand", "path required");
        else if (!file_exists(c.demand_path)) bad("demand", "no such file: " + c.demand_path);
    }
    return errors;
}

}  // namespace transepi

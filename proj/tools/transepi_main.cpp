// Command line front end: composes the feed parser, assignment, contact
// network, epidemic simulation, scenario grid and reporting stages.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "transepi/analysis.hpp"
#include "transepi/assignment.hpp"
#include "transepi/config.hpp"
#include "transepi/contact.hpp"
#include "transepi/csv.hpp"
#include "transepi/epidemic.hpp"
#include "transepi/feed.hpp"
#include "transepi/scenario.hpp"
#include "transepi/synthgen.hpp"

namespace fs = std::filesystem;
using namespace transepi;

namespace {

// Writes files under a root directory and records manifest hashes.
struct Emitter {
    std::string root;
    std::map<std::string, std::string> manifest;

    void write(const std::string& rel, const std::string& content) {
        fs::path path = fs::path(root) / rel;
        fs::create_directories(path.parent_path());
        write_file(path.string(), content);
        manifest[rel] = "fnv1a64:" + to_hex(fnv1a64(content.data(), content.size()));
    }

    void finish(const std::string& echo) {
        write("manifest.json", manifest_json(manifest, echo));
    }
};

InfectionEstimates read_estimates(const ContactNetwork& contacts, const std::string& path) {
    CsvReader r(path);
    int c_person = r.column("person_id");
    int c_prob = r.column("probability");
    if (c_person < 0 || c_prob < 0)
        throw std::runtime_error(path + ": missing person_id/probability column");
    // Stored as an exact fraction over a large denominator so that
    // downstream counts behave like the in-memory estimates.
    constexpr uint64_t kScale = 1000000000ull;
    InfectionEstimates est;
    est.n_runs = kScale;
    est.infected_runs.assign(contacts.node_count(), 0);
    std::vector<std::string> row;
    while (r.next(row)) {
        int node = contacts.person_index(row[size_t(c_person)]);
        if (node < 0)
            throw std::runtime_error(path + ": person not in contact network: " +
                                     row[size_t(c_person)]);
        double p = std::stod(row[size_t(c_prob)]);
        est.infected_runs[size_t(node)] = uint64_t(std::llround(p * double(kScale)));
    }
    return est;
}

struct Cli {
    RunConfig config;
    std::string config_path;
    double window_min = -1.0;  // CLI convenience flag, converted to seconds

    void finalize() {
        if (window_min > 0) config.pipeline.assignment.window = Seconds(window_min * 60.0);
    }
};

void add_common_flags(CLI::App* cmd, Cli& cli) {
    cmd->add_option("--config", cli.config_path, "JSON config file; flags override its values");
    cmd->add_option("--feed", cli.config.feed_dir, "transit feed directory");
    cmd->add_option("--demand", cli.config.demand_path, "demand csv");
    cmd->add_option("--out", cli.config.out_dir, "output directory");
    cmd->add_option("--theta", cli.config.pipeline.assignment.theta, "logit dispersion per utility unit");
    cmd->add_option("--paths", cli.config.pipeline.assignment.max_paths, "candidate paths per request");
    cmd->add_option("--window-min", cli.window_min, "arrival window before the preferred time, minutes");
    cmd->add_option("--max-transfers", cli.config.pipeline.assignment.max_transfers, "transfer bound");
    cmd->add_option("--seed", cli.config.pipeline.assignment.seed, "assignment sampling seed");
    cmd->add_option("--n-seeds", cli.config.pipeline.epi.n_seeds, "initially infected passengers");
    cmd->add_option("--horizon", cli.config.pipeline.epi.horizon, "epidemic iterations (days)");
    cmd->add_option("--tau", cli.config.pipeline.epi.infectious_period, "infectious period, iterations");
    cmd->add_option("--runs", cli.config.pipeline.epi.n_runs, "Monte Carlo runs");
    cmd->add_option("--master-seed", cli.config.pipeline.epi.master_seed, "epidemic master seed");
    cmd->add_option("--dmax", cli.config.pipeline.d_max, "saturation contact duration, seconds");
    cmd->add_option("--threads", cli.config.pipeline.epi.threads, "worker threads (0 = auto)");
    cmd->add_flag("--interpolate-pmax", cli.config.pipeline.interpolate_pmax,
                  "linear p_max between the mapped capacity fractions (extrapolation, not data)");
    cmd->add_flag("--simple-graph", cli.config.pipeline.simple_graph,
                  "collapse parallel contact edges to the longest contact per pair");
    cmd->add_option("--min-passengers", cli.config.pipeline.min_passengers,
                    "risk ranking sample floor");
    cmd->add_option("--demand-fractions", cli.config.demand_fractions, "grid demand keep fractions");
    cmd->add_option("--capacity-fractions", cli.config.capacity_fractions, "grid capacity fractions");
}

int require_inputs(const Cli& cli, bool need_feed, bool need_demand) {
    if (need_feed && cli.config.feed_dir.empty()) {
        std::cerr << "error: --feed is required\n";
        return 1;
    }
    if (need_feed && !file_exists(cli.config.feed_dir)) {
        std::cerr << "error: feed directory not found: " << cli.config.feed_dir << "\n";
        return 1;
    }
    if (need_demand && cli.config.demand_path.empty()) {
        std::cerr << "error: --demand is required\n";
        return 1;
    }
    if (need_demand && !file_exists(cli.config.demand_path)) {
        std::cerr << "error: demand file not found: " << cli.config.demand_path << "\n";
        return 1;
    }
    return 0;
}

int cmd_ingest(const Cli& cli) {
    if (int rc = require_inputs(cli, true, !cli.config.demand_path.empty() ? true : false)) return rc;
    TransitNetwork net = parse_transit_feed(cli.config.feed_dir);
    std::cerr << "feed: " << net.stops.size() << " stops, " << net.routes.size() << " routes, "
              << net.trips.size() << " trips, " << net.transfers.size() << " transfers\n";
    ValidationReport report = validate_feed(net);
    for (const auto& issue : report.issues) {
        std::cerr << "warning: " << issue.kind << " " << issue.subject << ": " << issue.detail
                  << "\n";
    }
    if (!cli.config.demand_path.empty()) {
        DemandSet demand = parse_demand(cli.config.demand_path);
        std::cerr << "demand: " << demand.requests.size() << " requests, "
                  << demand.distinct_persons << " persons\n";
    }
    return 0;
}

int cmd_validate(const Cli& cli) {
    bool check_paths = !cli.config.feed_dir.empty() || !cli.config.demand_path.empty();
    auto errors = validate_config(cli.config, check_paths);
    if (check_paths && errors.empty()) {
        try {
            TransitNetwork net = parse_transit_feed(cli.config.feed_dir);
            DemandSet demand = parse_demand(cli.config.demand_path);
            (void)net;
            (void)demand;
        } catch (const std::exception& e) {
            errors.push_back(std::string("inputs: ") + e.what());
        }
    }
    for (const auto& e : errors) std::cerr << "invalid: " << e << "\n";
    if (errors.empty()) std::cerr << "config ok\n";
    return errors.empty() ? 0 : 1;
}

int cmd_assign(const Cli& cli) {
    if (int rc = require_inputs(cli, true, true)) return rc;
    TransitNetwork net = parse_transit_feed(cli.config.feed_dir);
    DemandSet demand = parse_demand(cli.config.demand_path);
    AssignmentResult result = simulate_loading(net, demand, cli.config.pipeline.assignment);
    std::string echo = config_echo(cli.config);
    Emitter out{cli.config.out_dir};
    out.write("trajectories.csv", serialize_trajectories(net, result.trajectories, echo));
    out.write("stranded.csv", serialize_stranded(result.stranded, echo));
    std::cerr << "assigned " << result.trajectories.size() << " trajectories, "
              << result.stranded.size() << " stranded\n";
    return 0;
}

int cmd_build_net(const Cli& cli) {
    if (int rc = require_inputs(cli, true, false)) return rc;
    TransitNetwork net = parse_transit_feed(cli.config.feed_dir);
    std::string traj_path = (fs::path(cli.config.out_dir) / "trajectories.csv").string();
    if (!file_exists(traj_path)) {
        std::cerr << "error: " << traj_path << " not found (run assign first)\n";
        return 1;
    }
    auto trajectories = read_trajectories(net, traj_path);
    ContactNetwork contacts = build_contact_network(trajectories, cli.config.pipeline.simple_graph);
    auto cliques = segment_clique_sizes(trajectories, net);
    NetworkStats stats = network_stats(contacts, cliques);
    ContactHistograms hists = temporal_histograms(contacts, cliques);

    std::string echo = config_echo(cli.config);
    Emitter out{cli.config.out_dir};
    out.write("contact_edges.csv", serialize_contact_edges(contacts, net, echo));
    out.write("contact_nodes.csv", serialize_contact_nodes(contacts, echo));
    {
        nlohmann::json j;
        j["nodes"] = stats.nodes;
        j["edges"] = stats.edges;
        j["max_degree"] = stats.max_degree;
        j["median_degree"] = stats.median_degree;
        j["mean_degree"] = stats.mean_degree;
        j["max_clique"] = stats.max_clique;
        j["median_clique"] = stats.median_clique;
        j["mean_clique"] = stats.mean_clique;
        j["config"] = nlohmann::json::parse(echo);
        out.write("stats.json", j.dump(2) + "\n");
    }
    out.write("hist_contact_start.csv", serialize_histogram(hists.contact_start, echo));
    out.write("hist_contact_duration.csv", serialize_histogram(hists.contact_duration, echo));
    out.write("hist_degree.csv", serialize_histogram(hists.degree, echo));
    out.write("hist_clique_size.csv", serialize_histogram(hists.clique_size, echo));
    std::cerr << "contact network: " << stats.nodes << " nodes, " << stats.edges << " edges\n";
    return 0;
}

int cmd_simulate(const Cli& cli, double capacity_fraction, double pmax_override) {
    if (int rc = require_inputs(cli, true, false)) return rc;
    TransitNetwork net = parse_transit_feed(cli.config.feed_dir);
    std::string edges = (fs::path(cli.config.out_dir) / "contact_edges.csv").string();
    std::string nodes = (fs::path(cli.config.out_dir) / "contact_nodes.csv").string();
    if (!file_exists(edges) || !file_exists(nodes)) {
        std::cerr << "error: contact files not found in " << cli.config.out_dir
                  << " (run build-net first)\n";
        return 1;
    }
    ContactNetwork contacts = read_contact_network(net, edges, nodes);
    double pmax = pmax_override >= 0.0
                      ? pmax_override
                      : (cli.config.pipeline.interpolate_pmax
                             ? pmax_for_capacity_interpolated(capacity_fraction)
                             : pmax_for_capacity(capacity_fraction));
    WeightedContactNetwork weighted =
        weight_network(std::move(contacts), {pmax, cli.config.pipeline.d_max});
    InfectionEstimates est = run_epidemic(weighted, cli.config.pipeline.epi);

    std::string echo = config_echo(cli.config);
    Emitter out{cli.config.out_dir};
    out.write("infection_estimates.csv", serialize_estimates(weighted.graph, est, echo));
    {
        nlohmann::json j;
        j["global_rate"] = global_infection_rate(est);
        j["endangered_count"] = endangered_count(est, 0.5);
        j["p_max"] = pmax;
        j["d_max_s"] = cli.config.pipeline.d_max;
        j["master_seed"] = cli.config.pipeline.epi.master_seed;
        j["config"] = nlohmann::json::parse(echo);
        out.write("epi_summary.json", j.dump(2) + "\n");
    }
    std::cerr << "global infection rate " << global_infection_rate(est) << ", endangered "
              << endangered_count(est, 0.5) << "\n";
    return 0;
}

int cmd_report(const Cli& cli) {
    if (int rc = require_inputs(cli, true, false)) return rc;
    TransitNetwork net = parse_transit_feed(cli.config.feed_dir);
    fs::path dir(cli.config.out_dir);
    for (const char* name :
         {"trajectories.csv", "contact_edges.csv", "contact_nodes.csv", "infection_estimates.csv"}) {
        if (!file_exists((dir / name).string())) {
            std::cerr << "error: " << (dir / name).string() << " not found\n";
            return 1;
        }
    }
    auto trajectories = read_trajectories(net, (dir / "trajectories.csv").string());
    ContactNetwork contacts = read_contact_network(net, (dir / "contact_edges.csv").string(),
                                                   (dir / "contact_nodes.csv").string());
    InfectionEstimates est = read_estimates(contacts, (dir / "infection_estimates.csv").string());

    std::string echo = config_echo(cli.config);
    Emitter out{cli.config.out_dir};
    auto trips = trip_risk_ranking(trajectories, net, contacts, est, cli.config.report.top_trips,
                                   size_t(cli.config.pipeline.min_passengers));
    auto routes = route_risk_ranking(trajectories, net, contacts, est, cli.config.report.top_routes,
                                     size_t(cli.config.pipeline.min_passengers));
    out.write("trip_risk.csv", serialize_trip_risks(trips, echo));
    out.write("route_risk.csv", serialize_route_risks(routes, echo));
    out.finish(echo);
    std::cerr << "ranked " << trips.size() << " trips, " << routes.size() << " routes\n";
    return 0;
}

int cmd_run(const Cli& cli) {
    if (int rc = require_inputs(cli, true, true)) return rc;
    TransitNetwork net = parse_transit_feed(cli.config.feed_dir);
    DemandSet demand = parse_demand(cli.config.demand_path);
    std::string echo = config_echo(cli.config);
    Emitter out{cli.config.out_dir};

    AssignmentResult assignment = simulate_loading(net, demand, cli.config.pipeline.assignment);
    out.write("trajectories.csv", serialize_trajectories(net, assignment.trajectories, echo));
    out.write("stranded.csv", serialize_stranded(assignment.stranded, echo));

    ContactNetwork contacts =
        build_contact_network(assignment.trajectories, cli.config.pipeline.simple_graph);
    auto cliques = segment_clique_sizes(assignment.trajectories, net);
    NetworkStats stats = network_stats(contacts, cliques);
    ContactHistograms hists = temporal_histograms(contacts, cliques);
    out.write("contact_edges.csv", serialize_contact_edges(contacts, net, echo));
    out.write("contact_nodes.csv", serialize_contact_nodes(contacts, echo));
    out.write("hist_contact_start.csv", serialize_histogram(hists.contact_start, echo));
    out.write("hist_contact_duration.csv", serialize_histogram(hists.contact_duration, echo));
    out.write("hist_degree.csv", serialize_histogram(hists.degree, echo));
    out.write("hist_clique_size.csv", serialize_histogram(hists.clique_size, echo));

    double pmax = cli.config.pipeline.interpolate_pmax ? pmax_for_capacity_interpolated(1.0)
                                                       : pmax_for_capacity(1.0);
    WeightedContactNetwork weighted =
        weight_network(std::move(contacts), {pmax, cli.config.pipeline.d_max});
    InfectionEstimates est = run_epidemic(weighted, cli.config.pipeline.epi);
    out.write("infection_estimates.csv", serialize_estimates(weighted.graph, est, echo));

    auto trips = trip_risk_ranking(assignment.trajectories, net, weighted.graph, est,
                                   cli.config.report.top_trips,
                                   size_t(cli.config.pipeline.min_passengers));
    auto routes = route_risk_ranking(assignment.trajectories, net, weighted.graph, est,
                                     cli.config.report.top_routes,
                                     size_t(cli.config.pipeline.min_passengers));
    out.write("trip_risk.csv", serialize_trip_risks(trips, echo));
    out.write("route_risk.csv", serialize_route_risks(routes, echo));

    {
        nlohmann::json j;
        j["nodes"] = stats.nodes;
        j["edges"] = stats.edges;
        j["max_degree"] = stats.max_degree;
        j["median_degree"] = stats.median_degree;
        j["mean_degree"] = stats.mean_degree;
        j["max_clique"] = stats.max_clique;
        j["median_clique"] = stats.median_clique;
        j["mean_clique"] = stats.mean_clique;
        j["stranded"] = assignment.stranded.size();
        j["global_rate"] = global_infection_rate(est);
        j["endangered_count"] = endangered_count(est, 0.5);
        j["p_max"] = pmax;
        j["d_max_s"] = cli.config.pipeline.d_max;
        j["master_seed"] = cli.config.pipeline.epi.master_seed;
        j["config"] = nlohmann::json::parse(echo);
        out.write("epi_summary.json", j.dump(2) + "\n");
    }
    out.finish(echo);
    std::cerr << "run complete: " << stats.nodes << " passengers, "
              << assignment.stranded.size() << " stranded, rate "
              << global_infection_rate(est) << "\n";
    return 0;
}

int cmd_grid(const Cli& cli) {
    if (int rc = require_inputs(cli, true, true)) return rc;
    auto errors = validate_config(cli.config, false);
    if (!errors.empty()) {
        for (const auto& e : errors) std::cerr << "invalid: " << e << "\n";
        return 1;
    }
    TransitNetwork net = parse_transit_feed(cli.config.feed_dir);
    DemandSet demand = parse_demand(cli.config.demand_path);
    auto specs = make_grid(cli.config.demand_fractions, cli.config.capacity_fractions,
                           cli.config.pipeline.assignment.seed);
    GridResult grid = run_grid(specs, net, demand, cli.config.pipeline);
    for (const auto& f : grid.failures) {
        std::cerr << "scenario " << f.scenario_id << " failed: " << f.error << "\n";
    }
    std::string echo = config_echo(cli.config);
    emit_reports(grid.reports, net, cli.config.out_dir, echo, cli.config.report);
    std::cerr << "grid: " << grid.reports.size() << " scenarios completed, "
              << grid.failures.size() << " failed\n";
    if (!grid.failures.empty()) return grid.reports.empty() ? 1 : 2;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"transit contact-network epidemic simulator"};
    app.require_subcommand(1);

    Cli cli;

    // synth
    CityParams city;
    std::string synth_out = "city";
    std::vector<double> peak_hours;
    auto* synth = app.add_subcommand("synth", "generate a synthetic city feed and demand");
    synth->add_option("--out", synth_out, "output directory");
    synth->add_option("--stops", city.n_stops, "stop count");
    synth->add_option("--routes", city.n_routes, "route count");
    synth->add_option("--trips-per-route", city.trips_per_route, "trips per route");
    synth->add_option("--capacity", city.default_capacity, "vehicle capacity");
    synth->add_option("--persons", city.n_persons, "person count");
    synth->add_option("--span-h", [&city](const std::vector<std::string>& v) {
        city.service_span = Seconds(std::stod(v[0]) * 3600.0);
        return true;
    }, "service span, hours");
    synth->add_option("--peak-hours", peak_hours, "commute peak means, hours since midnight");
    synth->add_option("--city-seed", city.seed, "generator seed");

    auto* ingest = app.add_subcommand("ingest", "parse and validate feed and demand");
    add_common_flags(ingest, cli);
    auto* validate = app.add_subcommand("validate", "check config and inputs without simulating");
    add_common_flags(validate, cli);
    auto* assign = app.add_subcommand("assign", "run the capacity-constrained assignment");
    add_common_flags(assign, cli);
    auto* buildnet = app.add_subcommand("build-net", "build the passenger contact network");
    add_common_flags(buildnet, cli);

    double sim_capacity_fraction = 1.0;
    double sim_pmax = -1.0;
    auto* simulate = app.add_subcommand("simulate", "run the epidemic Monte Carlo");
    add_common_flags(simulate, cli);
    simulate->add_option("--capacity-fraction", sim_capacity_fraction,
                         "capacity fraction for the p_max mapping");
    simulate->add_option("--pmax", sim_pmax, "override p_max directly");

    auto* report = app.add_subcommand("report", "rank risky trips and routes");
    add_common_flags(report, cli);
    auto* grid = app.add_subcommand("grid", "run the demand x capacity scenario grid");
    add_common_flags(grid, cli);
    auto* run = app.add_subcommand("run", "full single-scenario pipeline");
    add_common_flags(run, cli);

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) {
            if (!peak_hours.empty()) {
                city.commute_peaks.clear();
                for (double h : peak_hours) city.commute_peaks.push_back({h * 3600.0, 3600.0});
            }
            CityManifest m = generate_city_files(city, synth_out);
            std::cerr << "city: " << m.n_stops << " stops, " << m.n_trips << " trips, "
                      << m.n_requests << " requests -> " << synth_out << "\n";
            return 0;
        }

        // Config file first, then flags override it: re-parse the flags on
        // top of the loaded config by applying the file only where the flag
        // was not given.
        if (!cli.config_path.empty()) {
            RunConfig file_config = load_config(cli.config_path);
            CLI::App* sub = app.get_subcommands().front();
            auto keep_if_set = [&](const std::string& flag, auto member) {
                if (sub->count(flag) > 0) *member(file_config) = *member(cli.config);
            };
            keep_if_set("--feed", [](RunConfig& c) { return &c.feed_dir; });
            keep_if_set("--demand", [](RunConfig& c) { return &c.demand_path; });
            keep_if_set("--out", [](RunConfig& c) { return &c.out_dir; });
            keep_if_set("--theta", [](RunConfig& c) { return &c.pipeline.assignment.theta; });
            keep_if_set("--paths", [](RunConfig& c) { return &c.pipeline.assignment.max_paths; });
            keep_if_set("--max-transfers",
                        [](RunConfig& c) { return &c.pipeline.assignment.max_transfers; });
            keep_if_set("--seed", [](RunConfig& c) { return &c.pipeline.assignment.seed; });
            keep_if_set("--n-seeds", [](RunConfig& c) { return &c.pipeline.epi.n_seeds; });
            keep_if_set("--horizon", [](RunConfig& c) { return &c.pipeline.epi.horizon; });
            keep_if_set("--tau", [](RunConfig& c) { return &c.pipeline.epi.infectious_period; });
            keep_if_set("--runs", [](RunConfig& c) { return &c.pipeline.epi.n_runs; });
            keep_if_set("--master-seed", [](RunConfig& c) { return &c.pipeline.epi.master_seed; });
            keep_if_set("--dmax", [](RunConfig& c) { return &c.pipeline.d_max; });
            keep_if_set("--threads", [](RunConfig& c) { return &c.pipeline.epi.threads; });
            keep_if_set("--min-passengers", [](RunConfig& c) { return &c.pipeline.min_passengers; });
            keep_if_set("--demand-fractions", [](RunConfig& c) { return &c.demand_fractions; });
            keep_if_set("--capacity-fractions", [](RunConfig& c) { return &c.capacity_fractions; });
            if (sub->count("--interpolate-pmax") > 0)
                file_config.pipeline.interpolate_pmax = cli.config.pipeline.interpolate_pmax;
            if (sub->count("--simple-graph") > 0)
                file_config.pipeline.simple_graph = cli.config.pipeline.simple_graph;
            cli.config = file_config;
        }
        cli.finalize();
        cli.config.pipeline.assignment.threads = cli.config.pipeline.epi.threads;

        if (ingest->parsed()) return cmd_ingest(cli);
        if (validate->parsed()) return cmd_validate(cli);
        if (assign->parsed()) return cmd_assign(cli);
        if (buildnet->parsed()) return cmd_build_net(cli);
        if (simulate->parsed()) return cmd_simulate(cli, sim_capacity_fraction, sim_pmax);
        if (report->parsed()) return cmd_report(cli);
        if (grid->parsed()) return cmd_grid(cli);
        if (run->parsed()) return cmd_run(cli);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

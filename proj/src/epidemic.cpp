#include "transepi/epidemic.hpp"

#include <algorithm>
#include <cstring>
#include <thread>

#include "transepi/csv.hpp"
#include "transepi/rng.hpp"

namespace transepi {

double edge_probability(Seconds duration, const TransmissionParams& params) {
    double linear = params.p_max / double(params.d_max) * double(duration);
    return std::min(params.p_max, linear);
}

WeightedContactNetwork weight_network(ContactNetwork net, const TransmissionParams& params) {
    WeightedContactNetwork w;
    w.params = params;
    w.weights.reserve(net.edge_count());
    w.edge_keys.reserve(net.edge_count());
    for (const auto& e : net.edges()) {
        w.weights.push_back(edge_probability(e.duration(), params));
        // Draw identity is built from the endpoints' person ids and the trip
        // position in time, so a contact shared by two scenarios sees the
        // same randomness in both (common random numbers across scenarios).
        uint64_t key = hash_string(net.persons()[e.u]);
        key = mix64(key ^ hash_string(net.persons()[e.v]));
        key = mix64(key ^ uint64_t(uint32_t(e.t_start)));
        key = mix64(key ^ uint64_t(uint32_t(e.t_end)));
        w.edge_keys.push_back(key);
    }
    w.graph = std::move(net);

    w.incidence.reserve(w.graph.edge_count() * 2);
    for (uint32_t v = 0; v < w.graph.node_count(); ++v) {
        for (const auto& [nbr, eidx] : w.graph.incident(v)) {
            w.incidence.push_back({nbr, float(w.weights[eidx]), w.edge_keys[eidx]});
        }
    }
    return w;
}

std::vector<double> InfectionEstimates::probabilities() const {
    std::vector<double> p(infected_runs.size());
    for (size_t i = 0; i < p.size(); ++i) p[i] = double(infected_runs[i]) / double(n_runs);
    return p;
}

namespace {

// Node counter states: -1 susceptible, -2 infected this iteration (not yet
// contagious), >= 0 infected; active while counter <= tau.
constexpr int16_t kSusceptible = -1;
constexpr int16_t kPending = -2;

// Per-worker scratch; reused across runs to avoid reallocation.
struct RunScratch {
    std::vector<int16_t> counter;
    std::vector<uint32_t> active;  // infectious this iteration, ascending
    std::vector<uint32_t> next_active;
    std::vector<uint32_t> newly;
    std::vector<uint32_t> susceptible;  // may hold stale entries, compacted lazily
    std::vector<std::pair<uint64_t, uint32_t>> seed_rank;
    std::vector<uint64_t> infected_runs;
};

void simulate_runs(const WeightedContactNetwork& wnet, const EpiConfig& cfg,
                   const std::vector<uint32_t>& fixed_seeds, const std::vector<uint64_t>& node_tag,
                   int run_begin, int run_end, RunScratch& scratch) {
    const ContactNetwork& g = wnet.graph;
    const size_t n = g.node_count();
    const int16_t tau = int16_t(std::min(cfg.infectious_period, 30000));

    scratch.counter.assign(n, kSusceptible);
    scratch.infected_runs.assign(n, 0);

    for (int run = run_begin; run < run_end; ++run) {
        std::memset(scratch.counter.data(), 0xFF, n * sizeof(int16_t));
        scratch.active.clear();

        if (!fixed_seeds.empty()) {
            scratch.active = fixed_seeds;
        } else {
            // Uniform sample without replacement: the n_seeds nodes ranking
            // lowest under a per-run keyed hash. Node tags are person-id
            // hashes, keeping seed choices aligned across related scenarios.
            uint64_t run_key = derive_seed(cfg.master_seed, 0x5eedu, uint64_t(run));
            auto& rank = scratch.seed_rank;
            rank.resize(n);
            for (uint32_t v = 0; v < n; ++v) rank[v] = {mix64(run_key ^ node_tag[v]), v};
            size_t k = size_t(cfg.n_seeds);
            std::nth_element(rank.begin(), rank.begin() + (k - 1), rank.end());
            scratch.active.resize(k);
            for (size_t i = 0; i < k; ++i) scratch.active[i] = rank[i].second;
            std::sort(scratch.active.begin(), scratch.active.end());
        }
        for (uint32_t v : scratch.active) scratch.counter[v] = 0;

        scratch.susceptible.clear();
        for (uint32_t v = 0; v < n; ++v) {
            if (scratch.counter[v] == kSusceptible) scratch.susceptible.push_back(v);
        }
        size_t susceptible_count = scratch.susceptible.size();

        uint64_t run_seed = derive_seed(cfg.master_seed, 0xa77e57u, uint64_t(run));
        for (int iter = 0; iter < cfg.horizon && !scratch.active.empty(); ++iter) {
            uint64_t iter_key = mix64(run_seed ^ uint64_t(iter));
            scratch.newly.clear();

            // An edge carries an infection this iteration iff one endpoint is
            // infectious, the other susceptible, and the edge's keyed draw
            // falls below its weight. That condition reads the same from
            // either endpoint, so scan whichever side is smaller.
            if (scratch.active.size() <= susceptible_count) {
                for (uint32_t node : scratch.active) {
                    for (const auto& e : wnet.incident(node)) {
                        if (scratch.counter[e.neighbor] != kSusceptible) continue;
                        double u = double(mix64(iter_key ^ e.key) >> 11) * 0x1.0p-53;
                        if (u < double(e.weight)) {
                            scratch.counter[e.neighbor] = kPending;
                            scratch.newly.push_back(e.neighbor);
                        }
                    }
                }
            } else {
                size_t kept = 0;
                for (size_t i = 0; i < scratch.susceptible.size(); ++i) {
                    uint32_t node = scratch.susceptible[i];
                    if (scratch.counter[node] != kSusceptible) continue;  // stale entry
                    bool infected = false;
                    for (const auto& e : wnet.incident(node)) {
                        int16_t c = scratch.counter[e.neighbor];
                        if (c < 0 || c > tau) continue;  // not infectious
                        double u = double(mix64(iter_key ^ e.key) >> 11) * 0x1.0p-53;
                        if (u < double(e.weight)) {
                            infected = true;
                            break;  // later edges cannot change this node's fate
                        }
                    }
                    if (infected) {
                        scratch.counter[node] = kPending;
                        scratch.newly.push_back(node);
                    } else {
                        scratch.susceptible[kept++] = node;
                    }
                }
                scratch.susceptible.resize(kept);
            }
            susceptible_count -= scratch.newly.size();

            scratch.next_active.clear();
            for (uint32_t node : scratch.newly) {
                scratch.counter[node] = 0;
                scratch.next_active.push_back(node);
            }
            size_t newly_end = scratch.next_active.size();
            for (uint32_t node : scratch.active) {
                if (++scratch.counter[node] <= tau) scratch.next_active.push_back(node);
            }
            // Keep the active list sorted for a predictable memory walk; the
            // survivors tail is already ordered.
            std::sort(scratch.next_active.begin(), scratch.next_active.begin() + newly_end);
            std::inplace_merge(scratch.next_active.begin(),
                               scratch.next_active.begin() + newly_end,
                               scratch.next_active.end());
            std::swap(scratch.active, scratch.next_active);
        }

        for (size_t v = 0; v < n; ++v) {
            if (scratch.counter[v] >= 0) ++scratch.infected_runs[v];
        }
    }
}

}  // namespace

InfectionEstimates run_epidemic(const WeightedContactNetwork& wnet, const EpiConfig& config) {
    const ContactNetwork& g = wnet.graph;
    const size_t n = g.node_count();

    std::vector<uint32_t> fixed_seeds;
    if (!config.fixed_seed_persons.empty()) {
        for (const auto& id : config.fixed_seed_persons) {
            int v = g.person_index(id);
            if (v < 0) throw std::runtime_error("fixed seed person not in network: " + id);
            fixed_seeds.push_back(uint32_t(v));
        }
        std::sort(fixed_seeds.begin(), fixed_seeds.end());
        fixed_seeds.erase(std::unique(fixed_seeds.begin(), fixed_seeds.end()), fixed_seeds.end());
    } else if (size_t(config.n_seeds) > n) {
        throw SeedCountExceedsNodes(size_t(config.n_seeds), n);
    }

    std::vector<uint64_t> node_tag(n);
    for (uint32_t v = 0; v < n; ++v) node_tag[v] = hash_string(g.persons()[v]);

    InfectionEstimates est;
    est.n_runs = uint64_t(config.n_runs);
    est.infected_runs.assign(n, 0);
    if (n == 0 || config.n_runs <= 0) return est;

    unsigned n_threads = config.threads > 0 ? unsigned(config.threads)
                                            : std::max(1u, std::thread::hardware_concurrency());
    n_threads = std::min<unsigned>(n_threads, unsigned(config.n_runs));

    if (n_threads <= 1) {
        RunScratch scratch;
        simulate_runs(wnet, config, fixed_seeds, node_tag, 0, config.n_runs, scratch);
        est.infected_runs = std::move(scratch.infected_runs);
        return est;
    }

    // Runs are independent; counts merge by integer addition, so the result
    // does not depend on how runs are partitioned.
    std::vector<RunScratch> scratches(n_threads);
    std::vector<std::thread> pool;
    int chunk = (config.n_runs + int(n_threads) - 1) / int(n_threads);
    for (unsigned t = 0; t < n_threads; ++t) {
        int b = int(t) * chunk, e = std::min(config.n_runs, b + chunk);
        if (b >= e) break;
        pool.emplace_back(simulate_runs, std::cref(wnet), std::cref(config),
                          std::cref(fixed_seeds), std::cref(node_tag), b, e,
                          std::ref(scratches[t]));
    }
    for (auto& th : pool) th.join();
    for (const auto& s : scratches) {
        if (s.infected_runs.empty()) continue;
        for (size_t v = 0; v < n; ++v) est.infected_runs[v] += s.infected_runs[v];
    }
    return est;
}

double global_infection_rate(const InfectionEstimates& est) {
    if (est.infected_runs.empty() || est.n_runs == 0) return 0.0;
    double total = 0.0;
    for (uint64_t c : est.infected_runs) total += double(c);
    return total / double(est.n_runs) / double(est.infected_runs.size());
}

size_t endangered_count(const InfectionEstimates& est, double threshold) {
    size_t count = 0;
    for (size_t v = 0; v < est.infected_runs.size(); ++v) {
        if (est.probability(uint32_t(v)) > threshold) ++count;
    }
    return count;
}

std::string serialize_estimates(const ContactNetwork& net, const InfectionEstimates& est,
                                const std::string& config_echo) {
    CsvWriter w;
    if (!config_echo.empty()) w.comment("config " + config_echo);
    w.row({"person_id", "probability"});
    for (uint32_t v = 0; v < net.node_count(); ++v) {
        w.row({net.persons()[v], format_double(est.probability(v))});
    }
    return w.str();
}

}  // namespace transepi

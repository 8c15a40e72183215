#include "mbdiff/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <utility>

#include <json.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "mbdiff/diffusion.hpp"
#include "mbdiff/kernels.hpp"
#include "mbdiff/rng.hpp"

namespace mbdiff {

namespace {

// Every independent random stream hangs off the master seed through a
// (tag, index) pair, so no two streams can collide by construction.
constexpr std::uint64_t kTagTopology = 1;        // the fixed topology (threshold regime)
constexpr std::uint64_t kTagBasePopulation = 2;  // fixed resources / fixed population
constexpr std::uint64_t kTagThresholdRun = 3;    // per-run draws, threshold regime
constexpr std::uint64_t kTagNetworkRun = 4;      // per-run draws, network regime

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

// Shortest representation that parses back to the same double ("0.2", not
// "0.20000000000000001") — keeps config echoes and CSVs readable without
// losing a bit.
std::string fmt_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::vector<std::string> split_list(const std::string& text) {
    // Accept ',' and ':' interchangeably so ratio vectors read naturally
    // ("1:2:3") next to plain lists ("0.2,0.5,0.7").
    std::vector<std::string> parts;
    std::string cur;
    for (char c : text) {
        if (c == ',' || c == ':') {
            parts.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(trim(cur));
    return parts;
}

double parse_double(const std::string& text, const std::string& what) {
    const std::string t = trim(text);
    double v = 0.0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc{} || res.ptr != t.data() + t.size())
        throw std::invalid_argument(what + ": cannot parse '" + text + "' as a number");
    return v;
}

std::uint64_t parse_u64(const std::string& text, const std::string& what) {
    const std::string t = trim(text);
    std::uint64_t v = 0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc{} || res.ptr != t.data() + t.size())
        throw std::invalid_argument(what + ": cannot parse '" + text +
                                    "' as a non-negative integer");
    return v;
}

std::uint32_t parse_u32(const std::string& text, const std::string& what) {
    const std::uint64_t v = parse_u64(text, what);
    if (v > std::numeric_limits<std::uint32_t>::max())
        throw std::invalid_argument(what + ": value " + text + " out of range");
    return static_cast<std::uint32_t>(v);
}

bool parse_bool(const std::string& text, const std::string& what) {
    const std::string t = lower(trim(text));
    if (t == "true" || t == "1" || t == "yes") return true;
    if (t == "false" || t == "0" || t == "no") return false;
    throw std::invalid_argument(what + ": expected a boolean, got '" + text + "'");
}

std::vector<double> parse_double_list(const std::string& text, const std::string& what) {
    std::vector<double> out;
    for (const auto& part : split_list(text)) out.push_back(parse_double(part, what));
    return out;
}

template <typename T, typename Fmt>
std::string join(const std::vector<T>& xs, Fmt fmt) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ',';
        out += fmt(xs[i]);
    }
    return out;
}

bool target_active(const ExperimentConfig& cfg) {
    return cfg.distribution == SeedMix::target;
}

std::vector<double> normalized_target(const ExperimentConfig& cfg) {
    double sum = 0.0;
    for (double x : cfg.target) sum += x;
    std::vector<double> q(cfg.target.size());
    for (std::size_t i = 0; i < q.size(); ++i) q[i] = cfg.target[i] / sum;
    return q;
}

Estimate estimate_from(std::span<const double> xs) {
    Estimate e;
    const std::size_t n = xs.size();
    if (n == 0) return e;
    double sum = 0.0;
    for (double x : xs) sum += x;
    e.mean = sum / static_cast<double>(n);
    if (n > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - e.mean) * (x - e.mean);
        e.std_error = std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
    }
    return e;
}

// Work-stealing-free pool: one atomic counter hands out run indices. A thrown
// exception stops the pool (first one wins) and is rethrown on the caller.
template <typename Fn>
void parallel_runs(std::uint32_t count, std::uint32_t threads_requested, Fn&& work) {
    std::uint32_t nt = threads_requested ? threads_requested : std::thread::hardware_concurrency();
    if (nt == 0) nt = 1;
    nt = std::min(nt, count);
    if (nt <= 1) {
        for (std::uint32_t r = 0; r < count; ++r) work(r);
        return;
    }
    std::atomic<std::uint32_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mx;
    std::vector<std::thread> pool;
    pool.reserve(nt);
    for (std::uint32_t t = 0; t < nt; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                if (failed.load(std::memory_order_relaxed)) return;
                const std::uint32_t r = next.fetch_add(1, std::memory_order_relaxed);
                if (r >= count) return;
                try {
                    work(r);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mx);
                    if (!error) error = std::current_exception();
                    failed.store(true, std::memory_order_relaxed);
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

// Read-only state shared by all runs of one experiment.
struct RunContext {
    const ExperimentConfig* cfg = nullptr;
    const Graph* fixed_graph = nullptr;              // threshold regime
    const std::vector<double>* fixed_resources = nullptr;  // fix_resources
    const Population* base_population = nullptr;     // network regime
    std::uint64_t run_tag = 0;
};

// Backing store for the shared objects a RunContext points into.
struct ContextStorage {
    Graph fixed_graph;
    std::vector<double> fixed_resources;
    Population base_population;
};

RunContext make_context(const ExperimentConfig& cfg, ContextStorage& store) {
    RunContext ctx;
    ctx.cfg = &cfg;
    if (cfg.regime == Regime::threshold_average) {
        store.fixed_graph = fixed_topology(cfg);
        ctx.fixed_graph = &store.fixed_graph;
        if (cfg.fix_resources) {
            Rng res_rng(derive_seed(cfg.master_seed, kTagBasePopulation, 0));
            store.fixed_resources.resize(store.fixed_graph.node_count());
            for (auto& r : store.fixed_resources) r = res_rng.uniform01();
            ctx.fixed_resources = &store.fixed_resources;
        }
        ctx.run_tag = kTagThresholdRun;
    } else {
        // One population, fresh topologies. The population is drawn for cfg.n
        // nodes up front; every generated topology has exactly that many.
        Rng pop_rng(derive_seed(cfg.master_seed, kTagBasePopulation, 0));
        store.base_population =
            draw_population(cfg.n, cfg.behaviors, cfg.intrinsic_weight, pop_rng);
        ctx.base_population = &store.base_population;
        ctx.run_tag = kTagNetworkRun;
    }
    return ctx;
}

// One run's graph and population, drawn from rng per the regime.
struct Materialized {
    Graph storage;            // owns the graph only in the network regime
    const Graph* g = nullptr;
    Population pop;
};

Materialized materialize_run(const RunContext& ctx, Rng& rng) {
    const ExperimentConfig& cfg = *ctx.cfg;
    Materialized m;
    if (cfg.regime == Regime::threshold_average) {
        m.g = ctx.fixed_graph;
        if (ctx.fixed_resources) {
            // Thresholds are the only per-run draw; resources are shared.
            m.pop.k = static_cast<std::uint32_t>(cfg.behaviors.size());
            m.pop.intrinsic_weight = cfg.intrinsic_weight;
            m.pop.resource = *ctx.fixed_resources;
            m.pop.threshold.resize(m.pop.resource.size() * m.pop.k);
            for (auto& t : m.pop.threshold) t = 1.0 - rng.uniform01();
            m.pop.adopted.assign(m.pop.resource.size(), 0);
            m.pop.pinned.assign(m.pop.resource.size(), 0);
        } else {
            m.pop = init_population(*m.g, cfg.behaviors, cfg.intrinsic_weight, rng);
        }
    } else {
        m.storage = build_topology(cfg, rng);
        m.g = &m.storage;
        m.pop = *ctx.base_population;
    }
    return m;
}

RunRecord execute_run(const RunContext& ctx, std::uint32_t run) {
    const ExperimentConfig& cfg = *ctx.cfg;
    Rng rng(derive_seed(cfg.master_seed, ctx.run_tag, run));
    Materialized m = materialize_run(ctx, rng);

    const std::uint32_t seeds = cfg.effective_seed_count(m.g->node_count());
    const SeedBudget budget =
        allocate_counts(seeds, cfg.behaviors, cfg.distribution, cfg.target);
    const SeedAssignment assignment =
        select_seeds(cfg.heuristic, *m.g, m.pop, cfg.behaviors, budget, rng);
    apply_seeds(m.pop, cfg.behaviors, assignment);

    DiffusionOptions opt;
    opt.max_epochs = cfg.max_epochs;
    opt.drop_allowed = cfg.drop_allowed;
    opt.record_events = cfg.trace;
    const DiffusionOutcome outcome = run_diffusion(*m.g, m.pop, cfg.behaviors, opt);
    const MetricsReport report = compute_metrics(m.pop, cfg.behaviors);

    RunRecord rec;
    rec.run_id = run;
    rec.participation = report.participation;
    rec.adoption = report.adoption;
    rec.utilization = report.utilization;
    rec.per_behavior = report.per_behavior_counts;
    rec.behavior_distribution = report.behavior_distribution;
    rec.epochs = outcome.epochs_run;
    rec.converged = outcome.converged;
    if (target_active(cfg) && report.adoption > 0)
        rec.kl = kl_divergence(normalized_target(cfg), report.behavior_distribution);
    if (cfg.trace) rec.new_adoptions = outcome.new_adoptions;
    return rec;
}

}  // namespace

TopologySpec parse_topology(const std::string& text) {
    const std::string t = lower(trim(text));
    TopologySpec spec;
    if (t == "pa") {
        spec.kind = TopologySpec::Kind::pa;
    } else if (t == "sw") {
        spec.kind = TopologySpec::Kind::sw;
    } else if (t == "sc") {
        spec.kind = TopologySpec::Kind::sc;
    } else {
        spec.kind = TopologySpec::Kind::file;
        spec.path = trim(text);  // keep the caller's case
        if (spec.path.empty())
            throw std::invalid_argument("topology: empty value");
    }
    return spec;
}

std::string to_string(const TopologySpec& spec) {
    switch (spec.kind) {
        case TopologySpec::Kind::pa: return "pa";
        case TopologySpec::Kind::sw: return "sw";
        case TopologySpec::Kind::sc: return "sc";
        case TopologySpec::Kind::file: return spec.path;
    }
    throw std::logic_error("unhandled topology kind");
}

std::string heuristic_name(Heuristic h) {
    switch (h) {
        case Heuristic::random_nodes: return "h1";
        case Heuristic::degree_no_topup: return "h2";
        case Heuristic::degree_knapsack: return "h3";
        case Heuristic::degree_topup: return "h4";
        case Heuristic::degree_resource: return "h5";
        case Heuristic::eia_rank: return "h6";
        case Heuristic::eia_hill_climb: return "h7";
    }
    throw std::logic_error("unhandled heuristic");
}

Heuristic parse_heuristic(const std::string& text) {
    const std::string t = lower(trim(text));
    if (t == "h1") return Heuristic::random_nodes;
    if (t == "h2") return Heuristic::degree_no_topup;
    if (t == "h3") return Heuristic::degree_knapsack;
    if (t == "h4") return Heuristic::degree_topup;
    if (t == "h5") return Heuristic::degree_resource;
    if (t == "h6") return Heuristic::eia_rank;
    if (t == "h7") return Heuristic::eia_hill_climb;
    throw std::invalid_argument("unknown heuristic '" + text + "' (expected h1..h7)");
}

std::string mix_name(SeedMix m) {
    switch (m) {
        case SeedMix::lowest_cost: return "low";
        case SeedMix::inverse_cost: return "inv";
        case SeedMix::uniform: return "unif";
        case SeedMix::proportional_cost: return "prop";
        case SeedMix::highest_cost: return "high";
        case SeedMix::target: return "target";
    }
    throw std::logic_error("unhandled seed mix");
}

SeedMix parse_mix(const std::string& text) {
    const std::string t = lower(trim(text));
    if (t == "low") return SeedMix::lowest_cost;
    if (t == "inv") return SeedMix::inverse_cost;
    if (t == "unif" || t == "uniform") return SeedMix::uniform;
    if (t == "prop") return SeedMix::proportional_cost;
    if (t == "high") return SeedMix::highest_cost;
    if (t == "target") return SeedMix::target;
    throw std::invalid_argument("unknown distribution '" + text +
                                "' (expected low|inv|unif|prop|high|target)");
}

std::string regime_name(Regime r) {
    return r == Regime::threshold_average ? "threshold_average" : "network_average";
}

Regime parse_regime(const std::string& text) {
    const std::string t = lower(trim(text));
    if (t == "threshold_average" || t == "threshold") return Regime::threshold_average;
    if (t == "network_average" || t == "network") return Regime::network_average;
    throw std::invalid_argument("unknown regime '" + text +
                                "' (expected threshold_average|network_average)");
}

std::uint32_t ExperimentConfig::effective_seed_count(NodeId n_actual) const {
    std::uint64_t count;
    if (b) {
        count = *b;
    } else {
        count = static_cast<std::uint64_t>(
            std::llround(alpha * static_cast<double>(n_actual)));
        // Under the uniform split, round to the nearest multiple of k so the
        // equal shares come out whole (ties round up). At the stock setting
        // (500 nodes, 3 behaviors, alpha 0.1) this lands on 51.
        if (distribution == SeedMix::uniform && !behaviors.empty()) {
            const std::uint64_t k = behaviors.size();
            const std::uint64_t rem = count % k;
            if (rem * 2 >= k && count + (k - rem) <= n_actual)
                count += k - rem;
            else
                count -= rem;
        }
    }
    if (count == 0)
        throw std::invalid_argument("seed budget comes out as zero (alpha too small?)");
    if (count > n_actual)
        throw std::invalid_argument("seed budget " + std::to_string(count) +
                                    " exceeds node count " + std::to_string(n_actual));
    return static_cast<std::uint32_t>(count);
}

void ExperimentConfig::validate() const {
    validate_behaviors(behaviors);
    if (!(intrinsic_weight >= 0.0 && intrinsic_weight <= 1.0))
        throw std::invalid_argument("w outside [0, 1]");
    if (runs == 0) throw std::invalid_argument("runs must be positive");
    if (max_epochs == 0) throw std::invalid_argument("max_epochs must be positive");
    if (!b && !(alpha > 0.0 && alpha <= 1.0))
        throw std::invalid_argument("alpha outside (0, 1]");
    if (b && *b == 0) throw std::invalid_argument("b must be positive");
    if (target_active(*this) && target.size() != behaviors.size())
        throw std::invalid_argument("target length " + std::to_string(target.size()) +
                                    " does not match behavior count " +
                                    std::to_string(behaviors.size()));
    if (topology.kind == TopologySpec::Kind::sw &&
        !(sw_rewire >= 0.0 && sw_rewire <= 1.0))
        throw std::invalid_argument("sw_rewire outside [0, 1]");
    if (topology.kind == TopologySpec::Kind::sc && !(sc_avg_degree > 0.0))
        throw std::invalid_argument("sc_avg_degree must be positive");
    if (regime == Regime::network_average && topology.kind == TopologySpec::Kind::file)
        throw std::invalid_argument(
            "network averaging redraws the topology every run; "
            "an edge-list file is fixed — use threshold_average");
}

void apply_config_entry(ExperimentConfig& cfg, const std::string& key,
                        const std::string& value) {
    const std::string k = lower(trim(key));
    if (k == "topology") {
        cfg.topology = parse_topology(value);
    } else if (k == "n") {
        cfg.n = parse_u32(value, k);
    } else if (k == "sw_rewire") {
        cfg.sw_rewire = parse_double(value, k);
    } else if (k == "sc_avg_degree") {
        cfg.sc_avg_degree = parse_double(value, k);
    } else if (k == "costs") {
        // Resizes the roster; utilities reset to match the new costs. Set
        // `utilities` afterwards when they differ.
        const auto costs = parse_double_list(value, k);
        cfg.behaviors.resize(costs.size());
        for (std::size_t i = 0; i < costs.size(); ++i)
            cfg.behaviors[i] = {costs[i], costs[i]};
    } else if (k == "utilities") {
        const auto utilities = parse_double_list(value, k);
        if (utilities.size() != cfg.behaviors.size())
            throw std::invalid_argument(
                "utilities: got " + std::to_string(utilities.size()) + " values for " +
                std::to_string(cfg.behaviors.size()) + " behaviors (set costs first)");
        for (std::size_t i = 0; i < utilities.size(); ++i)
            cfg.behaviors[i].utility = utilities[i];
    } else if (k == "w") {
        cfg.intrinsic_weight = parse_double(value, k);
    } else if (k == "alpha") {
        cfg.alpha = parse_double(value, k);
    } else if (k == "b") {
        cfg.b = parse_u32(value, k);
    } else if (k == "heuristic") {
        cfg.heuristic = parse_heuristic(value);
    } else if (k == "distribution") {
        cfg.distribution = parse_mix(value);
    } else if (k == "target") {
        cfg.target = parse_double_list(value, k);
    } else if (k == "regime") {
        cfg.regime = parse_regime(value);
    } else if (k == "runs") {
        cfg.runs = parse_u32(value, k);
    } else if (k == "seed") {
        cfg.master_seed = parse_u64(value, k);
    } else if (k == "max_epochs") {
        cfg.max_epochs = parse_u32(value, k);
    } else if (k == "drop_allowed") {
        cfg.drop_allowed = parse_bool(value, k);
    } else if (k == "fix_resources") {
        cfg.fix_resources = parse_bool(value, k);
    } else if (k == "keep_isolated") {
        cfg.keep_isolated = parse_bool(value, k);
    } else if (k == "threads") {
        cfg.threads = parse_u32(value, k);
    } else if (k == "trace") {
        cfg.trace = parse_bool(value, k);
    } else if (k == "alphas") {
        cfg.sweep_alphas = parse_double_list(value, k);
    } else if (k == "heuristics") {
        cfg.sweep_heuristics.clear();
        for (const auto& part : split_list(value))
            cfg.sweep_heuristics.push_back(parse_heuristic(part));
    } else {
        throw std::invalid_argument("unknown config key '" + key + "'");
    }
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    ExperimentConfig cfg;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected `key = value`");
        try {
            apply_config_entry(cfg, stripped.substr(0, eq), stripped.substr(eq + 1));
        } catch (const std::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " +
                                     e.what());
        }
    }
    return cfg;
}

void write_config(std::ostream& out, const ExperimentConfig& cfg) {
    out << "topology = " << to_string(cfg.topology) << '\n';
    out << "n = " << cfg.n << '\n';
    out << "sw_rewire = " << fmt_double(cfg.sw_rewire) << '\n';
    out << "sc_avg_degree = " << fmt_double(cfg.sc_avg_degree) << '\n';
    std::vector<double> costs, utilities;
    for (const auto& b : cfg.behaviors) {
        costs.push_back(b.cost);
        utilities.push_back(b.utility);
    }
    out << "costs = " << join(costs, fmt_double) << '\n';
    out << "utilities = " << join(utilities, fmt_double) << '\n';
    out << "w = " << fmt_double(cfg.intrinsic_weight) << '\n';
    out << "alpha = " << fmt_double(cfg.alpha) << '\n';
    if (cfg.b) out << "b = " << *cfg.b << '\n';
    out << "heuristic = " << heuristic_name(cfg.heuristic) << '\n';
    out << "distribution = " << mix_name(cfg.distribution) << '\n';
    if (!cfg.target.empty()) out << "target = " << join(cfg.target, fmt_double) << '\n';
    out << "regime = " << regime_name(cfg.regime) << '\n';
    out << "runs = " << cfg.runs << '\n';
    out << "seed = " << cfg.master_seed << '\n';
    out << "max_epochs = " << cfg.max_epochs << '\n';
    out << "drop_allowed = " << (cfg.drop_allowed ? "true" : "false") << '\n';
    out << "fix_resources = " << (cfg.fix_resources ? "true" : "false") << '\n';
    out << "keep_isolated = " << (cfg.keep_isolated ? "true" : "false") << '\n';
    out << "threads = " << cfg.threads << '\n';
    out << "trace = " << (cfg.trace ? "true" : "false") << '\n';
    if (!cfg.sweep_alphas.empty())
        out << "alphas = " << join(cfg.sweep_alphas, fmt_double) << '\n';
    if (!cfg.sweep_heuristics.empty())
        out << "heuristics = " << join(cfg.sweep_heuristics, heuristic_name) << '\n';
}

Graph build_topology(const ExperimentConfig& cfg, Rng& rng) {
    switch (cfg.topology.kind) {
        case TopologySpec::Kind::pa:
            return generate_preferential_attachment(cfg.n, rng);
        case TopologySpec::Kind::sw:
            return generate_small_world(cfg.n, cfg.sw_rewire, rng);
        case TopologySpec::Kind::sc:
            return generate_spatially_clustered(cfg.n, cfg.sc_avg_degree, rng);
        case TopologySpec::Kind::file:
            return load_edge_list_file(cfg.topology.path, cfg.keep_isolated);
    }
    throw std::logic_error("unhandled topology kind");
}

Graph fixed_topology(const ExperimentConfig& cfg) {
    Rng rng(derive_seed(cfg.master_seed, kTagTopology, 0));
    return build_topology(cfg, rng);
}

AggregateResult run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();

    ContextStorage store;
    const RunContext ctx = make_context(cfg, store);

    AggregateResult out;
    out.runs = cfg.runs;
    out.records.resize(cfg.runs);
    parallel_runs(cfg.runs, cfg.threads,
                  [&](std::uint32_t r) { out.records[r] = execute_run(ctx, r); });

    // Fold in run order — reported numbers are independent of thread count.
    const std::size_t k = cfg.behaviors.size();
    std::vector<double> part, adopt, util, kl;
    part.reserve(cfg.runs);
    adopt.reserve(cfg.runs);
    util.reserve(cfg.runs);
    out.behavior_distribution_mean.assign(k, 0.0);
    for (const RunRecord& rec : out.records) {
        part.push_back(static_cast<double>(rec.participation));
        adopt.push_back(static_cast<double>(rec.adoption));
        util.push_back(rec.utilization);
        if (target_active(cfg)) kl.push_back(rec.kl);
        for (std::size_t i = 0; i < k; ++i)
            out.behavior_distribution_mean[i] += rec.behavior_distribution[i];
        if (rec.converged) ++out.converged_runs;
    }
    for (double& x : out.behavior_distribution_mean) x /= cfg.runs;
    out.participation = estimate_from(part);
    out.adoption = estimate_from(adopt);
    out.utilization = estimate_from(util);
    out.kl = estimate_from(kl);
    out.fingerprint = config_fingerprint(cfg);
    return out;
}

RunArtifacts prepare_run(const ExperimentConfig& cfg, std::uint32_t run) {
    cfg.validate();
    ContextStorage store;
    const RunContext ctx = make_context(cfg, store);
    Rng rng(derive_seed(cfg.master_seed, ctx.run_tag, run));
    Materialized m = materialize_run(ctx, rng);

    RunArtifacts art;
    art.graph = (m.g == &m.storage) ? std::move(m.storage) : *m.g;
    art.population = std::move(m.pop);
    art.budget = allocate_counts(cfg.effective_seed_count(art.graph.node_count()),
                                 cfg.behaviors, cfg.distribution, cfg.target);
    art.assignment = select_seeds(cfg.heuristic, art.graph, art.population,
                                  cfg.behaviors, art.budget, rng);
    apply_seeds(art.population, cfg.behaviors, art.assignment);
    return art;
}

RunArtifacts simulate_run(const ExperimentConfig& cfg, std::uint32_t run) {
    RunArtifacts art = prepare_run(cfg, run);
    DiffusionOptions opt;
    opt.max_epochs = cfg.max_epochs;
    opt.drop_allowed = cfg.drop_allowed;
    opt.record_events = true;  // the whole point of a single-run simulation
    art.outcome = run_diffusion(art.graph, art.population, cfg.behaviors, opt);
    art.metrics = compute_metrics(art.population, cfg.behaviors);
    return art;
}

WelchResult welch_t_test(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2)
        throw std::invalid_argument("welch_t_test needs at least two samples per side");
    const double n1 = static_cast<double>(a.size());
    const double n2 = static_cast<double>(b.size());
    const Estimate e1 = estimate_from(a);
    const Estimate e2 = estimate_from(b);
    // estimate_from reports sd/sqrt(n); squaring gives the s^2/n terms directly.
    const double v1 = e1.std_error * e1.std_error;
    const double v2 = e2.std_error * e2.std_error;
    const double se2 = v1 + v2;
    const double diff = e1.mean - e2.mean;

    WelchResult res;
    if (se2 <= 0.0) {
        // Two degenerate (zero-variance) samples: identical means are a
        // perfect non-result, different means an exact one.
        res.df = n1 + n2 - 2.0;
        if (diff == 0.0) {
            res.t = 0.0;
            res.p = 1.0;
        } else {
            res.t = std::copysign(std::numeric_limits<double>::infinity(), diff);
            res.p = 0.0;
        }
        return res;
    }
    res.t = diff / std::sqrt(se2);
    res.df = se2 * se2 / (v1 * v1 / (n1 - 1.0) + v2 * v2 / (n2 - 1.0));
    const boost::math::students_t dist(res.df);
    res.p = 2.0 * boost::math::cdf(dist, -std::abs(res.t));
    return res;
}

std::vector<ComparisonRow> compare_heuristics(const ExperimentConfig& base,
                                              std::span<const Heuristic> heuristics) {
    if (heuristics.size() < 2)
        throw std::invalid_argument("need at least two heuristics to compare");
    struct Side {
        Heuristic h;
        std::vector<double> utilization;
        double mean = 0.0;
    };
    std::vector<Side> sides;
    sides.reserve(heuristics.size());
    for (Heuristic h : heuristics) {
        ExperimentConfig cfg = base;
        cfg.heuristic = h;
        cfg.trace = false;  // traces are per-run payloads the comparison never reads
        const AggregateResult agg = run_experiment(cfg);
        Side s;
        s.h = h;
        s.utilization.reserve(agg.records.size());
        for (const RunRecord& rec : agg.records) s.utilization.push_back(rec.utilization);
        s.mean = agg.utilization.mean;
        sides.push_back(std::move(s));
    }
    std::vector<ComparisonRow> rows;
    for (std::size_t i = 0; i < sides.size(); ++i) {
        for (std::size_t j = i + 1; j < sides.size(); ++j) {
            ComparisonRow row;
            row.first = sides[i].h;
            row.second = sides[j].h;
            row.mean_first = sides[i].mean;
            row.mean_second = sides[j].mean;
            row.difference = sides[i].mean - sides[j].mean;
            row.test = welch_t_test(sides[i].utilization, sides[j].utilization);
            rows.push_back(row);
        }
    }
    return rows;
}

std::vector<SweepCell> run_sweep(const ExperimentConfig& base,
                                 std::span<const double> alphas,
                                 std::span<const Heuristic> heuristics) {
    if (alphas.empty()) throw std::invalid_argument("sweep needs at least one alpha");
    if (heuristics.empty())
        throw std::invalid_argument("sweep needs at least one heuristic");
    std::vector<SweepCell> cells;
    cells.reserve(alphas.size() * heuristics.size());
    for (double a : alphas) {
        for (Heuristic h : heuristics) {
            ExperimentConfig cfg = base;
            cfg.alpha = a;
            cfg.b.reset();  // the sweep varies alpha; a pinned count would override it
            cfg.heuristic = h;
            cfg.trace = false;
            SweepCell cell;
            cell.alpha = a;
            cell.heuristic = h;
            cell.result = run_experiment(cfg);
            cells.push_back(std::move(cell));
        }
    }
    return cells;
}

std::string config_fingerprint(const ExperimentConfig& cfg) {
    // Hash of the canonical echo, minus the keys that cannot change any
    // reported number (thread count, trace flag, sweep lists).
    std::ostringstream echo;
    write_config(echo, cfg);
    std::istringstream lines(echo.str());
    std::string line, semantic;
    while (std::getline(lines, line)) {
        if (line.rfind("threads =", 0) == 0 || line.rfind("trace =", 0) == 0 ||
            line.rfind("alphas =", 0) == 0 || line.rfind("heuristics =", 0) == 0)
            continue;
        semantic += line;
        semantic += '\n';
    }
    std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a, then a final mix
    for (unsigned char c : semantic) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    h = mix64(h);
    static const char* hex = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = hex[h & 0xF];
        h >>= 4;
    }
    return out;
}

void write_runs_csv(std::ostream& out, const ExperimentConfig& cfg,
                    const AggregateResult& result) {
    const std::size_t k = cfg.behaviors.size();
    out << "run_id,participation,adoption,utilization";
    for (std::size_t i = 0; i < k; ++i) out << ",count_" << i;
    out << ",epochs,converged";
    const bool with_kl = target_active(cfg);
    if (with_kl) out << ",kl";
    out << '\n';
    for (const RunRecord& rec : result.records) {
        out << rec.run_id << ',' << rec.participation << ',' << rec.adoption << ','
            << fmt_double(rec.utilization);
        for (std::size_t i = 0; i < k; ++i) out << ',' << rec.per_behavior[i];
        out << ',' << rec.epochs << ',' << (rec.converged ? 1 : 0);
        if (with_kl) out << ',' << fmt_double(rec.kl);
        out << '\n';
    }
}

void write_aggregate_json(std::ostream& out, const ExperimentConfig& cfg,
                          const AggregateResult& result) {
    using json = nlohmann::ordered_json;
    json j;
    j["fingerprint"] = result.fingerprint;
    j["kernels"] = active_kernels().name;

    json c;
    c["topology"] = to_string(cfg.topology);
    c["n"] = cfg.n;
    c["sw_rewire"] = cfg.sw_rewire;
    c["sc_avg_degree"] = cfg.sc_avg_degree;
    std::vector<double> costs, utilities;
    for (const auto& b : cfg.behaviors) {
        costs.push_back(b.cost);
        utilities.push_back(b.utility);
    }
    c["costs"] = costs;
    c["utilities"] = utilities;
    c["w"] = cfg.intrinsic_weight;
    c["alpha"] = cfg.alpha;
    if (cfg.b) c["b"] = *cfg.b;
    c["heuristic"] = heuristic_name(cfg.heuristic);
    c["distribution"] = mix_name(cfg.distribution);
    if (!cfg.target.empty()) c["target"] = cfg.target;
    c["regime"] = regime_name(cfg.regime);
    c["runs"] = cfg.runs;
    c["seed"] = cfg.master_seed;
    c["max_epochs"] = cfg.max_epochs;
    c["drop_allowed"] = cfg.drop_allowed;
    c["fix_resources"] = cfg.fix_resources;
    c["keep_isolated"] = cfg.keep_isolated;
    c["threads"] = cfg.threads;
    c["trace"] = cfg.trace;
    j["config"] = std::move(c);

    j["runs"] = result.runs;
    j["converged_runs"] = result.converged_runs;
    const auto estimate_json = [](const Estimate& e) {
        return json{{"mean", e.mean}, {"stderr", e.std_error}};
    };
    j["participation"] = estimate_json(result.participation);
    j["adoption"] = estimate_json(result.adoption);
    j["utilization"] = estimate_json(result.utilization);
    if (target_active(cfg)) j["kl"] = estimate_json(result.kl);
    j["behavior_distribution_mean"] = result.behavior_distribution_mean;
    out << j.dump(2) << '\n';
}

void write_trace_csv(std::ostream& out, const ExperimentConfig& cfg,
                     const AggregateResult& result) {
    if (!cfg.trace)
        throw std::logic_error("trace rows were not recorded (cfg.trace is off)");
    const std::size_t k = cfg.behaviors.size();
    out << "run_id,epoch,behavior_id,new_adoptions\n";
    for (const RunRecord& rec : result.records) {
        for (std::uint32_t e = 0; e < rec.epochs; ++e)
            for (std::size_t i = 0; i < k; ++i)
                out << rec.run_id << ',' << (e + 1) << ',' << i << ','
                    << rec.new_adoptions[e * k + i] << '\n';
    }
}

void write_comparison_csv(std::ostream& out, std::span<const ComparisonRow> rows) {
    out << "first,second,mean_first,mean_second,difference,t,df,p\n";
    for (const ComparisonRow& row : rows) {
        out << heuristic_name(row.first) << ',' << heuristic_name(row.second) << ','
            << fmt_double(row.mean_first) << ',' << fmt_double(row.mean_second) << ','
            << fmt_double(row.difference) << ',' << fmt_double(row.test.t) << ','
            << fmt_double(row.test.df) << ',' << fmt_double(row.test.p) << '\n';
    }
}

void write_sweep_csv(std::ostream& out, std::span<const SweepCell> cells) {
    out << "alpha,heuristic,runs,participation_mean,participation_stderr,"
           "adoption_mean,adoption_stderr,utilization_mean,utilization_stderr\n";
    for (const SweepCell& cell : cells) {
        const AggregateResult& r = cell.result;
        out << fmt_double(cell.alpha) << ',' << heuristic_name(cell.heuristic) << ','
            << r.runs << ',' << fmt_double(r.participation.mean) << ','
            << fmt_double(r.participation.std_error) << ',' << fmt_double(r.adoption.mean)
            << ',' << fmt_double(r.adoption.std_error) << ','
            << fmt_double(r.utilization.mean) << ',' << fmt_double(r.utilization.std_error)
            << '\n';
    }
}

}  // namespace mbdiff

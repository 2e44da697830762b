#include "dpsim/experiment.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <random>
#include <stdexcept>

namespace dpsim {

ExperimentConfig config_from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    c.preset = j.value("preset", c.preset);
    c.workload = j.value("workload", c.workload);
    c.mix = j.value("mix", c.mix);
    c.arrival = j.value("arrival", c.arrival);
    c.trace_file = j.value("trace_file", c.trace_file);
    c.replay_count = j.value("replay_count", c.replay_count);
    c.duration = j.value("duration_s", c.duration);
    c.nodes = j.value("nodes", c.nodes);
    c.node_size = j.value("node_size", c.node_size);
    c.gpu_memory = j.value("gpu_memory_bytes", c.gpu_memory);
    c.rate_scale = j.value("rate_scale", c.rate_scale);
    c.slo_scale = j.value("slo_scale", c.slo_scale);
    c.seed = j.value("seed", c.seed);
    c.policy = j.value("policy", c.policy);
    c.adjust = j.value("adjust", c.adjust);
    c.forced_switch_at = j.value("forced_switch_at_s", c.forced_switch_at);
    c.alpha_weight = j.value("alpha_weight", c.alpha_weight);
    c.log_events = j.value("log_events", c.log_events);
    c.record_ilp = j.value("record_ilp", c.record_ilp);
    if (j.contains("bucket_shares")) c.bucket_shares = j.at("bucket_shares").get<std::array<double, 4>>();
    if (j.contains("stage_speeds")) c.stage_speeds = j.at("stage_speeds").get<std::array<double, 3>>();

    if (c.workload != "steady" && c.workload != "dynamic" && c.workload != "trace")
        throw std::invalid_argument("workload must be steady, dynamic or trace");
    if (c.workload == "trace" && c.trace_file.empty()) throw std::invalid_argument("trace workload needs trace_file");
    if (c.arrival != "poisson" && c.arrival != "uniform") throw std::invalid_argument("arrival must be poisson or uniform");
    if (c.adjust != "dispatch" && c.adjust != "shutdown") throw std::invalid_argument("adjust must be dispatch or shutdown");
    if (c.alpha_weight != "gpu_time" && c.alpha_weight != "requests")
        throw std::invalid_argument("alpha_weight must be gpu_time or requests");
    if (c.nodes < 1 || c.node_size < 1) throw std::invalid_argument("cluster must have at least one GPU");
    if (!(c.duration > 0)) throw std::invalid_argument("duration must be positive");
    system_from_name(c.policy);
    return c;
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
    nlohmann::json j = {{"preset", c.preset},       {"workload", c.workload},
                        {"mix", c.mix},             {"arrival", c.arrival},
                        {"duration_s", c.duration}, {"nodes", c.nodes},
                        {"node_size", c.node_size}, {"gpu_memory_bytes", c.gpu_memory},
                        {"rate_scale", c.rate_scale}, {"slo_scale", c.slo_scale},
                        {"seed", c.seed},           {"policy", c.policy},
                        {"adjust", c.adjust},       {"forced_switch_at_s", c.forced_switch_at},
                        {"alpha_weight", c.alpha_weight},
                        {"log_events", c.log_events}, {"record_ilp", c.record_ilp}};
    if (!c.trace_file.empty()) j["trace_file"] = c.trace_file;
    if (c.replay_count > 0) j["replay_count"] = c.replay_count;
    if (c.bucket_shares) j["bucket_shares"] = *c.bucket_shares;
    if (c.stage_speeds) j["stage_speeds"] = *c.stage_speeds;
    return j;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config " + path);
    return config_from_json(nlohmann::json::parse(in));
}

Preset resolve_preset(const std::string& name_or_path) {
    if (std::filesystem::exists(name_or_path) && !std::filesystem::is_directory(name_or_path))
        return load_preset_file(name_or_path);
    return load_preset(name_or_path);
}

Trace build_trace(const ExperimentConfig& cfg, const Preset& preset) {
    const double factor = cfg.rate_scale > 0 ? cfg.rate_scale : static_cast<double>(cfg.gpus()) / kReferenceGpus;
    const ArrivalProcess proc = cfg.arrival == "uniform" ? ArrivalProcess::Uniform : ArrivalProcess::Poisson;
    Trace t;
    if (cfg.workload == "steady") {
        t = gen_steady(scale_rate(preset.mix(cfg.mix), factor), cfg.duration, cfg.seed, proc);
    } else if (cfg.workload == "dynamic") {
        std::array<MixSpec, 3> mixes{scale_rate(preset.mixes[0], factor), scale_rate(preset.mixes[1], factor),
                                     scale_rate(preset.mixes[2], factor)};
        t = gen_dynamic(mixes, default_dynamic_schedule(cfg.duration), cfg.seed, proc);
    } else {
        std::ifstream in(cfg.trace_file);
        if (!in) throw std::invalid_argument("cannot open trace " + cfg.trace_file);
        t = read_trace_jsonl(in);
        if (cfg.replay_count > 0) t = replay_scaled(t, cfg.replay_count);
    }
    return assign_slo(std::move(t), preset.profile, cfg.slo_scale);
}

EngineConfig engine_config(const ExperimentConfig& cfg, const Preset& preset) {
    EngineConfig e;
    e.cluster.nodes = cfg.nodes;
    e.cluster.node_size = cfg.node_size;
    e.cluster.gpu_memory = cfg.gpu_memory;
    e.t_win = preset.t_win;
    e.adjust_on_dispatch = cfg.adjust == "dispatch";
    e.keep_log = cfg.log_events;
    e.record_ilp = cfg.record_ilp;
    return e;
}

SimReport run_experiment(const ExperimentConfig& cfg, const Preset& preset, const Trace& trace) {
    BaselineOptions opt;
    opt.bucket_shares = cfg.bucket_shares;
    opt.stage_speeds = cfg.stage_speeds;
    opt.max_len = preset.max_len();
    opt.full.forced_switch_at = cfg.forced_switch_at;
    opt.full.alpha_weight = cfg.alpha_weight == "requests" ? AlphaWeight::Requests : AlphaWeight::GpuTime;
    const auto t0 = std::chrono::steady_clock::now();
    SimReport rep;
    rep.result = run_baseline(system_from_name(cfg.policy), trace, preset.profile, engine_config(cfg, preset), opt);
    rep.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rep.system = cfg.policy;
    rep.preset = preset.profile.name;
    rep.workload = cfg.workload == "trace" ? cfg.trace_file : cfg.workload + (cfg.workload == "steady" ? ":" + cfg.mix : "");
    rep.seed = cfg.seed;
    rep.agg = aggregate(rep.result, preset.profile, cfg.gpu_memory);
    rep.solver = solver_stats(rep.result);
    return rep;
}

SimReport run_experiment(const ExperimentConfig& cfg) {
    const Preset preset = resolve_preset(cfg.preset);
    return run_experiment(cfg, preset, build_trace(cfg, preset));
}

void write_outputs(const SimReport& rep, const Preset& preset, double capacity, const std::string& dir) {
    std::filesystem::create_directories(dir);
    const std::filesystem::path base(dir);
    {
        std::ofstream os(base / "report.json");
        os << report_json(rep).dump(2) << '\n';
    }
    {
        std::ofstream os(base / "requests.csv");
        write_requests_csv(request_rows(rep.result, preset.profile, capacity), os);
    }
    {
        std::ofstream os(base / "switches.csv");
        write_switches_csv(rep.result, os);
    }
    if (!rep.result.log.empty()) {
        std::ofstream os(base / "events.jsonl");
        for (const auto& line : rep.result.log) os << line << '\n';
    }
}

std::vector<SimReport> run_batch_parallel(const std::vector<ExperimentConfig>& cfgs) {
    std::vector<SimReport> out(cfgs.size());
    std::vector<std::string> errors(cfgs.size());
    const long n = static_cast<long>(cfgs.size());
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) {
        try {
            out[i] = run_experiment(cfgs[i]);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    }
    for (const auto& e : errors)
        if (!e.empty()) throw std::runtime_error(e);
    return out;
}

std::vector<SimReport> run_batch_serial(const std::vector<ExperimentConfig>& cfgs) {
    std::vector<SimReport> out;
    out.reserve(cfgs.size());
    for (const auto& c : cfgs) out.push_back(run_experiment(c));
    return out;
}

std::vector<SweepRow> slo_sweep(const ExperimentConfig& cfg, const std::vector<double>& alphas) {
    const Preset preset = resolve_preset(cfg.preset);
    std::vector<SweepRow> rows;
    for (double a : alphas) {
        if (!(a > 0)) throw std::invalid_argument("SLO scale must be positive");
        ExperimentConfig c = cfg;
        c.slo_scale = a;
        const SimReport rep = run_experiment(c, preset, build_trace(c, preset));
        rows.push_back({a, rep.agg.slo_attainment});
    }
    return rows;
}

std::vector<ScalingRow> solver_scaling(const Preset& preset, const std::vector<int>& gpu_counts, double ratio,
                                       std::uint64_t seed, int reps) {
    if (!(ratio > 0)) throw std::invalid_argument("pending ratio must be positive");
    const auto& prof = preset.profile;
    std::vector<ScalingRow> rows;
    for (int g : gpu_counts) {
        if (g % 8 != 0) throw std::invalid_argument("GPU count must be a multiple of 8");
        const double factor = static_cast<double>(g) / kReferenceGpus;
        const MixSpec mix = scale_rate(preset.mix("Medium"), factor);
        const Trace stats = assign_slo(gen_steady(mix, preset.t_win, seed), prof);
        const PlacementPlan plan = generate_placement(stats.requests, g, estimate_speeds(stats.requests, prof), prof);
        const int pending = static_cast<int>(std::lround(ratio * g));
        ScalingRow row;
        row.gpus = g;
        row.pending = pending;
        double total_ms = 0;
        for (int rep = 0; rep < reps; ++rep) {
            std::mt19937_64 rng(seed * 1000003ull + static_cast<std::uint64_t>(g) * 31ull + rep);
            const double tau = 100.0;
            Trace pool = gen_steady(mix, 4.0 * pending / mix.rate + 60.0, rng());
            if (static_cast<int>(pool.requests.size()) < pending)
                throw std::runtime_error("could not synthesize enough pending requests");
            pool.requests.resize(pending);
            std::uniform_real_distribution<double> age(0.0, 20.0);
            for (auto& r : pool.requests) r.arrival = tau - age(rng);
            pool = assign_slo(std::move(pool), prof);
            MonitorSnapshot snap;
            snap.time = tau;
            snap.gpus.resize(g);
            std::bernoulli_distribution idle(0.5);
            int n_idle = 0;
            for (int i = 0; i < g; ++i) {
                snap.gpus[i].node = i / 8;
                snap.gpus[i].placement = plan.gpu[i];
                snap.gpus[i].idle = idle(rng);
                snap.gpus[i].free_at = snap.gpus[i].idle ? tau : tau + 5.0;
                n_idle += snap.gpus[i].idle;
            }
            std::vector<const Request*> ptrs;
            for (const auto& r : pool.requests) ptrs.push_back(&r);
            const auto t0 = std::chrono::steady_clock::now();
            const IlpInstance inst = build_ilp(ptrs, snap, tau, prof, g / 8);
            const IlpSolution sol = solve_ilp(inst);
            const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
            total_ms += ms;
            row.max_ms = std::max(row.max_ms, ms);
            row.nodes += sol.nodes;
            row.exact = row.exact && sol.exact;
            row.idle += n_idle;
        }
        row.mean_ms = total_ms / reps;
        row.idle /= reps;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace dpsim

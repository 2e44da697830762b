#include <cmath>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "dpsim/experiment.hpp"

using namespace dpsim;

namespace {

void print_summary(const SimReport& rep) {
    const auto& a = rep.agg;
    std::cout << rep.system << " preset=" << rep.preset << " seed=" << rep.seed << " requests=" << a.total
              << " attainment=" << a.slo_attainment << " mean_latency=" << a.mean_latency
              << " p95_latency=" << a.p95_latency << " oom=" << a.oom << " unservable=" << a.unservable
              << " switches=" << a.switches << " opt_vr_share=" << a.opt_vr_share << " wall_s=" << rep.wall_s
              << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Discrete-event simulator for three-stage diffusion serving"};
    app.require_subcommand(1);

    std::string config_path, policy, ablation, out_dir, adjust;
    std::uint64_t seed = 0;
    bool log_events = false;
    auto* run = app.add_subcommand("run", "Run one experiment and write its report");
    run->add_option("--config", config_path, "Experiment config JSON")->required()->check(CLI::ExistingFile);
    run->add_option("--policy", policy, "full|b1..b6|wo_switch|wo_stageAware|wo_scheduler");
    run->add_option("--ablation", ablation, "Full with one component disabled")
        ->check(CLI::IsMember({"wo_switch", "wo_stageAware", "wo_scheduler"}))
        ->excludes("--policy");
    run->add_option("--seed", seed, "Override the config seed");
    run->add_option("--out", out_dir, "Output directory (report.json, requests.csv, switches.csv)");
    run->add_option("--adjust", adjust, "dispatch|shutdown");
    run->add_flag("--log-events", log_events, "Keep the JSON-lines event log");

    std::vector<double> alphas{1.0, 1.5, 2.0, 2.5, 3.0, 4.0};
    auto* sweep = app.add_subcommand("sweep-slo", "SLO attainment across SLO scale factors");
    sweep->add_option("--config", config_path, "Experiment config JSON")->required()->check(CLI::ExistingFile);
    sweep->add_option("--policy", policy, "Policy override");
    sweep->add_option("--alpha", alphas, "SLO scale factors");

    std::string preset_name = "flux";
    std::vector<int> gpu_counts{128, 256, 512, 1024, 4096};
    double ratio = 0.1;
    int reps = 5;
    auto* scale = app.add_subcommand("scale-solver", "Dispatcher solve time on synthesized instances");
    scale->add_option("--preset", preset_name, "Preset name or file");
    scale->add_option("--gpus", gpu_counts, "GPU counts");
    scale->add_option("--ratio", ratio, "Pending requests per GPU");
    scale->add_option("--reps", reps, "Instances per GPU count");
    scale->add_option("--seed", seed, "Seed");

    std::string trace_out;
    auto* gen = app.add_subcommand("gen-trace", "Generate a trace from a config and write JSON lines");
    gen->add_option("--config", config_path, "Experiment config JSON")->required()->check(CLI::ExistingFile);
    gen->add_option("--seed", seed, "Override the config seed");
    gen->add_option("--out", trace_out, "Output file (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            ExperimentConfig cfg = load_config(config_path);
            if (!policy.empty()) cfg.policy = policy;
            if (!ablation.empty()) cfg.policy = ablation;
            if (run->count("--seed")) cfg.seed = seed;
            if (!adjust.empty()) cfg.adjust = adjust;
            if (log_events) cfg.log_events = true;
            cfg = config_from_json(config_to_json(cfg));
            const Preset preset = resolve_preset(cfg.preset);
            const SimReport rep = run_experiment(cfg, preset, build_trace(cfg, preset));
            print_summary(rep);
            if (!out_dir.empty()) write_outputs(rep, preset, cfg.gpu_memory, out_dir);
        } else if (*sweep) {
            ExperimentConfig cfg = load_config(config_path);
            if (!policy.empty()) cfg.policy = policy;
            std::cout << "alpha,attainment\n";
            for (const auto& row : slo_sweep(cfg, alphas)) std::cout << row.alpha << ',' << row.attainment << '\n';
        } else if (*scale) {
            const Preset preset = resolve_preset(preset_name);
            std::cout << "gpus,pending,idle,mean_ms,max_ms,nodes,exact\n";
            for (const auto& r : solver_scaling(preset, gpu_counts, ratio, seed ? seed : 1, reps))
                std::cout << r.gpus << ',' << r.pending << ',' << r.idle << ',' << r.mean_ms << ',' << r.max_ms << ','
                          << r.nodes << ',' << (r.exact ? 1 : 0) << '\n';
        } else if (*gen) {
            ExperimentConfig cfg = load_config(config_path);
            if (gen->count("--seed")) cfg.seed = seed;
            const Trace t = build_trace(cfg, resolve_preset(cfg.preset));
            if (trace_out.empty()) {
                write_trace_jsonl(t, std::cout);
            } else {
                std::ofstream os(trace_out);
                write_trace_jsonl(t, os);
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

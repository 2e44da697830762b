#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dpsim/baselines.hpp"
#include "dpsim/preset.hpp"
#include "dpsim/report.hpp"

namespace dpsim {

struct ExperimentConfig {
    std::string preset = "flux";      // preset name or path to a preset file
    std::string workload = "dynamic"; // steady | dynamic | trace
    std::string mix = "Medium";
    std::string arrival = "poisson";  // poisson | uniform
    std::string trace_file;           // workload == trace
    int replay_count = 0;             // > 0: replay the trace scaled to this many requests
    double duration = 1800.0;
    int nodes = 2;
    int node_size = 8;
    double gpu_memory = kDefaultGpuMemory;
    double rate_scale = 0.0;  // 0: gpus / 128
    double slo_scale = kDefaultSloScale;
    std::uint64_t seed = 1;
    std::string policy = "full";
    std::string adjust = "dispatch";  // dispatch | shutdown
    double forced_switch_at = -1.0;
    std::string alpha_weight = "gpu_time";  // gpu_time | requests
    bool log_events = false;
    bool record_ilp = false;
    std::optional<std::array<double, 4>> bucket_shares;
    std::optional<std::array<double, 3>> stage_speeds;

    int gpus() const { return nodes * node_size; }
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& c);
ExperimentConfig load_config(const std::string& path);

Preset resolve_preset(const std::string& name_or_path);
Trace build_trace(const ExperimentConfig& cfg, const Preset& preset);
EngineConfig engine_config(const ExperimentConfig& cfg, const Preset& preset);

SimReport run_experiment(const ExperimentConfig& cfg);
SimReport run_experiment(const ExperimentConfig& cfg, const Preset& preset, const Trace& trace);

// Writes report.json, requests.csv and switches.csv (and events.jsonl when kept).
void write_outputs(const SimReport& rep, const Preset& preset, double capacity, const std::string& dir);

// Independent runs fanned out over OpenMP threads; results keep input order.
std::vector<SimReport> run_batch_parallel(const std::vector<ExperimentConfig>& cfgs);
std::vector<SimReport> run_batch_serial(const std::vector<ExperimentConfig>& cfgs);

struct SweepRow {
    double alpha = 0.0;
    double attainment = 0.0;
};
// One run per alpha on the same arrivals with deadlines re-derived.
std::vector<SweepRow> slo_sweep(const ExperimentConfig& cfg, const std::vector<double>& alphas);

struct ScalingRow {
    int gpus = 0;
    int pending = 0;
    int idle = 0;
    double mean_ms = 0.0;
    double max_ms = 0.0;
    long nodes = 0;
    bool exact = true;
};
std::vector<ScalingRow> solver_scaling(const Preset& preset, const std::vector<int>& gpu_counts, double ratio,
                                       std::uint64_t seed, int reps = 5);

}  // namespace dpsim

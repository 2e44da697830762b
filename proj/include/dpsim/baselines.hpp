#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dpsim/engine.hpp"
#include "dpsim/full_policy.hpp"

namespace dpsim {

enum class SystemKind { Full, B1, B2, B3, B4, B5, B6, WoSwitch, WoStageAware, WoScheduler };
inline constexpr std::array<SystemKind, 10> kAllSystems{
    SystemKind::Full, SystemKind::B1, SystemKind::B2, SystemKind::B3, SystemKind::B4,
    SystemKind::B5,   SystemKind::B6, SystemKind::WoSwitch, SystemKind::WoStageAware, SystemKind::WoScheduler};

const char* system_name(SystemKind k);
SystemKind system_from_name(const std::string& name);

// Half of the optimal Diffuse degree at the longest supported length.
int b1_static_degree(const CostProfile& prof, double max_len);

// Nearest multiple of k; exact halves round down.
int round_to_mult(double x, int k);

// shares and result are indexed by degree index (k = 1, 2, 4, 8)
std::array<int, 4> bucket_alloc(const std::array<double, 4>& shares, int gpus);

// speeds, weights and result are ordered E, D, C
std::array<int, 3> stage_split(const std::array<double, 3>& speeds, const std::array<double, 3>& weights, int gpus);

struct SrtfKey {
    int priority = 0;  // 0 = on time; overdue 1..4, smaller first
    double remaining = 0.0;
    int id = 0;

    auto operator<=>(const SrtfKey&) const = default;
};

int srtf_priority(double t_hat, double deadline, double t_star);
SrtfKey srtf_key(int id, double now, double remaining, double deadline, double t_star);

// GPU-time demand share per optimal Diffuse degree.
std::array<double, 4> demand_shares(const std::vector<Request>& stats, const CostProfile& prof);
// Per-GPU service rate of each stage at its optimal degree.
std::array<double, 3> stage_speeds(const std::vector<Request>& stats, const CostProfile& prof);

struct BaselineOptions {
    std::optional<std::array<double, 4>> bucket_shares;
    std::optional<std::array<double, 3>> stage_speeds;
    double max_len = 0.0;  // 0: longest Diffuse length in the trace
    FullOptions full;
};

std::unique_ptr<Policy> make_policy(SystemKind kind, const BaselineOptions& opt = {});

SimResult run_baseline(SystemKind kind, const Trace& trace, const CostProfile& prof, const EngineConfig& cfg,
                       const BaselineOptions& opt = {});

}  // namespace dpsim

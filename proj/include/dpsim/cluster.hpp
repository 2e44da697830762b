#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpsim/costmodel.hpp"
#include "dpsim/workload.hpp"

namespace dpsim {

// <EC> is deliberately absent.
enum class Placement : int { EDC = 0, DC = 1, ED = 2, D = 3, E = 4, C = 5 };
inline constexpr int kNumPlacements = 6;
inline constexpr std::array<Placement, 6> kPlacements{Placement::EDC, Placement::DC, Placement::ED,
                                                      Placement::D,   Placement::E,  Placement::C};

enum class VrType : int { V0 = 0, V1 = 1, V2 = 2, V3 = 3 };
inline constexpr int kNumVrTypes = 4;
inline constexpr std::array<VrType, 4> kVrTypes{VrType::V0, VrType::V1, VrType::V2, VrType::V3};

using StageMask = std::uint8_t;
inline constexpr StageMask stage_bit(Stage s) { return StageMask(1u << static_cast<int>(s)); }
inline constexpr StageMask kAllStages = 0b111;

const char* placement_name(Placement p);
Placement placement_from_name(const std::string& name);
const char* vr_name(VrType v);
StageMask placement_stages(Placement p);
inline bool hosts(Placement p, Stage s) { return (placement_stages(p) & stage_bit(s)) != 0; }
inline bool is_primary(Placement p) { return hosts(p, Stage::D); }

Placement primary_of(VrType v);
VrType vr_of_primary(Placement p);
bool needs_aux(VrType v, Stage s);  // true if stage s runs on an auxiliary replica
double vr_comm_bytes(const CostProfile& p, VrType v, const Request& r);

inline constexpr double kDefaultGpuMemory = 48e9;

double residual_cap(Placement p, const CostProfile& prof, double capacity = kDefaultGpuMemory);
double residual_cap(VrType v, const CostProfile& prof, double capacity = kDefaultGpuMemory);
bool vr_feasible(const Request& r, VrType v, const CostProfile& prof,
                 double capacity = kDefaultGpuMemory);

struct UnservableRequest : std::runtime_error {
    using std::runtime_error::runtime_error;
};
VrType opt_vr(const Request& r, const CostProfile& prof, double capacity = kDefaultGpuMemory);

struct ClusterConfig {
    int nodes = 16;
    int node_size = 8;
    double gpu_memory = kDefaultGpuMemory;

    int gpus() const { return nodes * node_size; }
};

struct GpuWorker {
    int index = 0;
    int node = 0;
    Placement placement = Placement::EDC;
    StageMask resident = 0;
    double free_at = 0.0;
    std::vector<int> enqueued;  // run ids in enqueue order
};

struct GpuStatus {
    bool idle = true;
    int node = 0;
    Placement placement = Placement::EDC;
    double residual = 0.0;
    int inflight_run = -1;
    double inflight_start = 0.0;
    double est_runtime = 0.0;
    double free_at = 0.0;
};

struct MonitorSnapshot {
    double time = 0.0;
    double window = 0.0;  // effective normalisation window
    std::vector<GpuStatus> gpus;
    std::array<int, kNumPlacements> replicas{};
    std::array<double, kNumPlacements> v{};  // completed plans per second by placement type
    // completed stage-plans per second by placement type and stage
    std::array<std::array<double, 3>, kNumPlacements> stage_v{};

    double stage_throughput(Stage s) const;
    int idle_count(Placement p) const;
};

}  // namespace dpsim

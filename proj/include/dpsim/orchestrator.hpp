#pragma once

#include <array>
#include <vector>

#include <json.hpp>

#include "dpsim/cluster.hpp"

namespace dpsim {

using StageSpeeds = std::array<double, kNumPlacements>;  // per-replica plans/second

struct SplitResult {
    int prim = 0;
    int aux_e = 0;
    int aux_c = 0;

    int total() const { return prim + aux_e + aux_c; }
    bool operator==(const SplitResult&) const = default;
};

struct PlacementPlan {
    std::vector<Placement> gpu;
    std::array<SplitResult, kNumVrTypes> per_vr{};
    double generated_at = 0.0;

    int count(Placement p) const;
    bool same_layout(const PlacementPlan& o) const { return gpu == o.gpu; }
};

nlohmann::json plan_to_json(const PlacementPlan& p);

int min_viable_size(VrType t);

SplitResult split(int n, const StageSpeeds& speeds, VrType t);
bool split_bounds_hold(const SplitResult& s, const StageSpeeds& speeds, VrType t);

// Pads D-carrying primaries toward node-size multiples, then packs homogeneous
// blocks node by node.
PlacementPlan pack_per_machine(std::array<SplitResult, kNumVrTypes> counts, const StageSpeeds& speeds,
                               int gpus, int node_size = 8);

// How each sampled request counts toward its OptVR type's GPU share.
enum class AlphaWeight { Requests, GpuTime };

double request_gpu_seconds(const Request& r, const CostProfile& prof);  // all stages at optimal degree

std::array<int, kNumVrTypes> vr_budgets(const std::vector<Request>& stats, int gpus,
                                        const CostProfile& prof, double capacity,
                                        AlphaWeight weight = AlphaWeight::Requests);

PlacementPlan generate_placement(const std::vector<Request>& stats, int gpus,
                                 const StageSpeeds& speeds, const CostProfile& prof,
                                 double capacity = kDefaultGpuMemory, int node_size = 8,
                                 AlphaWeight weight = AlphaWeight::Requests);

StageSpeeds estimate_speeds(const std::vector<Request>& stats, const CostProfile& prof);

inline constexpr double kPatternSkew = 1.5;
bool pattern_change(const MonitorSnapshot& snap, double skew = kPatternSkew);

PlacementPlan uniform_plan(int gpus, Placement p);

}  // namespace dpsim

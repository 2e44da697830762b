#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "dpsim/cluster.hpp"

namespace dpsim {

inline constexpr double kRewardOnTime = 1000.0;
inline constexpr double kRewardLate = 200.0;
inline constexpr double kStarvationScale = 5.0;
inline constexpr std::array<double, 4> kCommBeta{0.0, 1e-6, 5e-6, 6e-6};
inline constexpr double kTickSeconds = 0.1;

// Reward for a request whose best completion time is t_hat against deadline d,
// both measured from the request's arrival.
double reward_weight(double t_hat, double deadline);
double comm_penalty(double l_D, int type);

int degree_index(int k);  // 1,2,4,8 -> 0..3

struct DispatchPlan {
    int request = -1;
    Stage stage = Stage::D;
    std::vector<int> gpus;
    int degree = 1;
    std::string strategy;  // "single" or "sp<k>"
};

struct IlpRequest {
    int id = -1;
    double arrival = 0.0;
    double deadline = 0.0;
    double l_D = 0.0;
    double w_best = 0.0;  // reward at the best predicted completion
    int opt_type = -1;
    std::array<std::array<double, 4>, 4> t{};     // [type][degree index]
    std::array<std::array<double, 4>, 4> w{};     // reward if dispatched with this option
    std::array<std::array<std::uint8_t, 4>, 4> on_time{};  // tau + t <= deadline
    std::array<std::array<std::uint8_t, 4>, 4> f{};
    std::array<std::uint8_t, 4> e{};
    std::array<double, 4> q{};
};

struct IlpInstance {
    double tau = 0.0;
    std::array<int, 4> budget{};
    std::array<std::uint8_t, 4> types_present{};
    std::array<std::uint8_t, 4> degrees_present{1, 1, 1, 1};
    std::vector<IlpRequest> requests;
    double big_m = 0.0;

    // objective contribution in micro-units, exact integer arithmetic
    std::int64_t value_micro(int r, int type, int kidx) const;
};

struct IlpChoice {
    int type = -1;  // -1: not dispatched
    int k = 0;
};

struct IlpSolution {
    std::vector<IlpChoice> choice;
    std::vector<std::uint8_t> on_time;
    std::int64_t objective_micro = 0;
    double objective = 0.0;
    long nodes = 0;
    bool exact = true;
};

struct SolverOptions {
    long node_limit = 5'000'000;
};

IlpSolution solve_ilp(const IlpInstance& inst, const SolverOptions& opt = {});

// Independent post-hoc check of C0-C4 and the D_r linkage. Returns an empty
// string when valid, otherwise the first violation found.
std::string validate_ilp(const IlpInstance& inst, const IlpSolution& sol);

struct NodeAvailability {
    // idle[type][node] = idle GPUs of that primary type on that node
    std::vector<std::array<int, 4>> idle_per_node;
    std::array<bool, 2> aux_present{};  // E, C
};

NodeAvailability availability(const MonitorSnapshot& snap, int nodes);

struct BuildOptions {
    double capacity = kDefaultGpuMemory;
    std::array<bool, 4> allowed_types{true, true, true, true};
    // Late options are worth nothing while an on-time option exists on a node-local set the
    // current placement could provide once busy GPUs free up.
    bool hold_salvageable = false;
};

IlpInstance build_ilp(const std::vector<const Request*>& pending, const MonitorSnapshot& snap, double tau,
                      const CostProfile& prof, int nodes, const BuildOptions& opt = {});

double option_runtime(const CostProfile& prof, const Request& r, int type, int k);

struct GammaD {
    DispatchPlan plan;
    int type = 0;
};

std::vector<GammaD> realize_gamma_d(const IlpInstance& inst, const IlpSolution& sol,
                                    MonitorSnapshot& snap);

struct DeriveOptions {
    bool stage_aware = true;
    double now = 0.0;
};

// Fills Gamma^E and Gamma^C for each realised Gamma^D. Auxiliary choices update
// snap's free_at estimates so later picks in the same tick see them.
std::vector<std::vector<DispatchPlan>> derive_e_c(const std::vector<GammaD>& gamma_d,
                                                  const std::vector<const Request*>& reqs,
                                                  MonitorSnapshot& snap, const CostProfile& prof,
                                                  const DeriveOptions& opt = {});

std::vector<int> pick_aux_set(MonitorSnapshot& snap, Placement aux, int want, double now);

}  // namespace dpsim

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "dpsim/cluster.hpp"
#include "dpsim/costmodel.hpp"
#include "dpsim/engine.hpp"

namespace dpsim {

inline constexpr int kTinyMaxGpus = 4;
inline constexpr int kTinyMaxRequests = 4;

struct TinyGpu {
    Placement placement = Placement::EDC;
    int node = 0;
};

struct TinyRequest {
    int id = 0;
    double arrival = 0.0;
    double deadline = 0.0;
    // time[stage][team size - 1]; teams hold one or two GPUs
    std::array<std::array<double, 2>, 3> time{};
    double q_ed = 0.0;  // delay and cost when D's team is not within E's team
    double q_dc = 0.0;  // same for C against D
};

struct TinyInstance {
    std::vector<TinyGpu> gpus;
    std::vector<TinyRequest> requests;
};

// Singles and same-node pairs, each sorted, singles first.
std::vector<std::vector<int>> team_catalog(const TinyInstance& inst);

struct ScheduledOp {
    std::vector<int> team;
    double start = 0.0;
    double end = 0.0;
};

struct ExactSchedule {
    std::vector<std::array<ScheduledOp, 3>> ops;  // per request, per stage
    std::vector<int> on_time;
    int on_time_count = 0;
    double comm = 0.0;
    long explored = 0;
};

struct OracleOptions {
    long node_limit = 10'000'000;
};

// Lexicographic optimum: most on-time requests, then least inter-stage communication.
// Throws std::length_error above the tiny bounds and std::runtime_error if the node limit is hit.
ExactSchedule solve_exact(const TinyInstance& inst, const OracleOptions& opt = {});

// Empty string when every constraint holds, otherwise the first violation.
std::string validate_schedule(const ExactSchedule& s, const TinyInstance& inst);

TinyRequest tiny_request(const Request& r, const CostProfile& prof, int id);

// Maps the engine's runs onto the instance's teams and times; requests the engine never
// completed get no ops (validate_schedule rejects such schedules).
ExactSchedule project_engine(const SimResult& res, const TinyInstance& inst);

nlohmann::json tiny_to_json(const TinyInstance& inst);
TinyInstance tiny_from_json(const nlohmann::json& j);

struct TinyCase {
    std::uint64_t seed = 0;
    int gpus = 0;
    int requests = 0;
    int engine_on_time = 0;
    int oracle_on_time = 0;
    bool engine_complete = false;
    std::string engine_violation;
    std::string oracle_violation;
    TinyInstance instance;
};

// Random tiny cluster + trace run by the Full policy on the engine; oracle fields left empty.
TinyCase simulate_tiny_case(const CostProfile& prof, std::uint64_t seed);

// simulate_tiny_case followed by the oracle on the same instance.
TinyCase run_tiny_case(const CostProfile& prof, std::uint64_t seed, const OracleOptions& opt = {});

std::vector<TinyCase> tiny_suite_parallel(const CostProfile& prof, int n, std::uint64_t seed);
std::vector<TinyCase> tiny_suite_serial(const CostProfile& prof, int n, std::uint64_t seed);

}  // namespace dpsim

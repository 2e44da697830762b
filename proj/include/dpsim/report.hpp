#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "dpsim/engine.hpp"

namespace dpsim {

// Nearest-rank percentile; NaN for an empty sample.
double percentile_nearest_rank(std::vector<double> xs, double p);

struct Aggregates {
    int total = 0;
    int completed = 0;
    int met = 0;
    int oom = 0;
    int unservable = 0;
    double slo_attainment = 0.0;  // OOM and unservable count as misses
    double mean_latency = 0.0;    // NaN when nothing completed
    double p95_latency = 0.0;
    std::array<int, kNumVrTypes> vr_counts{};
    int on_opt_vr = 0;
    double opt_vr_share = 0.0;
    std::vector<double> throughput;  // completions per second in each span
    double span = 300.0;
    int switches = 0;
};

struct RequestRow {
    int id = 0;
    double arrival = 0.0;
    double completion = -1.0;
    double deadline = 0.0;
    bool met = false;
    int vr_type = -1;
    int opt_vr = -1;
    std::array<int, 3> degree{};
    std::string outcome;
};

std::vector<RequestRow> request_rows(const SimResult& r, const CostProfile& prof, double capacity);
Aggregates aggregate_rows(const std::vector<RequestRow>& rows, double span = 300.0);
Aggregates aggregate(const SimResult& r, const CostProfile& prof, double capacity, double span = 300.0);

struct SolverStats {
    int ticks = 0;
    double mean_ms = 0.0;
    double p95_ms = 0.0;
    double max_ms = 0.0;
    double mean_requests = 0.0;
    int inexact = 0;
};
SolverStats solver_stats(const SimResult& r);

struct SimReport {
    std::string system;
    std::string preset;
    std::string workload;
    std::uint64_t seed = 0;
    Aggregates agg;
    SolverStats solver;
    double wall_s = 0.0;
    SimResult result;
};

// Deterministic part of the report; timing lives under "timing" and is
// excluded from report_hash.
nlohmann::json report_json(const SimReport& rep);
std::uint64_t report_hash(const SimReport& rep);

void write_requests_csv(const std::vector<RequestRow>& rows, std::ostream& os);
std::vector<RequestRow> read_requests_csv(std::istream& is);
void write_switches_csv(const SimResult& r, std::ostream& os);

// Attainment of a fixed schedule when deadlines are re-derived at SLO scale alpha.
double attainment_at_scale(const SimResult& r, const CostProfile& prof, double alpha);

}  // namespace dpsim

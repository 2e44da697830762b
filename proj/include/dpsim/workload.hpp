#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dpsim/costmodel.hpp"

namespace dpsim {

inline constexpr double kMinEncodeLen = 30.0;
inline constexpr double kMaxEncodeLen = 500.0;
inline constexpr double kDefaultSloScale = 2.5;
inline constexpr double kReplicaJitter = 1e-3;

struct Request {
    int id = 0;
    double arrival = 0.0;
    double l_E = 0.0;
    double l_D = 0.0;
    double l_C = 0.0;
    double deadline = 0.0;
    std::string size_class;
    int mix = -1;

    double length(Stage s) const { return s == Stage::E ? l_E : (s == Stage::D ? l_D : l_C); }
    double slo_budget() const { return deadline - arrival; }
};

struct MixEntry {
    std::string label;
    double l_D = 0.0;
    int weight = 1;
};

struct MixSpec {
    std::string name;
    std::vector<MixEntry> entries;
    double rate = 1.0;  // requests per second
};

enum class ArrivalProcess { Poisson, Uniform };

struct Span {
    double start = 0.0;
    double end = 0.0;
    std::array<double, 3> proportions{1.0, 0.0, 0.0};
};

struct Trace {
    std::vector<Request> requests;
    double duration = 0.0;
    std::uint64_t seed = 0;
    std::string kind;
};

Trace gen_steady(const MixSpec& mix, double duration, std::uint64_t seed,
                 ArrivalProcess proc = ArrivalProcess::Poisson);

// Arrivals per span follow the proportion-weighted rate of the three mixes;
// each arrival picks its mix by the span's proportions.
Trace gen_dynamic(const std::array<MixSpec, 3>& mixes, const std::vector<Span>& schedule,
                  std::uint64_t seed, ArrivalProcess proc = ArrivalProcess::Poisson);

Trace replay_scaled(const Trace& external, int target_count);

Trace assign_slo(Trace trace, const CostProfile& profile, double scale = kDefaultSloScale);
double optimal_latency(const CostProfile& profile, const Request& r);

void validate_request(const Request& r);

void write_trace_jsonl(const Trace& t, std::ostream& os);
Trace read_trace_jsonl(std::istream& is);

}  // namespace dpsim

#include "dpsim/workload.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>

#include <json.hpp>

namespace dpsim {

namespace {

struct MixSampler {
    const MixSpec* mix;
    std::discrete_distribution<int> pick;

    explicit MixSampler(const MixSpec& m) : mix(&m) {
        if (m.entries.empty()) throw std::invalid_argument("mix has no entries");
        std::vector<double> w;
        for (const auto& e : m.entries) {
            if (e.weight < 1) throw std::invalid_argument("mix weights must be >= 1");
            w.push_back(e.weight);
        }
        pick = std::discrete_distribution<int>(w.begin(), w.end());
    }
};

Request draw_request(MixSampler& s, std::mt19937_64& rng, double arrival, int id, int mix_idx) {
    std::uniform_int_distribution<int> enc(static_cast<int>(kMinEncodeLen),
                                           static_cast<int>(kMaxEncodeLen));
    const auto& e = s.mix->entries[s.pick(rng)];
    Request r;
    r.id = id;
    r.arrival = arrival;
    r.l_E = enc(rng);
    r.l_D = e.l_D;
    r.l_C = e.l_D;
    r.size_class = e.label;
    r.mix = mix_idx;
    return r;
}

double next_gap(ArrivalProcess proc, double rate, std::mt19937_64& rng) {
    if (proc == ArrivalProcess::Uniform) return 1.0 / rate;
    std::exponential_distribution<double> ex(rate);
    return ex(rng);
}

}  // namespace

void validate_request(const Request& r) {
    if (r.l_E < kMinEncodeLen || r.l_E > kMaxEncodeLen)
        throw std::invalid_argument("l_E out of range");
    if (!(r.l_D > 0) || r.l_C != r.l_D) throw std::invalid_argument("l_C must equal l_D");
    if (!(r.deadline > r.arrival)) throw std::invalid_argument("deadline must follow arrival");
}

Trace gen_steady(const MixSpec& mix, double duration, std::uint64_t seed, ArrivalProcess proc) {
    if (!(mix.rate > 0)) throw std::invalid_argument("arrival rate must be positive");
    MixSampler sampler(mix);
    std::mt19937_64 rng(seed);
    Trace t;
    t.duration = duration;
    t.seed = seed;
    t.kind = mix.name.empty() ? "Steady" : mix.name;
    double now = next_gap(proc, mix.rate, rng);
    while (now < duration) {
        t.requests.push_back(draw_request(sampler, rng, now, static_cast<int>(t.requests.size()), 0));
        now += next_gap(proc, mix.rate, rng);
    }
    return t;
}

Trace gen_dynamic(const std::array<MixSpec, 3>& mixes, const std::vector<Span>& schedule,
                  std::uint64_t seed, ArrivalProcess proc) {
    if (schedule.empty()) throw std::invalid_argument("empty span schedule");
    for (size_t i = 0; i < schedule.size(); ++i) {
        const auto& sp = schedule[i];
        double sum = 0;
        for (double p : sp.proportions) {
            if (p < 0) throw std::invalid_argument("negative span proportion");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("span proportions must sum to 1");
        if (!(sp.end > sp.start)) throw std::invalid_argument("span must have positive length");
        if (i > 0 && std::abs(sp.start - schedule[i - 1].end) > 1e-9)
            throw std::invalid_argument("spans must be contiguous");
    }
    std::array<MixSampler, 3> samplers{MixSampler(mixes[0]), MixSampler(mixes[1]),
                                       MixSampler(mixes[2])};
    std::mt19937_64 rng(seed);
    Trace t;
    t.seed = seed;
    t.kind = "Dynamic";
    t.duration = schedule.back().end;
    for (const auto& sp : schedule) {
        double rate = 0;
        for (int m = 0; m < 3; ++m) rate += sp.proportions[m] * mixes[m].rate;
        if (!(rate > 0)) throw std::invalid_argument("span has zero arrival rate");
        std::discrete_distribution<int> which(sp.proportions.begin(), sp.proportions.end());
        double now = sp.start + next_gap(proc, rate, rng);
        while (now < sp.end) {
            int m = which(rng);
            t.requests.push_back(
                draw_request(samplers[m], rng, now, static_cast<int>(t.requests.size()), m));
            now += next_gap(proc, rate, rng);
        }
    }
    return t;
}

Trace replay_scaled(const Trace& external, int target_count) {
    if (target_count <= 0) throw std::invalid_argument("target_count must be positive");
    if (external.requests.empty()) throw std::invalid_argument("external trace is empty");
    const long n = static_cast<long>(external.requests.size());
    Trace out = external;
    out.kind = "Replay";
    out.requests.clear();
    if (target_count == n) return external;
    if (target_count < n) {
        for (long j = 0; j < target_count; ++j)
            out.requests.push_back(external.requests[j * n / target_count]);
    } else {
        struct Tagged {
            Request r;
            long order;
        };
        std::vector<Tagged> tagged;
        long order = 0;
        for (long i = 0; i < n; ++i) {
            long copies = (i + 1) * target_count / n - i * target_count / n;
            for (long c = 0; c < copies; ++c) {
                Request r = external.requests[i];
                r.arrival += c * kReplicaJitter;
                r.deadline += c * kReplicaJitter;
                tagged.push_back({r, order++});
            }
        }
        std::stable_sort(tagged.begin(), tagged.end(), [](const Tagged& a, const Tagged& b) {
            return a.r.arrival < b.r.arrival;
        });
        for (auto& tg : tagged) out.requests.push_back(tg.r);
    }
    for (size_t i = 0; i < out.requests.size(); ++i) out.requests[i].id = static_cast<int>(i);
    return out;
}

double optimal_latency(const CostProfile& profile, const Request& r) {
    double sum = 0;
    for (Stage s : kStages) {
        double l = r.length(s);
        sum += stage_time(profile, s, l, optimal_degree(profile, s, l));
    }
    return sum;
}

Trace assign_slo(Trace trace, const CostProfile& profile, double scale) {
    if (!(scale > 0)) throw std::invalid_argument("SLO scale must be positive");
    for (auto& r : trace.requests) r.deadline = r.arrival + scale * optimal_latency(profile, r);
    return trace;
}

void write_trace_jsonl(const Trace& t, std::ostream& os) {
    for (const auto& r : t.requests) {
        nlohmann::json j = {{"id", r.id},         {"arrival", r.arrival},
                            {"l_E", r.l_E},       {"l_D", r.l_D},
                            {"l_C", r.l_C},       {"deadline", r.deadline},
                            {"class", r.size_class}, {"mix", r.mix}};
        os << j.dump() << '\n';
    }
}

Trace read_trace_jsonl(std::istream& is) {
    Trace t;
    t.kind = "Replay";
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        auto j = nlohmann::json::parse(line);
        Request r;
        r.id = j.at("id").get<int>();
        r.arrival = j.at("arrival").get<double>();
        r.l_E = j.at("l_E").get<double>();
        r.l_D = j.at("l_D").get<double>();
        r.l_C = j.value("l_C", r.l_D);
        r.deadline = j.value("deadline", 0.0);
        r.size_class = j.value("class", "");
        r.mix = j.value("mix", -1);
        t.requests.push_back(r);
        t.duration = std::max(t.duration, r.arrival);
    }
    return t;
}

}  // namespace dpsim

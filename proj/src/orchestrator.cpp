#include "dpsim/orchestrator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dpsim {

namespace {

double speed(const StageSpeeds& v, Placement p) {
    double s = v[static_cast<int>(p)];
    if (!(s > 0)) throw std::invalid_argument(std::string("speed for ") + placement_name(p) +
                                              " must be positive");
    return s;
}

// rate shortfall of an auxiliary pool relative to the primary pool
double deficit(int prim, double v_prim, int aux, double v_aux) {
    return prim * v_prim - aux * v_aux;
}

SplitResult split_pair(int n, double v_prim, double v_aux, bool aux_is_e) {
    SplitResult r;
    if (n <= 1) {
        r.prim = n;
        return r;
    }
    const double rho = v_prim / v_aux;
    int prim = static_cast<int>(std::floor(n / (1.0 + rho)));
    if (prim < 1) prim = 1;
    r.prim = prim;
    (aux_is_e ? r.aux_e : r.aux_c) = n - prim;
    return r;
}

SplitResult split_triple(int n, double vp, double ve, double vc) {
    SplitResult r;
    if (n < 3) {
        // too small for all three roles
        r.prim = n >= 1 ? 1 : 0;
        r.aux_e = n >= 2 ? 1 : 0;
        return r;
    }
    const double a = vp / ve, b = vp / vc;
    const double base = n / (1.0 + a + b);
    r.prim = static_cast<int>(std::lround(base));
    r.aux_e = static_cast<int>(std::lround(base * a));
    r.aux_c = static_cast<int>(std::lround(base * b));
    r.prim = std::max(r.prim, 1);
    r.aux_e = std::max(r.aux_e, 1);
    r.aux_c = std::max(r.aux_c, 1);

    while (r.total() > n) {
        if (r.prim > 1) {
            --r.prim;
        } else if (r.aux_e >= r.aux_c && r.aux_e > 1) {
            --r.aux_e;
        } else {
            --r.aux_c;
        }
    }
    while (r.total() < n) {
        double de = deficit(r.prim, vp, r.aux_e, ve), dc = deficit(r.prim, vp, r.aux_c, vc);
        if (de <= 0 && dc <= 0)
            ++r.prim;
        else if (de >= dc)
            ++r.aux_e;
        else
            ++r.aux_c;
    }
    while (r.prim > 1) {
        double de = deficit(r.prim, vp, r.aux_e, ve), dc = deficit(r.prim, vp, r.aux_c, vc);
        if (de <= 0 && dc <= 0) break;
        --r.prim;
        if (de >= dc)
            ++r.aux_e;
        else
            ++r.aux_c;
    }
    return r;
}

}  // namespace

int PlacementPlan::count(Placement p) const {
    return static_cast<int>(std::count(gpu.begin(), gpu.end(), p));
}

nlohmann::json plan_to_json(const PlacementPlan& p) {
    nlohmann::json g = nlohmann::json::array();
    for (auto pl : p.gpu) g.push_back(placement_name(pl));
    nlohmann::json per = nlohmann::json::object();
    for (VrType t : kVrTypes) {
        const auto& s = p.per_vr[static_cast<int>(t)];
        per[vr_name(t)] = {{"prim", s.prim}, {"aux_e", s.aux_e}, {"aux_c", s.aux_c}};
    }
    return {{"generated_at", p.generated_at}, {"gpus", g}, {"per_vr", per}};
}

int min_viable_size(VrType t) {
    switch (t) {
        case VrType::V0: return 1;
        case VrType::V1:
        case VrType::V2: return 2;
        case VrType::V3: return 3;
    }
    return 1;
}

SplitResult split(int n, const StageSpeeds& v, VrType t) {
    if (n < 0) throw std::invalid_argument("negative GPU budget");
    switch (t) {
        case VrType::V0: return {n, 0, 0};
        case VrType::V1: return split_pair(n, speed(v, Placement::DC), speed(v, Placement::E), true);
        case VrType::V2: return split_pair(n, speed(v, Placement::ED), speed(v, Placement::C), false);
        case VrType::V3:
            return split_triple(n, speed(v, Placement::D), speed(v, Placement::E), speed(v, Placement::C));
    }
    return {};
}

bool split_bounds_hold(const SplitResult& s, const StageSpeeds& v, VrType t) {
    const double vp = v[static_cast<int>(primary_of(t))];
    if (needs_aux(t, Stage::E) && s.aux_e * v[static_cast<int>(Placement::E)] < s.prim * vp)
        return false;
    if (needs_aux(t, Stage::C) && s.aux_c * v[static_cast<int>(Placement::C)] < s.prim * vp)
        return false;
    return true;
}

PlacementPlan pack_per_machine(std::array<SplitResult, kNumVrTypes> counts, const StageSpeeds& speeds,
                               int gpus, int node_size) {
    if (node_size <= 0 || gpus % node_size != 0)
        throw std::invalid_argument("GPU count must be a multiple of node size");
    int sum = 0;
    for (const auto& c : counts) sum += c.total();
    if (sum != gpus) throw std::invalid_argument("split counts must sum to G");

    for (VrType t : kVrTypes) {
        if (t == VrType::V0) continue;  // no auxiliaries to borrow from
        auto& c = counts[static_cast<int>(t)];
        if (c.prim == 0 || c.prim % node_size == 0) continue;
        const int need = (c.prim / node_size + 1) * node_size - c.prim;
        SplitResult trial = c;
        bool ok = true;
        for (int u = 0; u < need && ok; ++u) {
            const bool can_e = needs_aux(t, Stage::E) && trial.aux_e > 1;
            const bool can_c = needs_aux(t, Stage::C) && trial.aux_c > 1;
            if (!can_e && !can_c) {
                ok = false;
                break;
            }
            const double se = can_e ? trial.aux_e * speeds[static_cast<int>(Placement::E)] : -1.0;
            const double sc = can_c ? trial.aux_c * speeds[static_cast<int>(Placement::C)] : -1.0;
            if (se >= sc)
                --trial.aux_e;
            else
                --trial.aux_c;
            ++trial.prim;
        }
        if (ok && split_bounds_hold(trial, speeds, t)) c = trial;
    }

    const int nodes = gpus / node_size;
    std::vector<std::vector<Placement>> node_slots(nodes);
    int next_node = 0;
    std::vector<std::pair<Placement, int>> remainders;

    std::array<int, kNumPlacements> want{};
    for (VrType t : kVrTypes) {
        const auto& c = counts[static_cast<int>(t)];
        want[static_cast<int>(primary_of(t))] += c.prim;
        want[static_cast<int>(Placement::E)] += c.aux_e;
        want[static_cast<int>(Placement::C)] += c.aux_c;
    }
    for (Placement p : kPlacements) {
        int n = want[static_cast<int>(p)];
        while (n >= node_size && next_node < nodes) {
            node_slots[next_node++].assign(node_size, p);
            n -= node_size;
        }
        if (n > 0) remainders.push_back({p, n});
    }
    auto free_slots = [&](int nd) { return node_size - static_cast<int>(node_slots[nd].size()); };
    auto node_hosts = [&](int nd, Placement p) {
        return std::find(node_slots[nd].begin(), node_slots[nd].end(), p) != node_slots[nd].end();
    };
    for (auto [p, n] : remainders) {
        int chosen = -1;
        for (int nd = 0; nd < nodes && chosen < 0; ++nd)
            if (node_hosts(nd, p) && free_slots(nd) >= n) chosen = nd;
        for (int nd = 0; nd < nodes && chosen < 0; ++nd)
            if (free_slots(nd) >= n) chosen = nd;
        if (chosen >= 0) {
            node_slots[chosen].insert(node_slots[chosen].end(), n, p);
            continue;
        }
        for (int nd = 0; nd < nodes && n > 0; ++nd) {
            if (!node_hosts(nd, p)) continue;
            int take = std::min(n, free_slots(nd));
            node_slots[nd].insert(node_slots[nd].end(), take, p);
            n -= take;
        }
        for (int nd = 0; nd < nodes && n > 0; ++nd) {
            int take = std::min(n, free_slots(nd));
            node_slots[nd].insert(node_slots[nd].end(), take, p);
            n -= take;
        }
    }

    PlacementPlan plan;
    plan.per_vr = counts;
    for (const auto& slots : node_slots) plan.gpu.insert(plan.gpu.end(), slots.begin(), slots.end());
    if (static_cast<int>(plan.gpu.size()) != gpus) throw std::logic_error("packing lost GPUs");
    return plan;
}

double request_gpu_seconds(const Request& r, const CostProfile& prof) {
    double gs = 0;
    for (Stage s : kStages) {
        const int k = optimal_degree(prof, s, r.length(s));
        gs += k * stage_time(prof, s, r.length(s), k);
    }
    return gs;
}

std::array<int, kNumVrTypes> vr_budgets(const std::vector<Request>& stats, int gpus, const CostProfile& prof,
                                        double capacity, AlphaWeight weight) {
    if (stats.empty()) throw std::invalid_argument("empty request statistics");
    std::array<int, kNumVrTypes> hits{};
    std::array<double, kNumVrTypes> mass{};
    double total = 0;
    for (const auto& r : stats) {
        try {
            const int t = static_cast<int>(opt_vr(r, prof, capacity));
            const double w = weight == AlphaWeight::Requests ? 1.0 : request_gpu_seconds(r, prof);
            ++hits[t];
            mass[t] += w;
            total += w;
        } catch (const UnservableRequest&) {
        }
    }
    if (total <= 0) throw std::invalid_argument("no servable request in statistics");

    std::array<int, kNumVrTypes> n{};
    int used = 0, largest = 0;
    for (int t = 0; t < kNumVrTypes; ++t) {
        n[t] = static_cast<int>(std::floor(mass[t] / total * gpus));
        used += n[t];
        if (mass[t] > mass[largest]) largest = t;
    }
    n[largest] += gpus - used;

    int need = 0;
    for (int t = 0; t < kNumVrTypes; ++t)
        if (hits[t] > 0) need += min_viable_size(static_cast<VrType>(t));
    if (need > gpus) throw std::invalid_argument("G smaller than the smallest viable layout");

    for (int t = 0; t < kNumVrTypes; ++t) {
        if (hits[t] == 0) continue;
        const int floor_t = min_viable_size(static_cast<VrType>(t));
        while (n[t] < floor_t) {
            int donor = -1;
            for (int u = 0; u < kNumVrTypes; ++u) {
                if (u == t) continue;
                const int keep = hits[u] > 0 ? min_viable_size(static_cast<VrType>(u)) : 0;
                if (n[u] > keep && (donor < 0 || n[u] > n[donor])) donor = u;
            }
            --n[donor];
            ++n[t];
        }
    }
    return n;
}

PlacementPlan generate_placement(const std::vector<Request>& stats, int gpus, const StageSpeeds& speeds,
                                 const CostProfile& prof, double capacity, int node_size, AlphaWeight weight) {
    if (gpus < 1) throw std::invalid_argument("G must be positive");
    auto n = vr_budgets(stats, gpus, prof, capacity, weight);
    std::array<SplitResult, kNumVrTypes> counts{};
    for (VrType t : kVrTypes) counts[static_cast<int>(t)] = split(n[static_cast<int>(t)], speeds, t);
    return pack_per_machine(counts, speeds, gpus, node_size);
}

StageSpeeds estimate_speeds(const std::vector<Request>& stats, const CostProfile& prof) {
    if (stats.empty()) throw std::invalid_argument("empty request statistics");
    std::array<double, 3> gpu_seconds{};
    for (const auto& r : stats) {
        for (Stage s : kStages) {
            const double l = r.length(s);
            const int k = optimal_degree(prof, s, l);
            gpu_seconds[stage_index(s)] += k * stage_time(prof, s, l, k);
        }
    }
    StageSpeeds v{};
    const double n = static_cast<double>(stats.size());
    for (Placement p : kPlacements) {
        double per_req = 0;
        for (Stage s : kStages)
            if (hosts(p, s)) per_req += gpu_seconds[stage_index(s)] / n;
        v[static_cast<int>(p)] = 1.0 / per_req;
    }
    return v;
}

bool pattern_change(const MonitorSnapshot& snap, double skew) {
    double lo = snap.stage_throughput(Stage::E), hi = lo;
    for (Stage s : {Stage::D, Stage::C}) {
        lo = std::min(lo, snap.stage_throughput(s));
        hi = std::max(hi, snap.stage_throughput(s));
    }
    if (hi <= 0) return false;
    if (lo <= 0) return true;
    return hi / lo >= skew;
}

PlacementPlan uniform_plan(int gpus, Placement p) {
    PlacementPlan plan;
    plan.gpu.assign(gpus, p);
    if (is_primary(p)) plan.per_vr[static_cast<int>(vr_of_primary(p))].prim = gpus;
    return plan;
}

}  // namespace dpsim

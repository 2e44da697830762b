#include "dpsim/cluster.hpp"

#include <algorithm>

namespace dpsim {

const char* placement_name(Placement p) {
    switch (p) {
        case Placement::EDC: return "EDC";
        case Placement::DC: return "DC";
        case Placement::ED: return "ED";
        case Placement::D: return "D";
        case Placement::E: return "E";
        case Placement::C: return "C";
    }
    return "?";
}

Placement placement_from_name(const std::string& name) {
    for (Placement p : kPlacements)
        if (name == placement_name(p)) return p;
    throw std::invalid_argument("unknown placement " + name);
}

const char* vr_name(VrType v) {
    static const char* names[] = {"V0", "V1", "V2", "V3"};
    return names[static_cast<int>(v)];
}

StageMask placement_stages(Placement p) {
    const StageMask e = stage_bit(Stage::E), d = stage_bit(Stage::D), c = stage_bit(Stage::C);
    switch (p) {
        case Placement::EDC: return e | d | c;
        case Placement::DC: return d | c;
        case Placement::ED: return e | d;
        case Placement::D: return d;
        case Placement::E: return e;
        case Placement::C: return c;
    }
    return 0;
}

Placement primary_of(VrType v) { return static_cast<Placement>(static_cast<int>(v)); }

VrType vr_of_primary(Placement p) {
    if (!is_primary(p)) throw std::invalid_argument("auxiliary placement has no VR type");
    return static_cast<VrType>(static_cast<int>(p));
}

bool needs_aux(VrType v, Stage s) { return !hosts(primary_of(v), s); }

double vr_comm_bytes(const CostProfile& p, VrType v, const Request& r) {
    double b = 0;
    if (needs_aux(v, Stage::E)) b += comm_bytes(p, Edge::ED, r.l_E);
    if (needs_aux(v, Stage::C)) b += comm_bytes(p, Edge::DC, r.l_D);
    return b;
}

double residual_cap(Placement p, const CostProfile& prof, double capacity) {
    double used = 0;
    for (Stage s : kStages)
        if (hosts(p, s)) used += params_bytes(prof, s);
    return capacity - used;
}

double residual_cap(VrType v, const CostProfile& prof, double capacity) {
    return residual_cap(primary_of(v), prof, capacity);
}

bool vr_feasible(const Request& r, VrType v, const CostProfile& prof, double capacity) {
    const Placement prim = primary_of(v);
    double peak = 0;
    for (Stage s : kStages)
        if (hosts(prim, s)) peak = std::max(peak, peak_mem(prof, s, r.length(s), 1));
    return peak <= residual_cap(prim, prof, capacity);
}

VrType opt_vr(const Request& r, const CostProfile& prof, double capacity) {
    for (VrType v : kVrTypes)
        if (vr_feasible(r, v, prof, capacity)) return v;
    throw UnservableRequest("request " + std::to_string(r.id) + " fits no virtual replica type");
}

double MonitorSnapshot::stage_throughput(Stage s) const {
    double sum = 0;
    for (int p = 0; p < kNumPlacements; ++p) sum += stage_v[p][stage_index(s)];
    return sum;
}

int MonitorSnapshot::idle_count(Placement p) const {
    int n = 0;
    for (const auto& g : gpus)
        if (g.idle && g.placement == p) ++n;
    return n;
}

}  // namespace dpsim

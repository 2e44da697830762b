#include "dpsim/full_policy.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <limits>
#include <numeric>

namespace dpsim {

IlpSolution greedy_srtf_choice(const IlpInstance& inst) {
    const int n = static_cast<int>(inst.requests.size());
    std::vector<double> shortest(n, std::numeric_limits<double>::infinity());
    for (int r = 0; r < n; ++r)
        for (int i = 0; i < 4; ++i)
            for (int kidx = 0; kidx < 4; ++kidx)
                if (inst.requests[r].e[kidx]) shortest[r] = std::min(shortest[r], inst.requests[r].t[i][kidx]);
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return shortest[a] < shortest[b]; });

    IlpSolution sol;
    sol.choice.assign(n, {});
    sol.on_time.assign(n, 0);
    auto budget = inst.budget;
    for (int r : order) {
        const auto& q = inst.requests[r];
        int bi = -1, bk = -1;
        for (int i = 0; i < 4; ++i)
            for (int kidx = 0; kidx < 4; ++kidx) {
                if (!q.e[kidx] || !q.f[i][kidx] || kDegrees[kidx] > budget[i]) continue;
                if (bi < 0 || q.t[i][kidx] < q.t[bi][bk]) {
                    bi = i;
                    bk = kidx;
                }
            }
        if (bi < 0) continue;
        budget[bi] -= kDegrees[bk];
        sol.choice[r] = {bi, kDegrees[bk]};
        sol.on_time[r] = q.on_time[bi][bk];
        sol.objective_micro += inst.value_micro(r, bi, bk);
    }
    sol.objective = static_cast<double>(sol.objective_micro) / 1e6;
    sol.exact = false;
    return sol;
}

PlacementPlan FullPolicy::make_plan(const Engine& eng, const std::vector<Request>& stats) const {
    const auto& c = eng.config().cluster;
    return generate_placement(stats, c.gpus(), estimate_speeds(stats, eng.profile()), eng.profile(), c.gpu_memory,
                              c.node_size, opt_.alpha_weight);
}

void FullPolicy::bootstrap(Engine& eng, const Trace& trace) {
    std::vector<Request> stats = opt_.bootstrap_stats;
    if (stats.empty())
        for (const auto& r : trace.requests)
            if (r.arrival < eng.config().t_win) stats.push_back(r);
    if (stats.empty()) stats = trace.requests;
    if (stats.empty()) return;
    std::erase_if(stats, [&](const Request& r) {
        for (VrType v : kVrTypes)
            if (vr_feasible(r, v, eng.profile(), eng.config().cluster.gpu_memory)) return false;
        return true;
    });
    if (!stats.empty()) eng.set_initial_plan(make_plan(eng, stats));
}

void FullPolicy::on_arrival(Engine& eng, int req) {
    try {
        opt_vr(eng.request(req), eng.profile(), eng.config().cluster.gpu_memory);
    } catch (const UnservableRequest& e) {
        eng.fail(req, Outcome::Unservable, e.what());
        return;
    }
    pending_.push_back(req);
}

bool FullPolicy::missing_type(const Engine& eng) const {
    const auto& plan = eng.plan();
    const bool has_e = plan.count(Placement::E) > 0, has_c = plan.count(Placement::C) > 0;
    for (int id : pending_) {
        bool servable = false;
        for (VrType v : kVrTypes) {
            if (plan.count(primary_of(v)) == 0) continue;
            if (needs_aux(v, Stage::E) && !has_e) continue;
            if (needs_aux(v, Stage::C) && !has_c) continue;
            if (vr_feasible(eng.request(id), v, eng.profile(), eng.config().cluster.gpu_memory)) servable = true;
        }
        if (!servable) return true;
    }
    return false;
}

bool FullPolicy::demand_drift(const Engine& eng, const std::vector<Request>& stats) const {
    if (opt_.drift_fraction <= 0 || stats.empty()) return false;
    const auto& c = eng.config().cluster;
    std::array<int, kNumVrTypes> want{};
    try {
        want = vr_budgets(stats, c.gpus(), eng.profile(), c.gpu_memory, opt_.alpha_weight);
    } catch (const std::invalid_argument&) {
        return false;
    }
    int moved = 0;
    for (int t = 0; t < kNumVrTypes; ++t) moved += std::abs(want[t] - eng.plan().per_vr[t].total());
    return moved / 2 >= opt_.drift_fraction * c.gpus();
}

void FullPolicy::maybe_switch(Engine& eng) {
    const double now = eng.now(), win = eng.config().t_win;
    if (now < win || now - last_switch_ < win || now - last_eval_ < opt_.reevaluate_every) return;
    last_eval_ = now;
    const bool skew = pattern_change(eng.snapshot());
    const bool missing = missing_type(eng);
    const auto stats = eng.recent_arrivals(win);
    const bool drift = !skew && !missing && demand_drift(eng, stats);
    if (!skew && !missing && !drift) return;
    if (stats.empty()) return;
    PlacementPlan plan;
    try {
        plan = make_plan(eng, stats);
    } catch (const std::invalid_argument&) {
        return;
    }
    plan.generated_at = now;
    if (eng.switch_plan(plan, skew ? "throughput skew" : missing ? "missing replica type" : "demand drift")) last_switch_ = now;
}

void FullPolicy::on_tick(Engine& eng) {
    if (opt_.forced_switch_at >= 0 && !forced_done_ && eng.now() >= opt_.forced_switch_at) {
        forced_done_ = true;
        const auto stats = eng.recent_arrivals(eng.config().t_win);
        if (!stats.empty()) {
            try {
                PlacementPlan plan = make_plan(eng, stats);
                plan.generated_at = eng.now();
                if (eng.switch_plan(plan, "forced")) last_switch_ = eng.now();
            } catch (const std::invalid_argument&) {
            }
        }
    }
    if (opt_.switching) maybe_switch(eng);
    if (!eng.accepting() || pending_.empty()) return;
    MonitorSnapshot snap = eng.snapshot();
    int idle = 0;
    for (const auto& g : snap.gpus)
        if (g.idle && is_primary(g.placement)) ++idle;
    if (idle == 0) return;

    const auto t0 = std::chrono::steady_clock::now();
    std::vector<const Request*> reqs;
    for (int id : pending_) reqs.push_back(&eng.request(id));
    BuildOptions bo;
    bo.capacity = eng.config().cluster.gpu_memory;
    bo.hold_salvageable = opt_.hold_salvageable;
    const IlpInstance inst = build_ilp(reqs, snap, eng.now(), eng.profile(), eng.config().cluster.nodes, bo);
    const IlpSolution sol = opt_.use_ilp ? solve_ilp(inst, opt_.solver) : greedy_srtf_choice(inst);
    const auto gamma_d = realize_gamma_d(inst, sol, snap);
    std::vector<const Request*> chosen;
    for (const auto& g : gamma_d) chosen.push_back(&eng.request(g.plan.request));
    DeriveOptions dopt;
    dopt.stage_aware = opt_.stage_aware;
    dopt.now = eng.now();
    const auto plans = derive_e_c(gamma_d, chosen, snap, eng.profile(), dopt);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    eng.record_ilp(inst, sol);
    for (std::size_t n = 0; n < gamma_d.size(); ++n) {
        const int id = gamma_d[n].plan.request;
        eng.submit(id, plans[n], gamma_d[n].type);
        std::erase(pending_, id);
    }
    SolverRecord rec;
    rec.time = eng.now();
    rec.requests = static_cast<int>(inst.requests.size());
    rec.idle_gpus = idle;
    rec.wall_s = wall;
    rec.nodes = sol.nodes;
    rec.exact = sol.exact;
    rec.dispatched = static_cast<int>(gamma_d.size());
    eng.record_solver(rec);
}

}  // namespace dpsim

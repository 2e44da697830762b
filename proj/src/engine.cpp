#include "dpsim/engine.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <stdexcept>

namespace dpsim {

const char* outcome_name(Outcome o) {
    switch (o) {
        case Outcome::Pending: return "pending";
        case Outcome::Completed: return "completed";
        case Outcome::Oom: return "oom";
        case Outcome::Unservable: return "unservable";
    }
    return "?";
}

std::uint64_t fnv1a(const std::string& s, std::uint64_t h) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

void Policy::on_stall(Engine& eng) { eng.abandon_unfinished("stalled"); }

namespace {

std::string fmt_time(double t) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", t);
    return buf;
}

std::string int_list(const std::vector<int>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s + "]";
}

std::string stage_string(const std::vector<Stage>& st) {
    std::string s;
    for (Stage x : st) s += stage_name(x);
    return s;
}

bool subset_of(const std::vector<int>& a, const std::vector<int>& b) {
    for (int x : a)
        if (std::find(b.begin(), b.end(), x) == b.end()) return false;
    return true;
}

}  // namespace

Engine::Engine(const CostProfile& prof, EngineConfig cfg, Policy& policy)
    : prof_(prof), cfg_(cfg), policy_(policy) {
    const int n = cfg_.cluster.gpus();
    if (n <= 0) throw std::invalid_argument("cluster has no GPUs");
    gpus_.resize(n);
    for (int g = 0; g < n; ++g) {
        gpus_[g].index = g;
        gpus_[g].node = g / cfg_.cluster.node_size;
    }
    hb_.resize(n);
    plan_ = uniform_plan(n, Placement::EDC);
    for (auto& g : gpus_) g.resident = kAllStages;
}

void Engine::push(double t, Ev kind, int a) { queue_.push({t, seq_++, kind, a}); }

void Engine::log(const std::string& line) {
    hash_ = fnv1a(line + "\n", hash_);
    if (cfg_.keep_log) out_.log.push_back(line);
}

double Engine::residual(int gpu) const {
    return residual_cap(gpus_.at(gpu).placement, prof_, cfg_.cluster.gpu_memory);
}

void Engine::set_initial_plan(const PlacementPlan& p) {
    if (static_cast<int>(p.gpu.size()) != static_cast<int>(gpus_.size()))
        throw std::invalid_argument("plan size does not match cluster");
    plan_ = p;
    for (std::size_t g = 0; g < gpus_.size(); ++g) {
        gpus_[g].placement = p.gpu[g];
        gpus_[g].resident = placement_stages(p.gpu[g]);
    }
    std::string counts;
    for (Placement q : kPlacements) counts += std::string(counts.empty() ? "" : ",") + "\"" + placement_name(q) + "\":" + std::to_string(p.count(q));
    log("{\"t\":" + fmt_time(now_) + ",\"ev\":\"plan\",\"counts\":{" + counts + "}}");
}

bool Engine::switch_plan(const PlacementPlan& p, const std::string& reason) {
    if (static_cast<int>(p.gpu.size()) != static_cast<int>(gpus_.size()))
        throw std::invalid_argument("plan size does not match cluster");
    if (p.same_layout(plan_)) return false;
    SwitchRecord rec;
    rec.time = now_;
    rec.reason = reason;
    for (Placement q : kPlacements) rec.counts[static_cast<int>(q)] = p.count(q);
    plan_ = p;
    ++plan_version_;
    if (cfg_.adjust_on_dispatch) {
        for (std::size_t g = 0; g < gpus_.size(); ++g) gpus_[g].placement = p.gpu[g];
        rec.resume = now_;
    } else {
        double drain = now_;
        for (const auto& g : gpus_) drain = std::max(drain, g.free_at);
        double reload = 0;
        for (std::size_t g = 0; g < gpus_.size(); ++g)
            for (Stage s : kStages)
                if (hosts(p.gpu[g], s) && !(gpus_[g].resident & stage_bit(s)))
                    reload += params_bytes(prof_, s) / cfg_.host_bw;
        const double resume = drain + reload;
        for (std::size_t g = 0; g < gpus_.size(); ++g) {
            gpus_[g].placement = p.gpu[g];
            gpus_[g].resident = placement_stages(p.gpu[g]);
            gpus_[g].free_at = resume;
        }
        resume_at_ = resume;
        rec.resume = resume;
    }
    std::string counts;
    for (Placement q : kPlacements) counts += std::string(counts.empty() ? "" : ",") + "\"" + placement_name(q) + "\":" + std::to_string(p.count(q));
    log("{\"t\":" + fmt_time(now_) + ",\"ev\":\"switch\",\"resume\":" + fmt_time(rec.resume) + ",\"counts\":{" +
        counts + "}}");
    out_.switches.push_back(rec);
    return true;
}

MonitorSnapshot Engine::snapshot() const {
    MonitorSnapshot s;
    s.time = now_;
    s.window = std::min(cfg_.t_win, now_);
    s.gpus.resize(gpus_.size());
    for (std::size_t g = 0; g < gpus_.size(); ++g) {
        const auto& w = gpus_[g];
        auto& st = s.gpus[g];
        st.node = w.node;
        st.placement = w.placement;
        st.idle = w.free_at <= now_ && accepting();
        st.free_at = std::max(w.free_at, now_);
        st.residual = residual(static_cast<int>(g));
        if (!w.enqueued.empty()) {
            const Run& r = runs_[w.enqueued.back()];
            if (r.end > now_) {
                st.inflight_run = r.id;
                st.inflight_start = r.start;
                st.est_runtime = r.end - r.start;
            }
        }
        ++s.replicas[static_cast<int>(w.placement)];
    }
    if (s.window > 0) {
        for (const auto& c : completions_) {
            if (c.time < now_ - cfg_.t_win || c.time > now_) continue;
            const int p = static_cast<int>(c.placement);
            s.v[p] += 1.0 / s.window;
            for (Stage st : kStages)
                if (c.stages & stage_bit(st)) s.stage_v[p][stage_index(st)] += 1.0 / s.window;
        }
    }
    return s;
}

std::vector<Request> Engine::recent_arrivals(double window) const {
    std::vector<Request> out;
    for (int id : arrived_)
        if (recs_[id].req.arrival >= now_ - window) out.push_back(recs_[id].req);
    return out;
}

bool Engine::hot(const std::vector<int>& gpus) {
    if (gpus.size() <= 1) return true;
    const int node = gpus_[gpus[0]].node;
    bool same_node = true;
    for (int g : gpus) same_node = same_node && gpus_[g].node == node;
    if (same_node) {
        std::vector<int> local;
        for (int g : gpus) local.push_back(g - node * cfg_.cluster.node_size);
        std::sort(local.begin(), local.end());
        const int m = static_cast<int>(local.size());
        bool prefix = (m & (m - 1)) == 0;
        for (int i = 0; i < m && prefix; ++i) prefix = local[i] == i;
        if (prefix) return true;
    }
    std::vector<int> sorted = gpus;
    std::sort(sorted.begin(), sorted.end());
    std::uint64_t key = 1469598103934665603ull;
    for (int g : sorted) key = fnv1a(std::to_string(g) + ",", key);
    return !instance_cache_.insert(key).second;
}

double Engine::load_time(int gpu, Stage s) const {
    const int node = gpus_[gpu].node;
    bool peer = false;
    for (const auto& w : gpus_)
        if (w.node == node && w.index != gpu && (w.resident & stage_bit(s))) peer = true;
    return params_bytes(prof_, s) / (peer ? prof_.bw_intra : cfg_.host_bw);
}

bool Engine::submit(int req, const std::vector<DispatchPlan>& plans, int vr_type) {
    auto& rec = recs_.at(req);
    if (rec.outcome != Outcome::Pending) throw std::logic_error("submit for a finished request");
    if (plans.empty()) return true;
    for (const auto& p : plans) {
        if (p.gpus.empty() || static_cast<int>(p.gpus.size()) < p.degree)
            throw std::invalid_argument("plan degree exceeds its GPU set");
        const double need = peak_mem(prof_, p.stage, rec.req.length(p.stage), p.degree);
        for (int g : p.gpus)
            if (need > residual(g)) {
                fail(req, Outcome::Oom,
                     std::string("stage ") + stage_name(p.stage) + " needs " + std::to_string(need) +
                         " bytes on GPU " + std::to_string(g));
                return false;
            }
    }

    std::size_t i = 0;
    int prev = rec.last_run;
    while (i < plans.size()) {
        std::size_t j = i;
        Run run;
        run.id = static_cast<int>(runs_.size());
        run.request = req;
        run.gpus = plans[i].gpus;
        while (j < plans.size() && plans[j].gpus == run.gpus) {
            run.stages.push_back(plans[j].stage);
            run.degrees.push_back(plans[j].degree);
            rec.degree[stage_index(plans[j].stage)] = plans[j].degree;
            ++j;
        }
        run.enqueued = now_;
        run.plan_version = plan_version_;

        double ready = now_;
        for (int g : run.gpus) {
            auto& w = gpus_[g];
            double t = std::max(now_, w.free_at);
            StageMask loaded = 0;
            for (Stage s : run.stages)
                if (!(w.resident & stage_bit(s))) {
                    t += load_time(g, s);
                    loaded |= stage_bit(s);
                }
            // extra stages stay resident only until the next load evicts them
            if (loaded) w.resident = static_cast<StageMask>((w.resident & placement_stages(w.placement)) | loaded);
            ready = std::max(ready, t);
        }
        run.cold = !hot(run.gpus);
        run.ready = ready + (run.cold ? prof_.reinstance_cold_s : prof_.reinstance_hot_s);

        run.input_ready = now_;
        if (prev >= 0) {
            const Run& p = runs_[prev];
            run.input_ready = p.end;
            const Stage first = run.stages.front();
            if (first != Stage::E && !subset_of(run.gpus, p.gpus)) {
                const double bytes = first == Stage::D ? comm_bytes(prof_, Edge::ED, rec.req.l_E)
                                                       : comm_bytes(prof_, Edge::DC, rec.req.l_D);
                const bool inter = gpus_[p.gpus[0]].node != gpus_[run.gpus[0]].node;
                const double bcast = run.gpus.size() > 1 ? bytes / prof_.bw_intra : 0.0;
                double t = bytes / (inter ? prof_.bw_inter : prof_.bw_intra) + bcast;
                const double start_guess = std::max(run.ready, p.end + t);
                auto& slots = hb_[run.gpus[0]];
                std::erase_if(slots, [&](const HbSlot& s) { return s.to < now_; });
                double occupied = 0;
                for (const auto& s : slots)
                    if (s.from < start_guess && s.to > p.end) occupied += s.bytes;
                if (occupied + bytes > cfg_.hb_capacity) {
                    t = bytes / cfg_.host_bw + bcast;
                    run.host_path = true;
                } else {
                    slots.push_back({p.end, start_guess, bytes});
                }
                run.transfer = t;
                run.input_ready = p.end + t;
            }
        }
        run.start = std::max(run.ready, run.input_ready);
        double dur = 0;
        for (std::size_t s = 0; s < run.stages.size(); ++s)
            dur += stage_time(prof_, run.stages[s], rec.req.length(run.stages[s]), run.degrees[s]);
        run.end = run.start + dur;
        for (int g : run.gpus) {
            gpus_[g].free_at = run.end;
            gpus_[g].enqueued.push_back(run.id);
        }
        max_run_end_ = std::max(max_run_end_, run.end);
        push(run.start, Ev::PlanStart, run.id);
        push(run.end, Ev::PlanEnd, run.id);
        if (run.transfer > 0) push(run.input_ready, Ev::TransferEnd, run.id);
        log("{\"t\":" + fmt_time(now_) + ",\"ev\":\"dispatch\",\"run\":" + std::to_string(run.id) +
            ",\"req\":" + std::to_string(req) + ",\"stages\":\"" + stage_string(run.stages) +
            "\",\"gpus\":" + int_list(run.gpus) + ",\"k\":" + int_list(run.degrees) +
            ",\"start\":" + fmt_time(run.start) + ",\"end\":" + fmt_time(run.end) + "}");
        prev = run.id;
        runs_.push_back(std::move(run));
        i = j;
    }
    rec.last_run = prev;
    rec.next_stage += static_cast<int>(plans.size());
    if (rec.first_dispatch < 0) rec.first_dispatch = now_;
    if (vr_type >= 0) {
        rec.vr_type = vr_type;
    } else if (rec.vr_type < 0) {
        for (const auto& p : plans)
            if (p.stage == Stage::D && is_primary(gpus_[p.gpus[0]].placement))
                rec.vr_type = static_cast<int>(vr_of_primary(gpus_[p.gpus[0]].placement));
    }
    last_progress_ = now_;
    return true;
}

void Engine::fail(int req, Outcome why, const std::string& reason) {
    auto& rec = recs_.at(req);
    if (rec.outcome != Outcome::Pending) return;
    rec.outcome = why;
    rec.reason = reason;
    --unfinished_;
    log("{\"t\":" + fmt_time(now_) + ",\"ev\":\"fail\",\"req\":" + std::to_string(req) + ",\"why\":\"" +
        outcome_name(why) + "\"}");
}

void Engine::record_solver(const SolverRecord& s) { out_.solver.push_back(s); }

void Engine::record_ilp(const IlpInstance& inst, const IlpSolution& sol) {
    if (cfg_.record_ilp) out_.ilp_log.emplace_back(inst, sol);
}

void Engine::abandon_unfinished(const std::string& reason) {
    for (auto& r : recs_)
        if (r.outcome == Outcome::Pending && r.req.arrival <= now_) fail(r.req.id, Outcome::Unservable, reason);
}

void Engine::handle_run_end(const Run& r) {
    StageMask mask = 0;
    for (Stage s : r.stages) mask |= stage_bit(s);
    completions_.push_back({r.end, gpus_[r.gpus[0]].placement, mask});
    log("{\"t\":" + fmt_time(now_) + ",\"ev\":\"plan_end\",\"run\":" + std::to_string(r.id) + "}");
    auto& rec = recs_[r.request];
    if ((mask & stage_bit(Stage::C)) && rec.outcome == Outcome::Pending) {
        rec.outcome = Outcome::Completed;
        rec.completion = r.end;
        --unfinished_;
        log("{\"t\":" + fmt_time(now_) + ",\"ev\":\"complete\",\"req\":" + std::to_string(r.request) + "}");
    }
    last_progress_ = now_;
    policy_.on_run_end(*this, r);
}

SimResult Engine::run(const Trace& trace) {
    for (std::size_t i = 0; i < trace.requests.size(); ++i) {
        if (trace.requests[i].id != static_cast<int>(i))
            throw std::invalid_argument("trace request ids must be 0..n-1 in order");
        RequestRecord rec;
        rec.req = trace.requests[i];
        recs_.push_back(rec);
    }
    unfinished_ = static_cast<int>(recs_.size());
    arrivals_left_ = unfinished_;
    policy_.bootstrap(*this, trace);
    for (const auto& r : trace.requests) push(r.arrival, Ev::Arrival, r.id);
    push(0.0, Ev::Tick, 0);
    push(0.0, Ev::MonitorSample, 0);

    while (!queue_.empty()) {
        const Event ev = queue_.top();
        queue_.pop();
        now_ = ev.time;
        switch (ev.kind) {
            case Ev::Arrival: {
                --arrivals_left_;
                arrived_.push_back(ev.a);
                log("{\"t\":" + fmt_time(now_) + ",\"ev\":\"arrival\",\"req\":" + std::to_string(ev.a) + "}");
                policy_.on_arrival(*this, ev.a);
                break;
            }
            case Ev::Tick: {
                while (!completions_.empty() && completions_.front().time < now_ - cfg_.t_win)
                    completions_.pop_front();
                while (!arrived_.empty() && recs_[arrived_.front()].req.arrival < now_ - 2 * cfg_.t_win)
                    arrived_.pop_front();
                if (accepting()) policy_.on_tick(*this);
                const bool quiet = arrivals_left_ == 0 && unfinished_ > 0 && max_run_end_ <= now_ && accepting();
                if (quiet && now_ - last_progress_ > cfg_.t_win + 1.0) policy_.on_stall(*this);
                if (now_ >= cfg_.max_time) abandon_unfinished("time limit");
                if (arrivals_left_ > 0 || unfinished_ > 0) push((ev.a + 1) * cfg_.tick, Ev::Tick, ev.a + 1);
                break;
            }
            case Ev::PlanStart:
                log("{\"t\":" + fmt_time(now_) + ",\"ev\":\"plan_start\",\"run\":" + std::to_string(ev.a) + "}");
                break;
            case Ev::PlanEnd: handle_run_end(runs_[ev.a]); break;
            case Ev::TransferEnd:
                log("{\"t\":" + fmt_time(now_) + ",\"ev\":\"transfer_end\",\"run\":" + std::to_string(ev.a) +
                    (runs_[ev.a].host_path ? ",\"path\":\"host\"}" : ",\"path\":\"direct\"}"));
                break;
            case Ev::MonitorSample: {
                const MonitorSnapshot s = snapshot();
                log("{\"t\":" + fmt_time(now_) + ",\"ev\":\"monitor_sample\",\"E\":" +
                    fmt_time(s.stage_throughput(Stage::E)) + ",\"D\":" + fmt_time(s.stage_throughput(Stage::D)) +
                    ",\"C\":" + fmt_time(s.stage_throughput(Stage::C)) + "}");
                if (arrivals_left_ > 0 || unfinished_ > 0)
                    push((ev.a + 1) * cfg_.monitor_sample_every, Ev::MonitorSample, ev.a + 1);
                break;
            }
        }
    }
    out_.requests = recs_;
    out_.runs = runs_;
    out_.log_hash = hash_;
    out_.end_time = now_;
    out_.gpus = static_cast<int>(gpus_.size());
    return std::move(out_);
}

std::string audit_no_overlap(const SimResult& r) {
    std::vector<std::vector<const Run*>> per(r.gpus);
    for (const auto& run : r.runs)
        for (int g : run.gpus) per.at(g).push_back(&run);
    for (int g = 0; g < r.gpus; ++g) {
        auto& v = per[g];
        std::sort(v.begin(), v.end(), [](auto* a, auto* b) { return a->start < b->start; });
        for (std::size_t i = 1; i < v.size(); ++i)
            if (v[i]->start < v[i - 1]->end - 1e-9)
                return "GPU " + std::to_string(g) + ": runs " + std::to_string(v[i - 1]->id) + " and " +
                       std::to_string(v[i]->id) + " overlap";
    }
    return {};
}

std::string audit_precedence(const SimResult& r) {
    std::map<int, std::vector<const Run*>> per;
    for (const auto& run : r.runs) per[run.request].push_back(&run);
    for (const auto& [req, runs] : per) {
        int last_stage = -1;
        double last_end = -1e300;
        for (const Run* run : runs) {
            if (run->start < last_end - 1e-9) return "request " + std::to_string(req) + ": stage starts early";
            for (Stage s : run->stages) {
                if (stage_index(s) != last_stage + 1)
                    return "request " + std::to_string(req) + ": stages out of order";
                last_stage = stage_index(s);
            }
            last_end = run->end;
        }
        const auto& rec = r.requests.at(req);
        if (rec.outcome == Outcome::Completed && (last_stage != 2 || rec.completion != last_end))
            return "request " + std::to_string(req) + ": completion does not match decode end";
    }
    return {};
}

std::string audit_fifo(const SimResult& r) {
    std::vector<double> last_start(r.gpus, -1e300);
    for (const auto& run : r.runs)
        for (int g : run.gpus) {
            if (run.start < last_start[g] - 1e-9)
                return "GPU " + std::to_string(g) + ": run " + std::to_string(run.id) + " overtook an earlier run";
            last_start[g] = run.start;
        }
    return {};
}

std::string audit_conservation(const SimResult& r, std::size_t trace_size) {
    if (r.requests.size() != trace_size) return "request count mismatch";
    for (const auto& rec : r.requests)
        if (rec.outcome == Outcome::Pending) return "request " + std::to_string(rec.req.id) + " never finished";
    return {};
}

std::string audit_switches(const SimResult& r, bool adjust_on_dispatch) {
    for (const auto& run : r.runs) {
        const int v = run.plan_version;
        if (v > static_cast<int>(r.switches.size())) return "run " + std::to_string(run.id) + " has an unknown plan version";
        if (v > 0 && run.enqueued < r.switches[v - 1].time - 1e-9)
            return "run " + std::to_string(run.id) + " enqueued before its plan existed";
        if (adjust_on_dispatch) continue;
        if (v > 0 && run.start < r.switches[v - 1].resume - 1e-9)
            return "run " + std::to_string(run.id) + " started before the cluster resumed";
        if (v < static_cast<int>(r.switches.size()) && run.end > r.switches[v].resume + 1e-9)
            return "run " + std::to_string(run.id) + " outlived the drain of its plan";
    }
    return {};
}

}  // namespace dpsim

#include "dpsim/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dpsim {

const char* system_name(SystemKind k) {
    switch (k) {
        case SystemKind::Full: return "full";
        case SystemKind::B1: return "b1";
        case SystemKind::B2: return "b2";
        case SystemKind::B3: return "b3";
        case SystemKind::B4: return "b4";
        case SystemKind::B5: return "b5";
        case SystemKind::B6: return "b6";
        case SystemKind::WoSwitch: return "wo_switch";
        case SystemKind::WoStageAware: return "wo_stageAware";
        case SystemKind::WoScheduler: return "wo_scheduler";
    }
    return "?";
}

SystemKind system_from_name(const std::string& name) {
    for (SystemKind k : kAllSystems)
        if (name == system_name(k)) return k;
    throw std::invalid_argument("unknown policy " + name);
}

int b1_static_degree(const CostProfile& prof, double max_len) {
    return std::max(1, optimal_degree(prof, Stage::D, max_len) / 2);
}

int round_to_mult(double x, int k) {
    if (k <= 0) throw std::invalid_argument("multiple must be positive");
    const double q = x / k;
    const double f = std::floor(q);
    return static_cast<int>(q - f > 0.5 ? f + 1 : f) * k;
}

std::array<int, 4> bucket_alloc(const std::array<double, 4>& shares, int gpus) {
    double sum = 0;
    for (double s : shares) {
        if (s < 0) throw std::invalid_argument("negative bucket share");
        sum += s;
    }
    if (std::abs(sum - 1.0) > 1e-6) throw std::invalid_argument("bucket shares must sum to 1");
    std::array<int, 4> n{};
    for (int i = 1; i < 4; ++i) n[i] = round_to_mult(gpus * shares[i], kDegrees[i]);
    auto residual = [&] { return gpus - n[1] - n[2] - n[3]; };
    while (residual() < 0) {
        int big = 1;
        for (int i = 2; i < 4; ++i)
            if (n[i] >= n[big]) big = i;
        n[big] -= kDegrees[big];
    }
    n[0] = residual();
    return n;
}

std::array<int, 3> stage_split(const std::array<double, 3>& speeds, const std::array<double, 3>& weights, int gpus) {
    double denom = 0;
    for (int s = 0; s < 3; ++s) {
        if (!(speeds[s] > 0)) throw std::invalid_argument("stage speeds must be positive");
        denom += weights[s] / speeds[s];
    }
    std::array<int, 3> g{};
    int sum = 0;
    for (int s = 0; s < 3; ++s) {
        g[s] = static_cast<int>(std::lround(gpus * (weights[s] / speeds[s]) / denom));
        sum += g[s];
    }
    const int largest = static_cast<int>(std::max_element(g.begin(), g.end()) - g.begin());
    g[largest] += gpus - sum;
    return g;
}

int srtf_priority(double t_hat, double deadline, double t_star) {
    if (!(t_star > 0)) throw std::invalid_argument("reference runtime must be positive");
    if (t_hat <= deadline) return 0;
    const int scale = static_cast<int>(std::ceil((t_hat - deadline) / t_star));
    return std::max(1, 5 - scale);
}

SrtfKey srtf_key(int id, double now, double remaining, double deadline, double t_star) {
    return {srtf_priority(now + remaining, deadline, t_star), remaining, id};
}

std::array<double, 4> demand_shares(const std::vector<Request>& stats, const CostProfile& prof) {
    std::array<double, 4> w{};
    double total = 0;
    for (const auto& r : stats) {
        const int k = optimal_degree(prof, Stage::D, r.l_D);
        const double gs = k * stage_time(prof, Stage::D, r.l_D, k);
        w[degree_index(k)] += gs;
        total += gs;
    }
    if (total <= 0) return {1, 0, 0, 0};
    for (double& x : w) x /= total;
    return w;
}

std::array<double, 3> stage_speeds(const std::vector<Request>& stats, const CostProfile& prof) {
    if (stats.empty()) throw std::invalid_argument("empty request statistics");
    std::array<double, 3> gs{};
    for (const auto& r : stats)
        for (Stage s : kStages) {
            const int k = optimal_degree(prof, s, r.length(s));
            gs[stage_index(s)] += k * stage_time(prof, s, r.length(s), k);
        }
    std::array<double, 3> v{};
    for (int s = 0; s < 3; ++s) v[s] = static_cast<double>(stats.size()) / gs[s];
    return v;
}

namespace {

std::vector<Request> first_window(const Trace& trace, double win) {
    std::vector<Request> out;
    for (const auto& r : trace.requests)
        if (r.arrival < win) out.push_back(r);
    if (out.empty()) out = trace.requests;
    return out;
}

// A contiguous range of GPUs serving instances of one degree.
struct Region {
    int lo = 0, hi = 0, k = 1;
};

std::vector<int> find_block(const Engine& eng, const Region& reg, int k) {
    const auto& gpus = eng.gpus();
    for (int start = reg.lo; start + k <= reg.hi; start += k) {
        bool ok = true;
        for (int g = start; g < start + k && ok; ++g)
            ok = gpus[g].free_at <= eng.now() && gpus[g].node == gpus[start].node;
        if (ok) {
            std::vector<int> v(k);
            for (int i = 0; i < k; ++i) v[i] = start + i;
            return v;
        }
    }
    return {};
}

// Lays out degree buckets in descending degree order from lo so blocks stay
// node-aligned.
std::array<Region, 4> bucket_regions(const std::array<int, 4>& n, int lo) {
    std::array<Region, 4> out{};
    int at = lo;
    for (int i = 3; i >= 0; --i) {
        out[i] = {at, at + n[i], kDegrees[i]};
        at += n[i];
    }
    return out;
}

int usable_bucket(const std::array<Region, 4>& regs, int kidx) {
    if (regs[kidx].hi - regs[kidx].lo >= kDegrees[kidx]) return kidx;
    for (int i = kidx - 1; i >= 0; --i)
        if (regs[i].hi - regs[i].lo >= kDegrees[i]) return i;
    for (int i = kidx + 1; i < 4; ++i)
        if (regs[i].hi - regs[i].lo >= kDegrees[i]) return i;
    throw std::invalid_argument("no usable bucket");
}

DispatchPlan plan_on(int req, Stage s, std::vector<int> gpus, int degree) {
    DispatchPlan p;
    p.request = req;
    p.stage = s;
    p.gpus = std::move(gpus);
    p.degree = degree;
    p.strategy = degree == 1 ? "single" : "sp" + std::to_string(degree);
    return p;
}

enum class DegreeRule { Static, Bucketed, Optimal };

class ColocatedPolicy : public Policy {
   public:
    ColocatedPolicy(std::string name, DegreeRule rule, bool srtf, bool c_on_subset, BaselineOptions opt)
        : name_(std::move(name)), rule_(rule), srtf_(srtf), c_subset_(c_on_subset), opt_(std::move(opt)) {}

    std::string name() const override { return name_; }

    void bootstrap(Engine& eng, const Trace& trace) override {
        const int g = eng.config().cluster.gpus();
        const auto stats = first_window(trace, eng.config().t_win);
        double max_len = opt_.max_len;
        if (max_len <= 0)
            for (const auto& r : trace.requests) max_len = std::max(max_len, r.l_D);
        static_k_ = b1_static_degree(eng.profile(), max_len);
        if (rule_ == DegreeRule::Bucketed) {
            const auto shares = opt_.bucket_shares ? *opt_.bucket_shares : demand_shares(stats, eng.profile());
            buckets_ = bucket_regions(bucket_alloc(shares, g), 0);
        }
        eng.set_initial_plan(uniform_plan(g, Placement::EDC));
    }

    void on_arrival(Engine&, int req) override { queue_.push_back(req); }

    void on_tick(Engine& eng) override {
        if (queue_.empty()) return;
        const auto& prof = eng.profile();
        std::vector<int> order = queue_;
        if (srtf_) {
            std::vector<std::pair<SrtfKey, int>> keyed;
            for (int id : order) {
                const Request& r = eng.request(id);
                const int k = degree_for(eng, r);
                keyed.push_back({srtf_key(id, eng.now(), runtime(prof, r, k), r.deadline, optimal_latency(prof, r)), id});
            }
            std::sort(keyed.begin(), keyed.end());
            order.clear();
            for (const auto& [key, id] : keyed) order.push_back(id);
        }
        std::array<bool, 4> blocked{};
        bool global_block = false;
        std::vector<int> done;
        for (int id : order) {
            if (global_block) break;
            const Request& r = eng.request(id);
            const int k = degree_for(eng, r);
            Region reg{0, eng.config().cluster.gpus(), k};
            int bucket = -1;
            if (rule_ == DegreeRule::Bucketed) {
                bucket = usable_bucket(buckets_, degree_index(k));
                if (blocked[bucket]) continue;
                reg = buckets_[bucket];
            }
            const int kk = k;
            auto set = find_block(eng, reg, kk);
            if (set.empty()) {
                if (srtf_) continue;
                if (bucket >= 0)
                    blocked[bucket] = true;
                else
                    global_block = true;
                continue;
            }
            std::vector<DispatchPlan> plans;
            plans.push_back(plan_on(id, Stage::E, set, kk));
            plans.push_back(plan_on(id, Stage::D, set, kk));
            const int kc = c_subset_ ? std::min(kk, optimal_degree(prof, Stage::C, r.l_C)) : kk;
            plans.push_back(plan_on(id, Stage::C, std::vector<int>(set.begin(), set.begin() + kc), kc));
            eng.submit(id, plans, static_cast<int>(VrType::V0));
            done.push_back(id);
        }
        std::erase_if(queue_, [&](int id) { return std::find(done.begin(), done.end(), id) != done.end(); });
    }

   private:
    int degree_for(const Engine& eng, const Request& r) const {
        switch (rule_) {
            case DegreeRule::Static: return static_k_;
            case DegreeRule::Bucketed: {
                const int want = optimal_degree(eng.profile(), Stage::D, r.l_D);
                return buckets_[usable_bucket(buckets_, degree_index(want))].k;
            }
            case DegreeRule::Optimal: return optimal_degree(eng.profile(), Stage::D, r.l_D);
        }
        return 1;
    }

    double runtime(const CostProfile& prof, const Request& r, int k) const {
        const int kc = c_subset_ ? std::min(k, optimal_degree(prof, Stage::C, r.l_C)) : k;
        return stage_time(prof, Stage::E, r.l_E, k) + stage_time(prof, Stage::D, r.l_D, k) +
               stage_time(prof, Stage::C, r.l_C, kc);
    }

    std::string name_;
    DegreeRule rule_;
    bool srtf_;
    bool c_subset_;
    BaselineOptions opt_;
    int static_k_ = 1;
    std::array<Region, 4> buckets_{};
    std::vector<int> queue_;
};

class StageSplitPolicy : public Policy {
   public:
    StageSplitPolicy(std::string name, bool bucketed, bool srtf, BaselineOptions opt)
        : name_(std::move(name)), bucketed_(bucketed), srtf_(srtf), opt_(std::move(opt)) {}

    std::string name() const override { return name_; }

    void bootstrap(Engine& eng, const Trace& trace) override {
        const int g = eng.config().cluster.gpus();
        if (g < 3) throw std::invalid_argument("stage-split serving needs at least 3 GPUs");
        const auto stats = first_window(trace, eng.config().t_win);
        const auto speeds = opt_.stage_speeds ? *opt_.stage_speeds : stage_speeds(stats, eng.profile());
        auto split = stage_split(speeds, {1, 1, 1}, g);
        // every stage needs at least one GPU
        for (int s = 0; s < 3; ++s)
            while (split[s] < 1) {
                const int big = static_cast<int>(std::max_element(split.begin(), split.end()) - split.begin());
                --split[big];
                ++split[s];
            }
        const int gd = split[1], gc = split[2];
        PlacementPlan plan = uniform_plan(g, Placement::D);
        for (int i = gd; i < gd + gc; ++i) plan.gpu[i] = Placement::C;
        for (int i = gd + gc; i < g; ++i) plan.gpu[i] = Placement::E;
        eng.set_initial_plan(plan);
        regions_[0] = {gd + gc, g, 1};
        regions_[1] = {0, gd, 1};
        regions_[2] = {gd, gd + gc, 1};
        if (bucketed_) {
            const auto shares = opt_.bucket_shares ? *opt_.bucket_shares : demand_shares(stats, eng.profile());
            buckets_ = bucket_regions(bucket_alloc(shares, gd), 0);
        }
    }

    void on_arrival(Engine&, int req) override { queues_[0].push_back(req); }

    void on_run_end(Engine& eng, const Run& run) override {
        const Stage last = run.stages.back();
        if (last != Stage::C && eng.record(run.request).outcome == Outcome::Pending)
            queues_[stage_index(last) + 1].push_back(run.request);
    }

    void on_tick(Engine& eng) override {
        for (Stage s : kStages) dispatch_stage(eng, s);
    }

   private:
    int degree_for(const Engine& eng, const Request& r, Stage s) const {
        const int want = optimal_degree(eng.profile(), s, r.length(s));
        if (s != Stage::D) return want;
        if (bucketed_) return buckets_[usable_bucket(buckets_, degree_index(want))].k;
        return want;
    }

    double remaining(const Engine& eng, const Request& r, Stage from) const {
        double t = 0;
        for (Stage s : kStages)
            if (stage_index(s) >= stage_index(from)) t += stage_time(eng.profile(), s, r.length(s), degree_for(eng, r, s));
        return t;
    }

    void dispatch_stage(Engine& eng, Stage s) {
        auto& q = queues_[stage_index(s)];
        if (q.empty()) return;
        std::vector<int> order = q;
        if (srtf_) {
            std::vector<std::pair<SrtfKey, int>> keyed;
            for (int id : order) {
                const Request& r = eng.request(id);
                keyed.push_back(
                    {srtf_key(id, eng.now(), remaining(eng, r, s), r.deadline, optimal_latency(eng.profile(), r)), id});
            }
            std::sort(keyed.begin(), keyed.end());
            order.clear();
            for (const auto& [key, id] : keyed) order.push_back(id);
        }
        std::array<bool, 4> blocked{};
        bool global_block = false;
        std::vector<int> done;
        for (int id : order) {
            if (global_block) break;
            const Request& r = eng.request(id);
            if (eng.record(id).outcome != Outcome::Pending) {
                done.push_back(id);
                continue;
            }
            const int k = degree_for(eng, r, s);
            Region reg = regions_[stage_index(s)];
            int bucket = -1;
            if (s == Stage::D && bucketed_) {
                bucket = degree_index(k);
                if (blocked[bucket]) continue;
                reg = buckets_[bucket];
            }
            auto set = find_block(eng, reg, k);
            if (set.empty()) {
                if (srtf_) continue;
                if (bucket >= 0)
                    blocked[bucket] = true;
                else
                    global_block = true;
                continue;
            }
            eng.submit(id, {plan_on(id, s, set, k)});
            done.push_back(id);
        }
        std::erase_if(q, [&](int id) { return std::find(done.begin(), done.end(), id) != done.end(); });
    }

    std::string name_;
    bool bucketed_;
    bool srtf_;
    BaselineOptions opt_;
    std::array<Region, 3> regions_{};
    std::array<Region, 4> buckets_{};
    std::array<std::vector<int>, 3> queues_;
};

}  // namespace

std::unique_ptr<Policy> make_policy(SystemKind kind, const BaselineOptions& opt) {
    FullOptions full = opt.full;
    switch (kind) {
        case SystemKind::Full: return std::make_unique<FullPolicy>(full);
        case SystemKind::WoSwitch: full.switching = false; return std::make_unique<FullPolicy>(full);
        case SystemKind::WoStageAware: full.stage_aware = false; return std::make_unique<FullPolicy>(full);
        case SystemKind::WoScheduler: full.use_ilp = false; return std::make_unique<FullPolicy>(full);
        case SystemKind::B1: return std::make_unique<ColocatedPolicy>("b1", DegreeRule::Static, false, false, opt);
        case SystemKind::B2: return std::make_unique<ColocatedPolicy>("b2", DegreeRule::Bucketed, false, true, opt);
        case SystemKind::B3: return std::make_unique<ColocatedPolicy>("b3", DegreeRule::Optimal, false, true, opt);
        case SystemKind::B4: return std::make_unique<ColocatedPolicy>("b4", DegreeRule::Optimal, true, true, opt);
        case SystemKind::B5: return std::make_unique<StageSplitPolicy>("b5", true, false, opt);
        case SystemKind::B6: return std::make_unique<StageSplitPolicy>("b6", false, true, opt);
    }
    throw std::invalid_argument("unknown system kind");
}

SimResult run_baseline(SystemKind kind, const Trace& trace, const CostProfile& prof, const EngineConfig& cfg,
                       const BaselineOptions& opt) {
    auto policy = make_policy(kind, opt);
    Engine eng(prof, cfg, *policy);
    return eng.run(trace);
}

}  // namespace dpsim

#include "dpsim/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "dpsim/full_policy.hpp"
#include "dpsim/workload.hpp"

namespace dpsim {

namespace {

constexpr double kEps = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTol = 1e-6;

bool subset(const std::vector<int>& inner, const std::vector<int>& outer) {
    return std::all_of(inner.begin(), inner.end(),
                       [&](int g) { return std::find(outer.begin(), outer.end(), g) != outer.end(); });
}

bool team_hosts(const TinyInstance& inst, const std::vector<int>& team, Stage s) {
    return std::all_of(team.begin(), team.end(), [&](int g) { return hosts(inst.gpus[g].placement, s); });
}

double hop_delay(const TinyRequest& r, int stage, const std::vector<int>& prev, const std::vector<int>& team) {
    if (stage == 0 || subset(team, prev)) return 0.0;
    return stage == 1 ? r.q_ed : r.q_dc;
}

void check_bounds(const TinyInstance& inst) {
    if (inst.gpus.empty() || static_cast<int>(inst.gpus.size()) > kTinyMaxGpus)
        throw std::length_error("tiny instance needs 1.." + std::to_string(kTinyMaxGpus) + " GPUs");
    if (static_cast<int>(inst.requests.size()) > kTinyMaxRequests)
        throw std::length_error("tiny instance allows at most " + std::to_string(kTinyMaxRequests) + " requests");
}

// Exact search by on-time set. For a fixed set every member must meet its deadline; requests
// outside the set run after everything else on their cheapest teams, which cannot delay a
// member. Sets are tried from largest to smallest, so the first feasible size is optimal.
class Search {
   public:
    Search(const TinyInstance& inst, const OracleOptions& opt) : inst_(inst), limit_(opt.node_limit) {
        catalog_ = team_catalog(inst);
        for (int s = 0; s < 3; ++s)
            for (int w = 0; w < static_cast<int>(catalog_.size()); ++w)
                if (team_hosts(inst, catalog_[w], static_cast<Stage>(s))) {
                    compatible_[s].push_back(w);
                    has_size_[s][catalog_[w].size() - 1] = true;
                }
        for (int s = 0; s < 3; ++s)
            if (compatible_[s].empty())
                throw std::invalid_argument(std::string("no team hosts stage ") + stage_name(static_cast<Stage>(s)));
        const int n = static_cast<int>(inst.requests.size());
        min_time_.resize(n);
        for (int r = 0; r < n; ++r)
            for (int s = 0; s < 3; ++s) {
                double best = kInf;
                for (int w : compatible_[s]) best = std::min(best, inst.requests[r].time[s][catalog_[w].size() - 1]);
                min_time_[r][s] = best;
            }
        by_deadline_.resize(n);
        for (int r = 0; r < n; ++r) by_deadline_[r] = r;
        std::stable_sort(by_deadline_.begin(), by_deadline_.end(),
                         [&](int a, int b) { return inst.requests[a].deadline < inst.requests[b].deadline; });
    }

    ExactSchedule run() {
        const int n = static_cast<int>(inst_.requests.size());
        std::vector<double> solo_comm(n);
        for (int r = 0; r < n; ++r) solo_comm[r] = min_tail_comm(r, 0, -1, nullptr);
        for (int size = n; size >= 0; --size) {
            bool found = false;
            double best_total = std::numeric_limits<double>::infinity();
            for (unsigned mask = 0; mask < (1u << n); ++mask) {
                if (std::popcount(mask) != size) continue;
                double outside = 0;
                for (int r = 0; r < n; ++r)
                    if (!(mask >> r & 1u)) outside += solo_comm[r];
                if (!solve_set(mask, best_total - outside)) continue;
                const double total = best_comm_ + outside;
                if (!found || total < best_total - kEps) {
                    found = true;
                    best_total = total;
                    best_mask_ = mask;
                    chosen_team_ = best_team_;
                    chosen_start_ = best_start_;
                    chosen_end_ = best_end_;
                }
            }
            if (found) return build();
        }
        throw std::logic_error("empty on-time set must be feasible");
    }

   private:
    // Cheapest communication for stages from..2 of r, given the team of stage from-1.
    double min_tail_comm(int r, int from, int prev_team, std::vector<int>* choice) const {
        if (from == 3) return 0.0;
        double best = std::numeric_limits<double>::infinity();
        std::vector<int> best_choice, sub;
        for (int w : compatible_[from]) {
            const double hop = prev_team < 0 ? 0.0
                                             : hop_delay(inst_.requests[r], from, catalog_[prev_team], catalog_[w]);
            sub.clear();
            const double c = hop + min_tail_comm(r, from + 1, w, &sub);
            if (c < best - kEps) {
                best = c;
                best_choice = {w};
                best_choice.insert(best_choice.end(), sub.begin(), sub.end());
            }
        }
        if (choice) *choice = best_choice;
        return best;
    }

    // Least-communication schedule meeting every deadline in mask, if its cost is below budget.
    bool solve_set(unsigned mask, double budget) {
        const int n = static_cast<int>(inst_.requests.size());
        mask_ = mask;
        next_.assign(n, 0);
        prev_.assign(n, -1);
        ready_.resize(n);
        for (int r = 0; r < n; ++r) {
            ready_[r] = inst_.requests[r].arrival;
            if (!(mask >> r & 1u)) next_[r] = 3;
        }
        gpu_free_.assign(inst_.gpus.size(), 0.0);
        team_of_.assign(n, {-1, -1, -1});
        start_.assign(n, {0, 0, 0});
        end_.assign(n, {0, 0, 0});
        floor_comm_ = 0;
        for (int r = 0; r < n; ++r)
            if (mask >> r & 1u) floor_comm_ += min_tail_comm(r, 0, -1, nullptr);
        best_comm_ = budget;
        found_ = false;
        settled_ = false;
        dfs(-std::numeric_limits<double>::infinity(), -1, 0.0);
        return found_;
    }

    void dfs(double last_start, int last_req, double comm) {
        if (++explored_ > limit_) throw std::runtime_error("oracle node limit reached");
        const int n = static_cast<int>(inst_.requests.size());
        for (int s = 0; s < 3; ++s) {
            avail_[s] = kInf;
            for (int w : compatible_[s]) {
                double f = 0;
                for (int g : catalog_[w]) f = std::max(f, gpu_free_[g]);
                avail_[s] = std::min(avail_[s], f);
            }
        }
        double future_comm = 0;
        int open = 0;
        ops_.clear();
        for (int r = 0; r < n; ++r) {
            if (next_[r] == 3) continue;
            ++open;
            const auto& q = inst_.requests[r];
            // earliest starts ignoring contention except the GPUs' current commitments
            std::array<double, 3> est{}, lct{};
            double t = std::max(last_start, ready_[r]);
            for (int s = next_[r]; s < 3; ++s) {
                est[s] = std::max(t, avail_[s]);
                t = est[s] + min_time_[r][s];
            }
            if (t > q.deadline + kEps) return;
            lct[2] = q.deadline;
            for (int s = 1; s >= next_[r]; --s) lct[s] = lct[s + 1] - min_time_[r][s + 1];
            for (int s = next_[r]; s < 3; ++s) {
                WindowOp op{r, est[s], lct[s], kInf, 0, kInf};
                for (int k = 1; k <= 2; ++k) {
                    if (!has_size_[s][k - 1]) continue;
                    const double p = q.time[s][k - 1];
                    if (est[s] + p > lct[s] + kEps) continue;
                    if (op.need == 0) op.need = k;
                    op.len = std::min(op.len, p);
                    op.work = std::min(op.work, p * k);
                }
                if (op.need == 0) return;
                ops_.push_back(op);
            }
            future_comm += min_tail_comm(r, next_[r], prev_[r], nullptr);
        }
        if (comm + future_comm >= best_comm_ - kEps) return;
        if (open > 1 && (!capacity_ok(last_start) || overlap_overflow())) return;
        if (open == 0) {
            found_ = true;
            best_comm_ = comm;
            best_team_ = team_of_;
            best_start_ = start_;
            best_end_ = end_;
            if (comm <= floor_comm_ + kEps) settled_ = true;
            return;
        }
        struct Cand {
            int r, s, w;
            double hop, start, end;
        };
        std::vector<Cand> cands;
        for (int r : by_deadline_) {
            if (next_[r] == 3) continue;
            const int s = next_[r];
            const auto& q = inst_.requests[r];
            const std::size_t first = cands.size();
            for (int w : compatible_[s]) {
                const auto& team = catalog_[w];
                const double hop = prev_[r] < 0 ? 0.0 : hop_delay(q, s, catalog_[prev_[r]], team);
                double start = ready_[r] + hop;
                for (int g : team) start = std::max(start, gpu_free_[g]);
                // operations are appended in (start, request) order
                if (start < last_start - kEps) continue;
                if (std::abs(start - last_start) <= kEps && r <= last_req) continue;
                const double end = start + q.time[s][team.size() - 1];
                if (s == 2 && end > q.deadline + kEps) continue;
                cands.push_back({r, s, w, hop, start, end});
            }
            std::stable_sort(cands.begin() + static_cast<std::ptrdiff_t>(first), cands.end(),
                             [](const Cand& a, const Cand& b) {
                                 if (a.hop != b.hop) return a.hop < b.hop;
                                 return a.end < b.end;
                             });
        }
        for (const Cand& c : cands) {
            const auto& team = catalog_[c.w];
            std::array<double, kTinyMaxGpus> saved_free{};
            for (std::size_t i = 0; i < team.size(); ++i) saved_free[i] = gpu_free_[team[i]];
            const double saved_ready = ready_[c.r];
            const int saved_prev = prev_[c.r];
            for (int g : team) gpu_free_[g] = c.end;
            team_of_[c.r][c.s] = c.w;
            start_[c.r][c.s] = c.start;
            end_[c.r][c.s] = c.end;
            ready_[c.r] = c.end;
            prev_[c.r] = c.w;
            ++next_[c.r];

            dfs(c.start, c.r, comm + c.hop);

            --next_[c.r];
            prev_[c.r] = saved_prev;
            ready_[c.r] = saved_ready;
            team_of_[c.r][c.s] = -1;
            for (std::size_t i = 0; i < team.size(); ++i) gpu_free_[team[i]] = saved_free[i];
            if (settled_) break;
        }
    }

    // Remaining GPU-seconds of requests due by each deadline must fit in the GPU time left before it.
    bool capacity_ok(double from) const {
        double work = 0;
        for (int r : by_deadline_) {
            if (next_[r] == 3) continue;
            for (const auto& op : ops_)
                if (op.req == r) work += op.work;
            const double due = inst_.requests[r].deadline;
            double room = 0;
            for (double f : gpu_free_) room += std::max(0.0, due - std::max(f, from));
            if (work > room + kEps) return false;
        }
        return true;
    }

    // Operations of different requests that cannot run one after the other overlap in time, so
    // pairwise-overlapping operations all run at one instant and need disjoint teams.
    bool overlap_overflow() const {
        const int m = static_cast<int>(ops_.size());
        std::vector<unsigned> adj(m, 0);
        for (int a = 0; a < m; ++a)
            for (int b = a + 1; b < m; ++b) {
                const auto &x = ops_[a], &y = ops_[b];
                if (x.req == y.req) continue;
                if (x.est + x.len + y.len > y.lct + kEps && y.est + y.len + x.len > x.lct + kEps) {
                    adj[a] |= 1u << b;
                    adj[b] |= 1u << a;
                }
            }
        const int gpus = static_cast<int>(inst_.gpus.size());
        return clique_exceeds(adj, (1u << m) - 1, 0, gpus);
    }

    bool clique_exceeds(const std::vector<unsigned>& adj, unsigned cand, int weight, int cap) const {
        if (weight > cap) return true;
        int reach = weight;
        for (unsigned c = cand; c; c &= c - 1) reach += ops_[std::countr_zero(c)].need;
        if (reach <= cap) return false;
        while (cand) {
            const int v = std::countr_zero(cand);
            cand &= cand - 1;
            if (clique_exceeds(adj, cand & adj[v], weight + ops_[v].need, cap)) return true;
        }
        return false;
    }

    ExactSchedule build() const {
        const int n = static_cast<int>(inst_.requests.size());
        ExactSchedule out;
        out.explored = explored_;
        out.ops.resize(n);
        out.on_time.assign(n, 0);
        std::vector<double> gpu_free(inst_.gpus.size(), 0.0);
        for (int r = 0; r < n; ++r) {
            if (!(best_mask_ >> r & 1u)) continue;
            for (int s = 0; s < 3; ++s) {
                out.ops[r][s] = {catalog_[chosen_team_[r][s]], chosen_start_[r][s], chosen_end_[r][s]};
                for (int g : catalog_[chosen_team_[r][s]]) gpu_free[g] = std::max(gpu_free[g], chosen_end_[r][s]);
            }
        }
        for (int r = 0; r < n; ++r) {
            if (best_mask_ >> r & 1u) continue;
            std::vector<int> choice;
            min_tail_comm(r, 0, -1, &choice);
            const auto& q = inst_.requests[r];
            double ready = q.arrival;
            int prev = -1;
            for (int s = 0; s < 3; ++s) {
                const auto& team = catalog_[choice[s]];
                double start = ready + (prev < 0 ? 0.0 : hop_delay(q, s, catalog_[prev], team));
                for (int g : team) start = std::max(start, gpu_free[g]);
                const double end = start + q.time[s][team.size() - 1];
                for (int g : team) gpu_free[g] = end;
                out.ops[r][s] = {team, start, end};
                ready = end;
                prev = choice[s];
            }
        }
        for (int r = 0; r < n; ++r) {
            const auto& q = inst_.requests[r];
            out.on_time[r] = out.ops[r][2].end <= q.deadline + kEps ? 1 : 0;
            out.on_time_count += out.on_time[r];
            out.comm += hop_delay(q, 1, out.ops[r][0].team, out.ops[r][1].team) +
                        hop_delay(q, 2, out.ops[r][1].team, out.ops[r][2].team);
        }
        return out;
    }

    const TinyInstance& inst_;
    long limit_;
    long explored_ = 0;
    std::vector<std::vector<int>> catalog_;
    std::array<std::vector<int>, 3> compatible_;
    std::vector<std::array<double, 3>> min_time_;
    std::vector<int> by_deadline_;

    struct WindowOp {
        int req;
        double est, lct;  // earliest start, latest completion
        double len;       // shortest duration that fits the window
        int need;         // fewest GPUs that fit the window
        double work;      // least GPU-seconds that fit the window
    };
    std::vector<WindowOp> ops_;
    std::array<double, 3> avail_{};
    std::array<std::array<bool, 2>, 3> has_size_{};

    unsigned mask_ = 0;
    bool found_ = false, settled_ = false;
    double best_comm_ = 0, floor_comm_ = 0;
    std::vector<int> next_, prev_;
    std::vector<double> ready_, gpu_free_;
    std::vector<std::array<int, 3>> team_of_, best_team_, chosen_team_;
    std::vector<std::array<double, 3>> start_, end_, best_start_, best_end_, chosen_start_, chosen_end_;
    unsigned best_mask_ = 0;
};

}  // namespace

std::vector<std::vector<int>> team_catalog(const TinyInstance& inst) {
    std::vector<std::vector<int>> out;
    const int g = static_cast<int>(inst.gpus.size());
    for (int a = 0; a < g; ++a) out.push_back({a});
    for (int a = 0; a < g; ++a)
        for (int b = a + 1; b < g; ++b)
            if (inst.gpus[a].node == inst.gpus[b].node) out.push_back({a, b});
    return out;
}

ExactSchedule solve_exact(const TinyInstance& inst, const OracleOptions& opt) {
    check_bounds(inst);
    if (inst.requests.empty()) return {};
    return Search(inst, opt).run();
}

std::string validate_schedule(const ExactSchedule& s, const TinyInstance& inst) {
    const int n = static_cast<int>(inst.requests.size());
    if (static_cast<int>(s.ops.size()) != n || static_cast<int>(s.on_time.size()) != n)
        return "schedule does not cover every request";
    const auto catalog = team_catalog(inst);
    std::vector<std::vector<std::pair<double, double>>> busy(inst.gpus.size());
    int count = 0;
    double comm = 0;
    for (int r = 0; r < n; ++r) {
        const auto& q = inst.requests[r];
        const std::string who = "request " + std::to_string(r);
        for (int st = 0; st < 3; ++st) {
            const auto& op = s.ops[r][st];
            const Stage stage = static_cast<Stage>(st);
            if (op.team.empty()) return who + " stage " + stage_name(stage) + " unassigned";
            if (std::find(catalog.begin(), catalog.end(), op.team) == catalog.end())
                return who + " stage " + stage_name(stage) + " uses a team outside the catalog";
            if (!team_hosts(inst, op.team, stage)) return who + " stage " + stage_name(stage) + " on an incompatible team";
            const double dur = q.time[st][op.team.size() - 1];
            if (std::abs(op.end - op.start - dur) > kTol) return who + " stage " + stage_name(stage) + " duration mismatch";
            for (int g : op.team) busy[g].push_back({op.start, op.end});
        }
        if (s.ops[r][0].start < q.arrival - kTol) return who + " starts before arrival";
        const double hop_ed = hop_delay(q, 1, s.ops[r][0].team, s.ops[r][1].team);
        const double hop_dc = hop_delay(q, 2, s.ops[r][1].team, s.ops[r][2].team);
        if (s.ops[r][1].start < s.ops[r][0].end + hop_ed - kTol) return who + " violates E->D precedence";
        if (s.ops[r][2].start < s.ops[r][1].end + hop_dc - kTol) return who + " violates D->C precedence";
        const int on = s.ops[r][2].end <= q.deadline + kTol ? 1 : 0;
        if (s.on_time[r] != on) return who + " on-time flag disagrees with its deadline";
        count += on;
        comm += hop_ed + hop_dc;
    }
    for (std::size_t g = 0; g < busy.size(); ++g) {
        auto& iv = busy[g];
        std::sort(iv.begin(), iv.end());
        for (std::size_t i = 1; i < iv.size(); ++i)
            if (iv[i].first < iv[i - 1].second - kTol) return "overlap on GPU " + std::to_string(g);
    }
    if (count != s.on_time_count) return "on-time count mismatch";
    if (std::abs(comm - s.comm) > kTol) return "communication cost mismatch";
    return "";
}

TinyRequest tiny_request(const Request& r, const CostProfile& prof, int id) {
    TinyRequest t;
    t.id = id;
    t.arrival = r.arrival;
    t.deadline = r.deadline;
    for (Stage s : kStages)
        for (int k = 1; k <= 2; ++k) t.time[stage_index(s)][k - 1] = stage_time(prof, s, r.length(s), k);
    t.q_ed = comm_bytes(prof, Edge::ED, r.l_E) / prof.bw_intra;
    t.q_dc = comm_bytes(prof, Edge::DC, r.l_D) / prof.bw_intra;
    return t;
}

ExactSchedule project_engine(const SimResult& res, const TinyInstance& inst) {
    const int n = static_cast<int>(inst.requests.size());
    ExactSchedule out;
    out.ops.resize(n);
    out.on_time.assign(n, 0);
    for (const Run& run : res.runs) {
        if (run.request < 0 || run.request >= n) continue;
        std::vector<int> team = run.gpus;
        std::sort(team.begin(), team.end());
        double t = run.start;
        for (std::size_t i = 0; i < run.stages.size(); ++i) {
            const int st = stage_index(run.stages[i]);
            const double dur = team.size() <= 2 ? inst.requests[run.request].time[st][team.size() - 1]
                                                : std::numeric_limits<double>::quiet_NaN();
            out.ops[run.request][st] = {team, t, t + dur};
            t += dur;
        }
    }
    for (int r = 0; r < n; ++r) {
        if (r < static_cast<int>(res.requests.size()) && res.requests[r].met_slo()) out.on_time[r] = 1;
        out.on_time_count += out.on_time[r];
        const auto& ops = out.ops[r];
        if (!ops[0].team.empty() && !ops[1].team.empty() && !ops[2].team.empty())
            out.comm += hop_delay(inst.requests[r], 1, ops[0].team, ops[1].team) +
                        hop_delay(inst.requests[r], 2, ops[1].team, ops[2].team);
    }
    return out;
}

nlohmann::json tiny_to_json(const TinyInstance& inst) {
    nlohmann::json g = nlohmann::json::array(), r = nlohmann::json::array();
    for (const auto& x : inst.gpus) g.push_back({{"placement", placement_name(x.placement)}, {"node", x.node}});
    for (const auto& q : inst.requests)
        r.push_back({{"id", q.id},
                     {"arrival", q.arrival},
                     {"deadline", q.deadline},
                     {"time", q.time},
                     {"q_ed", q.q_ed},
                     {"q_dc", q.q_dc}});
    return {{"gpus", g}, {"requests", r}};
}

TinyInstance tiny_from_json(const nlohmann::json& j) {
    TinyInstance inst;
    for (const auto& g : j.at("gpus"))
        inst.gpus.push_back({placement_from_name(g.at("placement").get<std::string>()), g.value("node", 0)});
    for (const auto& q : j.at("requests")) {
        TinyRequest t;
        t.id = q.value("id", static_cast<int>(inst.requests.size()));
        t.arrival = q.value("arrival", 0.0);
        t.deadline = q.at("deadline").get<double>();
        t.time = q.at("time").get<std::array<std::array<double, 2>, 3>>();
        t.q_ed = q.value("q_ed", 0.0);
        t.q_dc = q.value("q_dc", 0.0);
        inst.requests.push_back(t);
    }
    check_bounds(inst);
    return inst;
}

TinyCase simulate_tiny_case(const CostProfile& prof, std::uint64_t seed) {
    static constexpr std::array<double, 4> kLengths{256.0, 1024.0, 4096.0, 16384.0};
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick_nodes(1, 2), pick_n(1, kTinyMaxRequests), pick_len(0, 3);
    std::uniform_real_distribution<double> when(0.0, 3.0), text(50.0, 500.0);

    TinyCase tc;
    tc.seed = seed;
    EngineConfig cfg;
    cfg.cluster.nodes = pick_nodes(rng);
    cfg.cluster.node_size = 2;
    tc.gpus = cfg.cluster.gpus();
    tc.requests = pick_n(rng);

    Trace trace;
    std::vector<double> arrivals(tc.requests);
    for (auto& a : arrivals) a = when(rng);
    std::sort(arrivals.begin(), arrivals.end());
    for (int i = 0; i < tc.requests; ++i) {
        Request r;
        r.id = i;
        r.arrival = arrivals[i];
        r.l_E = std::round(text(rng));
        r.l_D = r.l_C = kLengths[pick_len(rng)];
        trace.requests.push_back(r);
    }
    trace.duration = 3.0;
    trace = assign_slo(std::move(trace), prof);

    FullPolicy policy;
    Engine eng(prof, cfg, policy);
    const SimResult res = eng.run(trace);

    TinyInstance inst;
    for (int g = 0; g < tc.gpus; ++g) inst.gpus.push_back({eng.plan().gpu[g], g / cfg.cluster.node_size});
    for (const auto& r : trace.requests) inst.requests.push_back(tiny_request(r, prof, r.id));

    const ExactSchedule engine_sched = project_engine(res, inst);
    tc.engine_on_time = engine_sched.on_time_count;
    tc.engine_complete = std::all_of(res.requests.begin(), res.requests.end(),
                                     [](const RequestRecord& r) { return r.outcome == Outcome::Completed; });
    if (tc.engine_complete) tc.engine_violation = validate_schedule(engine_sched, inst);
    if (!res.switches.empty()) tc.engine_violation = "placement switched during a tiny run";

    tc.instance = std::move(inst);
    return tc;
}

TinyCase run_tiny_case(const CostProfile& prof, std::uint64_t seed, const OracleOptions& opt) {
    TinyCase tc = simulate_tiny_case(prof, seed);
    const ExactSchedule best = solve_exact(tc.instance, opt);
    tc.oracle_on_time = best.on_time_count;
    tc.oracle_violation = validate_schedule(best, tc.instance);
    return tc;
}

std::vector<TinyCase> tiny_suite_parallel(const CostProfile& prof, int n, std::uint64_t seed) {
    std::vector<TinyCase> out(n);
    std::vector<std::string> errors(n);
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < n; ++i) {
        try {
            out[i] = run_tiny_case(prof, seed + static_cast<std::uint64_t>(i));
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    }
    for (const auto& e : errors)
        if (!e.empty()) throw std::runtime_error(e);
    return out;
}

std::vector<TinyCase> tiny_suite_serial(const CostProfile& prof, int n, std::uint64_t seed) {
    std::vector<TinyCase> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) out.push_back(run_tiny_case(prof, seed + static_cast<std::uint64_t>(i)));
    return out;
}

}  // namespace dpsim

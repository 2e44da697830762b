#include "dpsim/dispatcher.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace dpsim {

double reward_weight(double t_hat, double deadline) {
    if (t_hat <= deadline) return kRewardOnTime;
    const double scale = deadline > 0 ? std::max(1.0, t_hat / deadline) : kStarvationScale;
    return kRewardLate * std::max(1.0, scale - kStarvationScale + 1.0);
}

double comm_penalty(double l_D, int type) { return kCommBeta.at(type) * l_D; }

int degree_index(int k) {
    switch (k) {
        case 1: return 0;
        case 2: return 1;
        case 4: return 2;
        case 8: return 3;
    }
    throw std::invalid_argument("degree must be 1, 2, 4 or 8");
}

std::int64_t IlpInstance::value_micro(int r, int type, int kidx) const {
    const auto& q = requests[r];
    return std::llround(q.w[type][kidx] * 1e6) - std::llround(q.q[type] * 1e6);
}

double option_runtime(const CostProfile& prof, const Request& r, int type, int k) {
    const Placement prim = primary_of(static_cast<VrType>(type));
    double t = stage_time(prof, Stage::D, r.l_D, k);
    if (hosts(prim, Stage::E)) t += stage_time(prof, Stage::E, r.l_E, k);
    if (hosts(prim, Stage::C)) {
        const int kc = std::min(optimal_degree(prof, Stage::C, r.l_C), k);
        t += stage_time(prof, Stage::C, r.l_C, kc);
    }
    return t;
}

NodeAvailability availability(const MonitorSnapshot& snap, int nodes) {
    NodeAvailability a;
    a.idle_per_node.assign(nodes, {0, 0, 0, 0});
    for (const auto& g : snap.gpus) {
        if (g.placement == Placement::E) a.aux_present[0] = true;
        if (g.placement == Placement::C) a.aux_present[1] = true;
        if (g.idle && is_primary(g.placement)) ++a.idle_per_node.at(g.node)[static_cast<int>(g.placement)];
    }
    return a;
}

IlpInstance build_ilp(const std::vector<const Request*>& pending, const MonitorSnapshot& snap, double tau,
                      const CostProfile& prof, int nodes, const BuildOptions& opt) {
    IlpInstance inst;
    inst.tau = tau;
    const NodeAvailability avail = availability(snap, nodes);
    std::array<int, 4> max_on_node{};
    for (const auto& node : avail.idle_per_node)
        for (int i = 0; i < 4; ++i) {
            inst.budget[i] += node[i];
            max_on_node[i] = std::max(max_on_node[i], node[i]);
        }
    std::vector<std::array<int, 4>> resident(nodes, {0, 0, 0, 0});
    for (const auto& g : snap.gpus)
        if (is_primary(g.placement)) {
            inst.types_present[static_cast<int>(g.placement)] = 1;
            ++resident.at(g.node)[static_cast<int>(g.placement)];
        }
    std::array<int, 4> max_resident{};
    for (const auto& node : resident)
        for (int i = 0; i < 4; ++i) max_resident[i] = std::max(max_resident[i], node[i]);

    std::vector<const Request*> sorted = pending;
    std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->id < b->id; });

    double sum_max_t = 0, max_deadline = 0;
    for (const Request* r : sorted) {
        IlpRequest q;
        q.id = r->id;
        q.arrival = r->arrival;
        q.deadline = r->deadline;
        q.l_D = r->l_D;
        try {
            q.opt_type = static_cast<int>(opt_vr(*r, prof, opt.capacity));
        } catch (const UnservableRequest&) {
        }
        double best_t = std::numeric_limits<double>::infinity();
        double best_any = std::numeric_limits<double>::infinity();
        double max_t = 0;
        bool salvageable = false;
        for (int kidx = 0; kidx < 4; ++kidx) {
            const int k = kDegrees[kidx];
            q.e[kidx] = (k == 1 || efficiency(prof, Stage::D, r->l_D, k) > kEfficiencyThreshold) ? 1 : 0;
        }
        for (int i = 0; i < 4; ++i) {
            const VrType v = static_cast<VrType>(i);
            q.q[i] = comm_penalty(r->l_D, i);
            const bool aux_ok = (!needs_aux(v, Stage::E) || avail.aux_present[0]) &&
                                (!needs_aux(v, Stage::C) || avail.aux_present[1]);
            const bool type_ok = opt.allowed_types[i] && vr_feasible(*r, v, prof, opt.capacity) && aux_ok;
            for (int kidx = 0; kidx < 4; ++kidx) {
                const int k = kDegrees[kidx];
                const double t = option_runtime(prof, *r, i, k);
                q.t[i][kidx] = t;
                max_t = std::max(max_t, t);
                q.on_time[i][kidx] = (tau + t <= r->deadline) ? 1 : 0;
                q.w[i][kidx] = q.on_time[i][kidx] ? kRewardOnTime
                                                  : reward_weight(tau + t - r->arrival, r->deadline - r->arrival);
                q.f[i][kidx] = (type_ok && max_on_node[i] >= k) ? 1 : 0;
                if (q.e[kidx] && type_ok && max_resident[i] >= k && q.on_time[i][kidx]) salvageable = true;
                if (q.e[kidx]) {
                    best_any = std::min(best_any, t);
                    if (q.f[i][kidx]) best_t = std::min(best_t, t);
                }
            }
        }
        if (opt.hold_salvageable && salvageable) {
            for (int i = 0; i < 4; ++i)
                for (int kidx = 0; kidx < 4; ++kidx)
                    if (!q.on_time[i][kidx]) q.w[i][kidx] = 0;
        }
        if (!std::isfinite(best_t)) best_t = best_any;
        q.w_best = (tau + best_t <= r->deadline)
                       ? kRewardOnTime
                       : reward_weight(tau + best_t - r->arrival, r->deadline - r->arrival);
        sum_max_t += max_t;
        max_deadline = std::max(max_deadline, std::abs(r->deadline));
        inst.requests.push_back(q);
    }
    inst.big_m = tau + sum_max_t + max_deadline + 1.0;
    return inst;
}

namespace {

struct Opt {
    int type;
    int kidx;
    int k;
    std::int64_t value;
    int rank;
};

constexpr int kRankNone = 16;
constexpr std::size_t kBeamWidth = 256;
using Budget = std::array<int, 4>;

std::uint64_t pack(const Budget& b) {
    std::uint64_t key = 0;
    for (int t = 0; t < 4; ++t) key |= static_cast<std::uint64_t>(b[t]) << (16 * t);
    return key;
}

Budget unpack(std::uint64_t key) {
    Budget b{};
    for (int t = 0; t < 4; ++t) b[t] = static_cast<int>((key >> (16 * t)) & 0xffffu);
    return b;
}

// Breadth-first branch-and-bound over requests in index order. Nodes with equal remaining
// budgets have identical completions, so only the better one survives (ties: the
// lexicographically smaller prefix). Nodes are bounded by a Lagrangian relaxation of the
// budget rows and must reach the greedy incumbent.
class LayeredSearch {
   public:
    LayeredSearch(const IlpInstance& inst, const SolverOptions& so) : inst_(inst), limit_(so.node_limit) {
        for (int b : inst.budget)
            if (b < 0 || b > 0xffff) throw std::invalid_argument("budget out of range");
        const int n = static_cast<int>(inst.requests.size());
        opts_.resize(n);
        for (int r = 0; r < n; ++r) {
            const auto& q = inst.requests[r];
            std::vector<Opt> all;
            for (int i = 0; i < 4; ++i)
                for (int kidx = 0; kidx < 4; ++kidx) {
                    if (!q.e[kidx] || !q.f[i][kidx] || kDegrees[kidx] > inst.budget[i]) continue;
                    const std::int64_t v = inst.value_micro(r, i, kidx);
                    if (v <= 0) continue;
                    all.push_back({i, kidx, kDegrees[kidx], v, i * 4 + kidx});
                }
            // a lower degree of the same type with at least the same value is never worse
            for (const Opt& o : all) {
                bool dominated = false;
                for (const Opt& p : all)
                    if (p.type == o.type && p.kidx < o.kidx && p.value >= o.value) dominated = true;
                if (!dominated) opts_[r].push_back(o);
            }
        }
    }

    IlpSolution solve() {
        const int n = static_cast<int>(opts_.size());
        build_multipliers();
        std::vector<const Opt*> pick = greedy();
        std::int64_t incumbent = 0;
        for (const Opt* o : pick)
            if (o) incumbent += o->value;
        fix_by_reduced_cost(incumbent);
        // beam pass for a stronger incumbent
        std::vector<const Opt*> narrow = pick;
        if (search(incumbent, narrow, kBeamWidth)) {
            std::int64_t v = 0;
            for (const Opt* o : narrow)
                if (o) v += o->value;
            if (v > incumbent) {
                incumbent = v;
                pick = std::move(narrow);
                fix_by_reduced_cost(incumbent);
            }
        }

        IlpSolution sol;
        sol.choice.assign(n, {});
        sol.on_time.assign(n, 0);
        if (!search(incumbent, pick, 0)) sol.exact = false;
        sol.nodes = nodes_;
        for (int r = 0; r < n; ++r) {
            const Opt* o = pick[r];
            if (!o) continue;
            sol.choice[r] = {o->type, o->k};
            sol.on_time[r] = inst_.requests[r].on_time[o->type][o->kidx];
            sol.objective_micro += o->value;
        }
        sol.objective = static_cast<double>(sol.objective_micro) / 1e6;
        return sol;
    }

   private:
    std::int64_t reduced(const Opt& o) const { return o.value - lambda_[o.type] * o.k; }

    // Budget left over when the prices of the types in `dir` move to lambda + step, with
    // ties resolved as just above that point.
    std::int64_t slope(unsigned dir, std::int64_t step) const {
        std::int64_t used = 0;
        for (const auto& options : opts_) {
            std::int64_t best = 0;
            int k = 0;
            for (const Opt& o : options) {
                const bool moving = (dir >> o.type) & 1u;
                const std::int64_t v = o.value - (lambda_[o.type] + (moving ? step : 0)) * o.k;
                const int load = moving ? o.k : 0;
                if (v > best || (v == best && load < k)) {
                    best = v;
                    k = load;
                }
            }
            used += k;
        }
        std::int64_t cap = 0;
        for (int t = 0; t < 4; ++t)
            if ((dir >> t) & 1u) cap += inst_.budget[t];
        return cap - used;
    }

    // Integer prices for the budget rows; any nonnegative prices give a valid bound, and
    // exact line searches along every subset of types tighten it.
    void build_multipliers() {
        const int n = static_cast<int>(opts_.size());
        lambda_.fill(0);
        std::int64_t top = 0;
        unsigned active = 0;
        for (const auto& v : opts_)
            for (const Opt& o : v) {
                top = std::max(top, o.value / o.k + 1);
                active |= 1u << o.type;
            }
        for (int round = 0; round < 12 && active; ++round) {
            bool moved = false;
            for (unsigned dir = 1; dir < 16; ++dir) {
                if ((dir & active) != dir) continue;
                std::int64_t lo = top;
                for (int t = 0; t < 4; ++t)
                    if ((dir >> t) & 1u) lo = std::min(lo, lambda_[t]);
                lo = -lo;
                std::int64_t hi = top;
                while (lo < hi) {
                    const std::int64_t mid = lo + (hi - lo) / 2;
                    if (slope(dir, mid) >= 0) hi = mid;
                    else lo = mid + 1;
                }
                if (lo != 0) {
                    moved = true;
                    for (int t = 0; t < 4; ++t)
                        if ((dir >> t) & 1u) lambda_[t] += lo;
                }
            }
            if (!moved) break;
        }
        suffix_.assign(n + 1, 0);
        for (int r = n - 1; r >= 0; --r) {
            std::int64_t c = 0;
            for (const Opt& o : opts_[r]) c = std::max(c, reduced(o));
            suffix_[r] = suffix_[r + 1] + c;
        }
    }

    std::int64_t priced(const Budget& b) const {
        std::int64_t p = 0;
        for (int t = 0; t < 4; ++t) p += lambda_[t] * b[t];
        return p;
    }

    std::vector<const Opt*> greedy() const {
        const int n = static_cast<int>(opts_.size());
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::vector<double> density(n, 0.0);
        for (int r = 0; r < n; ++r)
            for (const Opt& o : opts_[r]) density[r] = std::max(density[r], static_cast<double>(o.value) / o.k);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return density[a] > density[b]; });
        Budget left = inst_.budget;
        std::vector<const Opt*> pick(n, nullptr);
        for (int r : order) {
            const Opt* best = nullptr;
            for (const Opt& o : opts_[r]) {
                if (o.k > left[o.type]) continue;
                if (!best || reduced(o) > reduced(*best) || (reduced(o) == reduced(*best) && o.value > best->value))
                    best = &o;
            }
            if (!best) continue;
            pick[r] = best;
            left[best->type] -= best->k;
        }
        return pick;
    }

    // Keeps only the choices whose priced bound can still reach `need`.
    void fix_by_reduced_cost(std::int64_t need) {
        const int n = static_cast<int>(opts_.size());
        const std::int64_t root = suffix_[0] + priced(inst_.budget);
        cand_.assign(n, {});
        skip_ok_.assign(n, 1);
        for (int r = 0; r < n; ++r) {
            const std::int64_t without = root - (suffix_[r] - suffix_[r + 1]);
            for (const Opt& o : opts_[r])
                if (without + reduced(o) >= need) cand_[r].push_back(&o);
            skip_ok_[r] = without >= need;
        }
    }

    struct Node {
        std::uint64_t key;
        std::int64_t value;
        std::int32_t parent;
        std::int16_t choice;  // index into cand_ of the layer, -1 for none
    };

    int rank_of(int r, int choice) const { return choice < 0 ? kRankNone : cand_[r][choice]->rank; }

    // With beam > 0 each layer keeps only the `beam` nodes with the best bounds and the
    // result is a heuristic. Returns false (leaving `pick` untouched) when nothing reaches
    // the last layer or the node limit is hit.
    bool search(std::int64_t need, std::vector<const Opt*>& pick, std::size_t beam) {
        const int n = static_cast<int>(opts_.size());
        std::vector<std::vector<Node>> layers(n + 1);
        layers[0].push_back({pack(inst_.budget), 0, -1, -1});
        std::vector<int> pos{0};  // lexicographic position of each node's prefix in its layer
        std::unordered_map<std::uint64_t, int> index;
        for (int r = 0; r < n; ++r) {
            const auto& cur = layers[r];
            auto& next = layers[r + 1];
            index.clear();
            auto offer = [&](const Node& nd) {
                auto [it, fresh] = index.try_emplace(nd.key, static_cast<int>(next.size()));
                if (fresh) {
                    next.push_back(nd);
                    return;
                }
                Node& old = next[it->second];
                const bool better =
                    nd.value > old.value ||
                    (nd.value == old.value &&
                     std::pair(pos[nd.parent], rank_of(r, nd.choice)) < std::pair(pos[old.parent], rank_of(r, old.choice)));
                if (better) old = nd;
            };
            for (int i = 0; i < static_cast<int>(cur.size()); ++i) {
                const Budget b = unpack(cur[i].key);
                const std::int64_t base = cur[i].value + suffix_[r + 1];
                const std::int64_t price = priced(b);
                for (int j = 0; j < static_cast<int>(cand_[r].size()); ++j) {
                    const Opt& o = *cand_[r][j];
                    if (o.k > b[o.type]) continue;
                    if (base + o.value + price - lambda_[o.type] * o.k < need) continue;
                    Budget nb = b;
                    nb[o.type] -= o.k;
                    offer({pack(nb), cur[i].value + o.value, i, static_cast<std::int16_t>(j)});
                }
                if (skip_ok_[r] && base + price >= need) offer({cur[i].key, cur[i].value, i, -1});
            }
            if (beam > 0 && next.size() > beam) {
                auto score = [&](const Node& nd) { return nd.value + priced(unpack(nd.key)); };
                std::nth_element(next.begin(), next.begin() + static_cast<std::ptrdiff_t>(beam), next.end(),
                                 [&](const Node& a, const Node& b) { return score(a) > score(b); });
                next.resize(beam);
            }
            nodes_ += static_cast<long>(next.size());
            if (nodes_ > limit_) return false;
            std::vector<int> order(next.size());
            std::iota(order.begin(), order.end(), 0);
            std::sort(order.begin(), order.end(), [&](int a, int b) {
                return std::pair(pos[next[a].parent], rank_of(r, next[a].choice)) <
                       std::pair(pos[next[b].parent], rank_of(r, next[b].choice));
            });
            std::vector<int> next_pos(next.size());
            for (int p = 0; p < static_cast<int>(order.size()); ++p) next_pos[order[p]] = p;
            pos = std::move(next_pos);
        }
        const auto& last = layers[n];
        if (last.empty()) return beam == 0;  // exact pass: the incumbent is the unique best
        int best = 0;
        for (int i = 1; i < static_cast<int>(last.size()); ++i)
            if (last[i].value > last[best].value || (last[i].value == last[best].value && pos[i] < pos[best])) best = i;
        for (int r = n, i = best; r > 0; --r) {
            const Node& nd = layers[r][i];
            pick[r - 1] = nd.choice < 0 ? nullptr : cand_[r - 1][nd.choice];
            i = nd.parent;
        }
        return true;
    }

    const IlpInstance& inst_;
    long limit_;
    long nodes_ = 0;
    std::vector<std::vector<Opt>> opts_;
    std::vector<std::vector<const Opt*>> cand_;
    std::vector<std::uint8_t> skip_ok_;
    std::array<std::int64_t, 4> lambda_{};
    std::vector<std::int64_t> suffix_;
};

}  // namespace

IlpSolution solve_ilp(const IlpInstance& inst, const SolverOptions& opt) {
    return LayeredSearch(inst, opt).solve();
}

std::string validate_ilp(const IlpInstance& inst, const IlpSolution& sol) {
    const int n = static_cast<int>(inst.requests.size());
    if (static_cast<int>(sol.choice.size()) != n || static_cast<int>(sol.on_time.size()) != n)
        return "solution size mismatch";
    std::array<long, 4> used{};
    std::int64_t objective = 0;
    for (int r = 0; r < n; ++r) {
        const auto& q = inst.requests[r];
        const auto& c = sol.choice[r];
        // C0: at most one option, and D_r only when dispatched
        const int x_sum = c.type >= 0 ? 1 : 0;
        if (sol.on_time[r] > x_sum) return "request " + std::to_string(q.id) + ": on-time flag without dispatch";
        if (c.type < 0) continue;
        if (c.type > 3) return "request " + std::to_string(q.id) + ": bad type";
        int kidx;
        try {
            kidx = degree_index(c.k);
        } catch (const std::invalid_argument&) {
            return "request " + std::to_string(q.id) + ": bad degree";
        }
        // C2, C3
        if (!q.e[kidx]) return "request " + std::to_string(q.id) + ": degree below efficiency threshold";
        if (!q.f[c.type][kidx]) return "request " + std::to_string(q.id) + ": option infeasible";
        used[c.type] += c.k;
        // C4
        const double t_sum = q.t[c.type][kidx];
        if (inst.tau + t_sum > q.deadline + inst.big_m * (1 - sol.on_time[r]) + 1e-9)
            return "request " + std::to_string(q.id) + ": marked on time but late";
        objective += inst.value_micro(r, c.type, kidx);
    }
    // C1
    for (int i = 0; i < 4; ++i)
        if (used[i] > inst.budget[i]) return "budget exceeded for type V" + std::to_string(i);
    if (objective != sol.objective_micro) return "objective mismatch";
    return {};
}

std::vector<GammaD> realize_gamma_d(const IlpInstance& inst, const IlpSolution& sol, MonitorSnapshot& snap) {
    std::vector<GammaD> out;
    int nodes = 0;
    for (const auto& g : snap.gpus) nodes = std::max(nodes, g.node + 1);
    for (std::size_t r = 0; r < inst.requests.size(); ++r) {
        const auto& c = sol.choice[r];
        if (c.type < 0) continue;
        const Placement p = primary_of(static_cast<VrType>(c.type));
        for (int node = 0; node < nodes; ++node) {
            std::vector<int> cand;
            for (int g = 0; g < static_cast<int>(snap.gpus.size()); ++g)
                if (snap.gpus[g].node == node && snap.gpus[g].idle && snap.gpus[g].placement == p)
                    cand.push_back(g);
            if (static_cast<int>(cand.size()) < c.k) continue;
            cand.resize(c.k);
            const double est = inst.tau + inst.requests[r].t[c.type][degree_index(c.k)];
            for (int g : cand) {
                snap.gpus[g].idle = false;
                snap.gpus[g].free_at = est;
            }
            GammaD gd;
            gd.type = c.type;
            gd.plan.request = inst.requests[r].id;
            gd.plan.stage = Stage::D;
            gd.plan.gpus = cand;
            gd.plan.degree = c.k;
            gd.plan.strategy = c.k == 1 ? "single" : "sp" + std::to_string(c.k);
            out.push_back(gd);
            break;
        }
    }
    return out;
}

std::vector<int> pick_aux_set(MonitorSnapshot& snap, Placement aux, int want, double now) {
    int nodes = 0;
    for (const auto& g : snap.gpus) nodes = std::max(nodes, g.node + 1);
    std::vector<int> best;
    double best_start = std::numeric_limits<double>::infinity();
    for (int node = 0; node < nodes; ++node) {
        std::vector<int> cand;
        for (int g = 0; g < static_cast<int>(snap.gpus.size()); ++g)
            if (snap.gpus[g].node == node && snap.gpus[g].placement == aux) cand.push_back(g);
        if (cand.empty()) continue;
        std::stable_sort(cand.begin(), cand.end(), [&](int a, int b) {
            return std::max(snap.gpus[a].free_at, now) < std::max(snap.gpus[b].free_at, now);
        });
        int m = 1;
        while (m * 2 <= std::min<int>(want, static_cast<int>(cand.size()))) m *= 2;
        cand.resize(m);
        double start = now;
        for (int g : cand) start = std::max(start, snap.gpus[g].free_at);
        const bool better = static_cast<int>(cand.size()) > static_cast<int>(best.size()) ||
                            (cand.size() == best.size() && start < best_start);
        if (better) {
            best = cand;
            best_start = start;
        }
    }
    std::sort(best.begin(), best.end());
    return best;
}

namespace {

DispatchPlan make_plan(int req, Stage s, std::vector<int> gpus) {
    DispatchPlan p;
    p.request = req;
    p.stage = s;
    p.degree = static_cast<int>(gpus.size());
    p.strategy = p.degree == 1 ? "single" : "sp" + std::to_string(p.degree);
    p.gpus = std::move(gpus);
    return p;
}

void reserve(MonitorSnapshot& snap, const std::vector<int>& gpus, double ready, double dur) {
    double start = ready;
    for (int g : gpus) start = std::max(start, snap.gpus[g].free_at);
    for (int g : gpus) {
        snap.gpus[g].free_at = start + dur;
        snap.gpus[g].idle = false;
    }
}

}  // namespace

std::vector<std::vector<DispatchPlan>> derive_e_c(const std::vector<GammaD>& gamma_d,
                                                  const std::vector<const Request*>& reqs, MonitorSnapshot& snap,
                                                  const CostProfile& prof, const DeriveOptions& opt) {
    if (reqs.size() != gamma_d.size()) throw std::invalid_argument("derive_e_c: request list mismatch");
    std::vector<std::vector<DispatchPlan>> out;
    for (std::size_t n = 0; n < gamma_d.size(); ++n) {
        const Request& r = *reqs[n];
        const DispatchPlan& d = gamma_d[n].plan;
        const Placement prim = primary_of(static_cast<VrType>(gamma_d[n].type));
        const int k = d.degree;
        std::vector<DispatchPlan> plans;
        double e_time = 0;
        if (hosts(prim, Stage::E)) {
            plans.push_back(make_plan(r.id, Stage::E, d.gpus));
            e_time = stage_time(prof, Stage::E, r.l_E, k);
        } else {
            const int m = opt.stage_aware ? optimal_degree(prof, Stage::E, r.l_E) : k;
            auto set = pick_aux_set(snap, Placement::E, m, opt.now);
            if (set.empty()) throw UnservableRequest("no encode replica for request " + std::to_string(r.id));
            e_time = stage_time(prof, Stage::E, r.l_E, static_cast<int>(set.size()));
            reserve(snap, set, opt.now, e_time);
            plans.push_back(make_plan(r.id, Stage::E, std::move(set)));
        }
        plans.push_back(d);
        const double d_done = opt.now + e_time + stage_time(prof, Stage::D, r.l_D, k);
        const int opt_c = optimal_degree(prof, Stage::C, r.l_C);
        if (hosts(prim, Stage::C)) {
            const int m = opt.stage_aware ? std::min(opt_c, k) : k;
            plans.push_back(make_plan(r.id, Stage::C, std::vector<int>(d.gpus.begin(), d.gpus.begin() + m)));
        } else {
            const int m = opt.stage_aware ? opt_c : k;
            auto set = pick_aux_set(snap, Placement::C, m, d_done);
            if (set.empty()) throw UnservableRequest("no decode replica for request " + std::to_string(r.id));
            reserve(snap, set, d_done, stage_time(prof, Stage::C, r.l_C, static_cast<int>(set.size())));
            plans.push_back(make_plan(r.id, Stage::C, std::move(set)));
        }
        out.push_back(std::move(plans));
    }
    return out;
}

}  // namespace dpsim

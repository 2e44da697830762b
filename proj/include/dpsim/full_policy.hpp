#pragma once

#include <vector>

#include "dpsim/engine.hpp"

namespace dpsim {

struct FullOptions {
    bool switching = true;
    bool stage_aware = true;
    bool use_ilp = true;  // false: greedy shortest-remaining-first option picking
    SolverOptions solver;
    std::vector<Request> bootstrap_stats;  // empty: arrivals of the first window
    double reevaluate_every = 10.0;
    double forced_switch_at = -1.0;  // one unconditional re-placement at this time
    AlphaWeight alpha_weight = AlphaWeight::GpuTime;
    bool hold_salvageable = true;
    // Re-place when the recent window's per-type budgets differ from the current plan's by at
    // least this fraction of G (GPUs moved). <= 0 disables.
    double drift_fraction = 0.125;
};

class FullPolicy : public Policy {
   public:
    explicit FullPolicy(FullOptions opt = {}) : opt_(std::move(opt)) {}

    std::string name() const override { return "full"; }
    void bootstrap(Engine& eng, const Trace& trace) override;
    void on_arrival(Engine& eng, int req) override;
    void on_tick(Engine& eng) override;

   private:
    void maybe_switch(Engine& eng);
    bool missing_type(const Engine& eng) const;
    bool demand_drift(const Engine& eng, const std::vector<Request>& stats) const;
    PlacementPlan make_plan(const Engine& eng, const std::vector<Request>& stats) const;

    FullOptions opt_;
    std::vector<int> pending_;
    double last_switch_ = 0.0;
    double last_eval_ = -1e300;
    bool forced_done_ = false;
};

// Shortest-first greedy over the same options the solver sees.
IlpSolution greedy_srtf_choice(const IlpInstance& inst);

}  // namespace dpsim

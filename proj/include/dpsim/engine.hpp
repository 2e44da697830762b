#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include "dpsim/cluster.hpp"
#include "dpsim/dispatcher.hpp"
#include "dpsim/orchestrator.hpp"

namespace dpsim {

enum class Outcome { Pending, Completed, Oom, Unservable };
const char* outcome_name(Outcome o);

struct Run {
    int id = -1;
    int request = -1;
    std::vector<Stage> stages;
    std::vector<int> degrees;  // per stage
    std::vector<int> gpus;
    double enqueued = 0.0;
    double ready = 0.0;  // replicas loaded and instance formed
    double input_ready = 0.0;
    double start = 0.0;
    double end = 0.0;
    double transfer = 0.0;
    bool host_path = false;
    bool cold = false;
    int plan_version = 0;
};

struct RequestRecord {
    Request req;
    Outcome outcome = Outcome::Pending;
    double first_dispatch = -1.0;
    double completion = -1.0;
    int vr_type = -1;
    std::array<int, 3> degree{0, 0, 0};
    int next_stage = 0;  // number of stages already submitted
    int last_run = -1;
    std::string reason;

    bool met_slo() const { return outcome == Outcome::Completed && completion <= req.deadline; }
    double latency() const { return completion - req.arrival; }
};

struct SwitchRecord {
    double time = 0.0;
    double resume = 0.0;
    std::string reason;
    std::array<int, kNumPlacements> counts{};
};

struct SolverRecord {
    double time = 0.0;
    int requests = 0;
    int idle_gpus = 0;
    double wall_s = 0.0;
    long nodes = 0;
    bool exact = true;
    int dispatched = 0;
};

struct EngineConfig {
    ClusterConfig cluster;
    double tick = kTickSeconds;
    double t_win = 300.0;
    double hb_capacity = 2e9;
    double host_bw = 8e9;
    bool adjust_on_dispatch = true;  // false: drain, reload, resume
    bool keep_log = false;
    bool record_ilp = false;
    double monitor_sample_every = 10.0;
    double max_time = 1e7;
};

struct SimResult {
    std::vector<RequestRecord> requests;
    std::vector<Run> runs;
    std::vector<SwitchRecord> switches;
    std::vector<SolverRecord> solver;
    std::vector<std::pair<IlpInstance, IlpSolution>> ilp_log;
    std::vector<std::string> log;
    std::uint64_t log_hash = 0;
    double end_time = 0.0;
    int gpus = 0;
};

class Engine;

class Policy {
   public:
    virtual ~Policy() = default;
    virtual std::string name() const = 0;
    virtual void bootstrap(Engine& eng, const Trace& trace) = 0;
    virtual void on_arrival(Engine& eng, int req) = 0;
    virtual void on_tick(Engine& eng) = 0;
    virtual void on_run_end(Engine&, const Run&) {}
    // Called when nothing has progressed for a while with work still pending.
    virtual void on_stall(Engine& eng);
};

class Engine {
   public:
    Engine(const CostProfile& prof, EngineConfig cfg, Policy& policy);

    SimResult run(const Trace& trace);

    // policy-facing API
    double now() const { return now_; }
    const CostProfile& profile() const { return prof_; }
    const EngineConfig& config() const { return cfg_; }
    const std::vector<GpuWorker>& gpus() const { return gpus_; }
    const PlacementPlan& plan() const { return plan_; }
    int plan_version() const { return plan_version_; }
    bool accepting() const { return now_ >= resume_at_; }
    const RequestRecord& record(int req) const { return recs_.at(req); }
    const Request& request(int req) const { return recs_.at(req).req; }
    const std::vector<Run>& runs() const { return runs_; }
    double residual(int gpu) const;

    void set_initial_plan(const PlacementPlan& p);
    // Returns false when the layout is unchanged.
    bool switch_plan(const PlacementPlan& p, const std::string& reason);
    MonitorSnapshot snapshot() const;
    std::vector<Request> recent_arrivals(double window) const;

    // Submits the next stages of a request. Consecutive plans on an identical
    // GPU set merge into one run. Returns false if the request failed on OOM.
    bool submit(int req, const std::vector<DispatchPlan>& plans, int vr_type = -1);
    void fail(int req, Outcome why, const std::string& reason);
    void record_solver(const SolverRecord& s);
    void record_ilp(const IlpInstance& inst, const IlpSolution& sol);
    // Marks every arrived, unfinished request unservable.
    void abandon_unfinished(const std::string& reason);

   private:
    enum class Ev { Arrival, Tick, PlanStart, PlanEnd, TransferEnd, MonitorSample };
    struct Event {
        double time;
        std::uint64_t seq;
        Ev kind;
        int a;
        bool operator>(const Event& o) const { return time != o.time ? time > o.time : seq > o.seq; }
    };
    struct HbSlot {
        double from, to, bytes;
    };
    struct Completion {
        double time;
        Placement placement;
        StageMask stages;
    };

    void push(double t, Ev kind, int a);
    void log(const std::string& line);
    bool hot(const std::vector<int>& gpus);
    double load_time(int gpu, Stage s) const;
    void handle_run_end(const Run& r);

    CostProfile prof_;
    EngineConfig cfg_;
    Policy& policy_;
    std::vector<GpuWorker> gpus_;
    PlacementPlan plan_;
    int plan_version_ = 0;
    double now_ = 0.0;
    double resume_at_ = 0.0;
    double last_progress_ = 0.0;
    double max_run_end_ = 0.0;
    int unfinished_ = 0;
    int arrivals_left_ = 0;
    std::uint64_t seq_ = 0;
    std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
    std::vector<RequestRecord> recs_;
    std::vector<Run> runs_;
    std::vector<std::vector<HbSlot>> hb_;
    std::set<std::uint64_t> instance_cache_;
    std::deque<Completion> completions_;
    std::deque<int> arrived_;  // request ids within the recent window
    SimResult out_;
    std::uint64_t hash_ = 1469598103934665603ull;
};

std::uint64_t fnv1a(const std::string& s, std::uint64_t h = 1469598103934665603ull);

// Structural audits over a finished run log. Each returns an empty string when
// the property holds.
std::string audit_no_overlap(const SimResult& r);
std::string audit_precedence(const SimResult& r);
std::string audit_fifo(const SimResult& r);
std::string audit_conservation(const SimResult& r, std::size_t trace_size);
// Runs belong to the plan they were enqueued under; with shutdown adjust, runs of one plan
// finish before the next plan resumes and none starts earlier.
std::string audit_switches(const SimResult& r, bool adjust_on_dispatch);

}  // namespace dpsim

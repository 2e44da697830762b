#include "dpsim/report.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace dpsim {

double percentile_nearest_rank(std::vector<double> xs, double p) {
    if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
    if (p <= 0 || p > 100) throw std::invalid_argument("percentile must be in (0, 100]");
    std::sort(xs.begin(), xs.end());
    const auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(xs.size())));
    return xs[std::max<std::size_t>(rank, 1) - 1];
}

std::vector<RequestRow> request_rows(const SimResult& r, const CostProfile& prof, double capacity) {
    std::vector<RequestRow> rows;
    rows.reserve(r.requests.size());
    for (const auto& rec : r.requests) {
        RequestRow row;
        row.id = rec.req.id;
        row.arrival = rec.req.arrival;
        row.completion = rec.outcome == Outcome::Completed ? rec.completion : -1.0;
        row.deadline = rec.req.deadline;
        row.met = rec.met_slo();
        row.vr_type = rec.vr_type;
        try {
            row.opt_vr = static_cast<int>(opt_vr(rec.req, prof, capacity));
        } catch (const UnservableRequest&) {
            row.opt_vr = -1;
        }
        row.degree = rec.degree;
        row.outcome = outcome_name(rec.outcome);
        rows.push_back(row);
    }
    return rows;
}

Aggregates aggregate_rows(const std::vector<RequestRow>& rows, double span) {
    Aggregates a;
    a.span = span;
    a.total = static_cast<int>(rows.size());
    std::vector<double> lat;
    double end = 0;
    for (const auto& r : rows) {
        if (r.outcome == "completed") {
            ++a.completed;
            lat.push_back(r.completion - r.arrival);
            end = std::max(end, r.completion);
            if (r.vr_type >= 0 && r.vr_type < kNumVrTypes) ++a.vr_counts[r.vr_type];
            if (r.vr_type >= 0 && r.vr_type == r.opt_vr) ++a.on_opt_vr;
        }
        if (r.met) ++a.met;
        if (r.outcome == "oom") ++a.oom;
        if (r.outcome == "unservable") ++a.unservable;
    }
    a.slo_attainment = a.total ? static_cast<double>(a.met) / a.total : 0.0;
    a.opt_vr_share = a.completed ? static_cast<double>(a.on_opt_vr) / a.completed : 0.0;
    if (lat.empty()) {
        a.mean_latency = a.p95_latency = std::numeric_limits<double>::quiet_NaN();
    } else {
        double s = 0;
        for (double x : lat) s += x;
        a.mean_latency = s / static_cast<double>(lat.size());
        a.p95_latency = percentile_nearest_rank(lat, 95);
    }
    if (a.completed > 0) {
        a.throughput.assign(static_cast<std::size_t>(std::floor(end / span)) + 1, 0.0);
        for (const auto& r : rows)
            if (r.outcome == "completed") a.throughput[static_cast<std::size_t>(r.completion / span)] += 1.0 / span;
    }
    return a;
}

Aggregates aggregate(const SimResult& r, const CostProfile& prof, double capacity, double span) {
    Aggregates a = aggregate_rows(request_rows(r, prof, capacity), span);
    a.switches = static_cast<int>(r.switches.size());
    return a;
}

SolverStats solver_stats(const SimResult& r) {
    SolverStats s;
    s.ticks = static_cast<int>(r.solver.size());
    if (r.solver.empty()) return s;
    std::vector<double> ms;
    double reqs = 0;
    for (const auto& x : r.solver) {
        ms.push_back(x.wall_s * 1e3);
        reqs += x.requests;
        if (!x.exact) ++s.inexact;
    }
    double sum = 0;
    for (double v : ms) sum += v;
    s.mean_ms = sum / static_cast<double>(ms.size());
    s.p95_ms = percentile_nearest_rank(ms, 95);
    s.max_ms = *std::max_element(ms.begin(), ms.end());
    s.mean_requests = reqs / static_cast<double>(ms.size());
    return s;
}

namespace {

nlohmann::json num(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); }

}  // namespace

nlohmann::json report_json(const SimReport& rep) {
    const auto& a = rep.agg;
    nlohmann::json j;
    j["system"] = rep.system;
    j["preset"] = rep.preset;
    j["workload"] = rep.workload;
    j["seed"] = rep.seed;
    j["aggregates"] = {{"requests", a.total},
                       {"completed", a.completed},
                       {"met_slo", a.met},
                       {"oom", a.oom},
                       {"unservable", a.unservable},
                       {"slo_attainment", a.slo_attainment},
                       {"mean_latency_s", num(a.mean_latency)},
                       {"p95_latency_s", num(a.p95_latency)},
                       {"vr_counts", a.vr_counts},
                       {"opt_vr_share", a.opt_vr_share},
                       {"throughput_span_s", a.span},
                       {"throughput_rps", a.throughput}};
    nlohmann::json sw = nlohmann::json::array();
    for (const auto& s : rep.result.switches) {
        nlohmann::json counts;
        for (Placement p : kPlacements) counts[placement_name(p)] = s.counts[static_cast<int>(p)];
        sw.push_back({{"time", s.time}, {"resume", s.resume}, {"reason", s.reason}, {"counts", counts}});
    }
    j["switches"] = sw;
    j["event_log_hash"] = rep.result.log_hash;
    j["timing"] = {{"wall_s", rep.wall_s},
                   {"solver_ticks", rep.solver.ticks},
                   {"solver_mean_ms", rep.solver.mean_ms},
                   {"solver_p95_ms", rep.solver.p95_ms},
                   {"solver_max_ms", rep.solver.max_ms},
                   {"solver_mean_pending", rep.solver.mean_requests},
                   {"solver_inexact_ticks", rep.solver.inexact}};
    return j;
}

std::uint64_t report_hash(const SimReport& rep) {
    auto j = report_json(rep);
    j.erase("timing");
    return fnv1a(j.dump());
}

void write_requests_csv(const std::vector<RequestRow>& rows, std::ostream& os) {
    os << "id,arrival,completion,deadline,met_slo,vr_type,opt_vr,k_E,k_D,k_C,outcome\n";
    os.precision(17);
    for (const auto& r : rows)
        os << r.id << ',' << r.arrival << ',' << r.completion << ',' << r.deadline << ',' << (r.met ? 1 : 0) << ','
           << r.vr_type << ',' << r.opt_vr << ',' << r.degree[0] << ',' << r.degree[1] << ',' << r.degree[2] << ','
           << r.outcome << '\n';
}

std::vector<RequestRow> read_requests_csv(std::istream& is) {
    std::vector<RequestRow> rows;
    std::string line;
    if (!std::getline(is, line)) return rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string f[11];
        for (auto& x : f)
            if (!std::getline(ss, x, ',')) throw std::runtime_error("malformed request row: " + line);
        RequestRow r;
        r.id = std::stoi(f[0]);
        r.arrival = std::stod(f[1]);
        r.completion = std::stod(f[2]);
        r.deadline = std::stod(f[3]);
        r.met = f[4] == "1";
        r.vr_type = std::stoi(f[5]);
        r.opt_vr = std::stoi(f[6]);
        r.degree = {std::stoi(f[7]), std::stoi(f[8]), std::stoi(f[9])};
        r.outcome = f[10];
        rows.push_back(r);
    }
    return rows;
}

void write_switches_csv(const SimResult& r, std::ostream& os) {
    os << "time,resume,reason";
    for (Placement p : kPlacements) os << ',' << placement_name(p);
    os << '\n';
    for (const auto& s : r.switches) {
        os << s.time << ',' << s.resume << ',' << s.reason;
        for (int c : s.counts) os << ',' << c;
        os << '\n';
    }
}

double attainment_at_scale(const SimResult& r, const CostProfile& prof, double alpha) {
    if (!(alpha > 0)) throw std::invalid_argument("SLO scale must be positive");
    if (r.requests.empty()) return 0.0;
    int met = 0;
    for (const auto& rec : r.requests)
        if (rec.outcome == Outcome::Completed &&
            rec.completion <= rec.req.arrival + alpha * optimal_latency(prof, rec.req))
            ++met;
    return static_cast<double>(met) / static_cast<double>(r.requests.size());
}

}  // namespace dpsim

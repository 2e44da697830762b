#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dpsim/experiment.hpp"

using namespace dpsim;

namespace {

ExperimentConfig small_config(const std::string& policy = "full") {
    ExperimentConfig c;
    c.preset = "flux";
    c.workload = "steady";
    c.mix = "Medium";
    c.duration = 240;
    c.nodes = 2;
    c.seed = 3;
    c.policy = policy;
    return c;
}

}  // namespace

TEST_CASE("nearest-rank percentile") {
    CHECK(std::isnan(percentile_nearest_rank({}, 50)));
    CHECK(percentile_nearest_rank({5}, 95) == 5);
    const std::vector<double> xs{15, 20, 35, 40, 50};
    CHECK(percentile_nearest_rank(xs, 5) == 15);
    CHECK(percentile_nearest_rank(xs, 30) == 20);
    CHECK(percentile_nearest_rank(xs, 40) == 20);
    CHECK(percentile_nearest_rank(xs, 50) == 35);
    CHECK(percentile_nearest_rank(xs, 100) == 50);
    CHECK(percentile_nearest_rank({3, 1, 2}, 95) == 3);
    CHECK_THROWS(percentile_nearest_rank(xs, 0));
    CHECK_THROWS(percentile_nearest_rank(xs, 101));
}

TEST_CASE("aggregates over request rows") {
    std::vector<RequestRow> rows(4);
    rows[0] = {0, 0, 10, 12, true, 0, 0, {1, 1, 1}, "completed"};
    rows[1] = {1, 5, 40, 20, false, 1, 0, {1, 4, 1}, "completed"};
    rows[2] = {2, 6, -1, 20, false, -1, 1, {0, 0, 0}, "oom"};
    rows[3] = {3, 7, -1, 20, false, -1, 0, {0, 0, 0}, "unservable"};
    const Aggregates a = aggregate_rows(rows, 30);
    CHECK(a.total == 4);
    CHECK(a.completed == 2);
    CHECK(a.met == 1);
    CHECK(a.oom == 1);
    CHECK(a.unservable == 1);
    CHECK(a.slo_attainment == 0.25);
    CHECK(a.mean_latency == 22.5);
    CHECK(a.p95_latency == 35);
    CHECK(a.vr_counts == std::array<int, 4>{1, 1, 0, 0});
    CHECK(a.opt_vr_share == 0.5);
    CHECK(a.throughput == std::vector<double>{1.0 / 30, 1.0 / 30});

    const Aggregates none = aggregate_rows({}, 30);
    CHECK(none.slo_attainment == 0.0);
    CHECK(std::isnan(none.mean_latency));
    CHECK(none.throughput.empty());
}

TEST_CASE("request CSV round trip") {
    const SimReport rep = run_experiment(small_config());
    const Preset p = load_preset("flux");
    const auto rows = request_rows(rep.result, p.profile, kDefaultGpuMemory);
    std::stringstream ss;
    write_requests_csv(rows, ss);
    const auto back = read_requests_csv(ss);
    REQUIRE(back.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(back[i].id == rows[i].id);
        CHECK(back[i].arrival == rows[i].arrival);
        CHECK(back[i].completion == rows[i].completion);
        CHECK(back[i].deadline == rows[i].deadline);
        CHECK(back[i].met == rows[i].met);
        CHECK(back[i].vr_type == rows[i].vr_type);
        CHECK(back[i].opt_vr == rows[i].opt_vr);
        CHECK(back[i].degree == rows[i].degree);
        CHECK(back[i].outcome == rows[i].outcome);
    }
    const Aggregates a = aggregate_rows(back, 300);
    CHECK(a.slo_attainment == rep.agg.slo_attainment);
    std::stringstream bad("header\n1,2,3\n");
    CHECK_THROWS(read_requests_csv(bad));
}

TEST_CASE("report hash ignores timing and tracks content") {
    const SimReport a = run_experiment(small_config());
    SimReport b = run_experiment(small_config());
    CHECK(report_hash(a) == report_hash(b));
    b.wall_s += 5;
    b.solver.mean_ms += 1;
    CHECK(report_hash(a) == report_hash(b));
    b.agg.met += 1;
    CHECK(report_hash(a) != report_hash(b));
    const auto j = report_json(a);
    CHECK(j.contains("timing"));
    CHECK(j["aggregates"]["requests"] == a.agg.total);
    CHECK(j["event_log_hash"] == a.result.log_hash);
}

TEST_CASE("attainment grows with the SLO scale on a fixed schedule") {
    const SimReport rep = run_experiment(small_config("b3"));
    const Preset p = load_preset("flux");
    double prev = 0;
    for (double alpha = 0.5; alpha <= 8.0; alpha += 0.25) {
        const double att = attainment_at_scale(rep.result, p.profile, alpha);
        CHECK(att >= prev);
        CHECK(att <= 1.0);
        prev = att;
    }
    CHECK(attainment_at_scale(rep.result, p.profile, kDefaultSloScale) ==
          doctest::Approx(rep.agg.slo_attainment).epsilon(1e-12));
    CHECK_THROWS(attainment_at_scale(rep.result, p.profile, 0));
}

TEST_CASE("SLO sweep") {
    ExperimentConfig c = small_config();
    c.duration = 120;
    const auto rows = slo_sweep(c, {1.5, 2.5, 6.0});
    REQUIRE(rows.size() == 3);
    for (const auto& r : rows) CHECK((r.attainment >= 0 && r.attainment <= 1));
    CHECK(rows[2].attainment >= rows[0].attainment);
    CHECK_THROWS(slo_sweep(c, {0.0}));
}

TEST_CASE("config parsing") {
    const ExperimentConfig c = load_config(data_dir() + "/configs/flux_dynamic16.json");
    CHECK(c.preset == "flux");
    CHECK(c.workload == "dynamic");
    CHECK(c.gpus() == 16);
    CHECK(c.duration == 1800);
    const ExperimentConfig back = config_from_json(config_to_json(c));
    CHECK(config_to_json(back) == config_to_json(c));

    using J = nlohmann::json;
    CHECK_THROWS(config_from_json(J{{"workload", "bursty"}}));
    CHECK_THROWS(config_from_json(J{{"workload", "trace"}}));
    CHECK_THROWS(config_from_json(J{{"arrival", "gamma"}}));
    CHECK_THROWS(config_from_json(J{{"adjust", "never"}}));
    CHECK_THROWS(config_from_json(J{{"alpha_weight", "bytes"}}));
    CHECK_THROWS(config_from_json(J{{"nodes", 0}}));
    CHECK_THROWS(config_from_json(J{{"duration_s", -1}}));
    CHECK_THROWS(config_from_json(J{{"policy", "b9"}}));
    CHECK_THROWS(config_from_json(J{{"nodes", "two"}}));
    CHECK_THROWS(load_config("/nonexistent/config.json"));
    CHECK_THROWS(resolve_preset("nosuchpreset"));
}

TEST_CASE("config schema lists every config key with matching defaults") {
    std::ifstream in(data_dir() + "/config.schema.json");
    REQUIRE(in);
    const auto props = nlohmann::json::parse(in).at("properties");
    ExperimentConfig full;
    full.trace_file = "trace.jsonl";
    full.replay_count = 10;
    full.bucket_shares = std::array<double, 4>{0.25, 0.25, 0.25, 0.25};
    full.stage_speeds = std::array<double, 3>{1, 1, 1};
    const auto every = config_to_json(full), defaults = config_to_json(ExperimentConfig{});
    CHECK(every.size() == props.size());
    for (const auto& [key, value] : every.items()) CHECK(props.contains(key));
    for (const auto& [key, value] : defaults.items()) {
        CAPTURE(key);
        REQUIRE(props.contains(key));
        if (props[key].contains("default")) CHECK(props[key]["default"] == value);
        if (props[key].contains("enum")) {
            const auto& e = props[key]["enum"];
            CHECK(std::find(e.begin(), e.end(), value) != e.end());
        }
    }
    for (const auto& p : props.at("policy").at("enum")) CHECK_NOTHROW(config_from_json({{"policy", p}}));
}

TEST_CASE("outputs written to disk") {
    ExperimentConfig c = small_config();
    c.duration = 60;
    c.log_events = true;
    const SimReport rep = run_experiment(c);
    const Preset p = load_preset("flux");
    const auto dir = std::filesystem::temp_directory_path() / "dpsim_metrics_test";
    std::filesystem::remove_all(dir);
    write_outputs(rep, p, kDefaultGpuMemory, dir.string());
    for (const char* f : {"report.json", "requests.csv", "switches.csv", "events.jsonl"})
        CHECK(std::filesystem::exists(dir / f));
    std::ifstream in(dir / "report.json");
    const auto j = nlohmann::json::parse(in);
    CHECK(j["aggregates"]["requests"] == rep.agg.total);
    std::filesystem::remove_all(dir);
}

TEST_CASE("batch runs agree across execution modes") {
    std::vector<ExperimentConfig> cfgs;
    for (const char* pol : {"full", "b1", "b6"}) {
        ExperimentConfig c = small_config(pol);
        c.duration = 120;
        cfgs.push_back(c);
    }
    const auto par = run_batch_parallel(cfgs);
    const auto ser = run_batch_serial(cfgs);
    REQUIRE(par.size() == 3);
    for (std::size_t i = 0; i < par.size(); ++i) {
        CHECK(par[i].system == cfgs[i].policy);
        CHECK(report_hash(par[i]) == report_hash(ser[i]));
    }
}

TEST_CASE("solver scaling rows") {
    const Preset p = load_preset("flux");
    const auto rows = solver_scaling(p, {128, 256}, 0.5, 1, 2);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].gpus == 128);
    CHECK(rows[1].pending >= rows[0].pending);
    for (const auto& r : rows) {
        CHECK(r.exact);
        CHECK(r.max_ms >= r.mean_ms);
    }
    CHECK_THROWS(solver_scaling(p, {100}, 0.5, 1));
}

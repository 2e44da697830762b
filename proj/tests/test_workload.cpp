#include <doctest.h>

#include <map>
#include <sstream>

#include "dpsim/preset.hpp"
#include "dpsim/workload.hpp"

using namespace dpsim;

namespace {

const Preset& flux() {
    static const Preset p = load_preset("flux");
    return p;
}

std::string dump(const Trace& t) {
    std::ostringstream os;
    write_trace_jsonl(t, os);
    return os.str();
}

double mean_ld(const Trace& t, double from, double to) {
    double sum = 0;
    int n = 0;
    for (const auto& r : t.requests)
        if (r.arrival >= from && r.arrival < to) {
            sum += r.l_D;
            ++n;
        }
    return sum / n;
}

}  // namespace

TEST_CASE("Flux mixes follow the workload table") {
    const MixSpec& light = flux().mix("Light");
    CHECK(light.rate == 1.5);
    std::map<std::string, int> w;
    for (const auto& e : light.entries) w[e.label] = e.weight;
    CHECK(w == std::map<std::string, int>{{"128x128", 2},   {"256x256", 2},   {"512x512", 2},  {"1024x1024", 1},
                                          {"2048x2048", 1}, {"3072x3072", 1}, {"4096x4096", 1}});
    CHECK(flux().t_win == 300.0);
    CHECK(load_preset("sd3").rate == 20.0);
    CHECK(load_preset("sd3").t_win == 180.0);
    CHECK(load_preset("hyv").t_win == 600.0);
}

TEST_CASE("steady traces satisfy the request invariants and are seed-deterministic") {
    const Trace a = gen_steady(flux().mix("Light"), 1800, 42);
    const Trace b = gen_steady(flux().mix("Light"), 1800, 42);
    const Trace c = gen_steady(flux().mix("Light"), 1800, 43);
    CHECK(dump(a) == dump(b));
    CHECK(dump(a) != dump(c));
    REQUIRE(!a.requests.empty());
    const Trace slo = assign_slo(a, flux().profile);
    for (std::size_t i = 0; i < slo.requests.size(); ++i) {
        const Request& r = slo.requests[i];
        CHECK_NOTHROW(validate_request(r));
        CHECK(r.l_E >= kMinEncodeLen);
        CHECK(r.l_E <= kMaxEncodeLen);
        CHECK(r.l_C == r.l_D);
        if (i) CHECK(r.arrival >= slo.requests[i - 1].arrival);
        CHECK(r.arrival < 1800);
    }
    // Poisson count at 1.5 req/s over 30 min: mean 2700, sd ~52
    CHECK(a.requests.size() > 2400);
    CHECK(a.requests.size() < 3000);
}

TEST_CASE("single-class mix yields one class") {
    MixSpec m{"one", {{"512x512", 1024.0, 1}}, 5.0};
    const Trace t = gen_steady(m, 100, 1);
    for (const auto& r : t.requests) {
        CHECK(r.size_class == "512x512");
        CHECK(r.l_D == 1024.0);
    }
}

TEST_CASE("class frequencies match the normalized weights") {
    MixSpec m = load_preset("sd3").mix("Medium");  // 4x{512}; 1x{128,256,1024,1536}
    int total_w = 0;
    for (const auto& e : m.entries) total_w += e.weight;
    CHECK(total_w == 8);
    m.rate = 100.0;
    const Trace t = gen_steady(m, 1000, 9);
    REQUIRE(t.requests.size() > 90000);
    std::map<std::string, int> count;
    for (const auto& r : t.requests) ++count[r.size_class];
    for (const auto& e : m.entries) {
        const double freq = static_cast<double>(count[e.label]) / t.requests.size();
        CHECK(freq == doctest::Approx(static_cast<double>(e.weight) / total_w).epsilon(0.02));
    }
}

TEST_CASE("uniform arrivals are evenly spaced") {
    MixSpec m{"one", {{"a", 100.0, 1}}, 4.0};
    const Trace t = gen_steady(m, 10, 1, ArrivalProcess::Uniform);
    REQUIRE(t.requests.size() >= 39);
    for (std::size_t i = 1; i < t.requests.size(); ++i)
        CHECK(t.requests[i].arrival - t.requests[i - 1].arrival == doctest::Approx(0.25));
}

TEST_CASE("generator errors") {
    CHECK_THROWS(gen_steady(MixSpec{"empty", {}, 1.0}, 10, 1));
    CHECK_THROWS(gen_steady(MixSpec{"zero", {{"a", 1.0, 1}}, 0.0}, 10, 1));
    CHECK_THROWS(gen_steady(MixSpec{"w0", {{"a", 1.0, 0}}, 1.0}, 10, 1));
    CHECK_THROWS(gen_dynamic(flux().mixes, {}, 1));
    CHECK_THROWS(gen_dynamic(flux().mixes, {{0, 10, {0.5, 0.2, 0.2}}}, 1));
    CHECK_THROWS(gen_dynamic(flux().mixes, {{0, 10, {1, 0, 0}}, {20, 30, {1, 0, 0}}}, 1));
    CHECK_THROWS(replay_scaled(gen_steady(flux().mix("Light"), 10, 1), 0));
    CHECK_THROWS(replay_scaled(Trace{}, 5));
}

TEST_CASE("dynamic trace with a constant Light schedule matches the Light distribution") {
    const Trace dyn = gen_dynamic(flux().mixes, {{0, 20000, {1, 0, 0}}}, 5);
    const Trace st = gen_steady(flux().mix("Light"), 20000, 6);
    const double rel = static_cast<double>(dyn.requests.size()) / st.requests.size();
    CHECK(rel == doctest::Approx(1.0).epsilon(0.03));
    CHECK(mean_ld(dyn, 0, 20000) == doctest::Approx(mean_ld(st, 0, 20000)).epsilon(0.03));
    for (const auto& r : dyn.requests) CHECK(r.mix == 0);
}

TEST_CASE("dynamic proportions are respected") {
    const Trace t = gen_dynamic(flux().mixes, {{0, 40000, {0.2, 0.5, 0.3}}}, 3);
    std::array<int, 3> n{};
    for (const auto& r : t.requests) ++n[r.mix];
    const double total = static_cast<double>(t.requests.size());
    CHECK(n[0] / total == doctest::Approx(0.2).epsilon(0.03));
    CHECK(n[1] / total == doctest::Approx(0.5).epsilon(0.03));
    CHECK(n[2] / total == doctest::Approx(0.3).epsilon(0.03));
}

TEST_CASE("Heavy span has larger diffuse lengths than Light span") {
    const Trace t = gen_dynamic(flux().mixes, {{0, 2000, {1, 0, 0}}, {2000, 4000, {0, 0, 1}}}, 8);
    CHECK(mean_ld(t, 2000, 4000) > mean_ld(t, 0, 2000));
}

TEST_CASE("default dynamic schedule covers the run in six spans") {
    const auto sched = default_dynamic_schedule(1800);
    REQUIRE(sched.size() == 6);
    CHECK(sched.front().start == 0);
    CHECK(sched.back().end == 1800);
    for (const auto& s : sched) {
        CHECK(s.end - s.start == doctest::Approx(300));
        CHECK(s.proportions[0] + s.proportions[1] + s.proportions[2] == doctest::Approx(1.0));
    }
}

TEST_CASE("replay scaling") {
    const Trace base = assign_slo(gen_steady(flux().mix("Medium"), 600, 2), flux().profile);
    const int n = static_cast<int>(base.requests.size());
    CHECK(dump(replay_scaled(base, n)) == dump(base));

    const Trace half = replay_scaled(base, n / 2);
    CHECK(static_cast<int>(half.requests.size()) == n / 2);
    std::map<std::string, int> full_count, half_count;
    for (const auto& r : base.requests) ++full_count[r.size_class];
    for (const auto& r : half.requests) ++half_count[r.size_class];
    for (const auto& [cls, c] : full_count) CHECK(std::abs(half_count[cls] - c / 2.0) <= 0.1 * c + 3);
    for (std::size_t i = 1; i < half.requests.size(); ++i)
        CHECK(half.requests[i].arrival >= half.requests[i - 1].arrival);

    const Trace triple = replay_scaled(base, 3 * n);
    CHECK(static_cast<int>(triple.requests.size()) == 3 * n);
    for (std::size_t i = 1; i < triple.requests.size(); ++i)
        CHECK(triple.requests[i].arrival >= triple.requests[i - 1].arrival);
    // each original appears three times, offset by 0, 1 and 2 ms
    for (int i = 0; i < n; ++i) {
        int found = 0;
        for (const auto& r : triple.requests)
            for (int c = 0; c < 3; ++c)
                if (r.l_D == base.requests[i].l_D && r.l_E == base.requests[i].l_E &&
                    std::abs(r.arrival - (base.requests[i].arrival + c * kReplicaJitter)) < 1e-12)
                    ++found;
        CHECK(found >= 3);
    }
}

TEST_CASE("SLO budget is 2.5x the optimal-parallel latency") {
    Request r;
    r.arrival = 10.0;
    r.l_E = 200;
    r.l_D = r.l_C = 1024 * 1024 / 256.0;
    Trace t;
    t.requests = {r};
    const Trace s = assign_slo(t, flux().profile);
    // tests/scripts/derive_values.py
    CHECK(s.requests[0].deadline - 10.0 == doctest::Approx(7.315886943144346).epsilon(1e-12));
    const Trace loose = assign_slo(t, flux().profile, 1e9);
    CHECK(loose.requests[0].slo_budget() > 1e6);
    CHECK_THROWS(assign_slo(t, flux().profile, 0.0));
}

TEST_CASE("trace jsonl round trip") {
    const Trace t = assign_slo(gen_steady(flux().mix("Heavy"), 120, 4), flux().profile);
    std::istringstream is(dump(t));
    const Trace back = read_trace_jsonl(is);
    CHECK(dump(back) == dump(t));
}

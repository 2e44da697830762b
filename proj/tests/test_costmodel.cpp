#include <doctest.h>

#include <cmath>
#include <random>

#include "dpsim/cluster.hpp"
#include "dpsim/costmodel.hpp"
#include "dpsim/preset.hpp"

using namespace dpsim;

namespace {

const CostProfile& flux() {
    static const CostProfile p = load_preset("flux").profile;
    return p;
}

double tokens_sq(int side) { return static_cast<double>(side) * side / 256.0; }

}  // namespace

TEST_CASE("serial time is the k=1 stage time") {
    for (const char* name : {"sd3", "flux", "cog", "hyv"}) {
        const CostProfile p = load_preset(name).profile;
        for (Stage s : kStages)
            for (double l : {30.0, 500.0, 4096.0, 65536.0}) CHECK(stage_time(p, s, l, 1) == serial_time(p, s, l));
    }
}

TEST_CASE("Flux diffuse times match hand evaluation of the preset") {
    // tests/scripts/derive_values.py
    CHECK(stage_time(flux(), Stage::D, 4096, 8) == doctest::Approx(1.193041233657973).epsilon(1e-12));
    CHECK(stage_time(flux(), Stage::D, 4096, 1) == doctest::Approx(3.973892835390759).epsilon(1e-12));
    CHECK(stage_time(flux(), Stage::D, tokens_sq(4096), 8) == doctest::Approx(20.40213639999953).epsilon(1e-12));
}

TEST_CASE("decode barely speeds up at k=8") {
    const double l = tokens_sq(4096);
    const double ratio = stage_time(flux(), Stage::C, l, 8) / stage_time(flux(), Stage::C, l, 1);
    CHECK(ratio == doctest::Approx(0.5754560530679933).epsilon(1e-12));
    CHECK(ratio >= 0.5);
}

TEST_CASE("efficiency is 1 at k=1 and nonincreasing in k") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> len(1.0, 120000.0);
    for (const char* name : {"sd3", "flux", "cog", "hyv"}) {
        const CostProfile p = load_preset(name).profile;
        for (int i = 0; i < 500; ++i) {
            const double l = len(rng);
            for (Stage s : kStages) {
                CHECK(efficiency(p, s, l, 1) == 1.0);
                double prev_t = stage_time(p, s, l, 1), prev_e = 1.0;
                for (int k : {2, 4, 8}) {
                    const double t = stage_time(p, s, l, k), e = efficiency(p, s, l, k);
                    CHECK(t <= prev_t);
                    CHECK(e <= prev_e + 1e-15);
                    CHECK(e > 0.0);
                    prev_t = t;
                    prev_e = e;
                }
            }
        }
    }
}

TEST_CASE("decode fails the threshold at k=8 while diffuse passes at large lengths") {
    const double l = tokens_sq(4096);
    CHECK(efficiency(flux(), Stage::C, l, 8) < kEfficiencyThreshold);
    CHECK(efficiency(flux(), Stage::D, l, 8) >= kEfficiencyThreshold);
}

TEST_CASE("optimal degree is the largest k strictly above the threshold") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> len(1.0, 120000.0);
    for (const char* name : {"sd3", "flux", "cog", "hyv"}) {
        const CostProfile p = load_preset(name).profile;
        for (int i = 0; i < 300; ++i) {
            const double l = len(rng);
            for (Stage s : kStages) {
                int expect = 1;
                for (int k : {2, 4, 8})
                    if (efficiency(p, s, l, k) > 0.8) expect = k;
                CHECK(optimal_degree(p, s, l) == expect);
            }
        }
    }
}

TEST_CASE("threshold is strict") {
    CostProfile p = flux();
    // efficiency(k=2) = 1 / (2 - f) = 0.8 when f = 0.75, i.e. at l = 5 * half_len for par_max 0.9
    p.stages[1].par_max = 0.9;
    p.stages[1].par_half_len = 200.0;
    CHECK(efficiency(p, Stage::D, 1000.0, 2) == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(optimal_degree(p, Stage::D, 999.0) == 1);
    CHECK(optimal_degree(p, Stage::D, 1001.0) == 2);
}

TEST_CASE("Flux optimal degree table") {
    // tests/scripts/derive_values.py
    const double lens[6] = {64, 256, 1024, 4096, 16384, 65536};
    const int d[6] = {1, 1, 1, 2, 4, 8};
    for (int i = 0; i < 6; ++i) {
        CHECK(optimal_degree(flux(), Stage::E, lens[i]) == 1);
        CHECK(optimal_degree(flux(), Stage::D, lens[i]) == d[i]);
        CHECK(optimal_degree(flux(), Stage::C, lens[i]) == 1);
    }
}

TEST_CASE("every preset keeps encode serial and shows the diffuse/decode asymmetry") {
    for (const char* name : {"sd3", "flux", "cog", "hyv"}) {
        const CostProfile p = load_preset(name).profile;
        for (double l = 30; l <= 500; l += 10) CHECK(optimal_degree(p, Stage::E, l) == 1);
        bool asymmetric = false;
        for (double l = 1; l <= 1.2e5 && !asymmetric; l *= 1.25)
            asymmetric = optimal_degree(p, Stage::D, l) == 8 && optimal_degree(p, Stage::C, l) < 8;
        CHECK(asymmetric);
    }
}

TEST_CASE("smallest and largest lengths of each preset") {
    // tests/scripts/derive_values.py: D optimal degree at min/max class length
    const std::pair<const char*, std::array<int, 2>> rows[] = {
        {"sd3", {1, 4}}, {"flux", {1, 8}}, {"cog", {2, 8}}, {"hyv", {2, 8}}};
    for (const auto& [name, want] : rows) {
        const Preset pr = load_preset(name);
        double lo = 1e300, hi = 0;
        for (const auto& c : pr.classes) {
            lo = std::min(lo, pr.tokens(c));
            hi = std::max(hi, pr.tokens(c));
        }
        CHECK(optimal_degree(pr.profile, Stage::D, lo) == want[0]);
        CHECK(optimal_degree(pr.profile, Stage::D, hi) == want[1]);
        CHECK(optimal_degree(pr.profile, Stage::D, lo) <= 2);
    }
}

TEST_CASE("activation halves when k doubles") {
    for (Stage s : kStages)
        for (double l : {10.0, 4096.0, 65536.0}) {
            CHECK(peak_mem(flux(), s, l, 2) == peak_mem(flux(), s, l, 1) / 2);
            CHECK(peak_mem(flux(), s, l, 8) == peak_mem(flux(), s, l, 4) / 2);
        }
    CHECK(peak_mem(flux(), Stage::C, 1.0, 1) < 1e6);
}

TEST_CASE("Flux 4096 decode activation exceeds the EDC residual") {
    const double l = tokens_sq(4096);
    CHECK(peak_mem(flux(), Stage::C, l, 1) == doctest::Approx(19660800000.0));
    CHECK(peak_mem(flux(), Stage::C, l, 1) > residual_cap(Placement::EDC, flux()));
}

TEST_CASE("communication is linear in length and decode-side transfer dominates") {
    for (Edge e : {Edge::ED, Edge::DC})
        for (bool inter : {false, true}) {
            CHECK(comm_time(flux(), e, 2000, inter) == doctest::Approx(2 * comm_time(flux(), e, 1000, inter)));
            CHECK(comm_time(flux(), e, 1000, inter) > 0);
        }
    CHECK(comm_time(flux(), Edge::DC, 60000, false) > comm_time(flux(), Edge::ED, 500, false));
    CHECK(comm_time(flux(), Edge::DC, 1000, true) > comm_time(flux(), Edge::DC, 1000, false));
}

TEST_CASE("contract violations") {
    CHECK_THROWS(stage_time(flux(), Stage::D, 100, 3));
    CHECK_THROWS(stage_time(flux(), Stage::D, 0, 1));
    CHECK_THROWS(stage_time(flux(), Stage::D, 100, 16));
    CHECK(valid_degree(1));
    CHECK_FALSE(valid_degree(6));
}

TEST_CASE("profile json round trip and schema version") {
    const nlohmann::json j = profile_to_json(flux());
    const CostProfile back = profile_from_json(j);
    CHECK(profile_to_json(back) == j);
    nlohmann::json bad = j;
    bad["schema_version"] = 99;
    CHECK_THROWS(profile_from_json(bad));
    bad = j;
    bad["stages"]["D"]["time_coef"] = -1.0;
    CHECK_THROWS(profile_from_json(bad));
    bad = j;
    bad["stages"]["C"]["par_max"] = 1.5;
    CHECK_THROWS(profile_from_json(bad));
}

TEST_CASE("denoise steps follow the workload table") {
    CHECK(load_preset("sd3").profile.denoise_steps == 20);
    CHECK(load_preset("flux").profile.denoise_steps == 4);
    CHECK(load_preset("cog").profile.denoise_steps == 6);
    CHECK(load_preset("hyv").profile.denoise_steps == 6);
    CHECK(flux().bytes_per_param == 2.0);
}

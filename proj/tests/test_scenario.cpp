#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "mecsim/error.hpp"
#include "mecsim/scenario.hpp"
#include "mecsim/text.hpp"

using namespace mecsim;

namespace {

NetworkScenario table_sized_scenario() {
    NetworkScenario s;
    s.n_bs = 10;
    s.n_ue = 40;
    s.p_bs_mw = 100.0;
    s.p_ue_mw = 10.0;
    s.bandwidth_hz = 1e8;
    s.f_max_hz = 2e10;
    s.noise_psd_dbm_hz = -90.0;
    for (int n = 0; n < s.n_bs; ++n) s.bs_positions.push_back({125.0 + 250.0 * n, 125.0});
    for (int m = 0; m < s.n_ue; ++m) s.ue_positions.push_back({10.0 * m, 60.0});
    return s;
}

}  // namespace

TEST_CASE("a fully populated large scenario validates clean") {
    CHECK(validate_scenario(table_sized_scenario()).empty());
}

TEST_CASE("violations carry the field name") {
    NetworkScenario s = table_sized_scenario();
    s.n_bs = 0;
    s.bs_positions.clear();
    auto v = validate_scenario(s);
    CHECK(std::find(v.begin(), v.end(), "n_bs >= 1") != v.end());

    s = table_sized_scenario();
    s.f_max_hz = -1.0;
    v = validate_scenario(s);
    CHECK(std::find(v.begin(), v.end(), "f_max > 0") != v.end());
}

TEST_CASE("plan validation accepts boundary-feasible plans") {
    NetworkScenario s = table_sized_scenario();
    AllocationPlan p = AllocationPlan::empty(s.n_ue, s.n_bs);
    CHECK(validate_plan(p, s).empty());  // all-zero satisfies every <= constraint

    // per-BS frequency sum exactly f_max is allowed
    for (int m = 0; m < 4; ++m) p.assign(m, 0, s.f_max_hz / 4.0);
    CHECK(validate_plan(p, s).empty());
}

TEST_CASE("plan violations are reported per constraint") {
    NetworkScenario s = table_sized_scenario();
    AllocationPlan p = AllocationPlan::empty(s.n_ue, s.n_bs);
    p.assign(0, 0, 1e9);
    p.assign(0, 1, 1e9);  // one UE, two BSs
    auto v = validate_plan(p, s);
    REQUIRE(!v.empty());
    bool found = false;
    for (const auto& msg : v) found = found || msg.find("limit 1") != std::string::npos;
    CHECK(found);

    p = AllocationPlan::empty(s.n_ue, s.n_bs);
    p.assign(1, 0, s.f_max_hz * 1.5);  // over budget
    v = validate_plan(p, s);
    REQUIRE(v.size() == 1);
    CHECK(v[0].find("exceeds f_max") != std::string::npos);

    AllocationPlan wrong = AllocationPlan::empty(s.n_ue + 1, s.n_bs);
    CHECK_THROWS_AS((void)validate_plan(wrong, s), Error);
}

TEST_CASE("per-BS capacity defaults to the UE count and is enforced when set") {
    NetworkScenario s = table_sized_scenario();
    CHECK(s.capacity() == s.n_ue);
    s.per_bs_capacity = 2;
    AllocationPlan p = AllocationPlan::empty(s.n_ue, s.n_bs);
    for (int m = 0; m < 3; ++m) p.assign(m, 0, 1e9);
    auto v = validate_plan(p, s);
    REQUIRE(v.size() == 1);
    CHECK(v[0].find("exceeds capacity") != std::string::npos);
}

TEST_CASE("task cycles stay consistent with cycles_per_bit") {
    const TaskSpec t = TaskSpec::from_cycles(3, 8.5e3, 2e3, 5.1e7);
    CHECK(t.total_cycles == t.cycles_per_bit * t.uplink_bits);  // exact by construction
    CHECK(t.ue_id == 3);
    CHECK(t.downlink_bits == 2e3);
}

TEST_CASE("path loss is monotone in distance and floored at one meter") {
    const NetworkScenario s = table_sized_scenario();
    CHECK(s.pathloss_lin(10.0) > s.pathloss_lin(100.0));
    CHECK(s.pathloss_lin(0.2) == s.pathloss_lin(1.0));
    // 38 dB reference at 1 m
    CHECK(s.pathloss_lin(1.0) == doctest::Approx(std::pow(10.0, -3.8)));
}

TEST_CASE("bundle round-trips through config text exactly") {
    Config cfg = Config::defaults();
    cfg.set("network", "scenario_seed", "77");
    const ScenarioBundle b1 = bundle_from_config(cfg, 12345);

    Config out = Config::defaults();
    scenario_to_config(b1.net, out);
    out.set("network", "scenario_seed", "77");
    const Config reparsed = Config::from_text(out.dump(), "roundtrip");
    const ScenarioBundle b2 = bundle_from_config(reparsed, 999);  // run seed must not matter now

    CHECK(b2.net.bs_positions == b1.net.bs_positions);
    CHECK(b2.net.ue_positions == b1.net.ue_positions);
    CHECK(b2.net.bandwidth_hz == b1.net.bandwidth_hz);
    CHECK(b2.net.noise_psd_dbm_hz == b1.net.noise_psd_dbm_hz);
    CHECK(b2.net.sinr_decode_threshold == b1.net.sinr_decode_threshold);
    CHECK(b2.ue_cycle_factor == b1.ue_cycle_factor);
}

TEST_CASE("topology derives from the run seed only when scenario_seed is 0") {
    Config cfg = Config::defaults();
    const ScenarioBundle a = bundle_from_config(cfg, 1);
    const ScenarioBundle b = bundle_from_config(cfg, 2);
    CHECK(a.net.ue_positions != b.net.ue_positions);

    cfg.set("network", "scenario_seed", "42");
    const ScenarioBundle c = bundle_from_config(cfg, 1);
    const ScenarioBundle d = bundle_from_config(cfg, 2);
    CHECK(c.net.ue_positions == d.net.ue_positions);
}

TEST_CASE("invalid bundles are rejected with the violation text") {
    Config cfg = Config::defaults();
    cfg.set("risk", "alpha", "1.5");
    CHECK_THROWS_WITH_AS((void)bundle_from_config(cfg, 1), doctest::Contains("alpha"), Error);

    Config cfg2 = Config::defaults();
    cfg2.set("network", "bs_positions", "0 0");
    CHECK_THROWS_WITH_AS((void)bundle_from_config(cfg2, 1), doctest::Contains("together"), Error);
}

TEST_CASE("nearest plan serves every UE at its closest BS when capacity allows") {
    Config cfg = Config::defaults();
    cfg.set("network", "scenario_seed", "5");
    const ScenarioBundle b = bundle_from_config(cfg, 0);
    const AllocationPlan p = nearest_bs_plan(b.net);
    CHECK(validate_plan(p, b.net).empty());
    for (int m = 0; m < b.net.n_ue; ++m) {
        const int serving = p.bs_of(m);
        REQUIRE(serving >= 0);
        for (int n = 0; n < b.net.n_bs; ++n)
            CHECK(b.net.distance_m(m, serving) <= b.net.distance_m(m, n) + 1e-12);
    }
    // equal split per BS
    for (int n = 0; n < b.net.n_bs; ++n) {
        const auto served = p.served_by(n);
        for (int m : served)
            CHECK(p.freq(m, n) == doctest::Approx(b.net.f_max_hz / static_cast<double>(served.size())));
    }
}

TEST_CASE("positions serialize exactly") {
    std::vector<Vec2> pos = {{0.1, 0.2}, {1234.5678901234567, -9.87654321e-3}};
    const auto text = format_positions(pos);
    const auto back = parse_positions(text, "test");
    CHECK(back == pos);
    CHECK_THROWS_AS((void)parse_positions("1;2 3", "test"), Error);
}

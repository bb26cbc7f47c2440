#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "mecsim/config.hpp"
#include "mecsim/csv.hpp"
#include "mecsim/dataset.hpp"
#include "mecsim/error.hpp"
#include "mecsim/scenario.hpp"

using namespace mecsim;

namespace {

DelaySample rec(int ue, int bs, std::int64_t drop, std::int64_t ttis, double tau_p) {
    DelaySample s;
    s.ue_id = ue;
    s.bs_id = bs;
    s.drop_id = drop;
    s.tau_t_ttis = ttis;
    s.tau_p_ms = tau_p;
    return s;
}

// Single stream: drop t carries tau_t = t+1 TTIs and tau_p = 2(t+1) ms.
DelayDataset ramp_dataset(int n) {
    DelayDataset d;
    d.scenario_id = "ramp";
    for (int t = 0; t < n; ++t) d.records.push_back(rec(0, 0, t, t + 1, 2.0 * (t + 1)));
    return d;
}

struct TempFile {
    std::string path;
    TempFile(const std::string& name, const std::string& content) : path(name) {
        write_text_file(path, content);
    }
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("normalization matches hand-computed population stats") {
    const DelayDataset d = ramp_dataset(10);
    const Normalization n = compute_normalization(d.records, 1.0);
    // values 1..10: mean 5.5, population variance 8.25
    CHECK(n.mean[0] == doctest::Approx(5.5).epsilon(1e-12));
    CHECK(n.std[0] == doctest::Approx(std::sqrt(8.25)).epsilon(1e-12));
    CHECK(n.mean[1] == doctest::Approx(11.0).epsilon(1e-12));
    CHECK(n.std[1] == doctest::Approx(2.0 * std::sqrt(8.25)).epsilon(1e-12));
    CHECK(n.destandardize(0, n.standardize(0, 7.25)) == doctest::Approx(7.25).epsilon(1e-12));
}

TEST_CASE("tti scaling enters channel 0 through the ms conversion") {
    const DelayDataset d = ramp_dataset(10);
    const Normalization n = compute_normalization(d.records, 0.5);
    CHECK(n.mean[0] == doctest::Approx(2.75).epsilon(1e-12));
    CHECK(n.mean[1] == doctest::Approx(11.0).epsilon(1e-12));
}

TEST_CASE("constant channels hit the std floor and standardize to zero") {
    DelayDataset d;
    d.scenario_id = "flat";
    for (int t = 0; t < 6; ++t) d.records.push_back(rec(0, 0, t, 4, 3.0));
    const Normalization n = compute_normalization(d.records, 1.0);
    CHECK(n.std[0] == Normalization::kStdFloor);
    CHECK(n.std[1] == Normalization::kStdFloor);
    const auto windows = make_windows(d, 1.0, 4, 2);
    for (const auto& w : windows) {
        for (double v : w.values) CHECK(v == 0.0);
    }
}

TEST_CASE("10 records with W=4 stride=2 yield 4 windows") {
    const DelayDataset d = ramp_dataset(10);
    const auto windows = make_windows(d, 1.0, 4, 2);
    REQUIRE(windows.size() == 4);
    CHECK(windows[0].first_drop_id == 0);
    CHECK(windows[1].first_drop_id == 2);
    CHECK(windows[2].first_drop_id == 4);
    CHECK(windows[3].first_drop_id == 6);

    // Window values are the standardized per-channel series.
    const Normalization n = compute_normalization(d.records, 1.0);
    for (int t = 0; t < 4; ++t) {
        CHECK(windows[1].at(0, t) == doctest::Approx(n.standardize(0, 3.0 + t)).epsilon(1e-12));
        CHECK(windows[1].at(1, t) == doctest::Approx(n.standardize(1, 2.0 * (3.0 + t))).epsilon(1e-12));
    }
}

TEST_CASE("windows never span different (ue, bs) streams") {
    DelayDataset d;
    d.scenario_id = "multi";
    for (int t = 0; t < 5; ++t) d.records.push_back(rec(0, 0, t, 2, 1.0 + t));
    for (int t = 0; t < 5; ++t) d.records.push_back(rec(1, 0, t, 9, 50.0 + t));
    const auto windows = make_windows(d, 1.0, 4, 1);
    REQUIRE(windows.size() == 4);  // 2 per stream
    for (const auto& w : windows) {
        CHECK((w.ue_id == 0 || w.ue_id == 1));
        // A mixed window would show a jump from the 2-TTI to the 9-TTI level.
        for (int t = 1; t < w.W; ++t) CHECK(w.at(0, t) == doctest::Approx(w.at(0, 0)).epsilon(1e-12));
    }
}

TEST_CASE("preset normalization is honored instead of recomputed") {
    DelayDataset d = ramp_dataset(8);
    Normalization n;
    n.mean[0] = 0.0;
    n.std[0] = 1.0;
    n.mean[1] = 0.0;
    n.std[1] = 2.0;
    d.normalization = n;
    const auto windows = make_windows(d, 1.0, 4, 4);
    REQUIRE(windows.size() == 2);
    CHECK(windows[0].at(0, 0) == doctest::Approx(1.0).epsilon(1e-12));   // raw 1 ms
    CHECK(windows[0].at(1, 0) == doctest::Approx(1.0).epsilon(1e-12));   // raw 2 ms / std 2
    CHECK(windows[1].at(0, 3) == doctest::Approx(8.0).epsilon(1e-12));
}

TEST_CASE("window construction rejects bad shapes") {
    const DelayDataset d = ramp_dataset(10);
    CHECK_THROWS_WITH_AS(make_windows(d, 1.0, 3, 2), doctest::Contains("at least 4"), Error);
    CHECK_THROWS_WITH_AS(make_windows(d, 1.0, 4, 0), doctest::Contains("stride"), Error);
    const DelayDataset tiny = ramp_dataset(3);
    CHECK_THROWS_WITH_AS(make_windows(tiny, 1.0, 4, 2), doctest::Contains("cannot build windows"), Error);
}

TEST_CASE("train/val split is chronological with train-only statistics") {
    const DelayDataset d = ramp_dataset(20);
    const WindowSplit split = build_window_split(d, 1.0, 4, 2, 0.2);
    // cut = 16 train records: values 1..16, mean 8.5
    CHECK(split.norm.mean[0] == doctest::Approx(8.5).epsilon(1e-12));
    REQUIRE(split.train.size() == 7);  // floor((16-4)/2)+1
    REQUIRE(split.val.size() == 1);    // 4 val records, one window
    for (const auto& w : split.train) CHECK(w.first_drop_id + 4 <= 16);
    CHECK(split.val[0].first_drop_id == 16);

    // Validation standardizes with the train stats, so its values sit above
    // the train range.
    CHECK(split.val[0].at(0, 0) == doctest::Approx(split.norm.standardize(0, 17.0)).epsilon(1e-12));
}

TEST_CASE("val_fraction 0 keeps every record in training") {
    const DelayDataset d = ramp_dataset(10);
    const WindowSplit split = build_window_split(d, 1.0, 4, 2, 0.0);
    CHECK(split.train.size() == 4);
    CHECK(split.val.empty());
    CHECK_THROWS_WITH_AS(build_window_split(d, 1.0, 4, 2, 1.0), doctest::Contains("val_fraction"), Error);
}

TEST_CASE("generated datasets carry one record per completed service and full cycle banks") {
    Config cfg = Config::defaults();
    cfg.set("network", "n_bs", "1");
    cfg.set("network", "n_ue", "2");
    cfg.set("network", "scenario_seed", "11");
    const ScenarioBundle b = bundle_from_config(cfg, 0);
    const AllocationPlan plan = nearest_bs_plan(b.net);
    const GeneratedData g = generate_dataset(b, plan, 50, 7);
    CHECK(g.dataset.scenario_id == b.scenario_id);
    CHECK(g.dropped == 0);
    CHECK(g.dataset.records.size() == 100);  // activity 1: both UEs complete every drop
    REQUIRE(g.ue_cycles.size() == 2);
    for (const auto& bank : g.ue_cycles) {
        REQUIRE(bank.size() == 50);
        for (double c : bank) CHECK(c > 0.0);
    }

    const GeneratedData h = generate_dataset(b, plan, 50, 7);
    CHECK(delay_csv(g.dataset) == delay_csv(h.dataset));
    const GeneratedData k = generate_dataset(b, plan, 50, 8);
    CHECK(delay_csv(g.dataset) != delay_csv(k.dataset));
}

TEST_CASE("delay csv round-trips exactly") {
    DelayDataset d;
    d.scenario_id = "rt";
    d.records.push_back(rec(0, 1, 3, 7, 12.25));
    d.records.push_back(rec(2, 0, 4, 1, 0.0078125));
    const std::string text = delay_csv(d);
    CHECK(text.substr(0, text.find('\n')) == "scenario_id,drop_id,ue_id,bs_id,tau_t_ttis,tau_p_ms");
    const DelayDataset back = parse_delay_csv(text, "mem");
    REQUIRE(back.records.size() == 2);
    CHECK(back.scenario_id == "rt");
    CHECK(back.records[1].ue_id == 2);
    CHECK(back.records[1].tau_p_ms == 0.0078125);
    CHECK(delay_csv(back) == text);
}

TEST_CASE("delay csv parsing validates shape and values") {
    const std::string hdr = "scenario_id,drop_id,ue_id,bs_id,tau_t_ttis,tau_p_ms\n";
    CHECK_THROWS_WITH_AS(parse_delay_csv("bad,header\nx,y\n", "m"), doctest::Contains("header"), Error);
    CHECK_THROWS_WITH_AS(parse_delay_csv(hdr + "a,0,0,0,-1,1\n", "m"), doctest::Contains("m:2"), Error);
    CHECK_THROWS_WITH_AS(parse_delay_csv(hdr + "a,0,0,0,1,1\nb,1,0,0,1,1\n", "m"),
                         doctest::Contains("mixed scenario_id"), Error);
}

TEST_CASE("compute traces accept cycle and latency forms") {
    TempFile cyc("tmp_trace_cycles.csv", "task_id,cycles\n0,5e7\n1,2.5e7\n");
    const auto a = ingest_compute_trace(cyc.path, 0.0);
    REQUIRE(a.size() == 2);
    CHECK(a[0] == 5e7);
    CHECK(a[1] == 2.5e7);

    // 5 ms at 2 GHz is 1e7 cycles.
    TempFile lat("tmp_trace_latency.csv", "task_id,latency_ms\n0,5\n1,0.5\n");
    const auto b = ingest_compute_trace(lat.path, 2e9);
    REQUIRE(b.size() == 2);
    CHECK(b[0] == doctest::Approx(1e7).epsilon(1e-12));
    CHECK(b[1] == doctest::Approx(1e6).epsilon(1e-12));
}

TEST_CASE("compute trace errors name the offending line") {
    TempFile bad("tmp_trace_bad.csv", "task_id,cycles\n0,5e7\n1,-2\n");
    CHECK_THROWS_WITH_AS(ingest_compute_trace(bad.path, 0.0), doctest::Contains("tmp_trace_bad.csv:3"), Error);
    TempFile hdr("tmp_trace_hdr.csv", "task,cycles\n0,5e7\n");
    CHECK_THROWS_WITH_AS(ingest_compute_trace(hdr.path, 0.0), doctest::Contains("header"), Error);
    TempFile empty("tmp_trace_empty.csv", "task_id,cycles\n");
    CHECK_THROWS_WITH_AS(ingest_compute_trace(empty.path, 0.0), doctest::Contains("no rows"), Error);
    TempFile lat("tmp_trace_lat2.csv", "task_id,latency_ms\n0,5\n");
    CHECK_THROWS_WITH_AS(ingest_compute_trace(lat.path, 0.0), doctest::Contains("trace_ref_hz"), Error);
}

TEST_CASE("cycle banks round-trip through csv") {
    const std::vector<std::vector<double>> banks = {{1e7, 2e7, 3e7}, {4.5e6, 5.5e6, 6.5e6}};
    const std::string text = cycles_csv("s", banks);
    TempFile f("tmp_cycles_rt.csv", text);
    const auto back = read_cycles_csv(f.path);
    REQUIRE(back.size() == 2);
    CHECK(back[0] == banks[0]);
    CHECK(back[1] == banks[1]);
    CHECK_THROWS_WITH_AS(cycles_csv("s", {{1.0}, {1.0, 2.0}}), doctest::Contains("ragged"), Error);
}

TEST_CASE("plan csv round-trips assigned and unassigned rows") {
    AllocationPlan p = AllocationPlan::empty(3, 2);
    p.assign(0, 1, 2.5e9);
    p.assign(2, 0, 1e9);
    const std::string text = plan_csv(p);
    CHECK(text == "ue_id,bs_id,f_hz\n0,1,2.5e+09\n1,-1,0\n2,0,1e+09\n");
    const AllocationPlan back = parse_plan_csv(text, "mem", 3, 2);
    CHECK(back.bs_of(0) == 1);
    CHECK(back.bs_of(1) == -1);
    CHECK(back.bs_of(2) == 0);
    CHECK(back.freq(0, 1) == 2.5e9);
    CHECK(plan_csv(back) == text);
}

TEST_CASE("plan csv parsing validates ids, duplicates and coverage") {
    const std::string hdr = "ue_id,bs_id,f_hz\n";
    CHECK_THROWS_WITH_AS(parse_plan_csv(hdr + "0,2,1e9\n1,-1,0\n", "m", 2, 2),
                         doctest::Contains("bs_id 2 out of range"), Error);
    CHECK_THROWS_WITH_AS(parse_plan_csv(hdr + "0,0,1e9\n0,1,1e9\n", "m", 2, 2),
                         doctest::Contains("duplicate ue_id"), Error);
    CHECK_THROWS_WITH_AS(parse_plan_csv(hdr + "0,0,1e9\n", "m", 2, 2),
                         doctest::Contains("missing row for ue_id 1"), Error);
    CHECK_THROWS_WITH_AS(parse_plan_csv(hdr + "0,0,0\n1,-1,0\n", "m", 2, 2),
                         doctest::Contains("f_hz > 0"), Error);
}

TEST_CASE("bs filtering keeps matching records and metadata") {
    DelayDataset d;
    d.scenario_id = "f";
    d.records.push_back(rec(0, 0, 0, 2, 1.0));
    d.records.push_back(rec(1, 1, 0, 3, 2.0));
    d.records.push_back(rec(2, 0, 1, 4, 3.0));
    const DelayDataset only0 = d.filter_bs(0);
    REQUIRE(only0.records.size() == 2);
    CHECK(only0.records[1].ue_id == 2);
    CHECK(only0.scenario_id == "f");
}

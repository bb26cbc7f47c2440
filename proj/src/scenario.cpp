#include "mecsim/scenario.hpp"

#include <algorithm>
#include <cmath>

#include "mecsim/error.hpp"
#include "mecsim/rng.hpp"
#include "mecsim/text.hpp"

namespace mecsim {

double NetworkScenario::noise_w() const {
    const double psd_w_hz = std::pow(10.0, (noise_psd_dbm_hz - 30.0) / 10.0);
    return psd_w_hz * bandwidth_hz;
}

double NetworkScenario::pathloss_lin(double d_m) const {
    const double d = std::max(d_m, 1.0);
    const double pl_db = pathloss_ref_db + 10.0 * pathloss_exponent * std::log10(d);
    return std::pow(10.0, -pl_db / 10.0);
}

double NetworkScenario::distance_m(int ue, int bs) const {
    const Vec2& u = ue_positions[static_cast<std::size_t>(ue)];
    const Vec2& b = bs_positions[static_cast<std::size_t>(bs)];
    return std::hypot(u.x - b.x, u.y - b.y);
}

TaskSpec TaskSpec::from_cycles(int ue_id, double uplink_bits, double downlink_bits, double total_cycles) {
    TaskSpec t;
    t.ue_id = ue_id;
    t.uplink_bits = uplink_bits;
    t.downlink_bits = downlink_bits;
    // cycles_per_bit is derived so that total_cycles = cycles_per_bit * I_u
    // holds bit-exactly after the round trip through the division.
    t.cycles_per_bit = total_cycles / uplink_bits;
    t.total_cycles = t.cycles_per_bit * uplink_bits;
    return t;
}

AllocationPlan AllocationPlan::empty(int n_ue, int n_bs) {
    AllocationPlan p;
    p.n_ue = n_ue;
    p.n_bs = n_bs;
    p.assignment.assign(static_cast<std::size_t>(n_ue) * n_bs, 0);
    p.freq_hz.assign(static_cast<std::size_t>(n_ue) * n_bs, 0.0);
    return p;
}

void AllocationPlan::assign(int m, int n, double f_hz) {
    assignment[static_cast<std::size_t>(m) * n_bs + n] = 1;
    freq_hz[static_cast<std::size_t>(m) * n_bs + n] = f_hz;
}

int AllocationPlan::bs_of(int m) const {
    for (int n = 0; n < n_bs; ++n)
        if (assigned(m, n)) return n;
    return -1;
}

std::vector<int> AllocationPlan::served_by(int n) const {
    std::vector<int> out;
    for (int m = 0; m < n_ue; ++m)
        if (assigned(m, n)) out.push_back(m);
    return out;
}

namespace {

bool all_finite(const std::vector<Vec2>& pos) {
    for (const auto& p : pos)
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) return false;
    return true;
}

}  // namespace

std::vector<std::string> validate_scenario(const NetworkScenario& s) {
    std::vector<std::string> v;
    if (s.n_bs < 1) v.push_back("n_bs >= 1");
    if (s.n_ue < 1) v.push_back("n_ue >= 1");
    if (s.bs_positions.size() != static_cast<std::size_t>(std::max(s.n_bs, 0)))
        v.push_back("bs_positions size == n_bs");
    if (s.ue_positions.size() != static_cast<std::size_t>(std::max(s.n_ue, 0)))
        v.push_back("ue_positions size == n_ue");
    if (!all_finite(s.bs_positions)) v.push_back("bs_positions finite");
    if (!all_finite(s.ue_positions)) v.push_back("ue_positions finite");
    if (!(s.tti_ms > 0.0)) v.push_back("tti_ms > 0");
    if (!(s.bandwidth_hz > 0.0)) v.push_back("bandwidth_hz > 0");
    if (!(s.p_bs_mw > 0.0)) v.push_back("p_bs_mw > 0");
    if (!(s.p_ue_mw > 0.0)) v.push_back("p_ue_mw > 0");
    if (!(s.gain_bs > 0.0)) v.push_back("gain_bs > 0");
    if (!(s.gain_ue > 0.0)) v.push_back("gain_ue > 0");
    if (!std::isfinite(s.noise_psd_dbm_hz)) v.push_back("noise_psd_dbm_hz finite");
    if (!(s.f_max_hz > 0.0)) v.push_back("f_max > 0");
    if (!std::isfinite(s.pathloss_exponent) || s.pathloss_exponent < 0.0) v.push_back("pathloss_exponent >= 0");
    if (!std::isfinite(s.pathloss_ref_db)) v.push_back("pathloss_ref_db finite");
    if (s.max_retx < 0) v.push_back("max_retx >= 0");
    if (!(s.sinr_decode_threshold > 0.0)) v.push_back("sinr_decode_threshold > 0");
    if (s.per_bs_capacity < 0) v.push_back("per_bs_capacity >= 0");
    return v;
}

std::vector<std::string> validate_plan(const AllocationPlan& p, const NetworkScenario& s) {
    if (p.n_ue != s.n_ue || p.n_bs != s.n_bs ||
        p.assignment.size() != static_cast<std::size_t>(p.n_ue) * p.n_bs ||
        p.freq_hz.size() != p.assignment.size())
        fail(Errc::InvalidArgument, "plan dimensions (" + format_int(p.n_ue) + "x" + format_int(p.n_bs) +
                                        ") do not match scenario (" + format_int(s.n_ue) + "x" +
                                        format_int(s.n_bs) + ")");
    std::vector<std::string> v;
    for (int m = 0; m < p.n_ue; ++m) {
        int count = 0;
        for (int n = 0; n < p.n_bs; ++n) {
            const bool a = p.assigned(m, n);
            const double f = p.freq(m, n);
            count += a ? 1 : 0;
            if (a && !(f > 0.0))
                v.push_back("f(" + format_int(m) + "," + format_int(n) + ") > 0 where assigned");
            if (!a && f != 0.0)
                v.push_back("f(" + format_int(m) + "," + format_int(n) + ") == 0 where unassigned");
            if (!std::isfinite(f)) v.push_back("f(" + format_int(m) + "," + format_int(n) + ") finite");
        }
        if (count > 1) v.push_back("UE " + format_int(m) + " assigned to " + format_int(count) + " BSs, limit 1");
    }
    for (int n = 0; n < p.n_bs; ++n) {
        int load = 0;
        double f_sum = 0.0;
        for (int m = 0; m < p.n_ue; ++m) {
            if (p.assigned(m, n)) {
                ++load;
                f_sum += p.freq(m, n);
            }
        }
        if (load > s.capacity())
            v.push_back("BS " + format_int(n) + " load " + format_int(load) + " exceeds capacity " +
                        format_int(s.capacity()));
        // Relative slack absorbs rounding when a closed-form split sums to
        // f_max in exact arithmetic but lands an ulp above it in floating point.
        if (f_sum > s.f_max_hz * (1.0 + 1e-9))
            v.push_back("BS " + format_int(n) + " frequency sum " + format_double(f_sum) + " exceeds f_max " +
                        format_double(s.f_max_hz));
    }
    return v;
}

std::string format_positions(const std::vector<Vec2>& pos) {
    std::string out;
    for (std::size_t i = 0; i < pos.size(); ++i) {
        if (i) out += ';';
        out += format_double(pos[i].x) + " " + format_double(pos[i].y);
    }
    return out;
}

std::vector<Vec2> parse_positions(const std::string& text, std::string_view what) {
    std::vector<Vec2> out;
    if (trim(text).empty()) return out;
    for (const auto& pair : split(text, ';')) {
        const auto t = trim(pair);
        const auto sp = t.find(' ');
        if (sp == std::string_view::npos)
            fail(Errc::Config, std::string(what) + ": expected 'x y' pair, got '" + std::string(t) + "'");
        Vec2 p;
        p.x = parse_double(t.substr(0, sp), what);
        p.y = parse_double(t.substr(sp + 1), what);
        out.push_back(p);
    }
    return out;
}

namespace {

/// BSs sit at the centers of a near-square grid of cells; UEs drop uniformly
/// over the covered rectangle.
void generate_topology(NetworkScenario& s, double cell_size_m, std::uint64_t topo_seed) {
    const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(s.n_bs))));
    const int rows = (s.n_bs + cols - 1) / cols;
    s.bs_positions.clear();
    for (int i = 0; i < s.n_bs; ++i) {
        const int cx = i % cols, cy = i / cols;
        s.bs_positions.push_back({(cx + 0.5) * cell_size_m, (cy + 0.5) * cell_size_m});
    }
    Rng rng(derive_seed(topo_seed, "ue-positions"));
    const double w = cols * cell_size_m, h = rows * cell_size_m;
    s.ue_positions.clear();
    for (int m = 0; m < s.n_ue; ++m) s.ue_positions.push_back({rng.uniform(0.0, w), rng.uniform(0.0, h)});
}

}  // namespace

ScenarioBundle bundle_from_config(const Config& cfg, std::uint64_t run_seed) {
    ScenarioBundle b;
    NetworkScenario& s = b.net;
    s.n_bs = static_cast<int>(cfg.integer("network", "n_bs"));
    s.n_ue = static_cast<int>(cfg.integer("network", "n_ue"));
    s.per_bs_capacity = static_cast<int>(cfg.integer("network", "per_bs_capacity"));
    s.tti_ms = cfg.num("radio", "tti_ms");
    s.bandwidth_hz = cfg.num("radio", "bandwidth_hz");
    s.p_bs_mw = cfg.num("radio", "p_bs_mw");
    s.p_ue_mw = cfg.num("radio", "p_ue_mw");
    s.gain_bs = cfg.num("radio", "gain_bs");
    s.gain_ue = cfg.num("radio", "gain_ue");
    s.noise_psd_dbm_hz = cfg.num("radio", "noise_psd_dbm_hz");
    s.pathloss_exponent = cfg.num("radio", "pathloss_exponent");
    s.pathloss_ref_db = cfg.num("radio", "pathloss_ref_db");
    s.max_retx = static_cast<int>(cfg.integer("radio", "max_retx"));
    s.sinr_decode_threshold = cfg.num("radio", "sinr_decode_threshold");
    s.f_max_hz = cfg.num("compute", "f_max_hz");

    const std::uint64_t scenario_seed = cfg.u64("network", "scenario_seed");
    b.topology_seed = scenario_seed != 0 ? scenario_seed : derive_seed(run_seed, "topology");

    const auto bs_pos = parse_positions(cfg.str("network", "bs_positions"), "[network] bs_positions");
    const auto ue_pos = parse_positions(cfg.str("network", "ue_positions"), "[network] ue_positions");
    if (bs_pos.empty() != ue_pos.empty())
        fail(Errc::Config, "bs_positions and ue_positions must be given together or not at all");
    if (!bs_pos.empty()) {
        s.bs_positions = bs_pos;
        s.ue_positions = ue_pos;
    } else {
        generate_topology(s, cfg.num("network", "cell_size_m"), b.topology_seed);
    }

    b.tasks.cycles_median = cfg.num("compute", "task_cycles_median");
    b.tasks.cycles_sigma = cfg.num("compute", "task_cycles_sigma");
    b.tasks.heterogeneity = cfg.num("compute", "task_heterogeneity");
    b.tasks.uplink_bits_min = cfg.num("compute", "uplink_bits_min");
    b.tasks.uplink_bits_max = cfg.num("compute", "uplink_bits_max");
    b.tasks.downlink_bits_min = cfg.num("compute", "downlink_bits_min");
    b.tasks.downlink_bits_max = cfg.num("compute", "downlink_bits_max");

    b.sim.activity = cfg.num("radio", "activity");
    b.sim.activity_spread = cfg.num("radio", "activity_spread");
    b.sim.max_ttis_per_attempt = static_cast<int>(cfg.integer("radio", "max_ttis_per_attempt"));
    const std::string& sharing = cfg.str("compute", "compute_sharing");
    if (sharing == "static")
        b.sim.sharing = ComputeSharing::Static;
    else if (sharing == "dynamic")
        b.sim.sharing = ComputeSharing::Dynamic;
    else
        fail(Errc::Config, "compute_sharing must be 'static' or 'dynamic', got '" + sharing + "'");

    b.risk.alpha = cfg.num("risk", "alpha");
    b.risk.beta = cfg.num("risk", "beta");
    b.risk.tau_th_ms = cfg.num("risk", "tau_th_ms");
    b.scenario_id = cfg.str("experiment", "scenario_id");

    const auto violations = validate_scenario(s);
    if (!violations.empty()) {
        std::string msg = "invalid scenario:";
        for (const auto& v : violations) msg += " [" + v + "]";
        fail(Errc::Validation, msg);
    }
    if (!(b.risk.alpha > 0.0 && b.risk.alpha < 1.0)) fail(Errc::Validation, "alpha must be in (0,1)");
    if (!(b.risk.beta > 0.0 && b.risk.beta < 1.0)) fail(Errc::Validation, "beta must be in (0,1)");
    if (!(b.risk.tau_th_ms > 0.0)) fail(Errc::Validation, "tau_th_ms must be positive");
    if (!(b.sim.activity >= 0.0 && b.sim.activity <= 1.0)) fail(Errc::Validation, "activity must be in [0,1]");
    if (!(b.sim.activity_spread >= 0.0 && b.sim.activity_spread <= 1.0))
        fail(Errc::Validation, "activity_spread must be in [0,1]");
    if (b.sim.max_ttis_per_attempt < 1) fail(Errc::Validation, "max_ttis_per_attempt must be >= 1");
    if (!(b.tasks.heterogeneity >= 1.0)) fail(Errc::Validation, "task_heterogeneity must be >= 1");
    if (!(b.tasks.uplink_bits_min > 0.0 && b.tasks.uplink_bits_max >= b.tasks.uplink_bits_min))
        fail(Errc::Validation, "uplink bit range must satisfy 0 < min <= max");
    if (!(b.tasks.downlink_bits_min > 0.0 && b.tasks.downlink_bits_max >= b.tasks.downlink_bits_min))
        fail(Errc::Validation, "downlink bit range must satisfy 0 < min <= max");

    // Per-UE compute weight: log-uniform in [1/sqrt(h), sqrt(h)], fixed per
    // scenario so the planner has stable per-UE risk differences to exploit.
    b.ue_cycle_factor.resize(static_cast<std::size_t>(s.n_ue));
    Rng het(derive_seed(b.topology_seed, "ue-cycle-factor"));
    const double half_log = 0.5 * std::log(b.tasks.heterogeneity);
    for (auto& f : b.ue_cycle_factor) f = std::exp(het.uniform(-half_log, half_log));
    return b;
}

void scenario_to_config(const NetworkScenario& s, Config& cfg) {
    cfg.set("network", "n_bs", format_int(s.n_bs));
    cfg.set("network", "n_ue", format_int(s.n_ue));
    cfg.set("network", "per_bs_capacity", format_int(s.per_bs_capacity));
    cfg.set("network", "bs_positions", format_positions(s.bs_positions));
    cfg.set("network", "ue_positions", format_positions(s.ue_positions));
    cfg.set("radio", "tti_ms", format_double(s.tti_ms));
    cfg.set("radio", "bandwidth_hz", format_double(s.bandwidth_hz));
    cfg.set("radio", "p_bs_mw", format_double(s.p_bs_mw));
    cfg.set("radio", "p_ue_mw", format_double(s.p_ue_mw));
    cfg.set("radio", "gain_bs", format_double(s.gain_bs));
    cfg.set("radio", "gain_ue", format_double(s.gain_ue));
    cfg.set("radio", "noise_psd_dbm_hz", format_double(s.noise_psd_dbm_hz));
    cfg.set("radio", "pathloss_exponent", format_double(s.pathloss_exponent));
    cfg.set("radio", "pathloss_ref_db", format_double(s.pathloss_ref_db));
    cfg.set("radio", "max_retx", format_int(s.max_retx));
    cfg.set("radio", "sinr_decode_threshold", format_double(s.sinr_decode_threshold));
    cfg.set("compute", "f_max_hz", format_double(s.f_max_hz));
}

AllocationPlan nearest_bs_plan(const NetworkScenario& s) {
    AllocationPlan p = AllocationPlan::empty(s.n_ue, s.n_bs);
    std::vector<int> load(static_cast<std::size_t>(s.n_bs), 0);
    std::vector<int> choice(static_cast<std::size_t>(s.n_ue), -1);
    // Nearest BS first; on capacity overflow fall back to the nearest BS with
    // room (UEs in ascending id order, deterministic).
    for (int m = 0; m < s.n_ue; ++m) {
        std::vector<int> order(static_cast<std::size_t>(s.n_bs));
        for (int n = 0; n < s.n_bs; ++n) order[static_cast<std::size_t>(n)] = n;
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            const double da = s.distance_m(m, a), db = s.distance_m(m, b);
            return da != db ? da < db : a < b;
        });
        for (int n : order) {
            if (load[static_cast<std::size_t>(n)] < s.capacity()) {
                choice[static_cast<std::size_t>(m)] = n;
                ++load[static_cast<std::size_t>(n)];
                break;
            }
        }
        if (choice[static_cast<std::size_t>(m)] < 0)
            fail(Errc::Validation, "nearest_bs_plan: no BS with free capacity for UE " + format_int(m));
    }
    for (int m = 0; m < s.n_ue; ++m) {
        const int n = choice[static_cast<std::size_t>(m)];
        p.assign(m, n, s.f_max_hz / load[static_cast<std::size_t>(n)]);
    }
    return p;
}

}  // namespace mecsim

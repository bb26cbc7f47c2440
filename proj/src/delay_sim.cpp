#include "mecsim/delay_sim.hpp"

#include <cmath>

#include "mecsim/error.hpp"
#include "mecsim/text.hpp"

namespace mecsim {

double sinr_uplink(int m, int n, const LinkDraw& draw, const NetworkScenario& s) {
    (void)m;
    (void)n;
    const double signal = s.gain_ue * s.gain_bs * s.p_ue_mw * draw.fading_gain * draw.pathloss_lin;
    return signal / (draw.interference_mw + s.noise_w() * 1e3);
}

double sinr_downlink(int m, int n, const LinkDraw& draw, const NetworkScenario& s) {
    (void)m;
    (void)n;
    const double signal = s.gain_ue * s.gain_bs * s.p_bs_mw * draw.fading_gain * draw.pathloss_lin;
    return signal / (draw.interference_mw + s.noise_w() * 1e3);
}

double rate_bps(double gamma, double w_hz) {
    if (!(gamma >= 0.0)) fail(Errc::InvalidArgument, "rate: gamma must be >= 0");
    return w_hz * std::log2(1.0 + gamma);
}

AttemptOutcome attempt_outcome(double bits, double gamma, const LinkContext& ctx) {
    if (!(bits > 0.0)) fail(Errc::InvalidArgument, "attempt: bits must be positive");
    AttemptOutcome out;
    out.success = gamma >= ctx.threshold;
    const double r = rate_bps(gamma, ctx.bandwidth_hz);
    const double bits_per_tti = r * ctx.tti_ms * 1e-3;
    if (bits_per_tti <= 0.0) {
        out.ttis = ctx.max_ttis_per_attempt;
        return out;
    }
    const double ttis = std::ceil(bits / bits_per_tti);
    out.ttis = ttis >= static_cast<double>(ctx.max_ttis_per_attempt)
                   ? ctx.max_ttis_per_attempt
                   : static_cast<int>(ttis);
    return out;
}

DirectionResult one_direction_latency(double bits, const LinkContext& ctx, Rng& rng) {
    DirectionResult res;
    for (int attempt = 0; attempt <= ctx.max_retx; ++attempt) {
        double interference = 0.0;
        for (double base : ctx.interferer_mw) interference += base * rng.exponential();
        const double h = rng.exponential();
        const double gamma = ctx.signal_mw * h / (interference + ctx.noise_mw);
        const AttemptOutcome a = attempt_outcome(bits, gamma, ctx);
        res.ttis += a.ttis;
        res.attempts = attempt + 1;
        if (a.success) {
            res.success = true;
            return res;
        }
    }
    res.success = false;
    return res;
}

TransmissionResult transmission_latency(const TaskSpec& task, const LinkContext& up, const LinkContext& down,
                                        Rng& rng) {
    TransmissionResult out;
    const DirectionResult u = one_direction_latency(task.uplink_bits, up, rng);
    out.ttis = u.ttis;
    if (!u.success) return out;
    const DirectionResult d = one_direction_latency(task.downlink_bits, down, rng);
    out.ttis += d.ttis;
    out.success = d.success;
    return out;
}

double compute_latency(const TaskSpec& task, double f_alloc_hz) {
    if (!(f_alloc_hz > 0.0))
        fail(Errc::InvalidArgument, "compute_latency: UE " + format_int(task.ue_id) +
                                        " has no positive compute frequency allocated");
    return task.total_cycles / f_alloc_hz * 1e3;
}

double e2e_delay(int tau_t_ttis, double tti_ms, double tau_p_ms) {
    return static_cast<double>(tau_t_ttis) * tti_ms + tau_p_ms;
}

double reliability(std::span<const double> delays_ms, double tau_th_ms) {
    if (delays_ms.empty()) fail(Errc::InvalidArgument, "reliability: empty sample list");
    std::size_t below = 0;
    for (double v : delays_ms)
        if (v < tau_th_ms) ++below;
    return static_cast<double>(below) / static_cast<double>(delays_ms.size());
}

ServiceSim::ServiceSim(const ScenarioBundle& bundle, const AllocationPlan& plan)
    : bundle_(bundle), plan_(plan) {
    const NetworkScenario& s = bundle_.net;
    const auto violations = validate_plan(plan_, s);
    if (!violations.empty()) {
        std::string msg = "invalid plan:";
        for (const auto& v : violations) msg += " [" + v + "]";
        fail(Errc::Validation, msg);
    }
    serving_.resize(static_cast<std::size_t>(s.n_ue));
    for (int m = 0; m < s.n_ue; ++m) serving_[static_cast<std::size_t>(m)] = plan_.bs_of(m);
    up_base_mw_.assign(static_cast<std::size_t>(s.n_ue), std::vector<double>(static_cast<std::size_t>(s.n_bs)));
    down_base_mw_ = up_base_mw_;
    for (int m = 0; m < s.n_ue; ++m) {
        for (int n = 0; n < s.n_bs; ++n) {
            const double L = s.pathloss_lin(s.distance_m(m, n));
            up_base_mw_[static_cast<std::size_t>(m)][static_cast<std::size_t>(n)] =
                s.gain_ue * s.gain_bs * s.p_ue_mw * L;
            down_base_mw_[static_cast<std::size_t>(m)][static_cast<std::size_t>(n)] =
                s.gain_ue * s.gain_bs * s.p_bs_mw * L;
        }
    }
    noise_mw_ = s.noise_w() * 1e3;
}

double ServiceSim::draw_busy(Rng& rng) const {
    const double a = bundle_.sim.activity;
    const double s = bundle_.sim.activity_spread;
    if (s == 0.0) return a;
    const double busy = rng.uniform(a - s, a + s);
    return busy < 0.0 ? 0.0 : (busy > 1.0 ? 1.0 : busy);
}

double ServiceSim::draw_cycles(int ue, Rng& rng) const {
    const TaskModel& t = bundle_.tasks;
    if (!t.trace_cycles.empty())
        return t.trace_cycles[rng.below(t.trace_cycles.size())];
    return bundle_.ue_cycle_factor[static_cast<std::size_t>(ue)] *
           rng.lognormal_median(t.cycles_median, t.cycles_sigma);
}

LinkContext ServiceSim::base_context(double signal_mw) const {
    const NetworkScenario& s = bundle_.net;
    LinkContext ctx;
    ctx.signal_mw = signal_mw;
    ctx.noise_mw = noise_mw_;
    ctx.threshold = s.sinr_decode_threshold;
    ctx.bandwidth_hz = s.bandwidth_hz;
    ctx.tti_ms = s.tti_ms;
    ctx.max_retx = s.max_retx;
    ctx.max_ttis_per_attempt = bundle_.sim.max_ttis_per_attempt;
    return ctx;
}

DropResult ServiceSim::run_drop(std::uint64_t master_seed, std::int64_t drop_id) const {
    const NetworkScenario& s = bundle_.net;
    Rng rng(derive_seed(master_seed, "drop", static_cast<std::uint64_t>(drop_id)));
    DropResult out;

    // Draw order is fixed: busy level, activity, cycles, then per-UE service.
    // Anything reordered here changes every downstream artifact byte.
    const double busy = draw_busy(rng);
    std::vector<std::uint8_t> active(static_cast<std::size_t>(s.n_ue));
    for (int m = 0; m < s.n_ue; ++m)
        active[static_cast<std::size_t>(m)] = rng.bernoulli(busy) ? 1 : 0;
    out.cycles.resize(static_cast<std::size_t>(s.n_ue));
    for (int m = 0; m < s.n_ue; ++m) out.cycles[static_cast<std::size_t>(m)] = draw_cycles(m, rng);

    // Per-BS sum of planned frequency over active served UEs, for dynamic
    // compute sharing.
    std::vector<double> active_freq(static_cast<std::size_t>(s.n_bs), 0.0);
    if (bundle_.sim.sharing == ComputeSharing::Dynamic) {
        for (int m = 0; m < s.n_ue; ++m) {
            const int n = serving_[static_cast<std::size_t>(m)];
            if (n >= 0 && active[static_cast<std::size_t>(m)])
                active_freq[static_cast<std::size_t>(n)] += plan_.freq(m, n);
        }
    }

    for (int m = 0; m < s.n_ue; ++m) {
        if (!active[static_cast<std::size_t>(m)]) continue;
        const int n = serving_[static_cast<std::size_t>(m)];
        if (n < 0) continue;
        const TaskSpec task = TaskSpec::from_cycles(
            m, rng.uniform(bundle_.tasks.uplink_bits_min, bundle_.tasks.uplink_bits_max),
            rng.uniform(bundle_.tasks.downlink_bits_min, bundle_.tasks.downlink_bits_max),
            out.cycles[static_cast<std::size_t>(m)]);

        LinkContext up = base_context(up_base_mw_[static_cast<std::size_t>(m)][static_cast<std::size_t>(n)]);
        for (int o = 0; o < s.n_ue; ++o) {
            if (o == m || !active[static_cast<std::size_t>(o)]) continue;
            const int on = serving_[static_cast<std::size_t>(o)];
            if (on < 0 || on == n) continue;  // in-cell UEs are scheduled orthogonally
            up.interferer_mw.push_back(up_base_mw_[static_cast<std::size_t>(o)][static_cast<std::size_t>(n)]);
        }
        LinkContext down = base_context(down_base_mw_[static_cast<std::size_t>(m)][static_cast<std::size_t>(n)]);
        for (int o = 0; o < s.n_bs; ++o) {
            if (o == n) continue;
            bool transmits = false;
            for (int mm = 0; mm < s.n_ue && !transmits; ++mm)
                transmits = active[static_cast<std::size_t>(mm)] && serving_[static_cast<std::size_t>(mm)] == o;
            if (transmits)
                down.interferer_mw.push_back(
                    down_base_mw_[static_cast<std::size_t>(m)][static_cast<std::size_t>(o)]);
        }

        const TransmissionResult tx = transmission_latency(task, up, down, rng);
        if (!tx.success) {
            ++out.dropped;
            continue;
        }
        double f_eff = plan_.freq(m, n);
        if (bundle_.sim.sharing == ComputeSharing::Dynamic) {
            const double busy = active_freq[static_cast<std::size_t>(n)];
            if (busy > 0.0) f_eff = plan_.freq(m, n) * s.f_max_hz / busy;
        }
        DelaySample sample;
        sample.ue_id = m;
        sample.bs_id = n;
        sample.drop_id = drop_id;
        sample.tau_t_ttis = tx.ttis;
        sample.tau_p_ms = compute_latency(task, f_eff);
        out.samples.push_back(sample);
    }
    return out;
}

ServiceSim::ProbeResult ServiceSim::probe_pair(std::uint64_t master_seed, std::int64_t drop_id, int m,
                                               int n) const {
    const NetworkScenario& s = bundle_.net;
    if (m < 0 || m >= s.n_ue || n < 0 || n >= s.n_bs)
        fail(Errc::InvalidArgument, "probe_pair: pair (" + format_int(m) + "," + format_int(n) +
                                        ") outside scenario dimensions");
    const std::string tag = "probe-" + format_int(m) + "-" + format_int(n);
    Rng rng(derive_seed(master_seed, tag, static_cast<std::uint64_t>(drop_id)));

    const double busy = draw_busy(rng);
    std::vector<std::uint8_t> active(static_cast<std::size_t>(s.n_ue));
    for (int o = 0; o < s.n_ue; ++o)
        active[static_cast<std::size_t>(o)] = rng.bernoulli(busy) ? 1 : 0;
    active[static_cast<std::size_t>(m)] = 1;  // the probed UE always transmits

    const double cycles = draw_cycles(m, rng);
    const TaskSpec task = TaskSpec::from_cycles(
        m, rng.uniform(bundle_.tasks.uplink_bits_min, bundle_.tasks.uplink_bits_max),
        rng.uniform(bundle_.tasks.downlink_bits_min, bundle_.tasks.downlink_bits_max), cycles);

    LinkContext up = base_context(up_base_mw_[static_cast<std::size_t>(m)][static_cast<std::size_t>(n)]);
    for (int o = 0; o < s.n_ue; ++o) {
        if (o == m || !active[static_cast<std::size_t>(o)]) continue;
        const int on = serving_[static_cast<std::size_t>(o)];
        if (on < 0 || on == n) continue;
        up.interferer_mw.push_back(up_base_mw_[static_cast<std::size_t>(o)][static_cast<std::size_t>(n)]);
    }
    LinkContext down = base_context(down_base_mw_[static_cast<std::size_t>(m)][static_cast<std::size_t>(n)]);
    for (int o = 0; o < s.n_bs; ++o) {
        if (o == n) continue;
        bool transmits = false;
        for (int mm = 0; mm < s.n_ue && !transmits; ++mm) {
            if (mm == m) continue;
            transmits = active[static_cast<std::size_t>(mm)] && serving_[static_cast<std::size_t>(mm)] == o;
        }
        if (transmits)
            down.interferer_mw.push_back(down_base_mw_[static_cast<std::size_t>(m)][static_cast<std::size_t>(o)]);
    }

    ProbeResult res;
    res.cycles = cycles;
    const TransmissionResult tx = transmission_latency(task, up, down, rng);
    if (!tx.success) return res;
    res.completed = true;
    res.tau_t_ttis = tx.ttis;
    // Equal-share compute proxy: the probe estimates transmission cost, the
    // compute side is planned separately from the cycle distribution.
    int load = 1;
    for (int o = 0; o < s.n_ue; ++o) {
        if (o == m || !active[static_cast<std::size_t>(o)]) continue;
        if (serving_[static_cast<std::size_t>(o)] == n) ++load;
    }
    res.tau_p_ms = compute_latency(task, s.f_max_hz / load);
    return res;
}

}  // namespace mecsim

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mecsim/rng.hpp"
#include "mecsim/scenario.hpp"

namespace mecsim {

/// Channel state for one link evaluation. fading_gain is redrawn per
/// (re)transmission; pathloss is fixed for the duration of a drop.
struct LinkDraw {
    double fading_gain = 1.0;     // h, exponential with unit mean
    double pathloss_lin = 1.0;    // L
    double interference_mw = 0;  // total co-channel received power
};

struct DelaySample {
    int ue_id = 0;
    int bs_id = 0;
    std::int64_t drop_id = 0;
    int tau_t_ttis = 0;   // uplink + downlink transmission latency
    double tau_p_ms = 0;  // compute latency
};

/// gamma = G_m G_n P_m h L / (I + sigma_n^2), evaluated in mW.
double sinr_uplink(int m, int n, const LinkDraw& draw, const NetworkScenario& s);
double sinr_downlink(int m, int n, const LinkDraw& draw, const NetworkScenario& s);

/// Shannon rate w * log2(1 + gamma) in bits/s.
double rate_bps(double gamma, double w_hz);

/// Everything fixed about one direction of a link within a drop; attempt
/// randomness (fading of the signal and of each interferer) is drawn per
/// attempt on top of this.
struct LinkContext {
    double signal_mw = 0.0;              // G*G*P*L without fading
    std::vector<double> interferer_mw;   // per-interferer G*G*P*L without fading
    double noise_mw = 0.0;
    double threshold = 1.0;              // linear decode SINR
    double bandwidth_hz = 0.0;
    double tti_ms = 1.0;
    int max_retx = 0;
    int max_ttis_per_attempt = 100;
};

struct AttemptOutcome {
    int ttis = 0;
    bool success = false;
};

/// TTIs consumed by a single attempt at the realized SINR. Failed attempts
/// are charged too; the per-attempt cap bounds the near-zero-rate case.
AttemptOutcome attempt_outcome(double bits, double gamma, const LinkContext& ctx);

struct DirectionResult {
    int ttis = 0;
    bool success = false;
    int attempts = 0;
};

/// Repeats attempts with fresh fading until decode or until max_retx
/// retransmissions are exhausted; every attempt's TTIs accumulate.
DirectionResult one_direction_latency(double bits, const LinkContext& ctx, Rng& rng);

struct TransmissionResult {
    int ttis = 0;
    bool success = false;
};

/// tau_t = tau_u + tau_d. A failed uplink drops the task without attempting
/// the downlink.
TransmissionResult transmission_latency(const TaskSpec& task, const LinkContext& up, const LinkContext& down,
                                        Rng& rng);

/// tau_p = c_m / f in ms. f_alloc must be positive.
double compute_latency(const TaskSpec& task, double f_alloc_hz);

/// tau = tau_t * T + tau_p, in ms.
double e2e_delay(int tau_t_ttis, double tti_ms, double tau_p_ms);

/// Empirical P(tau < tau_th), strict inequality.
double reliability(std::span<const double> delays_ms, double tau_th_ms);

struct DropResult {
    std::vector<DelaySample> samples;  // completed services only
    std::vector<double> cycles;        // per-UE task cycles drawn this drop (all UEs)
    int dropped = 0;                   // services lost to retransmission exhaustion
};

/// Simulates services of one network realization ("drop") at a time. Pure
/// given (bundle, plan, seed, drop_id): drops can run concurrently and merge
/// by drop_id without affecting results.
class ServiceSim {
  public:
    ServiceSim(const ScenarioBundle& bundle, const AllocationPlan& plan);

    DropResult run_drop(std::uint64_t master_seed, std::int64_t drop_id) const;

    struct ProbeResult {
        bool completed = false;
        int tau_t_ttis = 0;
        double tau_p_ms = 0.0;
        double cycles = 0.0;
    };

    /// Transmission probe of the hypothetical pair (m, n): UE m is forced
    /// active and served by BS n while everyone else follows the background
    /// plan. Used to estimate per-pair delay-cost tables.
    ProbeResult probe_pair(std::uint64_t master_seed, std::int64_t drop_id, int m, int n) const;

    const ScenarioBundle& bundle() const { return bundle_; }
    const AllocationPlan& plan() const { return plan_; }

  private:
    double draw_busy(Rng& rng) const;
    double draw_cycles(int ue, Rng& rng) const;
    LinkContext base_context(double signal_mw) const;

    ScenarioBundle bundle_;
    AllocationPlan plan_;
    std::vector<int> serving_;            // bs_of per UE, -1 unserved
    std::vector<std::vector<double>> up_base_mw_;    // [ue][bs] G*G*P_ue*L
    std::vector<std::vector<double>> down_base_mw_;  // [ue][bs] G*G*P_bs*L
    double noise_mw_ = 0.0;
};

}  // namespace mecsim

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mecsim/config.hpp"

namespace mecsim {

struct Vec2 {
    double x = 0.0, y = 0.0;
    bool operator==(const Vec2&) const = default;
};

/// Static description of the network: geometry plus radio and compute
/// parameters. Immutable after construction; all simulation randomness lives
/// elsewhere.
struct NetworkScenario {
    int n_bs = 0;                      // N
    int n_ue = 0;                      // M
    std::vector<Vec2> bs_positions;    // meters
    std::vector<Vec2> ue_positions;    // meters
    double tti_ms = 1.0;               // T
    double bandwidth_hz = 2e7;         // w
    double p_bs_mw = 100.0;            // P_n
    double p_ue_mw = 10.0;             // P_m
    double gain_bs = 1.0;              // G_n
    double gain_ue = 1.0;              // G_m
    double noise_psd_dbm_hz = -174.0;  // N_0
    double f_max_hz = 2e10;            // per-BS compute budget
    double pathloss_exponent = 3.5;
    double pathloss_ref_db = 38.0;  // at 1 m
    int max_retx = 8;
    double sinr_decode_threshold = 1.0;  // linear ratio
    int per_bs_capacity = 0;             // 0 = n_ue

    double tti_s() const { return tti_ms * 1e-3; }
    double p_bs_w() const { return p_bs_mw * 1e-3; }
    double p_ue_w() const { return p_ue_mw * 1e-3; }
    /// sigma_n^2 = N_0 * w, linearized to watts.
    double noise_w() const;
    /// Linear power attenuation at distance d (meters); log-distance model,
    /// distance floored at 1 m where the reference loss is defined.
    double pathloss_lin(double d_m) const;
    double distance_m(int ue, int bs) const;
    int capacity() const { return per_bs_capacity > 0 ? per_bs_capacity : n_ue; }
};

struct TaskSpec {
    int ue_id = 0;
    double uplink_bits = 0.0;     // I_u
    double downlink_bits = 0.0;   // I_d
    double cycles_per_bit = 0.0;  // f_m
    double total_cycles = 0.0;    // c_m = f_m * I_u

    static TaskSpec from_cycles(int ue_id, double uplink_bits, double downlink_bits, double total_cycles);
};

struct RiskSpec {
    double alpha = 0.05;    // tail probability
    double beta = 0.5;      // CVaR weight in the objective
    double tau_th_ms = 30;  // reliability threshold
};

/// Binary assignment v(m,n) plus per-pair compute frequency f(m,n).
struct AllocationPlan {
    int n_ue = 0, n_bs = 0;
    std::vector<std::uint8_t> assignment;  // row-major M x N
    std::vector<double> freq_hz;           // row-major M x N

    static AllocationPlan empty(int n_ue, int n_bs);
    bool assigned(int m, int n) const { return assignment[static_cast<std::size_t>(m) * n_bs + n] != 0; }
    double freq(int m, int n) const { return freq_hz[static_cast<std::size_t>(m) * n_bs + n]; }
    void assign(int m, int n, double f_hz);
    /// Serving BS of UE m, -1 when unserved.
    int bs_of(int m) const;
    /// UEs served by BS n, ascending.
    std::vector<int> served_by(int n) const;
};

/// Violations are data, not faults: an empty list means the object is valid.
std::vector<std::string> validate_scenario(const NetworkScenario& s);
/// Throws on dimension mismatch; otherwise returns the violation list.
std::vector<std::string> validate_plan(const AllocationPlan& p, const NetworkScenario& s);

/// Synthetic task-size model used when no trace is configured.
struct TaskModel {
    double cycles_median = 5e7;
    double cycles_sigma = 0.5;
    double heterogeneity = 4.0;  // per-UE median multiplier range
    double uplink_bits_min = 1e3, uplink_bits_max = 1e4;
    double downlink_bits_min = 1e3, downlink_bits_max = 1e4;
    std::vector<double> trace_cycles;  // when nonempty, cycles resample from here
};

enum class ComputeSharing { Static, Dynamic };

struct SimOptions {
    double activity = 1.0;         // mean probability a UE has a task in a drop
    double activity_spread = 0.0;  // per-drop busy level: U[a - s, a + s] clamped to [0,1]
    int max_ttis_per_attempt = 100;
    ComputeSharing sharing = ComputeSharing::Dynamic;
};

/// Everything needed to run one experiment: who is where, how tasks look,
/// and what risk level the planner targets.
struct ScenarioBundle {
    NetworkScenario net;
    TaskModel tasks;
    SimOptions sim;
    RiskSpec risk;
    std::string scenario_id;
    std::uint64_t topology_seed = 0;
    /// Per-UE multiplier on the cycle median; drawn once per scenario.
    std::vector<double> ue_cycle_factor;
};

/// Builds the bundle from configuration. Positions come from the config when
/// given explicitly, otherwise they are generated from scenario_seed (or from
/// run_seed when scenario_seed is 0). Throws on invalid scenarios.
ScenarioBundle bundle_from_config(const Config& cfg, std::uint64_t run_seed);

/// Writes every scenario field (positions included) back into cfg such that
/// bundle_from_config reproduces the scenario exactly.
void scenario_to_config(const NetworkScenario& s, Config& cfg);

/// Nearest-BS assignment with equal frequency split per BS; the default plan
/// under which training data is generated.
AllocationPlan nearest_bs_plan(const NetworkScenario& s);

std::string format_positions(const std::vector<Vec2>& pos);
std::vector<Vec2> parse_positions(const std::string& text, std::string_view what);

}  // namespace mecsim

#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "mecsim/dataset.hpp"
#include "mecsim/delay_sim.hpp"
#include "mecsim/scenario.hpp"
#include "mecsim/vae.hpp"

namespace mecsim {

/// Which statistic of the delay/cycle banks feeds the planner. Cvar weights
/// the tail only, Mean the average only, MeanCvarBlend their sum.
enum class CostKind { Cvar, Mean, MeanCvarBlend };

/// Planner inputs: per-pair transmission cost in ms plus a per-UE compute
/// coefficient in cycles. The compute delay a UE sees at frequency f is
/// coeff * 1e3 / f ms, so the two combine into one surrogate objective.
/// Pairs whose probes never completed are infeasible (+inf).
struct CostTable {
    int n_ue = 0, n_bs = 0;
    std::vector<double> trans_ms;       // row-major M x N
    std::vector<double> compute_coeff;  // per UE

    double trans(int m, int n) const { return trans_ms[static_cast<std::size_t>(m) * n_bs + n]; }
    bool feasible(int m, int n) const;
};

/// Raw samples behind a cost table. attempts distinguishes a pair whose
/// probes all failed (infeasible, +inf cost) from one that was never probed
/// (missing coverage, an input error).
struct PairSampleBank {
    int n_ue = 0, n_bs = 0;
    std::vector<std::vector<double>> trans_ms;  // row-major M x N banks
    std::vector<std::int64_t> attempts;         // probes attempted per pair
    std::vector<std::vector<double>> cycles;    // per UE
};

struct ProbeData {
    DelayDataset probes;  // completed probes, one stream per (UE, BS) pair
    std::vector<std::vector<double>> ue_cycles;
    int n_ue = 0, n_bs = 0;
    std::int64_t n_probes = 0;  // attempted per pair
    std::int64_t dropped = 0;
};

/// n_probes transmission probes of every (UE, BS) pair under the sim's
/// background plan. Deterministic in seed.
ProbeData collect_probes(const ServiceSim& sim, std::int64_t n_probes, std::uint64_t seed);

PairSampleBank bank_from_probes(const ProbeData& data, double tti_ms);
/// Bank from externally loaded data; attempts become the observed counts, so
/// pairs without records surface as missing coverage when a table is built.
PairSampleBank bank_from_dataset(const DelayDataset& d, const std::vector<std::vector<double>>& ue_cycles,
                                 double tti_ms, int n_ue, int n_bs);

/// Empirical path: cost entries are the chosen statistic of the raw banks.
CostTable build_cost_table(const PairSampleBank& bank, const RiskSpec& risk, CostKind kind);

/// Model path: each pair's transmission law pools the posterior of every
/// disjoint window of its probe stream (within-window variance plus the
/// variance of window means), encoded by the serving BS's model. Compute
/// coefficients stay empirical: cycles are plan-invariant, model outputs are
/// conditioned on the plan the training data was generated under.
CostTable build_cost_table_gaussian(const std::vector<CorrelatedVae*>& model_by_bs,
                                    const ProbeData& data, const RiskSpec& risk, CostKind kind,
                                    double tti_ms);

/// Surrogate cost of serving UE m at BS n with compute frequency f_hz, ms.
double pair_cost_ms(const CostTable& t, int m, int n, double f_hz);
/// Max pair cost over served UEs; +inf when any UE is unserved.
double plan_objective_ms(const CostTable& t, const AllocationPlan& plan);

struct AssignmentResult {
    std::vector<int> bs_of;     // serving BS per UE
    double bottleneck = 0.0;    // the minimized max cost entry
};

/// Exact min-max assignment under per-BS capacities: binary search over the
/// distinct cost values with an augmenting-path matching as the feasibility
/// check at each threshold.
AssignmentResult assign_tasks(const CostTable& costs, const std::vector<int>& capacity);

/// Equalizing split f(m,n) = coeff_m * f_max / sum of coeffs served by n;
/// every served UE then sees the same compute delay at its BS. Served UEs
/// need positive coefficients; a BS with nobody assigned gets nothing.
AllocationPlan allocate_frequency(const std::vector<int>& bs_of, const std::vector<double>& compute_coeff,
                                  double f_max_hz, int n_bs);

struct PlanResult {
    AllocationPlan plan;
    double objective_ms = 0.0;
    int iterations = 1;
    bool converged = true;  // false when a refresh loop hits max_iters
};

/// Rebuilds the cost table from a candidate plan (re-simulation hook).
using CostRefresh = std::function<CostTable(const AllocationPlan&)>;

/// Bottleneck assignment, then move/swap refinement on the joint surrogate,
/// then the closed-form frequency split. Without a refresh callback one pass
/// suffices (iterations = 1). With one, the pass repeats on refreshed costs
/// until the assignment stabilizes or max_iters is hit; the last iterate is
/// returned either way, flagged converged=false on budget exhaustion.
PlanResult optimize(const CostTable& costs, const NetworkScenario& net, int max_iters = 10,
                    const CostRefresh& refresh = {});

/// Global optimum by enumerating every feasible assignment with the closed
/// form applied to each; requires N^M <= 1e7. Ties break toward the
/// lexicographically smallest assignment vector.
PlanResult exhaustive_search(const CostTable& costs, const NetworkScenario& net);

}  // namespace mecsim

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mecsim/config.hpp"

namespace mecsim {

/// Command layer: each cmd_* runs one pipeline stage against a shared output
/// directory and returns the files it wrote (paths relative to out_dir).
/// Stages communicate only through those files, so every artifact is a
/// deterministic function of (config, seed) and any stage can be rerun or
/// inspected in isolation. Wall-clock durations go into the per-command
/// manifest_*.json, never into data files, which stay byte-reproducible.
///
/// Methods: "proposed" picks assignments by tail risk (CVaR cost table),
/// "baseline1" by expected delay, "baseline2" by a mean-plus-CVaR blend,
/// "oracle" runs exhaustive search on the CVaR table.

struct PlanDiagnostics {
    std::string method;
    double objective_ms = 0.0;  // worst per-UE surrogate cost of the plan
    int iterations = 1;
    bool converged = true;
    std::vector<std::string> files;
};

struct MethodMetrics {
    std::string method;
    double objective_ms = 0.0;    // recomputed from the persisted probe data
    double mean_delay_ms = 0.0;   // empirical E2E mean over completed services
    double cvar_ms = 0.0;         // empirical tail average at risk.alpha
    double drop_rate = 0.0;       // abandoned / offered
    std::vector<double> reliability;  // P(delay < tau) per tau_grid_ms entry
};

struct ExperimentReport {
    std::string scenario_id;
    std::uint64_t seed = 0;
    std::uint64_t config_hash = 0;
    std::vector<double> tau_grid_ms;
    std::vector<MethodMetrics> methods;
    std::vector<std::string> files;
};

/// Monte-Carlo datasets under the default nearest-BS plan: training samples
/// plus per-pair probe streams (every UE forced through every BS) and the
/// cycle banks. Files: samples.csv, cycles.csv, probe_samples.csv,
/// probe_cycles.csv.
std::vector<std::string> cmd_simulate(const Config& cfg, std::uint64_t seed, const std::string& out_dir);

/// Trains one delay model per BS on samples.csv. Files: model_bs<n>.txt,
/// loss_bs<n>.csv, latent_scatter.csv (posterior means of the held-out
/// windows; falls back to training windows when val_fraction is 0).
std::vector<std::string> cmd_train(const Config& cfg, std::uint64_t seed, const std::string& out_dir);

/// Builds the cost table for the method (empirical probe statistics, or the
/// trained per-BS models when [experiment] cost_path = model), solves the
/// assignment, and writes plan_<method>.csv. With [experiment] load_coupled,
/// non-oracle methods re-probe under each candidate plan until the
/// assignment stabilizes (same probe seed each round, so iterations differ
/// only through the plan).
PlanDiagnostics cmd_plan(const Config& cfg, std::uint64_t seed, const std::string& out_dir,
                         const std::string& method);

/// Evaluates plans on a fresh Monte-Carlo run (evaluation seeds live in
/// their own namespace and are shared across methods, so method deltas are
/// not sampling noise). Empty methods list = every plan_*.csv present.
/// Files: eval_samples_<method>.csv, report.csv, cdf.csv.
ExperimentReport cmd_evaluate(const Config& cfg, std::uint64_t seed, const std::string& out_dir,
                              std::vector<std::string> methods = {});

/// In-memory pipeline (probe, plan, evaluate) per axis value, averaged over
/// [experiment] n_seeds replicas. axis: "fmax" ([experiment] fmax_sweep_ghz)
/// or "ue" ([experiment] ue_sweep). Empty methods list = proposed and both
/// baselines. Files: sweep_<axis>.csv.
std::vector<std::string> cmd_sweep(const Config& cfg, std::uint64_t seed, const std::string& out_dir,
                                   const std::string& axis, std::vector<std::string> methods = {});

/// End-to-end smoke on a tiny built-in scenario under <out_dir>/selftest:
/// reruns stages, checks determinism, plan validity, and that the report
/// matches recomputation from the persisted samples. Returns one log line
/// per check; throws on the first failure.
std::vector<std::string> cmd_selftest(const std::string& out_dir);

}  // namespace mecsim

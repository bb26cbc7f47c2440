#include "mecsim/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <map>
#include <utility>

#include <json.hpp>

#include "mecsim/csv.hpp"
#include "mecsim/dataset.hpp"
#include "mecsim/delay_sim.hpp"
#include "mecsim/planner.hpp"
#include "mecsim/risk.hpp"
#include "mecsim/rng.hpp"
#include "mecsim/text.hpp"
#include "mecsim/vae.hpp"

namespace mecsim {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;
using nlohmann::json;

const std::vector<std::string>& all_methods() {
    static const std::vector<std::string> m = {"proposed", "baseline1", "baseline2", "oracle"};
    return m;
}

CostKind method_kind(const std::string& method) {
    if (method == "proposed" || method == "oracle") return CostKind::Cvar;
    if (method == "baseline1") return CostKind::Mean;
    if (method == "baseline2") return CostKind::MeanCvarBlend;
    fail(Errc::InvalidArgument,
         "unknown method '" + method + "'; expected proposed, baseline1, baseline2, or oracle");
}

std::string path_in(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) fail(Errc::Io, "cannot create output directory " + dir + ": " + ec.message());
}

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::string hash_hex(std::uint64_t h) {
    char buf[19] = "0x";
    for (int i = 0; i < 16; ++i) buf[2 + i] = "0123456789abcdef"[(h >> (60 - 4 * i)) & 0xF];
    return std::string(buf, 18);
}

/// Metadata sidecar; the only artifact allowed to differ between reruns
/// (it records wall-clock durations).
void write_manifest(const std::string& out_dir, const std::string& command, const Config& cfg,
                    std::uint64_t seed, const std::string& scenario_id,
                    std::vector<std::string>& files, const std::map<std::string, double>& durations,
                    json extra = json::object()) {
    json m;
    m["command"] = command;
    m["scenario_id"] = scenario_id;
    m["seed"] = seed;
    m["config_hash"] = hash_hex(cfg.hash());
    m["files"] = files;
    json d = json::object();
    for (const auto& [stage, ms] : durations) d[stage] = ms;
    m["durations_ms"] = d;
    if (!extra.empty()) m["details"] = extra;
    const std::string name = "manifest_" + command + ".json";
    write_text_file(path_in(out_dir, name), m.dump(2) + "\n");
    files.push_back(name);
}

std::int64_t positive_count(const Config& cfg, const char* key) {
    const std::int64_t v = cfg.integer("experiment", key);
    if (v < 1) fail(Errc::InvalidArgument, std::string("[experiment] ") + key +
                                               " must be positive, got " + format_int(v));
    return v;
}

void guard_scenario(const DelayDataset& d, const ScenarioBundle& bundle, const std::string& file) {
    if (d.scenario_id != bundle.scenario_id)
        fail(Errc::Validation, file + " belongs to scenario '" + d.scenario_id +
                                   "' but the configuration selects '" + bundle.scenario_id + "'");
}

std::vector<double> tau_grid_from(const Config& cfg) {
    const double lo = cfg.num("experiment", "tau_grid_min_ms");
    const double hi = cfg.num("experiment", "tau_grid_max_ms");
    const std::int64_t n = cfg.integer("experiment", "tau_grid_points");
    if (!(lo > 0.0) || !(hi > lo)) fail(Errc::InvalidArgument, "tau grid needs 0 < min < max");
    if (n < 2) fail(Errc::InvalidArgument, "tau_grid_points must be at least 2");
    std::vector<double> grid(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i)
        grid[static_cast<std::size_t>(i)] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return grid;
}

std::vector<double> e2e_delays_ms(const DelayDataset& d, double tti_ms) {
    std::vector<double> taus;
    taus.reserve(d.records.size());
    for (const auto& r : d.records) taus.push_back(static_cast<double>(r.tau_t_ttis) * tti_ms + r.tau_p_ms);
    return taus;
}

struct EvalStats {
    double mean_ms = 0.0;
    double cvar_ms = 0.0;
    double mean_trans_ms = 0.0;
    double drop_rate = 0.0;
    std::vector<double> reliability;
};

/// The single reduction both the report and its recomputation use; byte-equal
/// results depend on identical record order and summation order.
EvalStats eval_stats(const DelayDataset& d, std::int64_t dropped, double tti_ms, double alpha,
                     const std::vector<double>& tau_grid) {
    if (d.records.empty()) fail(Errc::Validation, "evaluation produced no completed services");
    const std::vector<double> taus = e2e_delays_ms(d, tti_ms);
    EvalStats s;
    double acc = 0.0, acc_t = 0.0;
    for (std::size_t i = 0; i < taus.size(); ++i) {
        acc += taus[i];
        acc_t += static_cast<double>(d.records[i].tau_t_ttis) * tti_ms;
    }
    const double n = static_cast<double>(taus.size());
    s.mean_ms = acc / n;
    s.mean_trans_ms = acc_t / n;
    s.cvar_ms = cvar_empirical(taus, alpha);
    s.drop_rate = static_cast<double>(dropped) / (static_cast<double>(dropped) + n);
    s.reliability.reserve(tau_grid.size());
    for (double tau : tau_grid) {
        std::int64_t hit = 0;
        for (double t : taus)
            if (t < tau) ++hit;
        s.reliability.push_back(static_cast<double>(hit) / n);
    }
    return s;
}

/// Probe artifacts reloaded from a run directory.
struct ProbeArtifacts {
    ProbeData data;
    PairSampleBank bank;
};

ProbeArtifacts load_probes(const Config& cfg, const std::string& out_dir, const ScenarioBundle& bundle) {
    ProbeArtifacts a;
    a.data.probes = read_delay_csv(path_in(out_dir, "probe_samples.csv"));
    guard_scenario(a.data.probes, bundle, "probe_samples.csv");
    a.data.ue_cycles = read_cycles_csv(path_in(out_dir, "probe_cycles.csv"));
    a.data.n_ue = bundle.net.n_ue;
    a.data.n_bs = bundle.net.n_bs;
    // The probe stage attempts every pair n_probe_drops times, so a pair with
    // no completed records was probed and always failed: it must come back as
    // infeasible (+inf cost), not as missing coverage.
    a.data.n_probes = positive_count(cfg, "n_probe_drops");
    a.bank = bank_from_probes(a.data, bundle.net.tti_ms);
    return a;
}

std::string model_file(const Config& cfg, int bs) {
    return cfg.str("training", "model_scope") == "pooled" ? "model_pooled.txt"
                                                          : "model_bs" + format_int(bs) + ".txt";
}

/// Models are move-only, so a pooled checkpoint is stored once and aliased
/// per BS at the pointer level.
std::vector<CorrelatedVae*> model_ptrs(std::vector<CorrelatedVae>& models, int n_bs) {
    std::vector<CorrelatedVae*> ptrs(static_cast<std::size_t>(n_bs));
    for (int n = 0; n < n_bs; ++n)
        ptrs[static_cast<std::size_t>(n)] = models.size() == 1 ? &models.front()
                                                               : &models[static_cast<std::size_t>(n)];
    return ptrs;
}

std::vector<CorrelatedVae> load_models(const Config& cfg, const std::string& out_dir, int n_bs) {
    std::vector<CorrelatedVae> models;
    if (cfg.str("training", "model_scope") == "pooled") {
        models.push_back(CorrelatedVae::load_file(path_in(out_dir, model_file(cfg, 0))));
    } else {
        models.reserve(static_cast<std::size_t>(n_bs));
        for (int n = 0; n < n_bs; ++n)
            models.push_back(CorrelatedVae::load_file(path_in(out_dir, model_file(cfg, n))));
    }
    return models;
}

CostTable table_for(const Config& cfg, const ScenarioBundle& bundle, const ProbeArtifacts& probes,
                    std::vector<CorrelatedVae>* models, CostKind kind) {
    const std::string cost_path = cfg.str("experiment", "cost_path");
    if (cost_path == "empirical") return build_cost_table(probes.bank, bundle.risk, kind);
    if (cost_path == "model") {
        return build_cost_table_gaussian(model_ptrs(*models, bundle.net.n_bs), probes.data, bundle.risk,
                                         kind, bundle.net.tti_ms);
    }
    fail(Errc::InvalidArgument, "[experiment] cost_path must be empirical or model, got '" + cost_path + "'");
}

PlanResult solve_method(const Config& cfg, const ScenarioBundle& bundle, const std::string& method,
                        const CostTable& table, std::uint64_t seed,
                        std::vector<CorrelatedVae>* models) {
    if (method == "oracle") return exhaustive_search(table, bundle.net);
    if (!cfg.boolean("experiment", "load_coupled")) return optimize(table, bundle.net);

    // Coupled mode: candidate plans change the interference and compute load
    // other UEs generate, so costs are re-probed under each candidate. The
    // probe seed is fixed across rounds; iterations differ only via the plan.
    const std::int64_t n_probe = positive_count(cfg, "n_probe_drops");
    const std::uint64_t probe_seed = derive_seed(seed, "refresh-probe");
    const int max_iters = static_cast<int>(cfg.integer("experiment", "max_iters"));
    const CostKind kind = method_kind(method);
    CostRefresh refresh = [&cfg, &bundle, n_probe, probe_seed, kind, models](const AllocationPlan& cand) {
        const ServiceSim sim(bundle, cand);
        const ProbeData fresh = collect_probes(sim, n_probe, probe_seed);
        if (cfg.str("experiment", "cost_path") == "model") {
            return build_cost_table_gaussian(model_ptrs(*models, bundle.net.n_bs), fresh, bundle.risk,
                                             kind, bundle.net.tti_ms);
        }
        return build_cost_table(bank_from_probes(fresh, bundle.net.tti_ms), bundle.risk, kind);
    };
    return optimize(table, bundle.net, max_iters, refresh);
}

void require_valid(const AllocationPlan& plan, const NetworkScenario& net, const std::string& what) {
    const auto violations = validate_plan(plan, net);
    if (violations.empty()) return;
    std::string msg = what + " violates the scenario:";
    for (const auto& v : violations) msg += " [" + v + "]";
    fail(Errc::Validation, msg);
}

std::vector<double> parse_sweep_values(const std::string& list, const std::string& key) {
    std::vector<double> vals;
    for (const auto& part : split(list, ','))
        if (!trim(part).empty()) vals.push_back(parse_double(part, key));
    if (vals.empty()) fail(Errc::InvalidArgument, "[experiment] " + key + " lists no values");
    return vals;
}

}  // namespace

std::vector<std::string> cmd_simulate(const Config& cfg, std::uint64_t seed, const std::string& out_dir) {
    const ScenarioBundle bundle = bundle_from_config(cfg, seed);
    const std::int64_t n_drops = positive_count(cfg, "n_drops");
    const std::int64_t n_probe = positive_count(cfg, "n_probe_drops");
    ensure_dir(out_dir);

    std::map<std::string, double> durations;
    auto t0 = Clock::now();
    const AllocationPlan background = nearest_bs_plan(bundle.net);
    const GeneratedData data = generate_dataset(bundle, background, n_drops, derive_seed(seed, "dataset"));
    durations["dataset"] = ms_since(t0);

    t0 = Clock::now();
    const ServiceSim sim(bundle, background);
    const ProbeData probes = collect_probes(sim, n_probe, derive_seed(seed, "probe"));
    durations["probes"] = ms_since(t0);

    std::vector<std::string> files;
    auto emit = [&](const std::string& name, const std::string& content) {
        write_text_file(path_in(out_dir, name), content);
        files.push_back(name);
    };
    emit("samples.csv", delay_csv(data.dataset));
    emit("cycles.csv", cycles_csv(bundle.scenario_id, data.ue_cycles));
    emit("probe_samples.csv", delay_csv(probes.probes));
    emit("probe_cycles.csv", cycles_csv(bundle.scenario_id, probes.ue_cycles));

    json extra;
    extra["n_drops"] = n_drops;
    extra["n_probe_drops"] = n_probe;
    extra["dropped"] = data.dropped;
    extra["probe_dropped"] = probes.dropped;
    extra["completed_records"] = data.dataset.records.size();
    write_manifest(out_dir, "simulate", cfg, seed, bundle.scenario_id, files, durations, extra);
    return files;
}

std::vector<std::string> cmd_train(const Config& cfg, std::uint64_t seed, const std::string& out_dir) {
    const ScenarioBundle bundle = bundle_from_config(cfg, seed);
    const VaeSettings settings = VaeSettings::from_config(cfg);
    const double val_fraction = cfg.num("training", "val_fraction");
    const int stride = static_cast<int>(cfg.integer("training", "stride"));
    const bool pooled = cfg.str("training", "model_scope") == "pooled";
    ensure_dir(out_dir);

    const DelayDataset dataset = read_delay_csv(path_in(out_dir, "samples.csv"));
    guard_scenario(dataset, bundle, "samples.csv");

    std::map<std::string, double> durations;
    std::vector<std::string> files;
    CsvWriter scatter({"bs_id", "window_id", "mu_tau_t", "mu_tau_p"});
    const int n_models = pooled ? 1 : bundle.net.n_bs;
    for (int n = 0; n < n_models; ++n) {
        const DelayDataset slice = pooled ? dataset : dataset.filter_bs(n);
        if (slice.records.empty())
            fail(Errc::Validation, "samples.csv has no records for BS " + format_int(n) +
                                       "; the background plan never served it");
        const auto t0 = Clock::now();
        const WindowSplit split = build_window_split(slice, bundle.net.tti_ms, settings.W, stride, val_fraction);
        CorrelatedVae model(settings, split.norm);
        const auto curve = model.train(split.train, derive_seed(seed, "train", static_cast<std::uint64_t>(n)));
        durations[pooled ? "train_pooled" : "train_bs" + format_int(n)] = ms_since(t0);

        const std::string stem = pooled ? "pooled" : "bs" + format_int(n);
        model.save_file(path_in(out_dir, "model_" + stem + ".txt"));
        files.push_back("model_" + stem + ".txt");
        write_text_file(path_in(out_dir, "loss_" + stem + ".csv"), training_metrics_csv(curve));
        files.push_back("loss_" + stem + ".csv");

        // Scatter rows come from held-out windows so the cloud reflects what
        // the encoder generalizes, not what it memorized.
        const auto& cloud = split.val.empty() ? split.train : split.val;
        int window_id = 0;
        for (const auto& w : cloud) {
            const LatentPosterior p = model.posterior(w);
            scatter.row({format_int(pooled ? -1 : n), format_int(window_id++), format_double(p.mu[0]),
                         format_double(p.mu[1])});
        }
    }
    write_text_file(path_in(out_dir, "latent_scatter.csv"), scatter.str());
    files.push_back("latent_scatter.csv");
    write_manifest(out_dir, "train", cfg, seed, bundle.scenario_id, files, durations);
    return files;
}

PlanDiagnostics cmd_plan(const Config& cfg, std::uint64_t seed, const std::string& out_dir,
                         const std::string& method) {
    const CostKind kind = method_kind(method);
    const ScenarioBundle bundle = bundle_from_config(cfg, seed);
    ensure_dir(out_dir);

    std::map<std::string, double> durations;
    auto t0 = Clock::now();
    const ProbeArtifacts probes = load_probes(cfg, out_dir, bundle);
    std::vector<CorrelatedVae> models;
    if (cfg.str("experiment", "cost_path") == "model")
        models = load_models(cfg, out_dir, bundle.net.n_bs);
    const CostTable table = table_for(cfg, bundle, probes, &models, kind);
    durations["cost_table"] = ms_since(t0);

    t0 = Clock::now();
    const PlanResult result = solve_method(cfg, bundle, method, table, seed, &models);
    durations["solve"] = ms_since(t0);
    require_valid(result.plan, bundle.net, "plan_" + method);

    PlanDiagnostics diag;
    diag.method = method;
    diag.objective_ms = result.objective_ms;
    diag.iterations = result.iterations;
    diag.converged = result.converged;
    const std::string plan_name = "plan_" + method + ".csv";
    write_text_file(path_in(out_dir, plan_name), plan_csv(result.plan));
    diag.files.push_back(plan_name);

    json extra;
    extra["method"] = method;
    extra["objective_ms"] = result.objective_ms;
    extra["iterations"] = result.iterations;
    extra["converged"] = result.converged;
    extra["cost_path"] = cfg.str("experiment", "cost_path");
    write_manifest(out_dir, "plan_" + method, cfg, seed, bundle.scenario_id, diag.files, durations, extra);
    return diag;
}

ExperimentReport cmd_evaluate(const Config& cfg, std::uint64_t seed, const std::string& out_dir,
                              std::vector<std::string> methods) {
    const ScenarioBundle bundle = bundle_from_config(cfg, seed);
    const std::int64_t n_eval = positive_count(cfg, "n_eval_drops");
    ensure_dir(out_dir);
    if (methods.empty()) {
        for (const auto& m : all_methods())
            if (fs::exists(path_in(out_dir, "plan_" + m + ".csv"))) methods.push_back(m);
        if (methods.empty())
            fail(Errc::Validation, "no plan_<method>.csv files in " + out_dir + "; run the plan step first");
    } else {
        for (const auto& m : methods) method_kind(m);  // validate names
    }

    std::map<std::string, double> durations;
    auto t0 = Clock::now();
    const ProbeArtifacts probes = load_probes(cfg, out_dir, bundle);
    std::vector<CorrelatedVae> models;
    if (cfg.str("experiment", "cost_path") == "model")
        models = load_models(cfg, out_dir, bundle.net.n_bs);
    std::map<std::string, CostTable> tables;  // one per distinct cost kind
    durations["cost_table"] = ms_since(t0);

    ExperimentReport report;
    report.scenario_id = bundle.scenario_id;
    report.seed = seed;
    report.config_hash = cfg.hash();
    report.tau_grid_ms = tau_grid_from(cfg);

    // One shared evaluation seed: every method sees the same fading, task
    // sizes, and activity, so metric gaps come from the plans alone.
    const std::uint64_t eval_seed = derive_seed(seed, "evaluate");
    CsvWriter report_csv({"method", "objective_ms", "mean_delay_ms", "cvar_ms", "drop_rate"});
    CsvWriter cdf_csv({"method", "tau_ms", "reliability"});
    for (const auto& m : methods) {
        const AllocationPlan plan = read_plan_csv(path_in(out_dir, "plan_" + m + ".csv"),
                                                  bundle.net.n_ue, bundle.net.n_bs);
        require_valid(plan, bundle.net, "plan_" + m + ".csv");

        const std::string kind_key = m == "oracle" ? "proposed" : m;  // same table kind
        if (!tables.count(kind_key))
            tables.emplace(kind_key, table_for(cfg, bundle, probes, &models, method_kind(m)));

        const auto te = Clock::now();
        const GeneratedData ev = generate_dataset(bundle, plan, n_eval, eval_seed);
        durations["evaluate_" + m] = ms_since(te);
        const std::string sample_name = "eval_samples_" + m + ".csv";
        write_text_file(path_in(out_dir, sample_name), delay_csv(ev.dataset));
        report.files.push_back(sample_name);

        const EvalStats stats =
            eval_stats(ev.dataset, ev.dropped, bundle.net.tti_ms, bundle.risk.alpha, report.tau_grid_ms);
        MethodMetrics mm;
        mm.method = m;
        mm.objective_ms = plan_objective_ms(tables.at(kind_key), plan);
        mm.mean_delay_ms = stats.mean_ms;
        mm.cvar_ms = stats.cvar_ms;
        mm.drop_rate = stats.drop_rate;
        mm.reliability = stats.reliability;
        report.methods.push_back(mm);

        report_csv.row({m, format_double(mm.objective_ms), format_double(mm.mean_delay_ms),
                        format_double(mm.cvar_ms), format_double(mm.drop_rate)});
        for (std::size_t i = 0; i < report.tau_grid_ms.size(); ++i)
            cdf_csv.row({m, format_double(report.tau_grid_ms[i]), format_double(mm.reliability[i])});
    }
    write_text_file(path_in(out_dir, "report.csv"), report_csv.str());
    report.files.push_back("report.csv");
    write_text_file(path_in(out_dir, "cdf.csv"), cdf_csv.str());
    report.files.push_back("cdf.csv");
    durations["total"] = ms_since(t0);

    json extra;
    extra["methods"] = methods;
    extra["n_eval_drops"] = n_eval;
    write_manifest(out_dir, "evaluate", cfg, seed, bundle.scenario_id, report.files, durations, extra);
    return report;
}

std::vector<std::string> cmd_sweep(const Config& cfg, std::uint64_t seed, const std::string& out_dir,
                                   const std::string& axis, std::vector<std::string> methods) {
    if (axis != "fmax" && axis != "ue")
        fail(Errc::InvalidArgument, "sweep axis must be fmax or ue, got '" + axis + "'");
    if (methods.empty()) methods = {"proposed", "baseline1", "baseline2"};
    for (const auto& m : methods) method_kind(m);
    const std::int64_t n_seeds = positive_count(cfg, "n_seeds");
    const std::int64_t n_probe = positive_count(cfg, "n_probe_drops");
    const std::int64_t n_eval = positive_count(cfg, "n_eval_drops");
    const std::vector<double> values =
        axis == "fmax" ? parse_sweep_values(cfg.str("experiment", "fmax_sweep_ghz"), "fmax_sweep_ghz")
                       : parse_sweep_values(cfg.str("experiment", "ue_sweep"), "ue_sweep");
    ensure_dir(out_dir);

    std::map<std::string, double> durations;
    const auto t0 = Clock::now();
    const std::string value_col = axis == "fmax" ? "f_max_ghz" : "n_ue";
    CsvWriter sweep_csv({value_col, "method", "mean_delay_ms", "cvar_ms", "mean_trans_ms", "drop_rate"});
    for (std::size_t vi = 0; vi < values.size(); ++vi) {
        Config point = cfg;
        if (axis == "fmax") {
            point.set("compute", "f_max_hz", format_double(values[vi] * 1e9));
        } else {
            if (values[vi] != std::floor(values[vi]) || values[vi] < 1)
                fail(Errc::InvalidArgument, "ue_sweep entries must be positive integers");
            point.set("network", "n_ue", format_int(static_cast<std::int64_t>(values[vi])));
        }
        std::map<std::string, EvalStats> acc;
        for (std::int64_t rep = 0; rep < n_seeds; ++rep) {
            // The replica seed ignores the axis index: along the axis each
            // replica keeps its geometry and noise, so the curves are paired.
            const std::uint64_t rep_seed = derive_seed(seed, "sweep-rep", static_cast<std::uint64_t>(rep));
            const ScenarioBundle bundle = bundle_from_config(point, rep_seed);
            const AllocationPlan background = nearest_bs_plan(bundle.net);
            const ServiceSim sim(bundle, background);
            const ProbeData probe_data = collect_probes(sim, n_probe, derive_seed(rep_seed, "probe"));

            ProbeArtifacts probes;
            probes.data = probe_data;
            probes.bank = bank_from_probes(probe_data, bundle.net.tti_ms);
            std::vector<CorrelatedVae> models;
            if (point.str("experiment", "cost_path") == "model") {
                // The model path retrains per replica: scenario geometry and
                // the axis value change the delay laws the encoder must fit.
                const VaeSettings settings = VaeSettings::from_config(point);
                const int stride = static_cast<int>(point.integer("training", "stride"));
                const double val_fraction = point.num("training", "val_fraction");
                const GeneratedData data = generate_dataset(bundle, background, positive_count(point, "n_drops"),
                                                            derive_seed(rep_seed, "dataset"));
                const bool pooled = point.str("training", "model_scope") == "pooled";
                const int n_models = pooled ? 1 : bundle.net.n_bs;
                for (int n = 0; n < n_models; ++n) {
                    const DelayDataset slice = pooled ? data.dataset : data.dataset.filter_bs(n);
                    const WindowSplit split =
                        build_window_split(slice, bundle.net.tti_ms, settings.W, stride, val_fraction);
                    CorrelatedVae model(settings, split.norm);
                    model.train(split.train, derive_seed(rep_seed, "train", static_cast<std::uint64_t>(n)));
                    models.push_back(std::move(model));
                }
            }

            const std::uint64_t eval_seed = derive_seed(rep_seed, "evaluate");
            for (const auto& m : methods) {
                const CostTable table = table_for(point, bundle, probes, &models, method_kind(m));
                const PlanResult result = solve_method(point, bundle, m, table, rep_seed, &models);
                require_valid(result.plan, bundle.net, "sweep plan for " + m);
                const GeneratedData ev = generate_dataset(bundle, result.plan, n_eval, eval_seed);
                const EvalStats stats =
                    eval_stats(ev.dataset, ev.dropped, bundle.net.tti_ms, bundle.risk.alpha, {});
                EvalStats& a = acc[m];
                a.mean_ms += stats.mean_ms;
                a.cvar_ms += stats.cvar_ms;
                a.mean_trans_ms += stats.mean_trans_ms;
                a.drop_rate += stats.drop_rate;
            }
        }
        for (const auto& m : methods) {
            const EvalStats& a = acc.at(m);
            const double k = static_cast<double>(n_seeds);
            sweep_csv.row({format_double(values[vi]), m, format_double(a.mean_ms / k),
                           format_double(a.cvar_ms / k), format_double(a.mean_trans_ms / k),
                           format_double(a.drop_rate / k)});
        }
    }

    std::vector<std::string> files;
    const std::string name = "sweep_" + axis + ".csv";
    write_text_file(path_in(out_dir, name), sweep_csv.str());
    files.push_back(name);
    durations["sweep"] = ms_since(t0);

    json extra;
    extra["axis"] = axis;
    extra["values"] = values;
    extra["methods"] = methods;
    extra["n_seeds"] = n_seeds;
    write_manifest(out_dir, "sweep_" + axis, cfg, seed, cfg.str("experiment", "scenario_id"), files,
                   durations, extra);
    return files;
}

std::vector<std::string> cmd_selftest(const std::string& out_dir) {
    const std::string dir = path_in(out_dir, "selftest");
    ensure_dir(dir);
    std::vector<std::string> log;
    auto check = [&](bool ok, const std::string& what) {
        if (!ok) fail(Errc::Runtime, "selftest failed: " + what);
        log.push_back("ok: " + what);
    };

    Config cfg = Config::defaults();
    cfg.set("network", "n_bs", "2");
    cfg.set("network", "n_ue", "6");
    cfg.set("network", "cell_size_m", "80");
    cfg.set("network", "scenario_seed", "7");
    cfg.set("experiment", "scenario_id", "selftest");
    cfg.set("experiment", "n_drops", "400");
    cfg.set("experiment", "n_probe_drops", "120");
    cfg.set("experiment", "n_eval_drops", "300");
    cfg.set("training", "epochs", "6");
    cfg.set("training", "window", "8");
    cfg.set("training", "stride", "8");
    cfg.set("training", "hidden", "16");
    cfg.set("training", "conv_channels", "4");
    // small window sets train steadier at a lower rate
    cfg.set("training", "learning_rate", "0.001");
    const std::uint64_t seed = 11;

    const auto sim_files = cmd_simulate(cfg, seed, dir);
    check(sim_files.size() == 5, "simulate wrote its artifacts");
    const std::string first = read_text_file(path_in(dir, "samples.csv"));
    cmd_simulate(cfg, seed, dir);
    check(read_text_file(path_in(dir, "samples.csv")) == first, "simulate is deterministic");

    const auto train_files = cmd_train(cfg, seed, dir);
    check(train_files.size() >= 5, "train wrote models, curves, and the scatter");
    const CorrelatedVae reloaded = CorrelatedVae::load_file(path_in(dir, "model_bs0.txt"));
    check(reloaded.trained(), "checkpoints reload as trained models");

    double oracle_objective = 0.0, proposed_objective = 0.0;
    for (const auto& m : all_methods()) {
        const PlanDiagnostics diag = cmd_plan(cfg, seed, dir, m);
        check(std::isfinite(diag.objective_ms), "plan_" + m + " has a finite objective");
        if (m == "oracle") oracle_objective = diag.objective_ms;
        if (m == "proposed") proposed_objective = diag.objective_ms;
    }
    check(proposed_objective >= oracle_objective - 1e-9, "exhaustive search lower-bounds the solver");

    const ExperimentReport report = cmd_evaluate(cfg, seed, dir);
    check(report.methods.size() == 4, "evaluate covered every plan");
    for (const auto& mm : report.methods) {
        bool monotone = true;
        for (std::size_t i = 1; i < mm.reliability.size(); ++i)
            if (mm.reliability[i] < mm.reliability[i - 1]) monotone = false;
        check(monotone, "reliability curve of " + mm.method + " is nondecreasing");

        const DelayDataset persisted = read_delay_csv(path_in(dir, "eval_samples_" + mm.method + ".csv"));
        const ScenarioBundle bundle = bundle_from_config(cfg, seed);
        std::int64_t dropped =
            static_cast<std::int64_t>(std::llround(mm.drop_rate / (1.0 - mm.drop_rate) *
                                                   static_cast<double>(persisted.records.size())));
        const EvalStats again =
            eval_stats(persisted, dropped, bundle.net.tti_ms, bundle.risk.alpha, report.tau_grid_ms);
        check(again.mean_ms == mm.mean_delay_ms && again.cvar_ms == mm.cvar_ms,
              "report for " + mm.method + " matches recomputation from persisted samples");
    }
    return log;
}

}  // namespace mecsim

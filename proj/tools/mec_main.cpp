// Command-line front end. Talks to the toolkit exclusively through the C
// boundary (mec.h); every run writes its artifacts into --out.
#include <mec.h>

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

namespace {

const char* status_name(mec_status st) {
    switch (st) {
        case MEC_OK: return "ok";
        case MEC_ERR_INVALID_ARGUMENT: return "invalid_argument";
        case MEC_ERR_IO: return "io";
        case MEC_ERR_CONFIG: return "config";
        case MEC_ERR_VALIDATION: return "validation";
        case MEC_ERR_RUNTIME: return "runtime";
    }
    return "runtime";
}

// One line, one stream: scripts can match on the leading token.
int report_failure(mec_status st) {
    std::fprintf(stderr, "error: %s: %s\n", status_name(st), mec_last_error());
    return static_cast<int>(st);
}

struct ConfigHandle {
    mec_config* cfg = nullptr;
    ~ConfigHandle() { mec_config_destroy(cfg); }
};

std::vector<const char*> c_strings(const std::vector<std::string>& v) {
    std::vector<const char*> out;
    out.reserve(v.size());
    for (const auto& s : v) out.push_back(s.c_str());
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Edge service-delay toolkit: simulate, learn, and plan task offloading"};
    app.require_subcommand(1);
    app.set_version_flag("--version", mec_version());

    std::string config_path;
    std::string out_dir = "out";
    std::string scale = "desk";
    std::uint64_t seed = 1;
    app.add_option("--config", config_path, "INI config file layered over the scale defaults")
        ->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "master seed; every artifact is reproducible from (config, seed)")
        ->capture_default_str();
    app.add_option("--out", out_dir, "run directory for artifacts")->capture_default_str();
    app.add_option("--scale", scale, "defaults preset")
        ->check(CLI::IsMember({"desk", "paper"}))
        ->capture_default_str();

    std::string method = "proposed";
    std::vector<std::string> methods;
    std::string axis = "fmax";

    CLI::App* sim = app.add_subcommand("simulate", "generate the delay dataset and transmission probes");
    CLI::App* train = app.add_subcommand("train", "fit the delay model(s) on a simulated dataset");
    CLI::App* plan = app.add_subcommand("plan", "solve the task and frequency allocation for one method");
    plan->add_option("--method", method, "proposed, baseline1, baseline2, or oracle")
        ->capture_default_str();
    CLI::App* evaluate = app.add_subcommand("evaluate", "evaluate stored plans on one shared noise stream");
    evaluate->add_option("--method", methods, "plans to evaluate (default: every stored plan)");
    CLI::App* sweep = app.add_subcommand("sweep", "average metrics over paired replicas along one axis");
    sweep->add_option("--axis", axis, "fmax or ue")->capture_default_str();
    sweep->add_option("--method", methods, "methods to sweep (default: proposed and both baselines)");
    CLI::App* selftest = app.add_subcommand("selftest", "run the built-in end-to-end pipeline checks");
    for (CLI::App* sub : {sim, train, plan, evaluate, sweep, selftest}) sub->fallthrough();

    CLI11_PARSE(app, argc, argv);

    ConfigHandle handle;
    mec_status st = config_path.empty()
                        ? mec_config_create(scale.c_str(), &handle.cfg)
                        : mec_config_load(config_path.c_str(), scale.c_str(), &handle.cfg);
    if (st != MEC_OK) return report_failure(st);
    st = mec_config_apply_env(handle.cfg, "MECSIM_");
    if (st != MEC_OK) return report_failure(st);

    if (sim->parsed()) {
        st = mec_run_simulate(handle.cfg, seed, out_dir.c_str());
        if (st != MEC_OK) return report_failure(st);
        std::printf("simulate: artifacts in %s\n", out_dir.c_str());
    } else if (train->parsed()) {
        st = mec_run_train(handle.cfg, seed, out_dir.c_str());
        if (st != MEC_OK) return report_failure(st);
        std::printf("train: checkpoints in %s\n", out_dir.c_str());
    } else if (plan->parsed()) {
        double objective_ms = 0.0;
        int iterations = 0, converged = 0;
        st = mec_run_plan(handle.cfg, seed, out_dir.c_str(), method.c_str(), &objective_ms,
                          &iterations, &converged);
        if (st != MEC_OK) return report_failure(st);
        std::printf("plan %s: objective_ms=%.6g iterations=%d converged=%d\n", method.c_str(),
                    objective_ms, iterations, converged);
    } else if (evaluate->parsed()) {
        const std::vector<const char*> ptrs = c_strings(methods);
        char* report = nullptr;
        st = mec_run_evaluate(handle.cfg, seed, out_dir.c_str(), ptrs.empty() ? nullptr : ptrs.data(),
                              static_cast<int>(ptrs.size()), &report);
        if (st != MEC_OK) return report_failure(st);
        std::fputs(report, stdout);
        mec_free(report);
    } else if (sweep->parsed()) {
        const std::vector<const char*> ptrs = c_strings(methods);
        st = mec_run_sweep(handle.cfg, seed, out_dir.c_str(), axis.c_str(),
                           ptrs.empty() ? nullptr : ptrs.data(), static_cast<int>(ptrs.size()));
        if (st != MEC_OK) return report_failure(st);
        std::printf("sweep %s: sweep_%s.csv in %s\n", axis.c_str(), axis.c_str(), out_dir.c_str());
    } else if (selftest->parsed()) {
        char* log = nullptr;
        st = mec_run_selftest(out_dir.c_str(), &log);
        if (st != MEC_OK) return report_failure(st);
        std::fputs(log, stdout);
        mec_free(log);
        std::printf("selftest: all checks passed\n");
    }
    return 0;
}

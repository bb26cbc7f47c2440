#include "mec.h"

#include <cstring>
#include <exception>
#include <new>
#include <string>
#include <vector>

#include "mecsim/config.hpp"
#include "mecsim/csv.hpp"
#include "mecsim/error.hpp"
#include "mecsim/experiment.hpp"

using namespace mecsim;

struct mec_config {
    Config cfg;
};

namespace {

thread_local std::string t_last_error;

mec_status status_of(Errc code) {
    switch (code) {
        case Errc::InvalidArgument: return MEC_ERR_INVALID_ARGUMENT;
        case Errc::Io: return MEC_ERR_IO;
        case Errc::Config: return MEC_ERR_CONFIG;
        case Errc::Validation: return MEC_ERR_VALIDATION;
        case Errc::Runtime: return MEC_ERR_RUNTIME;
    }
    return MEC_ERR_RUNTIME;
}

/// Runs fn inside the exception barrier; nothing may throw past this file.
template <typename Fn>
mec_status guarded(Fn&& fn) {
    try {
        fn();
        t_last_error.clear();
        return MEC_OK;
    } catch (const Error& e) {
        t_last_error = e.what();
        return status_of(e.code());
    } catch (const std::exception& e) {
        t_last_error = e.what();
        return MEC_ERR_RUNTIME;
    } catch (...) {
        t_last_error = "unknown error";
        return MEC_ERR_RUNTIME;
    }
}

mec_status fail_null(const char* what) {
    t_last_error = std::string(what) + " must not be NULL";
    return MEC_ERR_INVALID_ARGUMENT;
}

char* copy_out(const std::string& text) {
    char* out = new char[text.size() + 1];
    std::memcpy(out, text.c_str(), text.size() + 1);
    return out;
}

std::vector<std::string> method_list(const char* const* methods, int n_methods) {
    std::vector<std::string> out;
    if (methods == nullptr || n_methods <= 0) return out;
    out.reserve(static_cast<std::size_t>(n_methods));
    for (int i = 0; i < n_methods; ++i) {
        if (methods[i] == nullptr) fail(Errc::InvalidArgument, "methods list holds a NULL entry");
        out.emplace_back(methods[i]);
    }
    return out;
}

}  // namespace

extern "C" {

const char* mec_version(void) { return "0.1.0"; }

const char* mec_last_error(void) { return t_last_error.c_str(); }

void mec_free(char* text) { delete[] text; }

mec_status mec_config_create(const char* scale, mec_config** out) {
    if (out == nullptr) return fail_null("out");
    *out = nullptr;
    return guarded([&] { *out = new mec_config{Config::defaults(scale ? scale : "desk")}; });
}

mec_status mec_config_load(const char* path, const char* scale, mec_config** out) {
    if (path == nullptr) return fail_null("path");
    if (out == nullptr) return fail_null("out");
    *out = nullptr;
    return guarded([&] { *out = new mec_config{Config::from_file(path, scale ? scale : "desk")}; });
}

mec_status mec_config_set(mec_config* cfg, const char* section, const char* key, const char* value) {
    if (cfg == nullptr) return fail_null("cfg");
    if (section == nullptr) return fail_null("section");
    if (key == nullptr) return fail_null("key");
    if (value == nullptr) return fail_null("value");
    return guarded([&] { cfg->cfg.set(section, key, value); });
}

mec_status mec_config_apply_env(mec_config* cfg, const char* prefix) {
    if (cfg == nullptr) return fail_null("cfg");
    return guarded([&] { cfg->cfg.apply_env(prefix ? prefix : "MECSIM_"); });
}

mec_status mec_config_dump(const mec_config* cfg, char** out_text) {
    if (cfg == nullptr) return fail_null("cfg");
    if (out_text == nullptr) return fail_null("out_text");
    *out_text = nullptr;
    return guarded([&] { *out_text = copy_out(cfg->cfg.dump()); });
}

void mec_config_destroy(mec_config* cfg) { delete cfg; }

mec_status mec_run_simulate(const mec_config* cfg, uint64_t seed, const char* out_dir) {
    if (cfg == nullptr) return fail_null("cfg");
    if (out_dir == nullptr) return fail_null("out_dir");
    return guarded([&] { cmd_simulate(cfg->cfg, seed, out_dir); });
}

mec_status mec_run_train(const mec_config* cfg, uint64_t seed, const char* out_dir) {
    if (cfg == nullptr) return fail_null("cfg");
    if (out_dir == nullptr) return fail_null("out_dir");
    return guarded([&] { cmd_train(cfg->cfg, seed, out_dir); });
}

mec_status mec_run_plan(const mec_config* cfg, uint64_t seed, const char* out_dir, const char* method,
                        double* out_objective_ms, int* out_iterations, int* out_converged) {
    if (cfg == nullptr) return fail_null("cfg");
    if (out_dir == nullptr) return fail_null("out_dir");
    if (method == nullptr) return fail_null("method");
    return guarded([&] {
        const PlanDiagnostics diag = cmd_plan(cfg->cfg, seed, out_dir, method);
        if (out_objective_ms != nullptr) *out_objective_ms = diag.objective_ms;
        if (out_iterations != nullptr) *out_iterations = diag.iterations;
        if (out_converged != nullptr) *out_converged = diag.converged ? 1 : 0;
    });
}

mec_status mec_run_evaluate(const mec_config* cfg, uint64_t seed, const char* out_dir,
                            const char* const* methods, int n_methods, char** out_report) {
    if (cfg == nullptr) return fail_null("cfg");
    if (out_dir == nullptr) return fail_null("out_dir");
    if (out_report != nullptr) *out_report = nullptr;
    return guarded([&] {
        cmd_evaluate(cfg->cfg, seed, out_dir, method_list(methods, n_methods));
        if (out_report != nullptr)
            *out_report = copy_out(read_text_file(std::string(out_dir) + "/report.csv"));
    });
}

mec_status mec_run_sweep(const mec_config* cfg, uint64_t seed, const char* out_dir, const char* axis,
                         const char* const* methods, int n_methods) {
    if (cfg == nullptr) return fail_null("cfg");
    if (out_dir == nullptr) return fail_null("out_dir");
    if (axis == nullptr) return fail_null("axis");
    return guarded([&] { cmd_sweep(cfg->cfg, seed, out_dir, axis, method_list(methods, n_methods)); });
}

mec_status mec_run_selftest(const char* out_dir, char** out_log) {
    if (out_dir == nullptr) return fail_null("out_dir");
    if (out_log != nullptr) *out_log = nullptr;
    return guarded([&] {
        const std::vector<std::string> log = cmd_selftest(out_dir);
        if (out_log != nullptr) {
            std::string joined;
            for (const auto& line : log) {
                joined += line;
                joined += '\n';
            }
            *out_log = copy_out(joined);
        }
    });
}

}  // extern "C"

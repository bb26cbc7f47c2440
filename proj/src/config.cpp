#include "mecsim/config.hpp"

#include <cmath>
#include <cstring>

#include "mecsim/csv.hpp"
#include "mecsim/error.hpp"
#include "mecsim/rng.hpp"
#include "mecsim/text.hpp"

extern char** environ;

namespace mecsim {

namespace {

constexpr KeySpec kCanonical = {nullptr, nullptr, KeyType::Num, nullptr, nullptr, 1.0, false};

const std::vector<KeySpec>& key_registry() {
    // Desk defaults describe a 4-BS, 16-UE network that simulates and trains
    // in seconds. Units follow the key suffix; unsuffixed values are linear
    // ratios or counts.
    static const std::vector<KeySpec> reg = {
        {"network", "n_bs", KeyType::Int, "4", nullptr, 1.0, false},
        {"network", "n_ue", KeyType::Int, "16", nullptr, 1.0, false},
        {"network", "cell_size_m", KeyType::Num, "150", nullptr, 1.0, false},
        // 0 means "equal to n_ue", the loosest capacity the plan constraints allow.
        {"network", "per_bs_capacity", KeyType::Int, "0", nullptr, 1.0, false},
        // 0 means "derive the topology from the run seed"; nonzero pins it.
        {"network", "scenario_seed", KeyType::U64, "0", nullptr, 1.0, false},
        // Explicit positions ("x y;x y;..."), empty = generate from seed.
        {"network", "bs_positions", KeyType::Str, "", nullptr, 1.0, false},
        {"network", "ue_positions", KeyType::Str, "", nullptr, 1.0, false},

        {"radio", "tti_ms", KeyType::Num, "1", nullptr, 1.0, false},
        {"radio", "bandwidth_hz", KeyType::Num, "2e7", nullptr, 1.0, false},
        {"radio", "bandwidth_mhz", KeyType::Num, nullptr, "bandwidth_hz", 1e6, false},
        {"radio", "p_bs_mw", KeyType::Num, "100", nullptr, 1.0, false},
        {"radio", "p_ue_mw", KeyType::Num, "10", nullptr, 1.0, false},
        {"radio", "gain_bs", KeyType::Num, "1", nullptr, 1.0, false},
        {"radio", "gain_ue", KeyType::Num, "1", nullptr, 1.0, false},
        {"radio", "noise_psd_dbm_hz", KeyType::Num, "-174", nullptr, 1.0, false},
        {"radio", "pathloss_exponent", KeyType::Num, "3.5", nullptr, 1.0, false},
        {"radio", "pathloss_ref_db", KeyType::Num, "38", nullptr, 1.0, false},
        {"radio", "max_retx", KeyType::Int, "8", nullptr, 1.0, false},
        // Linear SINR ratio; 1.0 is the 0 dB decode threshold.
        {"radio", "sinr_decode_threshold", KeyType::Num, "1", nullptr, 1.0, false},
        {"radio", "sinr_decode_threshold_db", KeyType::Num, nullptr, "sinr_decode_threshold", 1.0, true},
        // Probability that a UE has a task in a given drop (and so transmits
        // and computes); 1 is the full-buffer worst case.
        {"radio", "activity", KeyType::Num, "1", nullptr, 1.0, false},
        // Half-width of a per-drop uniform busy level around `activity`.
        // A common busy draw couples interference and compute load, which is
        // what makes transmission and compute delay correlate.
        {"radio", "activity_spread", KeyType::Num, "0", nullptr, 1.0, false},
        // Cap on TTIs charged to a single (possibly failed) attempt; keeps the
        // per-attempt cost finite when the drawn rate is near zero.
        {"radio", "max_ttis_per_attempt", KeyType::Int, "100", nullptr, 1.0, false},

        {"compute", "f_max_hz", KeyType::Num, "2e10", nullptr, 1.0, false},
        {"compute", "f_max_ghz", KeyType::Num, nullptr, "f_max_hz", 1e9, false},
        {"compute", "task_cycles_median", KeyType::Num, "5e7", nullptr, 1.0, false},
        {"compute", "task_cycles_sigma", KeyType::Num, "0.5", nullptr, 1.0, false},
        // Per-UE median multiplier drawn log-uniform in [1/sqrt(h), sqrt(h)].
        {"compute", "task_heterogeneity", KeyType::Num, "4", nullptr, 1.0, false},
        {"compute", "uplink_bits_min", KeyType::Num, "1e3", nullptr, 1.0, false},
        {"compute", "uplink_bits_max", KeyType::Num, "1e4", nullptr, 1.0, false},
        {"compute", "downlink_bits_min", KeyType::Num, "1e3", nullptr, 1.0, false},
        {"compute", "downlink_bits_max", KeyType::Num, "1e4", nullptr, 1.0, false},
        // static: each UE computes at its planned frequency;
        // dynamic: a BS re-splits f_max among the UEs active in the drop.
        {"compute", "compute_sharing", KeyType::Str, "dynamic", nullptr, 1.0, false},
        {"compute", "trace_path", KeyType::Str, "", nullptr, 1.0, false},
        // Frequency used to convert latency_ms traces into cycles.
        {"compute", "trace_ref_hz", KeyType::Num, "1e9", nullptr, 1.0, false},

        {"risk", "alpha", KeyType::Num, "0.05", nullptr, 1.0, false},
        {"risk", "beta", KeyType::Num, "0.5", nullptr, 1.0, false},
        {"risk", "tau_th_ms", KeyType::Num, "30", nullptr, 1.0, false},

        {"training", "window", KeyType::Int, "16", nullptr, 1.0, false},
        {"training", "stride", KeyType::Int, "8", nullptr, 1.0, false},
        {"training", "val_fraction", KeyType::Num, "0.2", nullptr, 1.0, false},
        {"training", "epochs", KeyType::Int, "40", nullptr, 1.0, false},
        {"training", "batch_size", KeyType::Int, "32", nullptr, 1.0, false},
        {"training", "learning_rate", KeyType::Num, "0.003", nullptr, 1.0, false},
        {"training", "momentum", KeyType::Num, "0.9", nullptr, 1.0, false},
        {"training", "grad_clip", KeyType::Num, "100", nullptr, 1.0, false},
        {"training", "latent_samples", KeyType::Int, "1", nullptr, 1.0, false},
        {"training", "eval_latent_samples", KeyType::Int, "64", nullptr, 1.0, false},
        {"training", "hidden", KeyType::Int, "32", nullptr, 1.0, false},
        {"training", "conv_channels", KeyType::Int, "8", nullptr, 1.0, false},
        {"training", "kernel", KeyType::Int, "3", nullptr, 1.0, false},
        {"training", "mu_prior", KeyType::Num, "0", nullptr, 1.0, false},
        {"training", "sigma_prior", KeyType::Num, "1", nullptr, 1.0, false},
        {"training", "model_scope", KeyType::Str, "per_bs", nullptr, 1.0, false},

        {"experiment", "scenario_id", KeyType::Str, "desk", nullptr, 1.0, false},
        {"experiment", "n_drops", KeyType::Int, "2000", nullptr, 1.0, false},
        {"experiment", "n_probe_drops", KeyType::Int, "400", nullptr, 1.0, false},
        {"experiment", "n_eval_drops", KeyType::Int, "2000", nullptr, 1.0, false},
        {"experiment", "cost_path", KeyType::Str, "empirical", nullptr, 1.0, false},
        {"experiment", "refine", KeyType::Bool, "true", nullptr, 1.0, false},
        {"experiment", "max_iters", KeyType::Int, "10", nullptr, 1.0, false},
        {"experiment", "load_coupled", KeyType::Bool, "false", nullptr, 1.0, false},
        {"experiment", "n_seeds", KeyType::Int, "5", nullptr, 1.0, false},
        {"experiment", "fmax_sweep_ghz", KeyType::Str, "5,10,20,40,80", nullptr, 1.0, false},
        {"experiment", "ue_sweep", KeyType::Str, "8,12,16,20,24", nullptr, 1.0, false},
        {"experiment", "tau_grid_min_ms", KeyType::Num, "5", nullptr, 1.0, false},
        {"experiment", "tau_grid_max_ms", KeyType::Num, "100", nullptr, 1.0, false},
        {"experiment", "tau_grid_points", KeyType::Int, "20", nullptr, 1.0, false},
    };
    return reg;
}

const KeySpec* find_key(std::string_view section, std::string_view key) {
    for (const auto& ks : key_registry())
        if (section == ks.section && key == ks.key) return &ks;
    return nullptr;
}

std::string key_path(std::string_view section, std::string_view key) {
    return "[" + std::string(section) + "] " + std::string(key);
}

void check_type(const KeySpec& ks, std::string_view value) {
    const std::string what = key_path(ks.section, ks.key);
    switch (ks.type) {
        case KeyType::Num: (void)parse_double(value, what); break;
        case KeyType::Int: (void)parse_int(value, what); break;
        case KeyType::U64: (void)parse_u64(value, what); break;
        case KeyType::Bool: (void)parse_bool(value, what); break;
        case KeyType::Str: break;
    }
}

}  // namespace

const std::vector<KeySpec>& Config::registry() { return key_registry(); }

Config Config::defaults(std::string_view scale) {
    Config c;
    for (const auto& ks : key_registry())
        if (ks.desk_default) c.values_[ks.section][ks.key] = ks.desk_default;
    if (scale == "paper") {
        // Table-1-sized network. The published noise density of -90 dBm/Hz is
        // kept out of the preset: as a spectral density it swamps any received
        // signal and every transmission would fail, so the thermal-noise
        // default stays.
        c.set("network", "n_bs", "10");
        c.set("network", "n_ue", "40");
        c.set("network", "cell_size_m", "250");
        c.set("radio", "bandwidth_hz", "1e8");
        c.set("compute", "f_max_hz", "2e10");
        c.set("experiment", "scenario_id", "paper");
        c.set("experiment", "tau_grid_min_ms", "10");
        c.set("experiment", "tau_grid_max_ms", "100");
    } else if (scale != "desk") {
        fail(Errc::Config, "unknown scale '" + std::string(scale) + "', expected desk or paper");
    }
    return c;
}

void Config::set(std::string_view section, std::string_view key, std::string_view value) {
    const KeySpec* ks = find_key(section, key);
    if (!ks) fail(Errc::Config, "unknown config key " + key_path(section, key));
    std::string stored(trim(value));
    if (ks->alias_of) {
        const std::string what = key_path(section, key);
        double v = parse_double(stored, what);
        v = ks->db_to_linear ? std::pow(10.0, v / 10.0) : v * ks->scale;
        stored = format_double(v);
        key = ks->alias_of;
        ks = find_key(section, key);
    } else {
        check_type(*ks, stored);
    }
    values_[std::string(section)][std::string(key)] = stored;
}

Config Config::from_text(std::string_view text, std::string_view origin, std::string_view scale) {
    Config c = defaults(scale);
    std::string section;
    std::size_t pos = 0, line_no = 0;
    // Tracks which canonical keys this file already wrote, so that a key and
    // its alias (or a duplicate) in the same file is rejected.
    std::map<std::string, std::string> written_by;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        std::string_view line = (nl == std::string_view::npos) ? text.substr(pos) : text.substr(pos, nl - pos);
        pos = (nl == std::string_view::npos) ? text.size() : nl + 1;
        ++line_no;
        const auto where = std::string(origin) + ":" + format_int(static_cast<std::int64_t>(line_no));
        auto t = trim(line);
        if (t.empty() || t.front() == '#' || t.front() == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']') fail(Errc::Config, where + ": malformed section header '" + std::string(t) + "'");
            section = std::string(trim(t.substr(1, t.size() - 2)));
            if (section.empty()) fail(Errc::Config, where + ": empty section name");
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string_view::npos) fail(Errc::Config, where + ": expected key = value, got '" + std::string(t) + "'");
        if (section.empty()) fail(Errc::Config, where + ": key before any [section]");
        const std::string key = std::string(trim(t.substr(0, eq)));
        const std::string value = std::string(trim(t.substr(eq + 1)));
        const KeySpec* ks = find_key(section, key);
        if (!ks) fail(Errc::Config, where + ": unknown config key " + key_path(section, key));
        const std::string canonical = std::string(section) + "." + (ks->alias_of ? ks->alias_of : ks->key);
        auto [it, inserted] = written_by.emplace(canonical, key);
        if (!inserted)
            fail(Errc::Config, where + ": '" + key + "' conflicts with '" + it->second + "' set earlier in this file");
        try {
            c.set(section, key, value);
        } catch (const Error& e) {
            fail(e.code(), where + ": " + e.what());
        }
    }
    return c;
}

Config Config::from_file(const std::string& path, std::string_view scale) {
    return from_text(read_text_file(path), path, scale);
}

void Config::apply_env(const char* prefix) {
    const std::size_t plen = std::strlen(prefix);
    for (char** e = environ; e && *e; ++e) {
        std::string_view entry(*e);
        if (entry.substr(0, plen) != prefix) continue;
        const auto eq = entry.find('=');
        if (eq == std::string_view::npos) continue;
        const std::string_view name = entry.substr(plen, eq - plen);
        const std::string_view value = entry.substr(eq + 1);
        const auto us = name.find('_');
        if (us == std::string_view::npos)
            fail(Errc::Config, "malformed env override " + std::string(prefix) + std::string(name) +
                                   ", expected " + prefix + "SECTION_KEY");
        const std::string section = to_lower(name.substr(0, us));
        const std::string key = to_lower(name.substr(us + 1));
        try {
            set(section, key, value);
        } catch (const Error& e) {
            fail(e.code(), std::string("env override ") + prefix + std::string(name) + ": " + e.what());
        }
    }
}

const std::string& Config::raw(std::string_view section, std::string_view key) const {
    const auto s = values_.find(std::string(section));
    if (s != values_.end()) {
        const auto k = s->second.find(std::string(key));
        if (k != s->second.end()) return k->second;
    }
    fail(Errc::Config, "unknown config key " + key_path(section, key));
}

double Config::num(std::string_view section, std::string_view key) const {
    return parse_double(raw(section, key), key_path(section, key));
}

std::int64_t Config::integer(std::string_view section, std::string_view key) const {
    return parse_int(raw(section, key), key_path(section, key));
}

std::uint64_t Config::u64(std::string_view section, std::string_view key) const {
    return parse_u64(raw(section, key), key_path(section, key));
}

bool Config::boolean(std::string_view section, std::string_view key) const {
    return parse_bool(raw(section, key), key_path(section, key));
}

const std::string& Config::str(std::string_view section, std::string_view key) const {
    return raw(section, key);
}

std::string Config::dump() const {
    std::string out;
    std::string_view current;
    for (const auto& ks : key_registry()) {
        if (ks.alias_of) continue;
        if (current != ks.section) {
            if (!out.empty()) out += '\n';
            out += "[" + std::string(ks.section) + "]\n";
            current = ks.section;
        }
        out += std::string(ks.key) + " = " + raw(ks.section, ks.key) + "\n";
    }
    return out;
}

std::uint64_t Config::hash() const { return fnv1a64(dump()); }

}  // namespace mecsim

#include "mecsim/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "mecsim/csv.hpp"
#include "mecsim/error.hpp"
#include "mecsim/text.hpp"

namespace mecsim {

namespace {

const std::vector<std::string> kDelayHeader = {"scenario_id", "drop_id", "ue_id",
                                               "bs_id",       "tau_t_ttis", "tau_p_ms"};
const std::vector<std::string> kCyclesHeader = {"scenario_id", "drop_id", "ue_id", "cycles"};
const std::vector<std::string> kPlanHeader = {"ue_id", "bs_id", "f_hz"};

// Streams keyed by (ue, bs); record order within a stream is generation
// order, which run_drop emits by ascending drop_id.
std::map<std::pair<int, int>, std::vector<std::size_t>> group_streams(const std::vector<DelaySample>& records) {
    std::map<std::pair<int, int>, std::vector<std::size_t>> streams;
    for (std::size_t i = 0; i < records.size(); ++i) {
        streams[{records[i].ue_id, records[i].bs_id}].push_back(i);
    }
    return streams;
}

InputWindow cut_window(const std::vector<DelaySample>& records, const std::vector<std::size_t>& stream,
                       std::size_t start, int W, double tti_ms, const Normalization& norm) {
    InputWindow w;
    const DelaySample& first = records[stream[start]];
    w.ue_id = first.ue_id;
    w.bs_id = first.bs_id;
    w.first_drop_id = first.drop_id;
    w.W = W;
    w.values.resize(2 * static_cast<std::size_t>(W));
    for (int t = 0; t < W; ++t) {
        const DelaySample& s = records[stream[start + t]];
        w.values[t] = norm.standardize(0, static_cast<double>(s.tau_t_ttis) * tti_ms);
        w.values[W + t] = norm.standardize(1, s.tau_p_ms);
    }
    return w;
}

void append_stream_windows(std::vector<InputWindow>& out, const std::vector<DelaySample>& records,
                           const std::vector<std::size_t>& stream, std::size_t lo, std::size_t hi, int W,
                           int stride, double tti_ms, const Normalization& norm) {
    if (hi < lo + static_cast<std::size_t>(W)) return;
    for (std::size_t start = lo; start + W <= hi; start += stride) {
        out.push_back(cut_window(records, stream, start, W, tti_ms, norm));
    }
}

}  // namespace

DelayDataset DelayDataset::filter_bs(int bs_id) const {
    DelayDataset out;
    out.scenario_id = scenario_id;
    out.normalization = normalization;
    for (const DelaySample& s : records) {
        if (s.bs_id == bs_id) out.records.push_back(s);
    }
    return out;
}

Normalization compute_normalization(const std::vector<DelaySample>& records, double tti_ms) {
    if (records.empty()) fail(Errc::InvalidArgument, "cannot compute normalization of an empty dataset");
    double sum[2] = {0.0, 0.0};
    for (const DelaySample& s : records) {
        sum[0] += static_cast<double>(s.tau_t_ttis) * tti_ms;
        sum[1] += s.tau_p_ms;
    }
    Normalization n;
    const double inv = 1.0 / static_cast<double>(records.size());
    n.mean[0] = sum[0] * inv;
    n.mean[1] = sum[1] * inv;
    double ss[2] = {0.0, 0.0};
    for (const DelaySample& s : records) {
        const double d0 = static_cast<double>(s.tau_t_ttis) * tti_ms - n.mean[0];
        const double d1 = s.tau_p_ms - n.mean[1];
        ss[0] += d0 * d0;
        ss[1] += d1 * d1;
    }
    n.std[0] = std::max(std::sqrt(ss[0] * inv), Normalization::kStdFloor);
    n.std[1] = std::max(std::sqrt(ss[1] * inv), Normalization::kStdFloor);
    return n;
}

std::vector<InputWindow> make_windows(const DelayDataset& d, double tti_ms, int W, int stride) {
    if (W < 4) fail(Errc::InvalidArgument, "window length must be at least 4, got " + format_int(W));
    if (stride < 1) fail(Errc::InvalidArgument, "window stride must be positive, got " + format_int(stride));
    const Normalization norm = d.normalization ? *d.normalization : compute_normalization(d.records, tti_ms);
    std::vector<InputWindow> out;
    for (const auto& [key, stream] : group_streams(d.records)) {
        (void)key;
        append_stream_windows(out, d.records, stream, 0, stream.size(), W, stride, tti_ms, norm);
    }
    if (out.empty()) {
        fail(Errc::Validation, "no stream has " + format_int(W) + " consecutive records; cannot build windows");
    }
    return out;
}

WindowSplit build_window_split(const DelayDataset& d, double tti_ms, int W, int stride, double val_fraction) {
    if (W < 4) fail(Errc::InvalidArgument, "window length must be at least 4, got " + format_int(W));
    if (stride < 1) fail(Errc::InvalidArgument, "window stride must be positive, got " + format_int(stride));
    if (!(val_fraction >= 0.0 && val_fraction < 1.0)) {
        fail(Errc::InvalidArgument, "val_fraction must be in [0, 1), got " + format_double(val_fraction));
    }
    const auto streams = group_streams(d.records);

    // Train-only statistics: collect the leading (1 - val_fraction) of every
    // stream, then window each side of the cut separately.
    std::vector<DelaySample> train_records;
    for (const auto& [key, stream] : streams) {
        (void)key;
        const std::size_t cut = static_cast<std::size_t>(
            std::floor(static_cast<double>(stream.size()) * (1.0 - val_fraction)));
        for (std::size_t i = 0; i < cut; ++i) train_records.push_back(d.records[stream[i]]);
    }
    if (train_records.empty()) fail(Errc::Validation, "training split is empty; dataset too small");

    WindowSplit split;
    split.norm = compute_normalization(train_records, tti_ms);
    for (const auto& [key, stream] : streams) {
        (void)key;
        const std::size_t cut = static_cast<std::size_t>(
            std::floor(static_cast<double>(stream.size()) * (1.0 - val_fraction)));
        append_stream_windows(split.train, d.records, stream, 0, cut, W, stride, tti_ms, split.norm);
        append_stream_windows(split.val, d.records, stream, cut, stream.size(), W, stride, tti_ms, split.norm);
    }
    if (split.train.empty()) {
        fail(Errc::Validation, "no training stream has " + format_int(W) + " consecutive records");
    }
    return split;
}

GeneratedData generate_dataset(const ScenarioBundle& bundle, const AllocationPlan& plan, std::int64_t n_drops,
                               std::uint64_t seed) {
    if (n_drops < 1) fail(Errc::InvalidArgument, "n_drops must be positive, got " + format_int(n_drops));
    ServiceSim sim(bundle, plan);
    GeneratedData out;
    out.dataset.scenario_id = bundle.scenario_id;
    out.ue_cycles.assign(static_cast<std::size_t>(bundle.net.n_ue), {});
    for (auto& bank : out.ue_cycles) bank.reserve(static_cast<std::size_t>(n_drops));
    for (std::int64_t drop = 0; drop < n_drops; ++drop) {
        DropResult r = sim.run_drop(seed, drop);
        out.dropped += r.dropped;
        for (const DelaySample& s : r.samples) out.dataset.records.push_back(s);
        for (int m = 0; m < bundle.net.n_ue; ++m) out.ue_cycles[static_cast<std::size_t>(m)].push_back(r.cycles[m]);
    }
    return out;
}

std::vector<double> ingest_compute_trace(const std::string& path, double trace_ref_hz) {
    CsvTable t = read_csv(path);
    if (t.header.size() != 2 || t.header[0] != "task_id" ||
        (t.header[1] != "cycles" && t.header[1] != "latency_ms")) {
        fail(Errc::Validation,
             path + ": compute trace header must be task_id,cycles or task_id,latency_ms");
    }
    const bool is_latency = t.header[1] == "latency_ms";
    if (is_latency && !(trace_ref_hz > 0.0)) {
        fail(Errc::InvalidArgument, "trace_ref_hz must be positive to convert latency_ms traces");
    }
    std::vector<double> cycles;
    cycles.reserve(t.rows.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const std::string where = path + ":" + format_u64(i + 2);
        const double v = parse_double(t.rows[i][1], where + " " + t.header[1]);
        if (!(v > 0.0)) fail(Errc::Validation, where + ": " + t.header[1] + " must be positive");
        cycles.push_back(is_latency ? v * 1e-3 * trace_ref_hz : v);
    }
    if (cycles.empty()) fail(Errc::Validation, path + ": compute trace has no rows");
    return cycles;
}

std::string delay_csv(const DelayDataset& d) {
    CsvWriter w(kDelayHeader);
    for (const DelaySample& s : d.records) {
        w.row({d.scenario_id, format_int(s.drop_id), format_int(s.ue_id), format_int(s.bs_id),
               format_int(s.tau_t_ttis), format_double(s.tau_p_ms)});
    }
    return w.str();
}

DelayDataset parse_delay_csv(const std::string& content, std::string_view origin) {
    CsvTable t = parse_csv(content, origin);
    require_header(t, kDelayHeader, origin);
    DelayDataset d;
    d.records.reserve(t.rows.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const std::string where = std::string(origin) + ":" + format_u64(i + 2);
        const auto& r = t.rows[i];
        if (d.records.empty()) {
            d.scenario_id = r[0];
        } else if (r[0] != d.scenario_id) {
            fail(Errc::Validation, where + ": mixed scenario_id values (" + d.scenario_id + " vs " + r[0] + ")");
        }
        DelaySample s;
        s.drop_id = parse_int(r[1], where + " drop_id");
        s.ue_id = static_cast<int>(parse_int(r[2], where + " ue_id"));
        s.bs_id = static_cast<int>(parse_int(r[3], where + " bs_id"));
        s.tau_t_ttis = parse_int(r[4], where + " tau_t_ttis");
        s.tau_p_ms = parse_double(r[5], where + " tau_p_ms");
        if (s.tau_t_ttis < 0) fail(Errc::Validation, where + ": tau_t_ttis must be non-negative");
        if (!(s.tau_p_ms >= 0.0)) fail(Errc::Validation, where + ": tau_p_ms must be non-negative");
        d.records.push_back(s);
    }
    return d;
}

DelayDataset read_delay_csv(const std::string& path) { return parse_delay_csv(read_text_file(path), path); }

std::string cycles_csv(const std::string& scenario_id, const std::vector<std::vector<double>>& ue_cycles) {
    CsvWriter w(kCyclesHeader);
    if (ue_cycles.empty()) return w.str();
    const std::size_t n_drops = ue_cycles[0].size();
    for (const auto& bank : ue_cycles) {
        if (bank.size() != n_drops) fail(Errc::InvalidArgument, "ragged ue_cycles banks");
    }
    for (std::size_t drop = 0; drop < n_drops; ++drop) {
        for (std::size_t m = 0; m < ue_cycles.size(); ++m) {
            w.row({scenario_id, format_u64(drop), format_u64(m), format_double(ue_cycles[m][drop])});
        }
    }
    return w.str();
}

std::vector<std::vector<double>> read_cycles_csv(const std::string& path) {
    CsvTable t = read_csv(path);
    require_header(t, kCyclesHeader, path);
    if (t.rows.empty()) fail(Errc::Validation, path + ": cycle bank has no rows");
    int n_ue = 0;
    for (const auto& r : t.rows) n_ue = std::max(n_ue, static_cast<int>(parse_int(r[2], path + " ue_id")) + 1);
    std::vector<std::vector<double>> banks(static_cast<std::size_t>(n_ue));
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const std::string where = path + ":" + format_u64(i + 2);
        const auto& r = t.rows[i];
        const int m = static_cast<int>(parse_int(r[2], where + " ue_id"));
        const double c = parse_double(r[3], where + " cycles");
        if (!(c > 0.0)) fail(Errc::Validation, where + ": cycles must be positive");
        banks[static_cast<std::size_t>(m)].push_back(c);
    }
    for (std::size_t m = 0; m < banks.size(); ++m) {
        if (banks[m].empty()) fail(Errc::Validation, path + ": ue " + format_u64(m) + " has no cycle draws");
    }
    return banks;
}

std::string plan_csv(const AllocationPlan& plan) {
    CsvWriter w(kPlanHeader);
    for (int m = 0; m < plan.n_ue; ++m) {
        const int n = plan.bs_of(m);
        w.row({format_int(m), format_int(n), format_double(n >= 0 ? plan.freq(m, n) : 0.0)});
    }
    return w.str();
}

AllocationPlan parse_plan_csv(const std::string& content, std::string_view origin, int n_ue, int n_bs) {
    CsvTable t = parse_csv(content, origin);
    require_header(t, kPlanHeader, origin);
    AllocationPlan plan = AllocationPlan::empty(n_ue, n_bs);
    std::vector<bool> seen(static_cast<std::size_t>(n_ue), false);
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const std::string where = std::string(origin) + ":" + format_u64(i + 2);
        const auto& r = t.rows[i];
        const int m = static_cast<int>(parse_int(r[0], where + " ue_id"));
        if (m < 0 || m >= n_ue) fail(Errc::Validation, where + ": ue_id " + format_int(m) + " out of range");
        if (seen[static_cast<std::size_t>(m)]) fail(Errc::Validation, where + ": duplicate ue_id " + format_int(m));
        seen[static_cast<std::size_t>(m)] = true;
        const int n = static_cast<int>(parse_int(r[1], where + " bs_id"));
        if (n < -1 || n >= n_bs) fail(Errc::Validation, where + ": bs_id " + format_int(n) + " out of range");
        const double f = parse_double(r[2], where + " f_hz");
        if (n >= 0) {
            if (!(f > 0.0)) fail(Errc::Validation, where + ": assigned UE needs f_hz > 0");
            plan.assign(m, n, f);
        }
    }
    for (int m = 0; m < n_ue; ++m) {
        if (!seen[static_cast<std::size_t>(m)]) {
            fail(Errc::Validation, std::string(origin) + ": missing row for ue_id " + format_int(m));
        }
    }
    return plan;
}

AllocationPlan read_plan_csv(const std::string& path, int n_ue, int n_bs) {
    return parse_plan_csv(read_text_file(path), path, n_ue, n_bs);
}

}  // namespace mecsim

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mecsim/delay_sim.hpp"
#include "mecsim/scenario.hpp"

namespace mecsim {

/// Per-channel standardization statistics. Channel 0 is tau_t * T in ms,
/// channel 1 is tau_p in ms. std is floored so constant channels standardize
/// to zeros instead of NaN.
struct Normalization {
    double mean[2] = {0.0, 0.0};
    double std[2] = {1.0, 1.0};

    static constexpr double kStdFloor = 1e-6;

    double standardize(int channel, double value_ms) const {
        return (value_ms - mean[channel]) / std[channel];
    }
    double destandardize(int channel, double value_std) const {
        return mean[channel] + std[channel] * value_std;
    }
};

struct DelayDataset {
    std::vector<DelaySample> records;
    std::string scenario_id;
    std::optional<Normalization> normalization;

    DelayDataset filter_bs(int bs_id) const;
};

/// One encoder input: a 2 x W slice of a single (UE, BS) stream,
/// standardized. values is channel-major: values[c * W + t].
struct InputWindow {
    int ue_id = 0;
    int bs_id = 0;
    std::int64_t first_drop_id = 0;
    int W = 0;
    std::vector<double> values;

    double at(int channel, int t) const { return values[static_cast<std::size_t>(channel) * W + t]; }
};

Normalization compute_normalization(const std::vector<DelaySample>& records, double tti_ms);

/// Sliding windows over each chronologically ordered (UE, BS) stream.
/// Standardizes with d.normalization when present, otherwise with stats over
/// all records. Throws when no stream is long enough for a single window.
std::vector<InputWindow> make_windows(const DelayDataset& d, double tti_ms, int W, int stride);

struct WindowSplit {
    std::vector<InputWindow> train;
    std::vector<InputWindow> val;
    Normalization norm;  // computed from the train part only
};

/// Chronological split per stream: the first (1 - val_fraction) of each
/// stream's records train, the rest validate; no window crosses the boundary.
WindowSplit build_window_split(const DelayDataset& d, double tti_ms, int W, int stride, double val_fraction);

struct GeneratedData {
    DelayDataset dataset;
    /// cycle draws per drop for every UE (planner's compute-cost bank),
    /// ue_cycles[m] has n_drops entries.
    std::vector<std::vector<double>> ue_cycles;
    std::int64_t dropped = 0;
};

/// n_drops Monte-Carlo drops under the given plan. Deterministic in seed;
/// completed services only (drops are counted separately).
GeneratedData generate_dataset(const ScenarioBundle& bundle, const AllocationPlan& plan, std::int64_t n_drops,
                               std::uint64_t seed);

/// Compute trace rows: either task_id,cycles or task_id,latency_ms. Latency
/// entries convert through trace_ref_hz. Returns cycles.
std::vector<double> ingest_compute_trace(const std::string& path, double trace_ref_hz);

std::string delay_csv(const DelayDataset& d);
DelayDataset parse_delay_csv(const std::string& content, std::string_view origin);
DelayDataset read_delay_csv(const std::string& path);

std::string cycles_csv(const std::string& scenario_id, const std::vector<std::vector<double>>& ue_cycles);
/// Returns ue_cycles[m] banks; UE count inferred from the rows.
std::vector<std::vector<double>> read_cycles_csv(const std::string& path);

std::string plan_csv(const AllocationPlan& plan);
AllocationPlan parse_plan_csv(const std::string& content, std::string_view origin, int n_ue, int n_bs);
AllocationPlan read_plan_csv(const std::string& path, int n_ue, int n_bs);

}  // namespace mecsim

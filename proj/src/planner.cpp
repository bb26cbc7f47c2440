#include "mecsim/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mecsim/error.hpp"
#include "mecsim/risk.hpp"
#include "mecsim/text.hpp"

namespace mecsim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMsPerCyclePerHz = 1e3;  // (cycles / Hz) is seconds

std::size_t pair_index(int m, int n, int n_bs) { return static_cast<std::size_t>(m) * n_bs + n; }

std::string pair_list(const std::vector<std::pair<int, int>>& pairs) {
    std::string out;
    for (const auto& [m, n] : pairs) {
        if (!out.empty()) out += ", ";
        out += "(" + format_int(m) + "," + format_int(n) + ")";
    }
    return out;
}

void check_risk(const RiskSpec& risk) {
    if (!(risk.alpha > 0.0 && risk.alpha < 1.0))
        fail(Errc::InvalidArgument, "alpha must lie in (0,1), got " + format_double(risk.alpha));
    if (!(risk.beta > 0.0 && risk.beta < 1.0))
        fail(Errc::InvalidArgument, "beta must lie in (0,1), got " + format_double(risk.beta));
}

double mean_of(const std::vector<double>& xs) {
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double bank_entry(const std::vector<double>& samples, const RiskSpec& risk, CostKind kind) {
    switch (kind) {
        case CostKind::Cvar:
            return risk.beta * cvar_empirical(samples, risk.alpha);
        case CostKind::Mean:
            return mean_of(samples);
        case CostKind::MeanCvarBlend:
            return mean_of(samples) + risk.beta * cvar_empirical(samples, risk.alpha);
    }
    fail(Errc::InvalidArgument, "unknown cost kind");
}

double law_entry(double mean, double variance, const RiskSpec& risk, CostKind kind) {
    switch (kind) {
        case CostKind::Cvar:
            return risk.beta * cvar_gaussian(mean, variance, risk.alpha);
        case CostKind::Mean:
            return mean;
        case CostKind::MeanCvarBlend:
            return mean + risk.beta * cvar_gaussian(mean, variance, risk.alpha);
    }
    fail(Errc::InvalidArgument, "unknown cost kind");
}

void check_table(const CostTable& t, const NetworkScenario& net) {
    if (t.n_ue != net.n_ue || t.n_bs != net.n_bs) {
        fail(Errc::InvalidArgument, "cost table is " + format_int(t.n_ue) + "x" + format_int(t.n_bs) +
                                        " but the scenario has " + format_int(net.n_ue) + " UEs and " +
                                        format_int(net.n_bs) + " BSs");
    }
    for (int m = 0; m < t.n_ue; ++m) {
        if (!(t.compute_coeff[static_cast<std::size_t>(m)] > 0.0)) {
            fail(Errc::Validation, "compute coefficient for UE " + format_int(m) +
                                       " must be positive, got " +
                                       format_double(t.compute_coeff[static_cast<std::size_t>(m)]));
        }
    }
}

/// Objective of a fully served assignment when frequencies follow the
/// equalizing split: every UE at BS n pays the same compute term.
double assignment_objective(const CostTable& t, const std::vector<int>& bs_of, double f_max_hz) {
    std::vector<double> load(static_cast<std::size_t>(t.n_bs), 0.0);
    for (int m = 0; m < t.n_ue; ++m)
        load[static_cast<std::size_t>(bs_of[static_cast<std::size_t>(m)])] +=
            t.compute_coeff[static_cast<std::size_t>(m)];
    double worst = 0.0;
    for (int m = 0; m < t.n_ue; ++m) {
        const int n = bs_of[static_cast<std::size_t>(m)];
        const double c = t.trans(m, n) + load[static_cast<std::size_t>(n)] * kMsPerCyclePerHz / f_max_hz;
        worst = std::max(worst, c);
    }
    return worst;
}

std::vector<int> capacity_vector(const NetworkScenario& net) {
    return std::vector<int>(static_cast<std::size_t>(net.n_bs), net.capacity());
}

/// Best-improvement local search over single moves and pairwise swaps on the
/// equalized surrogate. Capacity and feasibility respecting; terminates
/// because every accepted step strictly lowers the objective.
void refine_assignment(std::vector<int>& bs_of, const CostTable& t, const std::vector<int>& cap,
                       double f_max_hz) {
    const int M = t.n_ue, N = t.n_bs;
    std::vector<int> count(static_cast<std::size_t>(N), 0);
    for (int m = 0; m < M; ++m) ++count[static_cast<std::size_t>(bs_of[static_cast<std::size_t>(m)])];
    double cur = assignment_objective(t, bs_of, f_max_hz);
    for (int pass = 0; pass < 512; ++pass) {
        double best = cur;
        int move_m = -1, move_n = -1, swap_a = -1, swap_b = -1;
        const double margin = 1e-12 * std::max(1.0, std::fabs(cur));
        for (int m = 0; m < M; ++m) {
            const int old = bs_of[static_cast<std::size_t>(m)];
            for (int n = 0; n < N; ++n) {
                if (n == old || !t.feasible(m, n) || count[static_cast<std::size_t>(n)] >= cap[static_cast<std::size_t>(n)])
                    continue;
                bs_of[static_cast<std::size_t>(m)] = n;
                const double obj = assignment_objective(t, bs_of, f_max_hz);
                bs_of[static_cast<std::size_t>(m)] = old;
                if (obj < best - margin) {
                    best = obj;
                    move_m = m;
                    move_n = n;
                    swap_a = -1;
                }
            }
        }
        for (int a = 0; a < M; ++a) {
            for (int b = a + 1; b < M; ++b) {
                const int na = bs_of[static_cast<std::size_t>(a)], nb = bs_of[static_cast<std::size_t>(b)];
                if (na == nb || !t.feasible(a, nb) || !t.feasible(b, na)) continue;
                bs_of[static_cast<std::size_t>(a)] = nb;
                bs_of[static_cast<std::size_t>(b)] = na;
                const double obj = assignment_objective(t, bs_of, f_max_hz);
                bs_of[static_cast<std::size_t>(a)] = na;
                bs_of[static_cast<std::size_t>(b)] = nb;
                if (obj < best - margin) {
                    best = obj;
                    swap_a = a;
                    swap_b = b;
                    move_m = -1;
                }
            }
        }
        if (move_m >= 0) {
            --count[static_cast<std::size_t>(bs_of[static_cast<std::size_t>(move_m)])];
            bs_of[static_cast<std::size_t>(move_m)] = move_n;
            ++count[static_cast<std::size_t>(move_n)];
            cur = best;
        } else if (swap_a >= 0) {
            std::swap(bs_of[static_cast<std::size_t>(swap_a)], bs_of[static_cast<std::size_t>(swap_b)]);
            cur = best;
        } else {
            break;
        }
    }
}

/// Load-aware greedy start: heaviest compute first, each UE to the BS where
/// its marginal surrogate cost is lowest. May dead-end under tight
/// capacities; the caller falls back to the bottleneck start then.
std::vector<int> greedy_start(const CostTable& t, const std::vector<int>& cap, double f_max_hz) {
    const int M = t.n_ue, N = t.n_bs;
    std::vector<int> order(static_cast<std::size_t>(M));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return t.compute_coeff[static_cast<std::size_t>(a)] > t.compute_coeff[static_cast<std::size_t>(b)];
    });
    std::vector<int> bs_of(static_cast<std::size_t>(M), -1);
    std::vector<int> count(static_cast<std::size_t>(N), 0);
    std::vector<double> load(static_cast<std::size_t>(N), 0.0);
    for (const int m : order) {
        int pick = -1;
        double pick_cost = kInf;
        for (int n = 0; n < N; ++n) {
            if (!t.feasible(m, n) || count[static_cast<std::size_t>(n)] >= cap[static_cast<std::size_t>(n)])
                continue;
            const double c = t.trans(m, n) +
                             (load[static_cast<std::size_t>(n)] + t.compute_coeff[static_cast<std::size_t>(m)]) *
                                 kMsPerCyclePerHz / f_max_hz;
            if (c < pick_cost) {
                pick_cost = c;
                pick = n;
            }
        }
        if (pick < 0) return {};
        bs_of[static_cast<std::size_t>(m)] = pick;
        ++count[static_cast<std::size_t>(pick)];
        load[static_cast<std::size_t>(pick)] += t.compute_coeff[static_cast<std::size_t>(m)];
    }
    return bs_of;
}

struct StaticSolve {
    std::vector<int> bs_of;
    double objective = 0.0;
};

StaticSolve solve_static(const CostTable& t, const NetworkScenario& net) {
    const std::vector<int> cap = capacity_vector(net);
    StaticSolve best;
    best.bs_of = assign_tasks(t, cap).bs_of;
    refine_assignment(best.bs_of, t, cap, net.f_max_hz);
    best.objective = assignment_objective(t, best.bs_of, net.f_max_hz);

    std::vector<int> alt = greedy_start(t, cap, net.f_max_hz);
    if (!alt.empty()) {
        refine_assignment(alt, t, cap, net.f_max_hz);
        const double obj = assignment_objective(t, alt, net.f_max_hz);
        if (obj < best.objective) {
            best.bs_of = std::move(alt);
            best.objective = obj;
        }
    }
    return best;
}

}  // namespace

bool CostTable::feasible(int m, int n) const { return std::isfinite(trans(m, n)); }

ProbeData collect_probes(const ServiceSim& sim, std::int64_t n_probes, std::uint64_t seed) {
    if (n_probes < 1) fail(Errc::InvalidArgument, "need at least one probe per pair");
    const NetworkScenario& net = sim.bundle().net;
    ProbeData data;
    data.n_ue = net.n_ue;
    data.n_bs = net.n_bs;
    data.n_probes = n_probes;
    data.probes.scenario_id = sim.bundle().scenario_id;
    data.ue_cycles.resize(static_cast<std::size_t>(net.n_ue));
    for (std::int64_t drop = 0; drop < n_probes; ++drop) {
        for (int m = 0; m < net.n_ue; ++m) {
            for (int n = 0; n < net.n_bs; ++n) {
                const ServiceSim::ProbeResult r = sim.probe_pair(seed, drop, m, n);
                data.ue_cycles[static_cast<std::size_t>(m)].push_back(r.cycles);
                if (!r.completed) {
                    ++data.dropped;
                    continue;
                }
                DelaySample s;
                s.ue_id = m;
                s.bs_id = n;
                s.drop_id = drop;
                s.tau_t_ttis = r.tau_t_ttis;
                s.tau_p_ms = r.tau_p_ms;
                data.probes.records.push_back(s);
            }
        }
    }
    return data;
}

PairSampleBank bank_from_probes(const ProbeData& data, double tti_ms) {
    if (data.n_ue < 1 || data.n_bs < 1) fail(Errc::InvalidArgument, "probe data has empty dimensions");
    if (!(tti_ms > 0.0)) fail(Errc::InvalidArgument, "tti_ms must be positive");
    PairSampleBank bank;
    bank.n_ue = data.n_ue;
    bank.n_bs = data.n_bs;
    bank.trans_ms.resize(static_cast<std::size_t>(data.n_ue) * data.n_bs);
    bank.attempts.assign(static_cast<std::size_t>(data.n_ue) * data.n_bs, data.n_probes);
    bank.cycles = data.ue_cycles;
    for (const DelaySample& s : data.probes.records) {
        if (s.ue_id < 0 || s.ue_id >= data.n_ue || s.bs_id < 0 || s.bs_id >= data.n_bs)
            fail(Errc::Validation, "probe record pair (" + format_int(s.ue_id) + "," + format_int(s.bs_id) +
                                       ") outside the scenario dimensions");
        bank.trans_ms[pair_index(s.ue_id, s.bs_id, data.n_bs)].push_back(s.tau_t_ttis * tti_ms);
    }
    return bank;
}

PairSampleBank bank_from_dataset(const DelayDataset& d, const std::vector<std::vector<double>>& ue_cycles,
                                 double tti_ms, int n_ue, int n_bs) {
    ProbeData data;
    data.probes = d;
    data.ue_cycles = ue_cycles;
    data.n_ue = n_ue;
    data.n_bs = n_bs;
    data.n_probes = 0;
    PairSampleBank bank = bank_from_probes(data, tti_ms);
    // Attempts are unknown for external data: observed rows are all there is.
    for (std::size_t i = 0; i < bank.attempts.size(); ++i)
        bank.attempts[i] = static_cast<std::int64_t>(bank.trans_ms[i].size());
    return bank;
}

CostTable build_cost_table(const PairSampleBank& bank, const RiskSpec& risk, CostKind kind) {
    check_risk(risk);
    if (bank.n_ue < 1 || bank.n_bs < 1) fail(Errc::InvalidArgument, "sample bank has empty dimensions");
    CostTable t;
    t.n_ue = bank.n_ue;
    t.n_bs = bank.n_bs;
    t.trans_ms.assign(static_cast<std::size_t>(bank.n_ue) * bank.n_bs, kInf);
    t.compute_coeff.resize(static_cast<std::size_t>(bank.n_ue));

    std::vector<std::pair<int, int>> missing;
    for (int m = 0; m < bank.n_ue; ++m) {
        for (int n = 0; n < bank.n_bs; ++n) {
            const std::size_t i = pair_index(m, n, bank.n_bs);
            if (bank.attempts[i] < 1) {
                missing.emplace_back(m, n);
                continue;
            }
            // attempted but never completed: infeasible pair, +inf stands
            if (!bank.trans_ms[i].empty()) t.trans_ms[i] = bank_entry(bank.trans_ms[i], risk, kind);
        }
    }
    if (!missing.empty())
        fail(Errc::Validation, "cost table is missing samples for pairs: " + pair_list(missing));
    for (int m = 0; m < bank.n_ue; ++m) {
        if (bank.cycles[static_cast<std::size_t>(m)].empty())
            fail(Errc::Validation, "no cycle samples for UE " + format_int(m));
        t.compute_coeff[static_cast<std::size_t>(m)] =
            bank_entry(bank.cycles[static_cast<std::size_t>(m)], risk, kind);
    }
    return t;
}

CostTable build_cost_table_gaussian(const std::vector<CorrelatedVae*>& model_by_bs,
                                    const ProbeData& data, const RiskSpec& risk, CostKind kind,
                                    double tti_ms) {
    check_risk(risk);
    if (data.n_ue < 1 || data.n_bs < 1) fail(Errc::InvalidArgument, "probe data has empty dimensions");
    if (static_cast<int>(model_by_bs.size()) != data.n_bs)
        fail(Errc::InvalidArgument, "need one model per BS, got " + format_int(static_cast<int>(model_by_bs.size())) +
                                        " for " + format_int(data.n_bs) + " BSs");
    for (int n = 0; n < data.n_bs; ++n) {
        if (model_by_bs[static_cast<std::size_t>(n)] == nullptr)
            fail(Errc::InvalidArgument, "model for BS " + format_int(n) + " is null");
        if (!model_by_bs[static_cast<std::size_t>(n)]->trained())
            fail(Errc::Validation, "model for BS " + format_int(n) + " is not trained");
    }
    if (!(tti_ms > 0.0)) fail(Errc::InvalidArgument, "tti_ms must be positive");

    // Group each pair's completed probes, preserving drop order.
    std::vector<std::vector<const DelaySample*>> streams(static_cast<std::size_t>(data.n_ue) * data.n_bs);
    for (const DelaySample& s : data.probes.records) {
        if (s.ue_id < 0 || s.ue_id >= data.n_ue || s.bs_id < 0 || s.bs_id >= data.n_bs)
            fail(Errc::Validation, "probe record pair (" + format_int(s.ue_id) + "," + format_int(s.bs_id) +
                                       ") outside the scenario dimensions");
        streams[pair_index(s.ue_id, s.bs_id, data.n_bs)].push_back(&s);
    }

    CostTable t;
    t.n_ue = data.n_ue;
    t.n_bs = data.n_bs;
    t.trans_ms.assign(static_cast<std::size_t>(data.n_ue) * data.n_bs, kInf);
    t.compute_coeff.resize(static_cast<std::size_t>(data.n_ue));

    for (int n = 0; n < data.n_bs; ++n) {
        CorrelatedVae& model = *model_by_bs[static_cast<std::size_t>(n)];
        const int W = model.settings().W;
        if (data.n_probes < W)
            fail(Errc::InvalidArgument, "need at least " + format_int(W) + " probes per pair for the model path, got " +
                                            format_int(data.n_probes));
        const Normalization& norm = model.norm();
        for (int m = 0; m < data.n_ue; ++m) {
            const auto& stream = streams[pair_index(m, n, data.n_bs)];
            const int full = static_cast<int>(stream.size()) / W;
            if (full == 0) continue;  // too few completions: pair stays infeasible
            // Pool disjoint windows: total variance = mean within-window
            // variance + variance of window means.
            double mean_acc = 0.0, var_acc = 0.0, mean_sq = 0.0;
            for (int k = 0; k < full; ++k) {
                InputWindow w;
                w.ue_id = m;
                w.bs_id = n;
                w.W = W;
                w.first_drop_id = stream[static_cast<std::size_t>(k) * W]->drop_id;
                w.values.resize(2 * static_cast<std::size_t>(W));
                for (int i = 0; i < W; ++i) {
                    const DelaySample& s = *stream[static_cast<std::size_t>(k) * W + i];
                    w.values[static_cast<std::size_t>(i)] = norm.standardize(0, s.tau_t_ttis * tti_ms);
                    w.values[static_cast<std::size_t>(W + i)] = norm.standardize(1, s.tau_p_ms);
                }
                const LatentPosterior p = model.posterior(w);
                const double mu = norm.mean[0] + norm.std[0] * p.mu[0];
                const double var = norm.std[0] * norm.std[0] * p.s;
                mean_acc += mu;
                mean_sq += mu * mu;
                var_acc += var;
            }
            const double mean = mean_acc / full;
            const double variance = var_acc / full + std::max(0.0, mean_sq / full - mean * mean);
            t.trans_ms[pair_index(m, n, data.n_bs)] = law_entry(mean, variance, risk, kind);
        }
    }
    for (int m = 0; m < data.n_ue; ++m) {
        if (data.ue_cycles[static_cast<std::size_t>(m)].empty())
            fail(Errc::Validation, "no cycle samples for UE " + format_int(m));
        t.compute_coeff[static_cast<std::size_t>(m)] =
            bank_entry(data.ue_cycles[static_cast<std::size_t>(m)], risk, kind);
    }
    return t;
}

double pair_cost_ms(const CostTable& t, int m, int n, double f_hz) {
    if (!(f_hz > 0.0)) fail(Errc::InvalidArgument, "compute frequency must be positive");
    return t.trans(m, n) + t.compute_coeff[static_cast<std::size_t>(m)] * kMsPerCyclePerHz / f_hz;
}

double plan_objective_ms(const CostTable& t, const AllocationPlan& plan) {
    if (plan.n_ue != t.n_ue || plan.n_bs != t.n_bs)
        fail(Errc::InvalidArgument, "plan dimensions do not match the cost table");
    double worst = 0.0;
    for (int m = 0; m < t.n_ue; ++m) {
        const int n = plan.bs_of(m);
        if (n < 0) return kInf;
        worst = std::max(worst, pair_cost_ms(t, m, n, plan.freq(m, n)));
    }
    return worst;
}

AssignmentResult assign_tasks(const CostTable& costs, const std::vector<int>& capacity) {
    const int M = costs.n_ue, N = costs.n_bs;
    if (M < 1 || N < 1) fail(Errc::InvalidArgument, "cost table has empty dimensions");
    if (static_cast<int>(capacity.size()) != N)
        fail(Errc::InvalidArgument, "capacity list needs one entry per BS");
    std::int64_t total = 0;
    for (const int c : capacity) {
        if (c < 0) fail(Errc::InvalidArgument, "negative BS capacity");
        total += c;
    }
    if (total < M)
        fail(Errc::Validation, "BS capacities admit only " + format_int(total) + " of " + format_int(M) + " UEs");
    std::vector<double> vals;
    for (int m = 0; m < M; ++m) {
        bool any = false;
        for (int n = 0; n < N; ++n) {
            if (costs.feasible(m, n)) {
                any = true;
                vals.push_back(costs.trans(m, n));
            }
        }
        if (!any) fail(Errc::Validation, "UE " + format_int(m) + " has no feasible BS");
    }
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());

    // Slot expansion: BS n appears capacity[n] times on the right side.
    std::vector<int> slot_bs;
    for (int n = 0; n < N; ++n)
        for (int c = 0; c < capacity[static_cast<std::size_t>(n)]; ++c) slot_bs.push_back(n);
    const int S = static_cast<int>(slot_bs.size());

    std::vector<int> slot_ue(static_cast<std::size_t>(S));
    std::vector<char> visited(static_cast<std::size_t>(S));
    auto augment = [&](auto&& self, int m, double limit) -> bool {
        for (int s = 0; s < S; ++s) {
            if (visited[static_cast<std::size_t>(s)]) continue;
            const int n = slot_bs[static_cast<std::size_t>(s)];
            if (!costs.feasible(m, n) || costs.trans(m, n) > limit) continue;
            visited[static_cast<std::size_t>(s)] = 1;
            if (slot_ue[static_cast<std::size_t>(s)] < 0 || self(self, slot_ue[static_cast<std::size_t>(s)], limit)) {
                slot_ue[static_cast<std::size_t>(s)] = m;
                return true;
            }
        }
        return false;
    };
    auto feasible_at = [&](double limit) -> bool {
        std::fill(slot_ue.begin(), slot_ue.end(), -1);
        for (int m = 0; m < M; ++m) {
            std::fill(visited.begin(), visited.end(), 0);
            if (!augment(augment, m, limit)) return false;
        }
        return true;
    };

    if (!feasible_at(vals.back()))
        fail(Errc::Validation, "no feasible assignment under the capacity limits");
    std::size_t lo = 0, hi = vals.size() - 1;
    while (lo < hi) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (feasible_at(vals[mid]))
            hi = mid;
        else
            lo = mid + 1;
    }
    feasible_at(vals[lo]);

    AssignmentResult res;
    res.bottleneck = vals[lo];
    res.bs_of.assign(static_cast<std::size_t>(M), -1);
    for (int s = 0; s < S; ++s) {
        if (slot_ue[static_cast<std::size_t>(s)] >= 0)
            res.bs_of[static_cast<std::size_t>(slot_ue[static_cast<std::size_t>(s)])] =
                slot_bs[static_cast<std::size_t>(s)];
    }
    return res;
}

AllocationPlan allocate_frequency(const std::vector<int>& bs_of, const std::vector<double>& compute_coeff,
                                  double f_max_hz, int n_bs) {
    const int M = static_cast<int>(bs_of.size());
    if (M < 1) fail(Errc::InvalidArgument, "assignment is empty");
    if (compute_coeff.size() != bs_of.size())
        fail(Errc::InvalidArgument, "need one compute coefficient per UE");
    if (!(f_max_hz > 0.0)) fail(Errc::InvalidArgument, "f_max must be positive");
    if (n_bs < 1) fail(Errc::InvalidArgument, "need at least one BS");
    AllocationPlan plan = AllocationPlan::empty(M, n_bs);
    for (int n = 0; n < n_bs; ++n) {
        double total = 0.0;
        for (int m = 0; m < M; ++m) {
            if (bs_of[static_cast<std::size_t>(m)] != n) continue;
            if (!(compute_coeff[static_cast<std::size_t>(m)] > 0.0))
                fail(Errc::Validation, "compute coefficient for UE " + format_int(m) +
                                           " must be positive to share frequency");
            total += compute_coeff[static_cast<std::size_t>(m)];
        }
        if (total == 0.0) continue;  // nobody served here
        for (int m = 0; m < M; ++m) {
            if (bs_of[static_cast<std::size_t>(m)] != n) continue;
            plan.assign(m, n, compute_coeff[static_cast<std::size_t>(m)] * f_max_hz / total);
        }
    }
    for (int m = 0; m < M; ++m) {
        const int n = bs_of[static_cast<std::size_t>(m)];
        if (n < -1 || n >= n_bs) fail(Errc::InvalidArgument, "assignment of UE " + format_int(m) + " is out of range");
    }
    return plan;
}

PlanResult optimize(const CostTable& costs, const NetworkScenario& net, int max_iters,
                    const CostRefresh& refresh) {
    check_table(costs, net);
    if (max_iters < 1) fail(Errc::InvalidArgument, "max_iters must be at least 1");

    CostTable table = costs;
    StaticSolve cur = solve_static(table, net);
    PlanResult res;
    res.iterations = 1;
    res.converged = true;
    if (refresh) {
        res.converged = false;
        std::vector<int> prev = cur.bs_of;
        while (res.iterations < max_iters) {
            AllocationPlan candidate =
                allocate_frequency(cur.bs_of, table.compute_coeff, net.f_max_hz, net.n_bs);
            table = refresh(candidate);
            check_table(table, net);
            cur = solve_static(table, net);
            ++res.iterations;
            if (cur.bs_of == prev) {
                res.converged = true;
                break;
            }
            prev = cur.bs_of;
        }
    }
    res.plan = allocate_frequency(cur.bs_of, table.compute_coeff, net.f_max_hz, net.n_bs);
    res.objective_ms = plan_objective_ms(table, res.plan);
    return res;
}

PlanResult exhaustive_search(const CostTable& costs, const NetworkScenario& net) {
    check_table(costs, net);
    const int M = costs.n_ue, N = costs.n_bs;
    double combos = 1.0;
    for (int m = 0; m < M; ++m) {
        combos *= N;
        if (combos > 1e7)
            fail(Errc::Validation, "exhaustive search needs N^M <= 1e7; this instance has " + format_int(N) +
                                       "^" + format_int(M) + " assignments, use optimize instead");
    }
    const std::vector<int> cap = capacity_vector(net);

    std::vector<int> a(static_cast<std::size_t>(M), 0);
    std::vector<int> count(static_cast<std::size_t>(N), 0);
    std::vector<int> best;
    double best_obj = kInf;
    bool done = false;
    while (!done) {
        std::fill(count.begin(), count.end(), 0);
        bool ok = true;
        for (int m = 0; m < M && ok; ++m) {
            const int n = a[static_cast<std::size_t>(m)];
            ok = costs.feasible(m, n) && ++count[static_cast<std::size_t>(n)] <= cap[static_cast<std::size_t>(n)];
        }
        if (ok) {
            const double obj = assignment_objective(costs, a, net.f_max_hz);
            if (obj < best_obj) {  // strict: first minimum is lexicographic smallest
                best_obj = obj;
                best = a;
            }
        }
        int d = M - 1;
        while (d >= 0 && ++a[static_cast<std::size_t>(d)] == N) {
            a[static_cast<std::size_t>(d)] = 0;
            --d;
        }
        done = d < 0;
    }
    if (best.empty()) fail(Errc::Validation, "no feasible assignment under the capacity limits");

    PlanResult res;
    res.plan = allocate_frequency(best, costs.compute_coeff, net.f_max_hz, net.n_bs);
    res.objective_ms = plan_objective_ms(costs, res.plan);
    res.iterations = 1;
    res.converged = true;
    return res;
}

}  // namespace mecsim

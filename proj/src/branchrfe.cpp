#include "branchrl/branchrfe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "branchrl/planner.hpp"
#include "branchrl/simulator.hpp"

namespace branchrl {

double rfe_beta(std::uint64_t t, double kappa, std::size_t S, std::size_t N) {
    if (!(kappa > 0.0 && kappa < 1.0)) throw std::invalid_argument("kappa must lie in (0, 1)");
    return std::log(static_cast<double>(S) * static_cast<double>(N) / kappa) +
           static_cast<double>(S) * std::log(8.0 * std::numbers::e * (static_cast<double>(t) + 1.0));
}

bool rfe_should_stop(double error_root, double eps) {
    return 4.0 * std::numbers::e * std::sqrt(error_root) + error_root <= eps / 2.0;
}

namespace {

struct ModelStats {
    const EmpiricalModel& model;

    std::uint64_t visits(StateId s, BaseActionId a) const { return model.visits(s, a); }
    double trigger(StateId s, BaseActionId a) const { return model.trigger(s, a); }
    void transition(StateId s, BaseActionId a, std::span<double> row) const {
        auto src = model.transition_row(s, a);
        std::copy(src.begin(), src.end(), row.begin());
    }
};

struct CountStats {
    const Counts& counts;

    std::uint64_t visits(StateId s, BaseActionId a) const { return counts.visits(s, a); }
    double trigger(StateId s, BaseActionId a) const {
        const auto n = counts.visits(s, a);
        return n ? static_cast<double>(counts.triggers(s, a)) / static_cast<double>(n) : 0.0;
    }
    // Rows with no trigger are left at zero: p_hat is then the ending point
    // mass, where B vanishes anyway.
    void transition(StateId s, BaseActionId a, std::span<double> row) const {
        const auto j = counts.triggers(s, a);
        for (std::size_t t = 0; t < row.size(); ++t)
            row[t] = j ? static_cast<double>(counts.transitions(s, a, t)) / static_cast<double>(j) : 0.0;
    }
};

// Per-pair terms of g that depend only on the counts. They are refreshed for
// pairs whose visit count moved since the previous call.
struct PairCache {
    std::vector<std::uint64_t> seen;
    std::vector<double> confidence;  // 12 H^2 beta / n, +inf when unvisited
    std::vector<double> weighted;    // (1 + 1/H) min(q_hat, 1/m) p_hat, S entries per pair
    std::vector<double> g;
};

// Fills `out` (already shaped H x S) in place so the exploration loop can
// reuse its storage across episodes.
template <class Stats>
void error_recursion(const BranchingMdp& mdp, const Stats& stats, double delta, double beta_scale, ErrorPlan& out,
                     PairCache& cache, bool root_only) {
    constexpr double kInf = std::numeric_limits<double>::infinity();
    const double H = static_cast<double>(mdp.H);
    const double q_cap = 1.0 / static_cast<double>(mdp.m);
    const double inflate = 1.0 + 1.0 / H;
    const std::size_t S = mdp.S, N = mdp.N;
    if (cache.seen.size() != S * N) {
        cache.seen.assign(S * N, 0);
        cache.confidence.assign(S * N, kInf);
        cache.weighted.assign(S * N * S, 0.0);
        cache.g.resize(N);
    }
    for (StateId s = 0; s < S; ++s)
        for (BaseActionId a = 0; a < N; ++a) {
            const auto n = stats.visits(s, a);
            const std::size_t i = s * N + a;
            if (n == cache.seen[i]) continue;
            cache.seen[i] = n;
            cache.confidence[i] = beta_scale * 12.0 * H * H * rfe_beta(n, delta, S, N) / static_cast<double>(n);
            std::span<double> row(cache.weighted.data() + i * S, S);
            stats.transition(s, a, row);
            const double scale = inflate * std::min(stats.trigger(s, a), q_cap);
            for (double& x : row) x *= scale;
        }
    auto& g = cache.g;
    for (std::size_t h = mdp.H; h >= 1; --h) {
        auto next = out.error.row(h + 1);
        const bool last = h == mdp.H;  // B_{H+1} = 0
        for (StateId s = 0; s < S; ++s) {
            // A rollout only meets the initial state at layer 1.
            if (root_only && h == 1 && s != mdp.initial) continue;
            if (s == mdp.ending) {
                // Constant across calls, so a reused plan keeps its first choice.
                if (out.policy.at(h, s).members.empty()) {
                    std::fill(g.begin(), g.end(), 0.0);
                    mdp.actions.argmax_into(g, out.policy.at(h, s));
                }
                out.error.at(h, s) = 0.0;
                continue;
            }
            for (BaseActionId a = 0; a < N; ++a) {
                const std::size_t i = s * N + a;
                const double c = cache.confidence[i];
                if (std::isinf(c)) {
                    g[a] = kInf;
                    continue;
                }
                double acc = 0.0;
                if (!last) {
                    const double* row = cache.weighted.data() + i * S;
                    for (StateId t = 0; t < S; ++t) acc += row[t] * next[t];
                }
                g[a] = c + acc;
            }
            const double best = mdp.actions.argmax_into(g, out.policy.at(h, s));
            out.error.at(h, s) = std::min(best, H);
        }
    }
}

BranchingMdp estimated_model(const BranchingMdp& structure, const Counts& counts) {
    BranchingMdp est = BranchingMdp::blank(structure.S, structure.N, structure.m, structure.H, structure.ending,
                                           structure.initial, structure.actions);
    est.assumption1_enforced = true;
    const double q_cap = 1.0 / static_cast<double>(structure.m);
    const auto model = EmpiricalModel::from_counts(counts, structure.ending);
    for (StateId s = 0; s < structure.S; ++s) {
        if (s == structure.ending) continue;
        for (BaseActionId a = 0; a < structure.N; ++a) {
            est.trigger_ref(s, a) = std::min(model.trigger(s, a), q_cap);
            auto src = model.transition_row(s, a);
            std::copy(src.begin(), src.end(), est.transition_row_ref(s, a).begin());
        }
    }
    return est;
}

}  // namespace

ErrorPlan rfe_backward_pass(const BranchingMdp& structure, const EmpiricalModel& model, double delta,
                            RfePassOptions options) {
    ErrorPlan plan{ValueTable(structure.H, structure.S), PolicyTable(structure.H, structure.S)};
    PairCache cache;
    error_recursion(structure, ModelStats{model}, delta, options.beta_scale, plan, cache, false);
    return plan;
}

RfeResult explore(const BranchingMdp& mdp, const RfeConfig& config) {
    if (!(config.eps > 0.0)) throw std::invalid_argument("eps must be positive");
    if (!(config.delta > 0.0 && config.delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
    const BranchingMdp env = with_rewards(mdp, std::vector<double>(mdp.S * mdp.N, 0.0));

    Counts counts(env.S, env.N);
    Rng rng(config.seed);
    ErrorPlan plan{ValueTable(env.H, env.S), PolicyTable(env.H, env.S)};
    PairCache cache;
    RfeResult result;
    // Episode k checks the stopping rule on counts from episodes 1..k-1.
    for (std::uint64_t k = 1;; ++k) {
        error_recursion(env, CountStats{counts}, config.delta, 1.0, plan, cache, true);
        result.final_error = plan.error.at(1, env.initial);
        if (rfe_should_stop(result.final_error, config.eps)) {
            result.stopped = true;
            result.episodes_used = k - 1;
            break;
        }
        if (k > config.max_episodes) {
            result.episodes_used = config.max_episodes;
            break;
        }
        rollout_counting(env, plan.policy, rng, &counts);
    }
    result.estimate = estimated_model(env, counts);
    return result;
}

PolicyTable plan_for_rewards(const BranchingMdp& estimate, std::span<const double> rewards) {
    for (double r : rewards)
        if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument("reward entries must lie in [0, 1]");
    return optimal_values(with_rewards(estimate, rewards)).policy;
}

double certify(const BranchingMdp& truth, const PolicyTable& policy, std::span<const double> rewards) {
    const BranchingMdp model = with_rewards(truth, rewards);
    const double best = optimal_values(model).values.at(1, model.initial);
    return best - policy_value(model, policy).at(1, model.initial);
}

}  // namespace branchrl

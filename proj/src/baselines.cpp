#include "branchrl/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace branchrl {

OptimisticPlan euler_backward_pass(const BranchingMdp& mdp, const EmpiricalModel& model, double L,
                                   PassOptions options) {
    constexpr double kInf = std::numeric_limits<double>::infinity();
    const double H = static_cast<double>(mdp.H);
    OptimisticPlan plan{ValueTable(mdp.H, mdp.S), ValueTable(mdp.H, mdp.S), PolicyTable(mdp.H, mdp.S)};
    std::vector<double> f(mdp.N), g(mdp.N);
    for (std::size_t h = mdp.H; h >= 1; --h) {
        auto upper_next = plan.upper.row(h + 1);
        auto lower_next = plan.lower.row(h + 1);
        for (StateId s = 0; s < mdp.S; ++s) {
            if (s == mdp.ending) {
                std::fill(f.begin(), f.end(), 0.0);
                mdp.actions.argmax_into(f, plan.policy.at(h, s));
                continue;
            }
            for (BaseActionId a = 0; a < mdp.N; ++a) {
                if (!model.visited(s, a)) {
                    f[a] = kInf;
                    g[a] = 0.0;
                    continue;
                }
                const double n = static_cast<double>(model.visits(s, a));
                const double j = static_cast<double>(std::max<std::uint64_t>(model.triggers(s, a), 1));
                const double q = model.trigger(s, a);
                auto row = model.transition_row(s, a);
                double up = 0.0, up_sq = 0.0, low = 0.0;
                for (StateId t = 0; t < mdp.S; ++t) {
                    up += row[t] * upper_next[t];
                    up_sq += row[t] * upper_next[t] * upper_next[t];
                    low += row[t] * lower_next[t];
                }
                const double var = std::max(0.0, up_sq - up * up);
                const double b_q = options.bonus_scale * 4.0 * std::sqrt(L / n);
                const double b_pv = options.bonus_scale * (4.0 * std::sqrt(var * L / j) + 36.0 * H * L / j);
                const double r = mdp.reward(s, a);
                f[a] = (q + b_q) * (r + up + b_pv);
                g[a] = std::max(q - b_q, 0.0) * (r + low - b_pv);
            }
            SuperAction& choice = plan.policy.at(h, s);
            const double best = mdp.actions.argmax_into(f, choice);
            plan.upper.at(h, s) = std::min(best, H);
            double pessimistic = 0.0;
            for (BaseActionId a : choice.members) pessimistic += g[a];
            plan.lower.at(h, s) = std::max(pessimistic, 0.0);
        }
    }
    return plan;
}

RmTrace run_euler_adaptation(const BranchingMdp& mdp, const RmConfig& config) {
    const double L = log_factor(mdp.S, mdp.N, mdp.H, mdp.m, config.K, config.delta / 6.0);
    return run_episodes(mdp, config, [&](const Counts& counts) {
        const auto model = EmpiricalModel::from_counts(counts, mdp.ending);
        OptimisticPlan pass = euler_backward_pass(mdp, model, L);
        EpisodePlan plan;
        plan.upper1 = pass.upper.at(1, mdp.initial);
        plan.lower1 = pass.lower.at(1, mdp.initial);
        plan.policy = std::move(pass.policy);
        return plan;
    });
}

PolicyTable greedy_empirical_policy(const BranchingMdp& mdp, const EmpiricalModel& model) {
    const double H = static_cast<double>(mdp.H);
    ValueTable v(mdp.H, mdp.S);
    PolicyTable policy(mdp.H, mdp.S);
    std::vector<double> f(mdp.N);
    for (std::size_t h = mdp.H; h >= 1; --h) {
        auto next = v.row(h + 1);
        for (StateId s = 0; s < mdp.S; ++s) {
            for (BaseActionId a = 0; a < mdp.N; ++a) {
                f[a] = 0.0;
                if (s == mdp.ending || !model.visited(s, a)) continue;
                auto row = model.transition_row(s, a);
                double cont = 0.0;
                for (StateId t = 0; t < mdp.S; ++t) cont += row[t] * next[t];
                f[a] = model.trigger(s, a) * (mdp.reward(s, a) + cont);
            }
            const double best = mdp.actions.argmax_into(f, policy.at(h, s));
            v.at(h, s) = s == mdp.ending ? 0.0 : std::min(best, H);
        }
    }
    return policy;
}

RmTrace run_epsilon_greedy(const BranchingMdp& mdp, const RmConfig& config, double explore) {
    if (!(explore >= 0.0 && explore <= 1.0)) throw std::invalid_argument("exploration rate must lie in [0, 1]");
    return run_episodes(mdp, config, [&](const Counts& counts) {
        EpisodePlan plan;
        plan.policy = greedy_empirical_policy(mdp, EmpiricalModel::from_counts(counts, mdp.ending));
        plan.explore = explore;
        return plan;
    });
}

}  // namespace branchrl

#include "branchrl/branchvi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "branchrl/planner.hpp"

namespace branchrl {

double log_factor(std::size_t S, std::size_t N, std::size_t H, std::size_t m, std::size_t K, double delta_prime) {
    if (!(delta_prime > 0.0 && delta_prime < 1.0)) throw std::invalid_argument("delta' must lie in (0, 1)");
    const double base = std::log(static_cast<double>(S)) + std::log(static_cast<double>(N)) +
                        std::log(static_cast<double>(H)) - std::log(delta_prime);
    const double branch = static_cast<double>(H) * std::log(static_cast<double>(m));
    return base + std::max(branch, std::log(static_cast<double>(K)));
}

EmpiricalModel EmpiricalModel::from_counts(const Counts& counts, StateId ending) {
    EmpiricalModel e;
    e.S = counts.n_states();
    e.N = counts.n_actions();
    e.q_hat.assign(e.S * e.N, 0.0);
    e.p_hat.assign(e.S * e.N * e.S, 0.0);
    e.n.assign(e.S * e.N, 0);
    e.J.assign(e.S * e.N, 0);
    for (StateId s = 0; s < e.S; ++s) {
        for (BaseActionId a = 0; a < e.N; ++a) {
            const std::size_t i = s * e.N + a;
            e.n[i] = counts.visits(s, a);
            e.J[i] = counts.triggers(s, a);
            double* row = e.p_hat.data() + i * e.S;
            if (e.J[i] == 0) {
                row[ending] = 1.0;
                continue;
            }
            e.q_hat[i] = static_cast<double>(e.J[i]) / static_cast<double>(e.n[i]);
            for (StateId t = 0; t < e.S; ++t)
                row[t] = static_cast<double>(counts.transitions(s, a, t)) / static_cast<double>(e.J[i]);
        }
    }
    return e;
}

EmpiricalModel EmpiricalModel::from_model(const BranchingMdp& mdp, std::uint64_t visits) {
    EmpiricalModel e;
    e.S = mdp.S;
    e.N = mdp.N;
    e.q_hat = mdp.q;
    e.p_hat = mdp.p;
    e.n.assign(e.S * e.N, visits);
    e.J.assign(e.S * e.N, visits);
    return e;
}

Bonuses branchvi_bonuses(double q_hat, std::span<const double> p_hat, std::span<const double> upper_next,
                         std::span<const double> lower_next, std::uint64_t n, double L, std::size_t H) {
    if (n == 0) throw std::invalid_argument("bonuses are undefined for an unvisited pair");
    const double nn = static_cast<double>(n);
    double mean = 0.0, second = 0.0, gap = 0.0;
    for (std::size_t t = 0; t < p_hat.size(); ++t) {
        if (p_hat[t] == 0.0) continue;
        mean += p_hat[t] * upper_next[t];
        second += p_hat[t] * upper_next[t] * upper_next[t];
        const double d = upper_next[t] - lower_next[t];
        gap += p_hat[t] * d * d;
    }
    mean *= q_hat;
    second *= q_hat;
    gap *= q_hat;
    const double var = std::max(0.0, second - mean * mean);
    Bonuses b;
    b.trigger = 4.0 * std::sqrt(L / nn);
    b.composite = 4.0 * std::sqrt(var * L / nn) + 4.0 * std::sqrt(gap * L / nn) + 36.0 * static_cast<double>(H) * L / nn;
    return b;
}

OptimisticPlan branchvi_backward_pass(const BranchingMdp& mdp, const EmpiricalModel& model, double L,
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
                const double q = model.trigger(s, a);
                auto row = model.transition_row(s, a);
                Bonuses b = branchvi_bonuses(q, row, upper_next, lower_next, model.visits(s, a), L, mdp.H);
                b.trigger *= options.bonus_scale;
                b.composite *= options.bonus_scale;
                double up = 0.0, low = 0.0;
                for (StateId t = 0; t < mdp.S; ++t) {
                    up += row[t] * upper_next[t];
                    low += row[t] * lower_next[t];
                }
                const double r = mdp.reward(s, a);
                f[a] = (q + b.trigger) * r + q * up + b.composite;
                g[a] = (q - b.trigger) * r + q * low - b.composite;
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

RmTrace run_episodes(const BranchingMdp& mdp, const RmConfig& config, const EpisodePlanner& planner) {
    if (config.K < 1) throw std::invalid_argument("K must be at least 1");
    RmTrace trace;
    trace.optimal_value = optimal_values(mdp).values.at(1, mdp.initial);
    trace.episodes.reserve(config.K);
    Counts counts(mdp.S, mdp.N);
    Rng rng(config.seed);
    double cumulative = 0.0;
    for (std::size_t k = 1; k <= config.K; ++k) {
        const EpisodePlan plan = planner(counts);
        const ValueTable behaviour = plan.explore > 0.0 ? mixture_policy_value(mdp, plan.policy, plan.explore)
                                                        : policy_value(mdp, plan.policy);
        RmEpisode rec;
        rec.upper1 = plan.upper1;
        rec.lower1 = plan.lower1;
        rec.policy_value = behaviour.at(1, mdp.initial);
        rec.inst_regret = trace.optimal_value - rec.policy_value;
        cumulative += rec.inst_regret;
        rec.cum_regret = cumulative;
        trace.episodes.push_back(rec);
        rollout_counting(mdp, plan.policy, rng, &counts, plan.explore);
    }
    return trace;
}

RmTrace run_rm(const BranchingMdp& mdp, const RmConfig& config) {
    const double L = log_factor(mdp.S, mdp.N, mdp.H, mdp.m, config.K, config.delta / 6.0);
    return run_episodes(mdp, config, [&](const Counts& counts) {
        const auto model = EmpiricalModel::from_counts(counts, mdp.ending);
        OptimisticPlan pass = branchvi_backward_pass(mdp, model, L);
        EpisodePlan plan;
        plan.upper1 = pass.upper.at(1, mdp.initial);
        plan.lower1 = pass.lower.at(1, mdp.initial);
        plan.policy = std::move(pass.policy);
        return plan;
    });
}

}  // namespace branchrl

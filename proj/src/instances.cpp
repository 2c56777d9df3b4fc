#include "branchrl/instances.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>

#include "branchrl/rng.hpp"

namespace branchrl {

BranchingMdp experiment_instance(std::size_t N) {
    constexpr std::size_t m = 2, H = 6, S = 6;
    if (N < m) throw std::invalid_argument("experiment_instance needs N >= 2");
    if (N != 10 && N != 15) std::cerr << "warning: experiment_instance built with N=" << N << " (benchmark uses 10 or 15)\n";
    auto mdp = BranchingMdp::blank(S, N, m, H, 0, 1, ActionClass::top_m(N, m));
    const double high = 1.0 / m, low = 1.0 / (2.0 * m);
    for (StateId s = 1; s < S; ++s) {
        for (BaseActionId a = 0; a < N; ++a) {
            mdp.trigger_ref(s, a) = a + 2 >= N ? high : low;
            mdp.reward_ref(s, a) = 1.0;
            auto row = mdp.transition_row_ref(s, a);
            if (s == 1 || s == 4 || s == 5) {
                row[2] = 0.5;
                row[3] = 0.5;
            } else {
                row[4] = 0.5;
                row[5] = 0.5;
            }
        }
    }
    return mdp;
}

namespace {

HardInstance build_hard(double top_trigger, bool enforce, std::size_t S, std::size_t N, std::size_t m, std::size_t H,
                        double eta, std::uint64_t seed) {
    if (m == 0 || N % m != 0) throw std::invalid_argument("m must divide N");
    if (S < 4) throw std::invalid_argument("hard instance needs S >= 4");
    if (!(eta > 0.0 && eta <= top_trigger)) throw std::invalid_argument("eta must lie in (0, top trigger]");
    const std::size_t d = N / m;
    std::vector<SuperAction> blocks;
    for (std::size_t j = 0; j < d; ++j) {
        std::vector<BaseActionId> members;
        for (std::size_t i = 0; i < m; ++i) members.push_back(j * m + i);
        blocks.emplace_back(std::move(members));
    }
    HardInstance inst;
    inst.mdp = BranchingMdp::blank(S, N, m, H, 0, 1, ActionClass::partition(N, blocks));
    inst.mdp.assumption1_enforced = enforce;
    auto& mdp = inst.mdp;

    Rng rng(seed);
    const std::size_t n_bandit = S - 3;
    for (std::size_t i = 0; i < n_bandit; ++i) inst.optimal_block.push_back(rng.below(d));

    for (StateId s = 1; s < S; ++s) {
        for (BaseActionId a = 0; a < N; ++a) {
            mdp.reward_ref(s, a) = 1.0;
            auto row = mdp.transition_row_ref(s, a);
            if (s == 1) {
                mdp.trigger_ref(s, a) = top_trigger;
                for (std::size_t i = 0; i < n_bandit; ++i) row[3 + i] = 1.0 / static_cast<double>(n_bandit);
            } else if (s == 2) {
                mdp.trigger_ref(s, a) = top_trigger;
                row[2] = 1.0;
            } else {
                const bool best = blocks[inst.optimal_block[s - 3]].contains(a);
                mdp.trigger_ref(s, a) = best ? top_trigger : top_trigger - eta;
                row[2] = 1.0;
            }
        }
    }
    return inst;
}

}  // namespace

HardInstance regret_lb_instance(std::size_t S, std::size_t N, std::size_t m, std::size_t H, double eta,
                                std::uint64_t seed) {
    return build_hard(1.0 / static_cast<double>(m), true, S, N, m, H, eta, seed);
}

HardInstance relaxed_instance(double q_bar, std::size_t S, std::size_t N, std::size_t m, std::size_t H, double eta,
                              std::uint64_t seed) {
    if (!(q_bar > 1.0 / static_cast<double>(m) && q_bar <= 1.0))
        throw std::invalid_argument("relaxed_instance needs 1/m < q_bar <= 1");
    return build_hard(q_bar, false, S, N, m, H, eta, seed);
}

PolicyTable hard_instance_optimal_policy(const HardInstance& inst) {
    const auto& blocks = inst.mdp.actions.listed();
    PolicyTable policy = PolicyTable::constant(inst.mdp.H, inst.mdp.S, blocks.front());
    for (std::size_t i = 0; i < inst.optimal_block.size(); ++i)
        for (std::size_t h = 1; h <= inst.mdp.H; ++h) policy.at(h, inst.bandit_state(i)) = blocks[inst.optimal_block[i]];
    return policy;
}

PolicyTable hard_instance_suboptimal_policy(const HardInstance& inst) {
    const auto& blocks = inst.mdp.actions.listed();
    if (blocks.size() < 2) throw std::invalid_argument("suboptimal policy needs at least two blocks");
    PolicyTable policy = PolicyTable::constant(inst.mdp.H, inst.mdp.S, blocks.front());
    for (std::size_t i = 0; i < inst.optimal_block.size(); ++i) {
        const std::size_t other = (inst.optimal_block[i] + 1) % blocks.size();
        for (std::size_t h = 1; h <= inst.mdp.H; ++h) policy.at(h, inst.bandit_state(i)) = blocks[other];
    }
    return policy;
}

double hard_instance_gap(std::size_t m, std::size_t H, double top_trigger, double eta) {
    const double ratio = static_cast<double>(m) * top_trigger;
    const double scale = static_cast<double>(m) * eta;
    if (H <= 1) return 0.0;
    if (std::abs(ratio - 1.0) < 1e-15) return scale * static_cast<double>(H - 1);
    return scale * ratio * (std::pow(ratio, static_cast<double>(H - 1)) - 1.0) / (ratio - 1.0);
}

BranchingMdp random_instance(std::size_t S, std::size_t N, std::size_t m, std::size_t H, std::uint64_t seed) {
    if (S < 2) throw std::invalid_argument("random_instance needs S >= 2");
    auto mdp = BranchingMdp::blank(S, N, m, H, 0, 1, ActionClass::top_m(N, m));
    Rng rng(seed);
    const double q_cap = 1.0 / static_cast<double>(m);
    for (StateId s = 1; s < S; ++s) {
        for (BaseActionId a = 0; a < N; ++a) {
            mdp.trigger_ref(s, a) = q_cap * rng.uniform01();
            mdp.reward_ref(s, a) = rng.uniform01();
            auto row = mdp.transition_row_ref(s, a);
            double total = 0.0;
            for (auto& x : row) total += (x = rng.uniform01() + 1e-3);
            for (auto& x : row) x /= total;
            // Absorb rounding so the row sums to 1 within one ulp.
            double acc = 0.0;
            for (StateId t = 0; t + 1 < S; ++t) acc += row[t];
            row[S - 1] = 1.0 - acc;
        }
    }
    return mdp;
}

BranchingMdp critical_instance(std::size_t S, std::size_t N, std::size_t m, std::size_t H, std::uint64_t seed) {
    BranchingMdp mdp = with_constant_trigger(random_instance(S, N, m, H, seed), 1.0 / static_cast<double>(m));
    for (StateId s = 1; s < S; ++s)
        for (BaseActionId a = 0; a < N; ++a) {
            auto row = mdp.transition_row_ref(s, a);
            row[mdp.ending] = 0.0;
            double total = 0.0;
            for (double x : row) total += x;
            for (auto& x : row) x /= total;
            double acc = 0.0;
            for (StateId t = 1; t + 1 < S; ++t) acc += row[t];
            row[S - 1] = 1.0 - acc;
        }
    return mdp;
}

PolicyTable random_policy(const BranchingMdp& mdp, std::uint64_t seed) {
    PolicyTable policy(mdp.H, mdp.S);
    Rng rng(seed);
    for (std::size_t h = 1; h <= mdp.H; ++h)
        for (StateId s = 0; s < mdp.S; ++s) policy.at(h, s) = mdp.actions.uniform(rng);
    return policy;
}

BranchingMdp with_constant_trigger(const BranchingMdp& mdp, double value) {
    BranchingMdp out = mdp;
    for (StateId s = 0; s < mdp.S; ++s)
        for (BaseActionId a = 0; a < mdp.N; ++a) out.trigger_ref(s, a) = s == mdp.ending ? 0.0 : value;
    return out;
}

}  // namespace branchrl

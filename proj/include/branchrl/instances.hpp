#pragma once

#include <cstdint>
#include <vector>

#include "branchrl/core.hpp"

namespace branchrl {

/// Benchmark instance with S = 6 (index 0 is the ending state, 1..5 are
/// s1..s5), m = 2, H = 6 and every m-subset of the N base actions allowed.
///  - q = 1/m for the last two base actions, 1/(2m) for the rest; r = 1.
///  - s1 -> {s2, s3}, {s2, s3} -> {s4, s5}, {s4, s5} -> {s2, s3}, each 0.5/0.5,
///    under every base action. No other transitions exist.
///  - Initial state s1.
BranchingMdp experiment_instance(std::size_t N);

/// Bandit-state construction. States: 0 ending, 1 = s1 (initial), 2 = s2
/// (homogeneous sink), 3.. = bandit states x_1..x_{S-3}. The class is the
/// partition into d = N/m consecutive blocks; each bandit state has one
/// randomly drawn optimal block whose members trigger with probability
/// `top_trigger` while every other base action there triggers with
/// top_trigger - eta. s1 and s2 trigger with top_trigger everywhere.
struct HardInstance {
    BranchingMdp mdp;
    /// optimal_block[i] is the block index (into actions.listed()) that is
    /// optimal at bandit state 3 + i.
    std::vector<std::size_t> optimal_block;

    StateId bandit_state(std::size_t i) const { return 3 + i; }
};

/// top_trigger = 1/m; satisfies the bounded-trigger condition.
HardInstance regret_lb_instance(std::size_t S, std::size_t N, std::size_t m, std::size_t H, double eta,
                                std::uint64_t seed);

/// top_trigger = q_bar > 1/m; the bounded-trigger flag is cleared.
HardInstance relaxed_instance(double q_bar, std::size_t S, std::size_t N, std::size_t m, std::size_t H, double eta,
                              std::uint64_t seed);

/// Policy that plays the optimal block at every bandit state (block 0 elsewhere).
PolicyTable hard_instance_optimal_policy(const HardInstance& inst);

/// Policy that plays a non-optimal block at every bandit state. Requires d >= 2.
PolicyTable hard_instance_suboptimal_policy(const HardInstance& inst);

/// Closed-form per-episode gap between the two policies above:
/// m eta (H - 1) when m q = 1, else m eta * mq ((mq)^{H-1} - 1) / (mq - 1).
double hard_instance_gap(std::size_t m, std::size_t H, double top_trigger, double eta);

/// Fuzzing corpus: state 0 is ending and state 1 initial; q ~ U[0, 1/m],
/// every p row is uniform weights over all S states normalised, r ~ U[0, 1];
/// every m-subset allowed.
BranchingMdp random_instance(std::size_t S, std::size_t N, std::size_t m, std::size_t H, std::uint64_t seed);

/// Critical case q = 1/m on every regular pair with transitions that never
/// enter the ending state, so only failed triggers end a branch. Rewards and
/// p rows are drawn as in random_instance, restricted to regular states.
BranchingMdp critical_instance(std::size_t S, std::size_t N, std::size_t m, std::size_t H, std::uint64_t seed);

/// Every (h, s) entry drawn uniformly from the class.
PolicyTable random_policy(const BranchingMdp& mdp, std::uint64_t seed);

/// Copy with q set to `value` on every regular pair.
BranchingMdp with_constant_trigger(const BranchingMdp& mdp, double value);

}  // namespace branchrl

#pragma once

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "branchrl/core.hpp"

namespace branchrl {

/// V^pi by backward induction on
///   V_h(s) = sum_{a in pi_h(s)} q(s,a) (r(s,a) + p(.|s,a)^T V_{h+1}),  V_{H+1} = 0.
ValueTable policy_value(const BranchingMdp& mdp, const PolicyTable& policy);

/// Value of the per-node randomized policy that plays `greedy` with
/// probability 1 - explore and a uniform member of the class otherwise.
ValueTable mixture_policy_value(const BranchingMdp& mdp, const PolicyTable& greedy, double explore);

struct OptimalSolution {
    ValueTable values;
    PolicyTable policy;
};

/// V* and a greedy optimal policy; the per-state maximization goes through the
/// class oracle on f_h(s,a) = q(s,a) (r(s,a) + p(.|s,a)^T V*_{h+1}).
OptimalSolution optimal_values(const BranchingMdp& mdp);

/// Expected number of layer-h edges labelled (s, a) under the policy.
class Occupancy {
public:
    Occupancy(std::size_t horizon, std::size_t n_states, std::size_t n_actions)
        : H_(horizon), S_(n_states), N_(n_actions), w_(horizon * n_states * n_actions, 0.0) {}

    std::size_t horizon() const { return H_; }
    double at(std::size_t h, StateId s, BaseActionId a) const { return w_.at(((h - 1) * S_ + s) * N_ + a); }
    double& at(std::size_t h, StateId s, BaseActionId a) { return w_.at(((h - 1) * S_ + s) * N_ + a); }

    /// Sum over all (s, a) at step h.
    double layer_total(std::size_t h) const;

private:
    std::size_t H_, S_, N_;
    std::vector<double> w_;
};

Occupancy occupancy(const BranchingMdp& mdp, const PolicyTable& policy);

class InstanceTooLargeError : public std::length_error {
public:
    using std::length_error::length_error;
};

/// Upper bound on outcome assignments brute_force_value will enumerate.
inline constexpr std::uint64_t kBruteForceLimit = 1'000'000;

/// Exact expected total reward by enumerating every (trigger outcome, next
/// state) assignment of every edge of the full tree. Independent of the
/// Bellman recursion; throws InstanceTooLargeError above kBruteForceLimit.
double brute_force_value(const BranchingMdp& mdp, const PolicyTable& policy);

struct MonteCarloEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;
};

/// Sample mean and standard error of the episode reward over seeded rollouts.
MonteCarloEstimate mc_value(const BranchingMdp& mdp, const PolicyTable& policy, std::uint64_t episodes,
                            std::uint64_t seed);

}  // namespace branchrl

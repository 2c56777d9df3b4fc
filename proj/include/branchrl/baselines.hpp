#pragma once

#include "branchrl/branchvi.hpp"

namespace branchrl {

/// Split-bonus adaptation of a standard tabular learner:
///   f(s,a) = (q_hat + b_q) (r + p_hat^T V_up + b_pV),
///   b_pV   = 4 sqrt(Var_{p_hat}(V_up) L / max(J,1)) + 36 H L / max(J,1).
/// The pessimistic table uses max(q_hat - b_q, 0) (r + p_hat^T V_low - b_pV).
OptimisticPlan euler_backward_pass(const BranchingMdp& mdp, const EmpiricalModel& model, double L,
                                   PassOptions options = {});

RmTrace run_euler_adaptation(const BranchingMdp& mdp, const RmConfig& config);

/// Greedy policy for the plain empirical model; unvisited pairs are worth 0.
PolicyTable greedy_empirical_policy(const BranchingMdp& mdp, const EmpiricalModel& model);

/// Plays the greedy empirical policy, replacing the action at each realized
/// regular node by a uniform draw from the class with probability `explore`.
/// Regret is charged on the exact value of that randomized behaviour.
RmTrace run_epsilon_greedy(const BranchingMdp& mdp, const RmConfig& config, double explore);

}  // namespace branchrl

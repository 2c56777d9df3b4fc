#pragma once

#include <cstdint>
#include <span>

#include "branchrl/branchvi.hpp"
#include "branchrl/core.hpp"

namespace branchrl {

struct RfeConfig {
    double eps = 0.25;
    double delta = 0.1;
    std::uint64_t seed = 0;
    std::uint64_t max_episodes = 1'000'000;
};

struct RfeResult {
    /// Estimated model: the true model's structure with q_hat (clipped to 1/m)
    /// and p_hat in place of q and p, and all rewards zero. Unvisited pairs
    /// carry q_hat = 0 and a point mass on the ending state.
    BranchingMdp estimate;
    std::uint64_t episodes_used = 0;
    bool stopped = false;
    double final_error = 0.0;  // B_1(s0) at the last check
};

/// log(SN / kappa) + S log(8e (t + 1)).
double rfe_beta(std::uint64_t t, double kappa, std::size_t S, std::size_t N);

struct RfePassOptions {
    /// Multiplies the 12 H^2 beta / n term; 0 collapses the recursion (test hook).
    double beta_scale = 1.0;
};

struct ErrorPlan {
    ValueTable error;  // B_h(s)
    PolicyTable policy;
};

/// Error-bound recursion
///   g_h(s,a) = 12 H^2 beta(n, delta) / n + (1 + 1/H) min(q_hat, 1/m) p_hat^T B_{h+1},
///   B_h(s)   = min(max_A sum_{a in A} g_h(s,a), H),
/// with unvisited pairs scoring +infinity and B = 0 at the ending state.
ErrorPlan rfe_backward_pass(const BranchingMdp& structure, const EmpiricalModel& model, double delta,
                            RfePassOptions options = {});

/// 4e sqrt(B) + B <= eps / 2.
bool rfe_should_stop(double error_root, double eps);

/// Reward-free exploration. The reward table of `mdp` is discarded before the
/// loop starts; only q and p drive the simulated environment.
RfeResult explore(const BranchingMdp& mdp, const RfeConfig& config);

/// Optimal policy for `rewards` under an estimated model.
PolicyTable plan_for_rewards(const BranchingMdp& estimate, std::span<const double> rewards);

/// V*_1(s0; r) - V^policy_1(s0; r), both evaluated exactly on the true model.
double certify(const BranchingMdp& truth, const PolicyTable& policy, std::span<const double> rewards);

}  // namespace branchrl

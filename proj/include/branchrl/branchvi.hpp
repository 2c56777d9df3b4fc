#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "branchrl/core.hpp"
#include "branchrl/simulator.hpp"

namespace branchrl {

struct RmConfig {
    std::size_t K = 1;
    double delta = 0.005;
    std::uint64_t seed = 0;
};

struct RmEpisode {
    std::optional<double> upper1;  // optimistic V_1(s0), when the learner keeps one
    std::optional<double> lower1;  // pessimistic V_1(s0)
    double policy_value = 0.0;     // exact value of the behaviour policy
    double inst_regret = 0.0;
    double cum_regret = 0.0;
};

struct RmTrace {
    double optimal_value = 0.0;
    std::vector<RmEpisode> episodes;
};

/// log(SNH (m^H v K) / delta'), evaluated as
/// log(SNH / delta') + max(H log m, log K) so m^H is never formed.
double log_factor(std::size_t S, std::size_t N, std::size_t H, std::size_t m, std::size_t K, double delta_prime);

/// Point estimates derived from counts. Pairs with n = 0 are unvisited; pairs
/// with n > 0 and J = 0 get q_hat = 0 and p_hat = point mass on the ending state.
struct EmpiricalModel {
    std::size_t S = 0, N = 0;
    std::vector<double> q_hat;  // S x N
    std::vector<double> p_hat;  // S x N x S
    std::vector<std::uint64_t> n;
    std::vector<std::uint64_t> J;

    static EmpiricalModel from_counts(const Counts& counts, StateId ending);

    /// The true (q, p) with every pair marked as visited `visits` times.
    static EmpiricalModel from_model(const BranchingMdp& mdp, std::uint64_t visits);

    bool visited(StateId s, BaseActionId a) const { return n[s * N + a] > 0; }
    std::uint64_t visits(StateId s, BaseActionId a) const { return n[s * N + a]; }
    std::uint64_t triggers(StateId s, BaseActionId a) const { return J[s * N + a]; }
    double trigger(StateId s, BaseActionId a) const { return q_hat[s * N + a]; }
    std::span<const double> transition_row(StateId s, BaseActionId a) const {
        return {p_hat.data() + (s * N + a) * S, S};
    }
};

struct Bonuses {
    double trigger = 0.0;    // 4 sqrt(L / n)
    double composite = 0.0;  // variance, optimism-gap and 36 H L / n terms
};

/// Bonuses for one visited pair. Variance and gap are taken under the
/// empirical augmented successor law (mass 1 - q_hat at the ending state,
/// where both value tables are zero). Throws std::invalid_argument if n = 0.
Bonuses branchvi_bonuses(double q_hat, std::span<const double> p_hat, std::span<const double> upper_next,
                         std::span<const double> lower_next, std::uint64_t n, double L, std::size_t H);

struct OptimisticPlan {
    ValueTable upper;
    ValueTable lower;
    PolicyTable policy;
};

struct PassOptions {
    /// Multiplies every bonus; 0 turns the pass into plain planning on the
    /// empirical model (test hook).
    double bonus_scale = 1.0;
};

/// One optimistic/pessimistic backward pass. Uses only the structure and the
/// reward table of `mdp`; trigger and transition laws come from `model`.
/// Unvisited pairs score +infinity for the oracle and contribute 0 to the
/// pessimistic value.
OptimisticPlan branchvi_backward_pass(const BranchingMdp& mdp, const EmpiricalModel& model, double L,
                                      PassOptions options = {});

/// What a learner commits to for one episode.
struct EpisodePlan {
    PolicyTable policy;
    double explore = 0.0;  // per-node uniform-exploration probability
    std::optional<double> upper1;
    std::optional<double> lower1;
};

using EpisodePlanner = std::function<EpisodePlan(const Counts&)>;

/// Episode loop shared by every regret learner: plan from counts, score the
/// behaviour policy exactly, roll out, update counts.
RmTrace run_episodes(const BranchingMdp& mdp, const RmConfig& config, const EpisodePlanner& planner);

RmTrace run_rm(const BranchingMdp& mdp, const RmConfig& config);

}  // namespace branchrl

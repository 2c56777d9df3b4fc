#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "branchrl/core.hpp"
#include "branchrl/rng.hpp"

namespace branchrl {

struct RealizedNode {
    NodeIndex node;
    StateId state = 0;
    /// Absent for ending-state nodes, which spawn no edges.
    std::optional<SuperAction> action;

    friend bool operator==(const RealizedNode&, const RealizedNode&) = default;
};

struct RealizedEdge {
    NodeIndex node;
    StateId state = 0;
    BaseActionId base_action = 0;
    bool triggered = false;
    StateId next_state = 0;
    double reward = 0.0;

    friend bool operator==(const RealizedEdge&, const RealizedEdge&) = default;
};

/// One realized trajectory tree. Subtrees rooted at ending-state nodes are
/// collapsed: the ending node is stored, its descendants are not. Children at
/// layer H+1 are recorded only through the edges' next_state.
struct Episode {
    std::vector<RealizedNode> nodes;
    std::vector<RealizedEdge> edges;
    double total_reward = 0.0;
    std::uint64_t omega = 0;

    friend bool operator==(const Episode&, const Episode&) = default;
};

struct EpisodeStats {
    double total_reward = 0.0;
    std::uint64_t omega = 0;
};

inline EpisodeStats episode_stats(const Episode& e) { return {e.total_reward, e.omega}; }

/// Visit, trigger and transition counts for regular (s, a) pairs.
class Counts {
public:
    Counts() = default;
    Counts(std::size_t n_states, std::size_t n_actions)
        : S_(n_states), N_(n_actions), n_(n_states * n_actions, 0), J_(n_states * n_actions, 0),
          P_(n_states * n_actions * n_states, 0) {}

    std::size_t n_states() const { return S_; }
    std::size_t n_actions() const { return N_; }

    std::uint64_t visits(StateId s, BaseActionId a) const { return n_[s * N_ + a]; }
    std::uint64_t triggers(StateId s, BaseActionId a) const { return J_[s * N_ + a]; }
    std::uint64_t transitions(StateId s, BaseActionId a, StateId next) const { return P_[(s * N_ + a) * S_ + next]; }

    void record(StateId s, BaseActionId a, bool triggered, StateId next) {
        ++n_[s * N_ + a];
        if (triggered) {
            ++J_[s * N_ + a];
            ++P_[(s * N_ + a) * S_ + next];
        }
    }

    friend bool operator==(const Counts&, const Counts&) = default;

private:
    std::size_t S_ = 0, N_ = 0;
    std::vector<std::uint64_t> n_, J_, P_;
};

/// Plays one episode. Nodes are expanded breadth-first; within a node the
/// edges follow ascending base-action index; each edge draws one uniform for
/// its trigger and, only if triggered, one more for the next state.
///
/// With explore > 0 every regular node first draws one uniform and, when it
/// falls below `explore`, replaces the policy's action by a uniform draw from
/// the decision class.
Episode rollout(const BranchingMdp& mdp, const PolicyTable& policy, Rng& rng, double explore = 0.0);

/// Adds the episode's edges to the counts. Ending-state nodes never carry
/// edges in an Episode, so only regular pairs are recorded.
void update_counts(Counts& counts, const Episode& episode);

/// Consumes the RNG exactly like rollout() but records straight into counts
/// without materialising the tree. `counts` may be null.
EpisodeStats rollout_counting(const BranchingMdp& mdp, const PolicyTable& policy, Rng& rng, Counts* counts,
                              double explore = 0.0);

/// Human-readable dump of the tree, one node or edge per line.
std::string episode_trace(const Episode& episode);

}  // namespace branchrl

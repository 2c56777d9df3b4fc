#include "branchrl/simulator.hpp"

#include <sstream>

namespace branchrl {

namespace {

StateId sample_next(std::span<const double> row, double u) {
    double acc = 0.0;
    StateId last_positive = 0;
    for (StateId s = 0; s < row.size(); ++s) {
        if (row[s] <= 0.0) continue;
        acc += row[s];
        last_positive = s;
        if (u < acc) return s;
    }
    // Rounding left u above the accumulated mass.
    return last_positive;
}

struct Pending {
    StateId state;
    std::size_t layer;
    std::size_t handle;
};

// Breadth-first rollout engine. The visitor sees node creation, the action
// chosen at each regular node, and every edge outcome.
template <class Visitor>
EpisodeStats simulate(const BranchingMdp& mdp, const PolicyTable& policy, Rng& rng, double explore, Visitor& visitor,
                      std::vector<Pending>& queue) {
    EpisodeStats stats;
    queue.clear();
    queue.push_back({mdp.initial, 1, visitor.root(mdp.initial)});
    SuperAction explored;
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const Pending node = queue[head];
        if (node.state == mdp.ending) continue;
        ++stats.omega;
        const SuperAction* action = &policy.at(node.layer, node.state);
        if (explore > 0.0 && rng.uniform01() < explore) {
            explored = mdp.actions.uniform(rng);
            action = &explored;
        }
        visitor.action(node.handle, *action);
        std::uint32_t digit = 0;
        for (BaseActionId a : action->members) {
            ++digit;
            const bool triggered = rng.uniform01() < mdp.trigger(node.state, a);
            StateId next = mdp.ending;
            double reward = 0.0;
            if (triggered) {
                reward = mdp.reward(node.state, a);
                next = sample_next(mdp.transition_row(node.state, a), rng.uniform01());
            }
            stats.total_reward += reward;
            visitor.edge(node.handle, node.state, a, triggered, next, reward);
            if (node.layer < mdp.H)
                queue.push_back({next, node.layer + 1, visitor.child(node.handle, digit, next, node.layer + 1)});
        }
    }
    return stats;
}

struct TreeRecorder {
    const BranchingMdp& mdp;
    Episode& episode;

    std::size_t root(StateId s) {
        episode.nodes.push_back({NodeIndex{}, s, std::nullopt});
        return 0;
    }
    std::size_t child(std::size_t parent, std::uint32_t digit, StateId s, std::size_t) {
        NodeIndex idx = episode.nodes[parent].node.child(digit, mdp.m, mdp.H);
        episode.nodes.push_back({std::move(idx), s, std::nullopt});
        return episode.nodes.size() - 1;
    }
    void action(std::size_t handle, const SuperAction& a) { episode.nodes[handle].action = a; }
    void edge(std::size_t handle, StateId s, BaseActionId a, bool triggered, StateId next, double reward) {
        episode.edges.push_back({episode.nodes[handle].node, s, a, triggered, next, reward});
    }
};

struct CountRecorder {
    Counts* counts;

    std::size_t root(StateId) { return 0; }
    std::size_t child(std::size_t, std::uint32_t, StateId, std::size_t) { return 0; }
    void action(std::size_t, const SuperAction&) {}
    void edge(std::size_t, StateId s, BaseActionId a, bool triggered, StateId next, double) {
        if (counts) counts->record(s, a, triggered, next);
    }
};

}  // namespace

Episode rollout(const BranchingMdp& mdp, const PolicyTable& policy, Rng& rng, double explore) {
    Episode episode;
    TreeRecorder recorder{mdp, episode};
    std::vector<Pending> queue;
    const EpisodeStats stats = simulate(mdp, policy, rng, explore, recorder, queue);
    episode.total_reward = stats.total_reward;
    episode.omega = stats.omega;
    return episode;
}

EpisodeStats rollout_counting(const BranchingMdp& mdp, const PolicyTable& policy, Rng& rng, Counts* counts,
                              double explore) {
    thread_local std::vector<Pending> queue;
    CountRecorder recorder{counts};
    return simulate(mdp, policy, rng, explore, recorder, queue);
}

void update_counts(Counts& counts, const Episode& episode) {
    for (const auto& e : episode.edges) counts.record(e.state, e.base_action, e.triggered, e.next_state);
}

std::string episode_trace(const Episode& episode) {
    std::ostringstream out;
    out.precision(17);
    out << "total_reward " << episode.total_reward << "\nomega " << episode.omega << '\n';
    for (const auto& n : episode.nodes) {
        out << "node " << n.node.to_string() << " state " << n.state;
        if (n.action) out << " action " << n.action->to_string();
        out << '\n';
    }
    for (const auto& e : episode.edges) {
        out << "edge " << e.node.to_string() << " a " << e.base_action << " triggered " << e.triggered << " next "
            << e.next_state << " reward " << e.reward << '\n';
    }
    return out.str();
}

}  // namespace branchrl

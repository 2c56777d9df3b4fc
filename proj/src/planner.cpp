#include "branchrl/planner.hpp"

#include <cmath>

#include "branchrl/simulator.hpp"

namespace branchrl {

namespace {

// q(s,a) (r(s,a) + p(.|s,a)^T next)
double edge_value(const BranchingMdp& mdp, StateId s, BaseActionId a, std::span<const double> next) {
    const double q = mdp.trigger(s, a);
    if (q == 0.0) return 0.0;
    auto row = mdp.transition_row(s, a);
    double cont = 0.0;
    for (StateId t = 0; t < mdp.S; ++t) cont += row[t] * next[t];
    return q * (mdp.reward(s, a) + cont);
}

}  // namespace

ValueTable policy_value(const BranchingMdp& mdp, const PolicyTable& policy) {
    check_policy(mdp, policy);
    ValueTable v(mdp.H, mdp.S);
    for (std::size_t h = mdp.H; h >= 1; --h) {
        auto next = v.row(h + 1);
        for (StateId s = 0; s < mdp.S; ++s) {
            if (s == mdp.ending) continue;
            double total = 0.0;
            for (BaseActionId a : policy.at(h, s).members) total += edge_value(mdp, s, a, next);
            v.at(h, s) = total;
        }
    }
    return v;
}

ValueTable mixture_policy_value(const BranchingMdp& mdp, const PolicyTable& greedy, double explore) {
    check_policy(mdp, greedy);
    const std::vector<double> inclusion = mdp.actions.inclusion_probabilities();
    ValueTable v(mdp.H, mdp.S);
    for (std::size_t h = mdp.H; h >= 1; --h) {
        auto next = v.row(h + 1);
        for (StateId s = 0; s < mdp.S; ++s) {
            if (s == mdp.ending) continue;
            double exploit = 0.0;
            for (BaseActionId a : greedy.at(h, s).members) exploit += edge_value(mdp, s, a, next);
            double uniform = 0.0;
            if (explore > 0.0)
                for (BaseActionId a = 0; a < mdp.N; ++a)
                    if (inclusion[a] > 0.0) uniform += inclusion[a] * edge_value(mdp, s, a, next);
            v.at(h, s) = explore > 0.0 ? (1.0 - explore) * exploit + explore * uniform : exploit;
        }
    }
    return v;
}

OptimalSolution optimal_values(const BranchingMdp& mdp) {
    OptimalSolution sol{ValueTable(mdp.H, mdp.S), PolicyTable(mdp.H, mdp.S)};
    std::vector<double> f(mdp.N);
    for (std::size_t h = mdp.H; h >= 1; --h) {
        auto next = sol.values.row(h + 1);
        for (StateId s = 0; s < mdp.S; ++s) {
            for (BaseActionId a = 0; a < mdp.N; ++a) f[a] = s == mdp.ending ? 0.0 : edge_value(mdp, s, a, next);
            const double best = mdp.actions.argmax_into(f, sol.policy.at(h, s));
            sol.values.at(h, s) = s == mdp.ending ? 0.0 : best;
        }
    }
    return sol;
}

double Occupancy::layer_total(std::size_t h) const {
    double total = 0.0;
    for (StateId s = 0; s < S_; ++s)
        for (BaseActionId a = 0; a < N_; ++a) total += at(h, s, a);
    return total;
}

Occupancy occupancy(const BranchingMdp& mdp, const PolicyTable& policy) {
    check_policy(mdp, policy);
    Occupancy w(mdp.H, mdp.S, mdp.N);
    // mass[s] = expected number of nodes at the current layer in state s.
    std::vector<double> mass(mdp.S, 0.0), next_mass(mdp.S);
    mass[mdp.initial] = 1.0;
    for (std::size_t h = 1; h <= mdp.H; ++h) {
        std::fill(next_mass.begin(), next_mass.end(), 0.0);
        for (StateId s = 0; s < mdp.S; ++s) {
            if (mass[s] == 0.0) continue;
            for (BaseActionId a : policy.at(h, s).members) {
                w.at(h, s, a) += mass[s];
                const double q = mdp.trigger(s, a);
                auto row = mdp.transition_row(s, a);
                for (StateId t = 0; t < mdp.S; ++t) next_mass[t] += mass[s] * q * row[t];
                next_mass[mdp.ending] += mass[s] * (1.0 - q);
            }
        }
        mass.swap(next_mass);
    }
    return w;
}

namespace {

// Exhaustive outcome enumeration over the complete m-ary tree. Nodes use
// breadth-first numbering: root 0, children of node i are i*m + 1 .. i*m + m,
// so edge e (0-based) leaves node e / m and creates node e + 1.
class OutcomeEnumerator {
public:
    OutcomeEnumerator(const BranchingMdp& mdp, const PolicyTable& policy, std::size_t n_edges)
        : mdp_(mdp), policy_(policy), states_(n_edges + 1), layers_(n_edges + 1), n_edges_(n_edges) {
        states_[0] = mdp.initial;
        layers_[0] = 1;
        for (std::size_t e = 0; e < n_edges; ++e) layers_[e + 1] = layers_[e / mdp.m] + 1;
    }

    double run() {
        expectation_ = 0.0;
        visit(0, 1.0, 0.0);
        return expectation_;
    }

private:
    void visit(std::size_t e, double prob, double reward) {
        if (e == n_edges_) {
            expectation_ += prob * reward;
            return;
        }
        const std::size_t parent = e / mdp_.m;
        const StateId s = states_[parent];
        const BaseActionId a = policy_.at(layers_[parent], s).members[e % mdp_.m];
        const double q = mdp_.trigger(s, a);
        if (q < 1.0) {
            states_[e + 1] = mdp_.ending;
            visit(e + 1, prob * (1.0 - q), reward);
        }
        if (q > 0.0) {
            const double r = mdp_.reward(s, a);
            for (StateId t = 0; t < mdp_.S; ++t) {
                const double pt = mdp_.transition(s, a, t);
                if (pt == 0.0) continue;
                states_[e + 1] = t;
                visit(e + 1, prob * q * pt, reward + r);
            }
        }
    }

    const BranchingMdp& mdp_;
    const PolicyTable& policy_;
    std::vector<StateId> states_;
    std::vector<std::size_t> layers_;
    std::size_t n_edges_;
    double expectation_ = 0.0;
};

}  // namespace

double brute_force_value(const BranchingMdp& mdp, const PolicyTable& policy) {
    check_policy(mdp, policy);
    // Edges in the complete tree: m + m^2 + ... + m^H.
    std::uint64_t n_edges = 0, layer = 1;
    for (std::size_t h = 1; h <= mdp.H; ++h) {
        layer *= mdp.m;
        n_edges += layer;
        if (n_edges > 64) throw InstanceTooLargeError("brute_force_value: tree has too many edges");
    }
    double assignments = std::pow(static_cast<double>(mdp.S + 1), static_cast<double>(n_edges));
    if (assignments > static_cast<double>(kBruteForceLimit))
        throw InstanceTooLargeError("brute_force_value: (S+1)^edges = " + std::to_string(assignments) +
                                    " exceeds the enumeration limit");
    OutcomeEnumerator enumerator(mdp, policy, n_edges);
    return enumerator.run();
}

MonteCarloEstimate mc_value(const BranchingMdp& mdp, const PolicyTable& policy, std::uint64_t episodes,
                            std::uint64_t seed) {
    check_policy(mdp, policy);
    if (episodes == 0) throw std::invalid_argument("mc_value needs at least one episode");
    Rng rng(seed);
    double sum = 0.0, sum_sq = 0.0;
    for (std::uint64_t i = 0; i < episodes; ++i) {
        const double g = rollout_counting(mdp, policy, rng, nullptr).total_reward;
        sum += g;
        sum_sq += g * g;
    }
    const double n = static_cast<double>(episodes);
    const double mean = sum / n;
    const double var = episodes > 1 ? std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0)) : 0.0;
    return {mean, std::sqrt(var / n)};
}

}  // namespace branchrl

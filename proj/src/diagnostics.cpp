#include "branchrl/diagnostics.hpp"

#include <cmath>
#include <stdexcept>

#include "branchrl/planner.hpp"
#include "branchrl/simulator.hpp"

namespace branchrl {

namespace {

struct RunningMoments {
    double sum = 0.0, sum_sq = 0.0;
    std::uint64_t n = 0;

    void add(double x) {
        sum += x;
        sum_sq += x * x;
        ++n;
    }
    double mean() const { return sum / static_cast<double>(n); }
    double stderr_() const {
        if (n < 2) return 0.0;
        const double nn = static_cast<double>(n);
        const double m = mean();
        return std::sqrt(std::max(0.0, (sum_sq - nn * m * m) / (nn - 1.0)) / nn);
    }
};

// sum_{a in A} q(s,a) r(s,a): the mean reward collected at a node.
double node_mean_reward(const BranchingMdp& mdp, const PolicyTable& policy, std::size_t h, StateId s) {
    if (s == mdp.ending) return 0.0;
    double total = 0.0;
    for (BaseActionId a : policy.at(h, s).members) total += mdp.trigger(s, a) * mdp.reward(s, a);
    return total;
}

// Enumerates every joint assignment of states to the nodes of layers 1..H.
// Nodes use breadth-first numbering (children of i are i*m+1 .. i*m+m); the
// state of node e+1 is drawn from the augmented law of edge e.
class NodeStateEnumerator {
public:
    NodeStateEnumerator(const BranchingMdp& mdp, const PolicyTable& policy, double root_value)
        : mdp_(mdp), policy_(policy), root_value_(root_value) {
        std::size_t nodes = 0, width = 1;
        for (std::size_t h = 1; h <= mdp.H; ++h) {
            nodes += width;
            width *= mdp.m;
        }
        states_.resize(nodes);
        layers_.resize(nodes);
        states_[0] = mdp.initial;
        layers_[0] = 1;
        for (std::size_t i = 1; i < nodes; ++i) layers_[i] = layers_[(i - 1) / mdp.m] + 1;
    }

    void run() { visit(1, 1.0); }

    double mid = 0.0;
    double omega_sq = 0.0;

private:
    void visit(std::size_t node, double prob) {
        if (node == states_.size()) {
            double g = 0.0, omega = 0.0;
            for (std::size_t i = 0; i < states_.size(); ++i) {
                g += node_mean_reward(mdp_, policy_, layers_[i], states_[i]);
                omega += states_[i] != mdp_.ending ? 1.0 : 0.0;
            }
            mid += prob * (g - root_value_) * (g - root_value_);
            omega_sq += prob * omega * omega;
            return;
        }
        const std::size_t parent = (node - 1) / mdp_.m;
        const StateId s = states_[parent];
        if (s == mdp_.ending) {
            states_[node] = mdp_.ending;
            visit(node + 1, prob);
            return;
        }
        const BaseActionId a = policy_.at(layers_[parent], s).members[(node - 1) % mdp_.m];
        const auto law = augmented_next_distribution(mdp_, s, a);
        for (StateId t = 0; t < mdp_.S; ++t) {
            if (law[t] == 0.0) continue;
            states_[node] = t;
            visit(node + 1, prob * law[t]);
        }
    }

    const BranchingMdp& mdp_;
    const PolicyTable& policy_;
    double root_value_;
    std::vector<StateId> states_;
    std::vector<std::size_t> layers_;
};

}  // namespace

ValueDifferenceCheck check_value_difference(const BranchingMdp& primed, const BranchingMdp& reference,
                                            const PolicyTable& policy) {
    if (primed.S != reference.S || primed.N != reference.N || primed.m != reference.m || primed.H != reference.H ||
        primed.ending != reference.ending || primed.initial != reference.initial || primed.r != reference.r ||
        !(primed.actions == reference.actions))
        throw std::invalid_argument("models differ in structure or rewards");
    const ValueTable v_primed = policy_value(primed, policy);
    const ValueTable v_ref = policy_value(reference, policy);
    const Occupancy w = occupancy(reference, policy);

    ValueDifferenceCheck out;
    out.lhs = v_primed.at(1, primed.initial) - v_ref.at(1, primed.initial);
    for (std::size_t h = 1; h <= primed.H; ++h) {
        auto next = v_primed.row(h + 1);
        for (StateId s = 0; s < primed.S; ++s) {
            for (BaseActionId a = 0; a < primed.N; ++a) {
                const double weight = w.at(h, s, a);
                if (weight == 0.0) continue;
                const double q1 = primed.trigger(s, a), q2 = reference.trigger(s, a);
                double transition_term = 0.0;
                for (StateId t = 0; t < primed.S; ++t)
                    transition_term += (q1 * primed.transition(s, a, t) - q2 * reference.transition(s, a, t)) * next[t];
                out.rhs += weight * ((q1 - q2) * primed.reward(s, a) + transition_term);
            }
        }
    }
    out.gap = std::abs(out.lhs - out.rhs);
    return out;
}

LtvCheck check_ltv(const BranchingMdp& mdp, const PolicyTable& policy, LtvMode mode, std::uint64_t rollouts,
                   std::uint64_t seed) {
    const ValueTable v = policy_value(mdp, policy);
    const Occupancy w = occupancy(mdp, policy);
    const double root = v.at(1, mdp.initial);

    LtvCheck out;
    for (std::size_t h = 1; h <= mdp.H; ++h) {
        auto next = v.row(h + 1);
        for (StateId s = 0; s < mdp.S; ++s) {
            for (BaseActionId a = 0; a < mdp.N; ++a) {
                const double weight = w.at(h, s, a);
                if (weight == 0.0) continue;
                const auto law = augmented_next_distribution(mdp, s, a);
                double mean = 0.0, second = 0.0;
                for (StateId t = 0; t < mdp.S; ++t) {
                    mean += law[t] * next[t];
                    second += law[t] * next[t] * next[t];
                }
                out.lhs += weight * std::max(0.0, second - mean * mean);
            }
        }
    }

    if (mode == LtvMode::Exact) {
        // Edges that choose a node state: m + ... + m^{H-1}.
        double assignments = 1.0;
        std::size_t width = 1;
        for (std::size_t h = 1; h < mdp.H; ++h) {
            width *= mdp.m;
            assignments *= std::pow(static_cast<double>(mdp.S), static_cast<double>(width));
            if (assignments > static_cast<double>(kExactLtvLimit))
                throw std::length_error("check_ltv: exact enumeration exceeds the assignment limit");
        }
        NodeStateEnumerator enumerator(mdp, policy, root);
        enumerator.run();
        out.mid = enumerator.mid;
        out.bound = enumerator.omega_sq;
        out.equality_pass = std::abs(out.lhs - out.mid) <= 1e-9;
        out.bound_pass = out.mid <= out.bound + 1e-9;
        return out;
    }

    if (rollouts < 2) throw std::invalid_argument("Monte-Carlo mode needs at least two rollouts");
    Rng rng(seed);
    RunningMoments deviation, omega_sq;
    for (std::uint64_t i = 0; i < rollouts; ++i) {
        const Episode e = rollout(mdp, policy, rng);
        double g = 0.0;
        for (const auto& node : e.nodes)
            if (node.action) g += node_mean_reward(mdp, policy, node.node.layer(), node.state);
        deviation.add((g - root) * (g - root));
        const double om = static_cast<double>(e.omega);
        omega_sq.add(om * om);
    }
    out.mid = deviation.mean();
    out.mid_stderr = deviation.stderr_();
    out.bound = omega_sq.mean();
    out.bound_stderr = omega_sq.stderr_();
    out.equality_pass = std::abs(out.lhs - out.mid) <= 4.0 * out.mid_stderr;
    out.bound_pass = out.mid <= out.bound + 4.0 * (out.mid_stderr + out.bound_stderr);
    return out;
}

MomentsCheck check_triggered_moments(const BranchingMdp& mdp, const PolicyTable& policy, std::uint64_t rollouts,
                                     std::uint64_t seed, bool force) {
    const double q_cap = 1.0 / static_cast<double>(mdp.m);
    bool relaxed = true;
    for (StateId s = 0; s < mdp.S; ++s) {
        if (s == mdp.ending) continue;
        for (BaseActionId a = 0; a < mdp.N; ++a) {
            const double q = mdp.trigger(s, a);
            if (q > q_cap && !force) throw AssumptionViolatedError("q exceeds 1/m; triggered-node bounds do not apply");
            relaxed &= std::abs(q - q_cap) <= 1e-15;
        }
    }
    if (rollouts < 2) throw std::invalid_argument("need at least two rollouts");
    Rng rng(seed);
    RunningMoments omega, omega_sq;
    for (std::uint64_t i = 0; i < rollouts; ++i) {
        const double om = static_cast<double>(rollout_counting(mdp, policy, rng, nullptr).omega);
        omega.add(om);
        omega_sq.add(om * om);
    }
    const double H = static_cast<double>(mdp.H);
    MomentsCheck out;
    out.mean = omega.mean();
    out.mean_stderr = omega.stderr_();
    out.mean_sq = omega_sq.mean();
    out.mean_sq_stderr = omega_sq.stderr_();
    out.mean_pass = out.mean <= H + 4.0 * out.mean_stderr;
    out.sq_pass = out.mean_sq <= 3.0 * H * H + 4.0 * out.mean_sq_stderr;
    if (relaxed) out.relaxed_equality_pass = std::abs(out.mean - H) <= 4.0 * out.mean_stderr;
    return out;
}

}  // namespace branchrl

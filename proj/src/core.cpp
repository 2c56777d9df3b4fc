#include "branchrl/core.hpp"

#include <cmath>
#include <sstream>

namespace branchrl {

NodeIndex NodeIndex::child(std::uint32_t i, std::size_t m, std::size_t horizon) const {
    if (i < 1 || i > m) throw std::out_of_range("child digit " + std::to_string(i) + " outside [1, m]");
    if (digits_.size() >= horizon)
        throw std::out_of_range("child of a layer-" + std::to_string(layer()) + " node exceeds horizon");
    auto d = digits_;
    d.push_back(i);
    return NodeIndex(std::move(d));
}

std::string NodeIndex::to_string() const {
    std::ostringstream out;
    out << '<';
    for (std::size_t i = 0; i < digits_.size(); ++i) out << (i ? "," : "") << digits_[i];
    out << '>';
    return out.str();
}

BranchingMdp BranchingMdp::blank(std::size_t S, std::size_t N, std::size_t m, std::size_t H, StateId ending,
                                 StateId initial, ActionClass actions) {
    BranchingMdp mdp;
    mdp.S = S;
    mdp.N = N;
    mdp.m = m;
    mdp.H = H;
    mdp.ending = ending;
    mdp.initial = initial;
    mdp.q.assign(S * N, 0.0);
    mdp.r.assign(S * N, 0.0);
    mdp.p.assign(S * N * S, 0.0);
    mdp.actions = std::move(actions);
    for (BaseActionId a = 0; a < N; ++a) mdp.transition_row_ref(ending, a)[ending] = 1.0;
    return mdp;
}

namespace {

std::string pair_location(StateId s, BaseActionId a) {
    return "(s=" + std::to_string(s) + ", a=" + std::to_string(a) + ")";
}

}  // namespace

std::vector<Violation> validate(const BranchingMdp& mdp) {
    std::vector<Violation> out;
    auto add = [&](std::string field, std::string loc, double mag, std::string msg) {
        out.push_back({std::move(field), std::move(loc), mag, std::move(msg)});
    };

    if (mdp.S == 0 || mdp.N == 0 || mdp.H == 0 || mdp.m == 0) {
        add("shape", "", 0.0, "S, N, m and H must all be positive");
        return out;
    }
    if (mdp.m > mdp.N) add("m", "", static_cast<double>(mdp.m), "m exceeds N");
    if (mdp.q.size() != mdp.S * mdp.N || mdp.r.size() != mdp.S * mdp.N || mdp.p.size() != mdp.S * mdp.N * mdp.S) {
        add("shape", "", 0.0, "q, r, p sizes do not match S and N");
        return out;
    }
    if (mdp.ending >= mdp.S) add("ending", "", static_cast<double>(mdp.ending), "ending state out of range");
    if (mdp.initial >= mdp.S) add("initial", "", static_cast<double>(mdp.initial), "initial state out of range");
    if (mdp.S > 1 && mdp.ending == mdp.initial) add("initial", "", 0.0, "initial state coincides with ending state");
    if (!out.empty()) return out;

    for (const auto& problem : mdp.actions.problems()) add("action_class", "", 0.0, problem);
    if (mdp.actions.n_actions() != mdp.N) add("action_class", "", 0.0, "action class N differs from model N");
    if (mdp.actions.m() != mdp.m) add("action_class", "", 0.0, "action class m differs from model m");

    const double q_cap = 1.0 / static_cast<double>(mdp.m);
    for (StateId s = 0; s < mdp.S; ++s) {
        for (BaseActionId a = 0; a < mdp.N; ++a) {
            const auto loc = pair_location(s, a);
            const double q = mdp.trigger(s, a);
            const double r = mdp.reward(s, a);
            if (!(q >= 0.0 && q <= 1.0)) add("q", loc, q, "q outside [0, 1]");
            if (!(r >= 0.0 && r <= 1.0)) add("r", loc, r, "r outside [0, 1]");
            if (mdp.assumption1_enforced && q > q_cap) add("q", loc, q - q_cap, "q exceeds 1/m");

            double total = 0.0;
            bool negative = false;
            for (double x : mdp.transition_row(s, a)) {
                total += x;
                negative |= !(x >= 0.0);
            }
            if (negative) add("p", loc, 0.0, "p row has a negative or non-finite entry");
            if (std::abs(total - 1.0) > kStochasticTolerance)
                add("p", loc, total - 1.0, "p row sums to " + std::to_string(total));

            if (s == mdp.ending) {
                if (q != 0.0) add("q", loc, q, "ending state must have zero trigger probability");
                if (r != 0.0) add("r", loc, r, "ending state must have zero reward");
                if (mdp.transition(s, a, mdp.ending) != 1.0)
                    add("p", loc, 1.0 - mdp.transition(s, a, mdp.ending), "ending state must be absorbing");
            }
        }
    }
    return out;
}

std::vector<double> augmented_next_distribution(const BranchingMdp& mdp, StateId s, BaseActionId a) {
    const double q = mdp.trigger(s, a);
    std::vector<double> out(mdp.S, 0.0);
    auto row = mdp.transition_row(s, a);
    for (StateId t = 0; t < mdp.S; ++t) out[t] = q * row[t];
    out[mdp.ending] += 1.0 - q;
    return out;
}

BranchingMdp with_rewards(const BranchingMdp& mdp, std::span<const double> rewards) {
    if (rewards.size() != mdp.S * mdp.N) throw std::invalid_argument("reward table must be S x N");
    BranchingMdp out = mdp;
    out.r.assign(rewards.begin(), rewards.end());
    for (BaseActionId a = 0; a < mdp.N; ++a) out.reward_ref(mdp.ending, a) = 0.0;
    return out;
}

void check_policy(const BranchingMdp& mdp, const PolicyTable& policy) {
    if (policy.horizon() != mdp.H || policy.n_states() != mdp.S)
        throw InvalidPolicyError("policy shape does not match the model (H x S)");
    for (std::size_t h = 1; h <= mdp.H; ++h)
        for (StateId s = 0; s < mdp.S; ++s)
            if (!mdp.actions.contains(policy.at(h, s)))
                throw InvalidPolicyError("policy choice " + policy.at(h, s).to_string() + " at (h=" +
                                         std::to_string(h) + ", s=" + std::to_string(s) +
                                         ") is not in the decision class");
}

}  // namespace branchrl

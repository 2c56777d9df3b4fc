#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "branchrl/oracle.hpp"
#include "branchrl/super_action.hpp"

namespace branchrl {

/// Position of a node in the trajectory tree. The root is the empty digit
/// string and sits at layer 1; child i (1-based) of a node appends i.
class NodeIndex {
public:
    NodeIndex() = default;
    explicit NodeIndex(std::vector<std::uint32_t> digits) : digits_(std::move(digits)) {}

    const std::vector<std::uint32_t>& digits() const { return digits_; }
    std::size_t depth() const { return digits_.size(); }
    std::size_t layer() const { return digits_.size() + 1; }

    /// Throws std::out_of_range when i is outside [1, m] or the child would sit
    /// below layer `horizon + 1`.
    NodeIndex child(std::uint32_t i, std::size_t m, std::size_t horizon) const;

    std::string to_string() const;

    friend auto operator<=>(const NodeIndex&, const NodeIndex&) = default;
    friend bool operator==(const NodeIndex&, const NodeIndex&) = default;

private:
    std::vector<std::uint32_t> digits_;
};

/// Tabular branching MDP. Indices are dense; q, r are S x N row-major and p is
/// S x N x S. Parameters are time-homogeneous. Treat as immutable once built.
struct BranchingMdp {
    std::size_t S = 0;
    std::size_t N = 0;
    std::size_t m = 0;
    std::size_t H = 0;
    StateId ending = 0;
    StateId initial = 0;
    std::vector<double> q;
    std::vector<double> p;
    std::vector<double> r;
    ActionClass actions;
    bool assumption1_enforced = true;

    /// Zero-initialised model whose ending state already satisfies the
    /// absorbing constraints; every other p row is left empty (all zero).
    static BranchingMdp blank(std::size_t S, std::size_t N, std::size_t m, std::size_t H, StateId ending,
                              StateId initial, ActionClass actions);

    double trigger(StateId s, BaseActionId a) const { return q[s * N + a]; }
    double reward(StateId s, BaseActionId a) const { return r[s * N + a]; }
    double transition(StateId s, BaseActionId a, StateId next) const { return p[(s * N + a) * S + next]; }
    std::span<const double> transition_row(StateId s, BaseActionId a) const {
        return {p.data() + (s * N + a) * S, S};
    }

    double& trigger_ref(StateId s, BaseActionId a) { return q[s * N + a]; }
    double& reward_ref(StateId s, BaseActionId a) { return r[s * N + a]; }
    std::span<double> transition_row_ref(StateId s, BaseActionId a) { return {p.data() + (s * N + a) * S, S}; }

    bool is_regular(StateId s) const { return s != ending; }

    friend bool operator==(const BranchingMdp&, const BranchingMdp&) = default;
};

inline constexpr double kStochasticTolerance = 1e-12;

struct Violation {
    std::string field;
    std::string location;
    double magnitude = 0.0;
    std::string message;
};

/// Checks every structural and probabilistic constraint of the model,
/// including the bounded-trigger condition q <= 1/m when the flag is set.
std::vector<Violation> validate(const BranchingMdp& mdp);

/// Successor law of a single edge: mass 1 - q on the ending state plus
/// q * p(. | s, a) spread over all states.
std::vector<double> augmented_next_distribution(const BranchingMdp& mdp, StateId s, BaseActionId a);

/// Copy of the model with the reward table replaced (S x N, row-major).
/// Rewards at the ending state are forced to 0.
BranchingMdp with_rewards(const BranchingMdp& mdp, std::span<const double> rewards);

/// One super action per (step, state); steps are 1-based.
class PolicyTable {
public:
    PolicyTable() = default;
    PolicyTable(std::size_t horizon, std::size_t n_states, const SuperAction& fill = {})
        : H_(horizon), S_(n_states), choice_(horizon * n_states, fill) {}

    std::size_t horizon() const { return H_; }
    std::size_t n_states() const { return S_; }

    const SuperAction& at(std::size_t h, StateId s) const { return choice_.at((h - 1) * S_ + s); }
    SuperAction& at(std::size_t h, StateId s) { return choice_.at((h - 1) * S_ + s); }

    /// Same action at every (step, state).
    static PolicyTable constant(std::size_t horizon, std::size_t n_states, const SuperAction& a) {
        return PolicyTable(horizon, n_states, a);
    }

    friend bool operator==(const PolicyTable&, const PolicyTable&) = default;

private:
    std::size_t H_ = 0;
    std::size_t S_ = 0;
    std::vector<SuperAction> choice_;
};

/// Per-step state values for steps 1..H+1; row H+1 is the zero terminal row.
class ValueTable {
public:
    ValueTable() = default;
    ValueTable(std::size_t horizon, std::size_t n_states)
        : H_(horizon), S_(n_states), v_((horizon + 1) * n_states, 0.0) {}

    std::size_t horizon() const { return H_; }
    std::size_t n_states() const { return S_; }

    double at(std::size_t h, StateId s) const { return v_.at((h - 1) * S_ + s); }
    double& at(std::size_t h, StateId s) { return v_.at((h - 1) * S_ + s); }

    std::span<const double> row(std::size_t h) const { return {v_.data() + (h - 1) * S_, S_}; }
    std::span<double> row(std::size_t h) { return {v_.data() + (h - 1) * S_, S_}; }

    friend bool operator==(const ValueTable&, const ValueTable&) = default;

private:
    std::size_t H_ = 0;
    std::size_t S_ = 0;
    std::vector<double> v_;
};

class InvalidPolicyError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Throws InvalidPolicyError unless the table matches the model's shape and
/// every choice belongs to the decision class.
void check_policy(const BranchingMdp& mdp, const PolicyTable& policy);

}  // namespace branchrl

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "branchrl/rng.hpp"
#include "branchrl/super_action.hpp"

namespace branchrl {

class EmptyClassError : public std::runtime_error {
public:
    EmptyClassError() : std::runtime_error("empty decision class") {}
};

/// Result of a linear maximization over the decision class.
struct OracleChoice {
    SuperAction action;
    double total = 0.0;
};

/// The combinatorial decision class of super actions.
///
/// Three shapes are supported: every m-subset of the N base actions (TopM),
/// a list of disjoint blocks (Partition), and an arbitrary list (Explicit).
/// Weights passed to the oracle may contain +infinity; such entries rank above
/// every finite weight, so a set's score is compared first by the number of
/// infinite members and then by the finite remainder.
class ActionClass {
public:
    enum class Kind { TopM, Partition, Explicit };

    ActionClass() = default;

    static ActionClass top_m(std::size_t n_actions, std::size_t m);
    static ActionClass partition(std::size_t n_actions, std::vector<SuperAction> blocks);
    static ActionClass explicit_list(std::size_t n_actions, std::vector<SuperAction> actions);

    Kind kind() const { return kind_; }
    std::size_t n_actions() const { return n_actions_; }
    std::size_t m() const { return m_; }

    /// Blocks (Partition) or listed actions (Explicit); empty for TopM.
    const std::vector<SuperAction>& listed() const { return listed_; }

    /// Number of super actions in the class, saturating at UINT64_MAX.
    std::uint64_t size() const;

    bool contains(const SuperAction& action) const;

    /// Structural problems with the class itself; empty when well formed.
    std::vector<std::string> problems() const;

    /// argmax over the class of sum_{a in A} w(a), ties broken toward the
    /// lexicographically smallest member list. TopM runs in O(N m).
    OracleChoice argmax(std::span<const double> weights) const;

    /// Same as argmax but writes into `out`, reusing its storage.
    double argmax_into(std::span<const double> weights, SuperAction& out) const;

    /// Visits every member of the class once, in lexicographic order. The
    /// visitor returns false to stop early.
    void for_each(const std::function<bool(const SuperAction&)>& visit) const;
    std::vector<SuperAction> enumerate() const;

    SuperAction uniform(Rng& rng) const;

    /// P(a in A) for A drawn uniformly from the class, per base action.
    std::vector<double> inclusion_probabilities() const;

    friend bool operator==(const ActionClass&, const ActionClass&) = default;

private:
    Kind kind_ = Kind::TopM;
    std::size_t n_actions_ = 0;
    std::size_t m_ = 0;
    std::vector<SuperAction> listed_;
};

}  // namespace branchrl

#pragma once

#include <compare>
#include <cstddef>
#include <string>
#include <vector>

namespace branchrl {

using StateId = std::size_t;
using BaseActionId = std::size_t;

/// A set of base actions taken together at one node. Members are kept sorted
/// and distinct; the size equals the model's m.
struct SuperAction {
    std::vector<BaseActionId> members;

    SuperAction() = default;
    explicit SuperAction(std::vector<BaseActionId> m) : members(std::move(m)) {}

    std::size_t size() const { return members.size(); }
    bool contains(BaseActionId a) const;

    /// True when members are strictly increasing and all below n_actions.
    bool well_formed(std::size_t n_actions) const;

    std::string to_string() const;

    friend auto operator<=>(const SuperAction&, const SuperAction&) = default;
    friend bool operator==(const SuperAction&, const SuperAction&) = default;
};

}  // namespace branchrl

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>

#include "branchrl/core.hpp"

namespace branchrl {

// Numerical checks of the tree-structured identities: value difference,
// law of total variance and triggered-node moments. Each returns both sides
// so callers can report the gap.

struct ValueDifferenceCheck {
    double lhs = 0.0;  // V'_1(s0) - V''_1(s0)
    double rhs = 0.0;  // occupancy-weighted per-edge deviations under M''
    double gap = 0.0;
};

/// Both models must share S, N, m, H, ending, initial, rewards and class.
/// Throws std::invalid_argument on a structural mismatch.
ValueDifferenceCheck check_value_difference(const BranchingMdp& primed, const BranchingMdp& reference,
                                            const PolicyTable& policy);

enum class LtvMode { Exact, MonteCarlo };

struct LtvCheck {
    double lhs = 0.0;          // sum_h sum_{s,a} w_h(s,a) Var_aug(s,a)(V_{h+1})
    double mid = 0.0;          // E[(G - V_1(s0))^2], G = sum of q*r over realized edges
    double mid_stderr = 0.0;   // 0 in exact mode
    double bound = 0.0;        // E[omega^2]
    double bound_stderr = 0.0;
    bool equality_pass = false;  // |lhs - mid| within 1e-9 (exact) or 4 stderr (MC)
    bool bound_pass = false;     // mid <= bound (+ 4 combined stderr in MC)
};

/// Upper bound on node-state assignments enumerated by exact mode.
inline constexpr std::uint64_t kExactLtvLimit = 1'000'000;

/// `rollouts` and `seed` are used only in Monte-Carlo mode. Exact mode throws
/// std::length_error when the enumeration would exceed kExactLtvLimit.
LtvCheck check_ltv(const BranchingMdp& mdp, const PolicyTable& policy, LtvMode mode, std::uint64_t rollouts = 0,
                   std::uint64_t seed = 0);

struct MomentsCheck {
    double mean = 0.0;
    double mean_stderr = 0.0;
    double mean_sq = 0.0;
    double mean_sq_stderr = 0.0;
    bool mean_pass = false;  // mean <= H + 4 stderr
    bool sq_pass = false;    // mean_sq <= 3 H^2 + 4 stderr
    /// Set when q = 1/m on every regular pair: |mean - H| <= 4 stderr.
    std::optional<bool> relaxed_equality_pass;
};

class AssumptionViolatedError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Monte-Carlo moments of the triggered-node count omega. Refuses models with
/// some q > 1/m unless `force` is set.
MomentsCheck check_triggered_moments(const BranchingMdp& mdp, const PolicyTable& policy, std::uint64_t rollouts,
                                     std::uint64_t seed, bool force = false);

}  // namespace branchrl

#include <doctest.h>

#include <cmath>

#include "branchrl/diagnostics.hpp"
#include "branchrl/instances.hpp"
#include "branchrl/planner.hpp"

using namespace branchrl;

namespace {

// Occupancy-weighted one-step deviations computed directly from the two
// models, without going through the library check.
double value_difference_rhs(const BranchingMdp& primed, const BranchingMdp& ref, const PolicyTable& pi) {
    const auto w = occupancy(ref, pi);
    const auto v = policy_value(primed, pi);
    double total = 0.0;
    for (std::size_t h = 1; h <= ref.H; ++h)
        for (StateId s = 0; s < ref.S; ++s)
            for (BaseActionId a = 0; a < ref.N; ++a) {
                if (s == ref.ending) continue;
                double pv1 = 0.0, pv2 = 0.0;
                for (StateId t = 0; t < ref.S; ++t) {
                    pv1 += primed.transition(s, a, t) * v.at(h + 1, t);
                    pv2 += ref.transition(s, a, t) * v.at(h + 1, t);
                }
                const double r = ref.reward(s, a);
                total += w.at(h, s, a) * (primed.trigger(s, a) * (r + pv1) - ref.trigger(s, a) * (r + pv2));
            }
    return total;
}

BranchingMdp chain(double q) {
    auto mdp = BranchingMdp::blank(2, 1, 1, 2, 0, 1, ActionClass::top_m(1, 1));
    mdp.trigger_ref(1, 0) = q;
    mdp.reward_ref(1, 0) = 1.0;
    mdp.transition_row_ref(1, 0)[1] = 1.0;
    return mdp;
}

}  // namespace

TEST_CASE("value difference") {
    const auto base = random_instance(3, 3, 2, 3, 1);
    const auto pi = random_policy(base, 1);
    const auto same = check_value_difference(base, base, pi);
    CHECK(same.lhs == 0.0);
    CHECK(same.rhs == 0.0);

    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto ref = random_instance(3, 3, 2, 3, seed);
        auto primed = random_instance(3, 3, 2, 3, seed + 1000003);
        primed = with_rewards(primed, ref.r);
        const auto policy = random_policy(ref, seed);
        const auto c = check_value_difference(primed, ref, policy);
        const double lhs = policy_value(primed, policy).at(1, 1) - policy_value(ref, policy).at(1, 1);
        CHECK(std::abs(c.lhs - lhs) <= 1e-12);
        CHECK(std::abs(c.rhs - value_difference_rhs(primed, ref, policy)) <= 1e-12);
        CHECK(std::abs(c.lhs - c.rhs) <= 1e-9);
    }

    // Same triggers, different transitions.
    auto p2 = random_instance(4, 3, 2, 3, 5);
    auto p1 = p2;
    for (StateId s = 1; s < 4; ++s)
        for (BaseActionId a = 0; a < 3; ++a) {
            auto row = p1.transition_row_ref(s, a);
            std::fill(row.begin(), row.end(), 0.25);
        }
    const auto d = check_value_difference(p1, p2, random_policy(p2, 5));
    CHECK(std::abs(d.lhs - d.rhs) <= 1e-9);

    auto other = base;
    other.r[4] = 0.123;
    CHECK_THROWS_AS(check_value_difference(other, base, pi), std::invalid_argument);
    CHECK_THROWS_AS(check_value_difference(random_instance(4, 3, 2, 3, 1), base, pi), std::invalid_argument);
}

TEST_CASE("total variance on a two-layer chain by hand") {
    // V2 = 1/2, V1 = 3/4; G is 1/2 or 1 with equal odds.
    const auto c = check_ltv(chain(0.5), PolicyTable::constant(2, 2, SuperAction({0})), LtvMode::Exact);
    CHECK(c.lhs == doctest::Approx(0.0625).epsilon(1e-14));
    CHECK(c.mid == doctest::Approx(0.0625).epsilon(1e-14));
    CHECK(c.bound == doctest::Approx(2.5).epsilon(1e-14));
    CHECK(c.equality_pass);
    CHECK(c.bound_pass);

    const auto det = check_ltv(chain(1.0), PolicyTable::constant(2, 2, SuperAction({0})), LtvMode::Exact);
    CHECK(det.lhs == 0.0);
    CHECK(det.mid == 0.0);
}

TEST_CASE("total variance: exact identity on random instances and Monte-Carlo agreement") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto mdp = random_instance(3, 3, 2, 2, seed);
        const auto c = check_ltv(mdp, random_policy(mdp, seed), LtvMode::Exact);
        CHECK(std::abs(c.lhs - c.mid) <= 1e-9);
        CHECK(c.equality_pass);
        CHECK(c.bound_pass);
    }
    const auto mdp = random_instance(3, 3, 2, 3, 4);
    const auto pi = random_policy(mdp, 4);
    const auto exact = check_ltv(mdp, pi, LtvMode::Exact);
    const auto mc = check_ltv(mdp, pi, LtvMode::MonteCarlo, 50'000, 3);
    CHECK(mc.lhs == doctest::Approx(exact.lhs).epsilon(1e-12));
    CHECK(std::abs(mc.mid - exact.mid) <= 4.0 * mc.mid_stderr);
    CHECK(std::abs(mc.bound - exact.bound) <= 4.0 * mc.bound_stderr);

    const auto exp = experiment_instance(10);
    CHECK_THROWS_AS(check_ltv(exp, random_policy(exp, 1), LtvMode::Exact), std::length_error);
    CHECK_THROWS_AS(check_ltv(mdp, pi, LtvMode::MonteCarlo, 1, 0), std::invalid_argument);
}

TEST_CASE("triggered-node moments") {
    const auto relaxed = relaxed_instance(0.75, 5, 4, 2, 3, 0.05, 1);
    const auto rpi = hard_instance_optimal_policy(relaxed);
    CHECK_THROWS_AS(check_triggered_moments(relaxed.mdp, rpi, 100, 1), AssumptionViolatedError);

    const auto short_ = random_instance(4, 3, 2, 1, 2);
    const auto one = check_triggered_moments(short_, random_policy(short_, 2), 1000, 1);
    CHECK(one.mean == 1.0);
    CHECK(one.mean_sq == 1.0);
    CHECK(one.mean_stderr == 0.0);
    CHECK(one.mean_pass);
    CHECK(one.sq_pass);
    CHECK_FALSE(one.relaxed_equality_pass.has_value());

    const auto crit = critical_instance(4, 4, 2, 4, 3);
    const auto c = check_triggered_moments(crit, random_policy(crit, 3), 20'000, 5);
    REQUIRE(c.relaxed_equality_pass.has_value());
    CHECK(*c.relaxed_equality_pass);
    CHECK(c.mean_pass);
    CHECK(c.sq_pass);

    double prev = 0.0;
    for (std::size_t H : {3u, 6u}) {
        const auto inst = relaxed_instance(0.75, 5, 4, 2, H, 0.05, 1);
        const auto m = check_triggered_moments(inst.mdp, hard_instance_optimal_policy(inst), 20'000, 7, true);
        CHECK(m.mean > prev);
        prev = m.mean;
    }
    CHECK(prev > 6.0);
}

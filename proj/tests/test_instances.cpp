#include <doctest.h>

#include <cmath>

#include "branchrl/instances.hpp"
#include "branchrl/planner.hpp"

using namespace branchrl;

TEST_CASE("experiment instance layout") {
    const auto e10 = experiment_instance(10);
    CHECK(e10.S == 6);
    CHECK(e10.m == 2);
    CHECK(e10.H == 6);
    CHECK(e10.initial == 1);
    CHECK(e10.actions.size() == 45);
    CHECK(experiment_instance(15).actions.size() == 105);
    CHECK(e10.trigger(3, 2) == 0.25);
    CHECK(e10.trigger(3, 8) == 0.5);
    CHECK(e10.trigger(5, 9) == 0.5);
    CHECK(e10.reward(4, 0) == 1.0);
    CHECK(e10.transition(1, 0, 2) == 0.5);
    CHECK(e10.transition(1, 0, 4) == 0.0);
    CHECK(e10.transition(2, 5, 4) == 0.5);
    CHECK(e10.transition(5, 1, 3) == 0.5);
    CHECK(validate(e10).empty());
}

TEST_CASE("lower-bound instance: optimal value is H and the deficient policy loses m eta (H - 1)") {
    for (std::size_t H : {1u, 2u, 4u, 6u}) {
        const auto inst = regret_lb_instance(6, 6, 2, H, 0.05, 11);
        REQUIRE(validate(inst.mdp).empty());
        CHECK(inst.mdp.actions.size() == 3);
        const double vstar = optimal_values(inst.mdp).values.at(1, 1);
        CHECK(std::abs(vstar - static_cast<double>(H)) <= 1e-12);
        const double opt = policy_value(inst.mdp, hard_instance_optimal_policy(inst)).at(1, 1);
        const double sub = policy_value(inst.mdp, hard_instance_suboptimal_policy(inst)).at(1, 1);
        CHECK(std::abs(opt - vstar) <= 1e-12);
        // Hand derivation: layer 1 is shared, every later layer carries the
        // 1 - m eta survival factor from the bandit layer.
        const double expect = 2.0 * 0.05 * static_cast<double>(H - 1);
        CHECK(std::abs((opt - sub) - expect) <= 1e-12);
        CHECK(std::abs(hard_instance_gap(2, H, 0.5, 0.05) - expect) <= 1e-12);
    }
}

TEST_CASE("optimal policy picks the stored block") {
    const auto inst = regret_lb_instance(7, 8, 2, 3, 0.1, 4);
    const auto opt = optimal_values(inst.mdp);
    const auto& blocks = inst.mdp.actions.listed();
    for (std::size_t i = 0; i < inst.optimal_block.size(); ++i)
        for (std::size_t h = 1; h <= inst.mdp.H; ++h)
            CHECK(opt.policy.at(h, inst.bandit_state(i)) == blocks[inst.optimal_block[i]]);
}

TEST_CASE("relaxed instance gap follows the geometric form") {
    const double qbar = 0.75, eta = 0.05;
    const double rho = 2 * qbar;
    for (std::size_t H : {1u, 2u, 3u, 6u}) {
        const auto inst = relaxed_instance(qbar, 5, 4, 2, H, eta, 3);
        CHECK_FALSE(inst.mdp.assumption1_enforced);
        CHECK(validate(inst.mdp).empty());
        double expect = 0.0;
        for (std::size_t k = 0; k + 1 < H; ++k) expect += std::pow(rho, static_cast<double>(k + 1));
        expect *= 2 * eta;
        const double sub = policy_value(inst.mdp, hard_instance_suboptimal_policy(inst)).at(1, 1);
        const double opt = policy_value(inst.mdp, hard_instance_optimal_policy(inst)).at(1, 1);
        CHECK(std::abs((opt - sub) - expect) <= 1e-9);
        CHECK(std::abs(hard_instance_gap(2, H, qbar, eta) - expect) <= 1e-9);
    }
    CHECK(hard_instance_gap(2, 1, 0.75, 0.05) == 0.0);
    CHECK(hard_instance_gap(3, 6, 0.5, 0.01) > hard_instance_gap(3, 6, 1.0 / 3.0, 0.01));
}

TEST_CASE("hard instance argument checks") {
    CHECK_THROWS_AS(regret_lb_instance(6, 5, 2, 3, 0.1, 0), std::invalid_argument);
    CHECK_THROWS_AS(regret_lb_instance(3, 4, 2, 3, 0.1, 0), std::invalid_argument);
    CHECK_THROWS_AS(regret_lb_instance(6, 4, 2, 3, 0.0, 0), std::invalid_argument);
    CHECK_THROWS_AS(hard_instance_suboptimal_policy(regret_lb_instance(5, 2, 2, 3, 0.1, 0)), std::invalid_argument);
}

TEST_CASE("random instances are valid and reproducible") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto mdp = random_instance(5, 4, 2, 3, seed);
        CHECK(validate(mdp).empty());
        CHECK_NOTHROW(check_policy(mdp, random_policy(mdp, seed)));
    }
    CHECK(random_instance(5, 4, 2, 3, 8) == random_instance(5, 4, 2, 3, 8));
    CHECK_FALSE(random_instance(5, 4, 2, 3, 8) == random_instance(5, 4, 2, 3, 9));
    CHECK(random_policy(experiment_instance(10), 3) == random_policy(experiment_instance(10), 3));
}

TEST_CASE("critical instance keeps every branch alive on a trigger") {
    const auto mdp = critical_instance(5, 4, 2, 4, 1);
    CHECK(validate(mdp).empty());
    for (StateId s = 1; s < mdp.S; ++s)
        for (BaseActionId a = 0; a < mdp.N; ++a) {
            CHECK(mdp.trigger(s, a) == 0.5);
            CHECK(mdp.transition(s, a, 0) == 0.0);
        }
    const auto c = with_constant_trigger(mdp, 0.1);
    CHECK(c.trigger(2, 3) == 0.1);
    CHECK(c.trigger(0, 3) == 0.0);
}

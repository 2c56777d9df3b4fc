#include <doctest.h>

#include <cmath>
#include <numbers>

#include "branchrl/branchrfe.hpp"
#include "branchrl/instances.hpp"
#include "branchrl/planner.hpp"

using namespace branchrl;

TEST_CASE("beta") {
    // S = N = 1, kappa = 1/e: 1 + log(8e).
    CHECK(rfe_beta(0, std::exp(-1.0), 1, 1) == doctest::Approx(1.0 + std::log(8.0 * std::numbers::e)).epsilon(1e-15));
    CHECK(std::abs(rfe_beta(100, 0.005, 6, 10) - 55.56003427989670964) <= 1e-12);
    CHECK(std::abs(rfe_beta(0, 0.1, 3, 3) - 13.73813429536977285) <= 1e-12);
    CHECK(rfe_beta(10, 0.1, 3, 3) < rfe_beta(11, 0.1, 3, 3));
    CHECK(rfe_beta(10, 0.01, 3, 3) > rfe_beta(10, 0.1, 3, 3));
    CHECK_THROWS_AS(rfe_beta(1, 1.0, 3, 3), std::invalid_argument);
}

TEST_CASE("stopping rule arithmetic") {
    // 4e sqrt(B) + B at B = 1e-4 is 0.04e + 1e-4.
    const double at = 4.0 * std::numbers::e * 0.01 + 1e-4;
    CHECK(rfe_should_stop(1e-4, 2.0 * at + 1e-12));
    CHECK_FALSE(rfe_should_stop(1e-4, 2.0 * at - 1e-12));
    CHECK(rfe_should_stop(0.0, 1e-9));
}

TEST_CASE("error recursion limits") {
    const auto mdp = experiment_instance(10);
    const auto none = rfe_backward_pass(mdp, EmpiricalModel::from_counts(Counts(mdp.S, mdp.N), 0), 0.1);
    for (std::size_t h = 1; h <= mdp.H; ++h) {
        for (StateId s = 1; s < mdp.S; ++s) CHECK(none.error.at(h, s) == 6.0);
        CHECK(none.error.at(h, 0) == 0.0);
    }
    const auto zero = rfe_backward_pass(mdp, EmpiricalModel::from_model(mdp, 1'000'000), 0.1, {0.0});
    for (std::size_t h = 1; h <= mdp.H; ++h)
        for (StateId s = 0; s < mdp.S; ++s) CHECK(zero.error.at(h, s) == 0.0);
}

TEST_CASE("single-action chain by hand") {
    auto mdp = BranchingMdp::blank(2, 1, 1, 2, 0, 1, ActionClass::top_m(1, 1));
    mdp.trigger_ref(1, 0) = 0.5;
    mdp.transition_row_ref(1, 0)[1] = 1.0;
    Counts c(2, 1);
    for (int i = 0; i < 5; ++i) c.record(1, 0, true, 1);
    for (int i = 0; i < 5; ++i) c.record(1, 0, false, 0);
    const double scale = 0.01, delta = 0.1;
    const auto plan = rfe_backward_pass(mdp, EmpiricalModel::from_counts(c, 0), delta, {scale});
    const double conf = scale * 12.0 * 4.0 * rfe_beta(10, delta, 2, 1) / 10.0;
    const double b2 = std::min(conf, 2.0);
    const double b1 = std::min(conf + 1.5 * 0.5 * b2, 2.0);
    CHECK(plan.error.at(2, 1) == doctest::Approx(b2).epsilon(1e-14));
    CHECK(plan.error.at(1, 1) == doctest::Approx(b1).epsilon(1e-14));
}

TEST_CASE("trigger estimates are clipped at 1/m inside the recursion") {
    // q_hat = 1 vs q_hat = 1/m give the same B when m = 2.
    auto mdp = BranchingMdp::blank(2, 2, 2, 3, 0, 1, ActionClass::top_m(2, 2));
    for (BaseActionId a = 0; a < 2; ++a) mdp.transition_row_ref(1, a)[1] = 1.0;
    Counts full(2, 2), half(2, 2);
    for (int i = 0; i < 40; ++i)
        for (BaseActionId a = 0; a < 2; ++a) {
            full.record(1, a, true, 1);
            half.record(1, a, i % 2 == 0, 1);
        }
    const auto x = rfe_backward_pass(mdp, EmpiricalModel::from_counts(full, 0), 0.1, {0.001});
    const auto y = rfe_backward_pass(mdp, EmpiricalModel::from_counts(half, 0), 0.1, {0.001});
    CHECK(x.error == y.error);
}

TEST_CASE("exploration ignores rewards and is reproducible") {
    const auto mdp = random_instance(3, 3, 1, 2, 7);
    const RfeConfig cfg{3.0, 0.1, 5, 10'000'000};
    const auto a = explore(mdp, cfg);
    const auto b = explore(with_rewards(mdp, std::vector<double>(9, 1.0)), cfg);
    CHECK(a.stopped);
    CHECK(a.episodes_used == b.episodes_used);
    CHECK(a.final_error == b.final_error);
    CHECK(a.estimate == b.estimate);
    CHECK(rfe_should_stop(a.final_error, cfg.eps));
    for (StateId s = 0; s < mdp.S; ++s)
        for (BaseActionId a2 = 0; a2 < mdp.N; ++a2) {
            CHECK(a.estimate.reward(s, a2) == 0.0);
            CHECK(a.estimate.trigger(s, a2) <= 1.0);
        }
    CHECK(validate(a.estimate).empty());
}

TEST_CASE("stopping bookkeeping") {
    const auto mdp = random_instance(3, 3, 1, 2, 7);
    const auto loose = explore(mdp, {100.0, 0.1, 1, 10});
    CHECK(loose.stopped);
    CHECK(loose.episodes_used == 0);

    const auto capped = explore(mdp, {1e-6, 0.1, 1, 50});
    CHECK_FALSE(capped.stopped);
    CHECK(capped.episodes_used == 50);
    CHECK(capped.final_error > 0.0);

    CHECK_THROWS_AS(explore(mdp, {0.0, 0.1, 1, 10}), std::invalid_argument);
    CHECK_THROWS_AS(explore(mdp, {1.0, 1.5, 1, 10}), std::invalid_argument);
}

TEST_CASE("planning and certification") {
    const auto inst = regret_lb_instance(5, 4, 2, 3, 0.1, 2);
    const std::vector<double> ones(inst.mdp.S * inst.mdp.N, 1.0);
    CHECK(certify(inst.mdp, hard_instance_optimal_policy(inst), ones) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(std::abs(certify(inst.mdp, hard_instance_suboptimal_policy(inst), ones) - 2 * 0.1 * 2) <= 1e-12);

    const std::vector<double> zero(ones.size(), 0.0);
    CHECK(certify(inst.mdp, plan_for_rewards(inst.mdp, zero), zero) == 0.0);
    CHECK(certify(inst.mdp, plan_for_rewards(inst.mdp, ones), ones) == doctest::Approx(0.0).epsilon(1e-12));
    std::vector<double> bad = ones;
    bad[3] = 1.2;
    CHECK_THROWS_AS(plan_for_rewards(inst.mdp, bad), std::invalid_argument);
}

TEST_CASE("a stopped run yields near-optimal plans for fresh rewards") {
    const auto mdp = random_instance(3, 3, 1, 2, 7);
    const double eps = 3.0;
    const auto res = explore(mdp, {eps, 0.1, 11, 10'000'000});
    REQUIRE(res.stopped);
    Rng rng(1);
    for (int i = 0; i < 20; ++i) {
        std::vector<double> r(mdp.S * mdp.N);
        for (auto& x : r) x = rng.uniform01();
        CHECK(certify(mdp, plan_for_rewards(res.estimate, r), r) <= eps);
    }
}

#include <doctest.h>

#include <cmath>
#include <limits>
#include <map>

#include "branchrl/oracle.hpp"
#include "branchrl/rng.hpp"

using namespace branchrl;

namespace {

// Independent exhaustive search over m-subsets, first strict maximizer in
// lexicographic order.
void subsets(std::size_t n, std::size_t m, std::size_t from, std::vector<std::size_t>& cur,
             std::vector<std::vector<std::size_t>>& out) {
    if (cur.size() == m) {
        out.push_back(cur);
        return;
    }
    for (std::size_t a = from; a < n; ++a) {
        cur.push_back(a);
        subsets(n, m, a + 1, cur, out);
        cur.pop_back();
    }
}

std::pair<std::vector<std::size_t>, double> brute_argmax(std::size_t n, std::size_t m, const std::vector<double>& w) {
    std::vector<std::vector<std::size_t>> all;
    std::vector<std::size_t> cur;
    subsets(n, m, 0, cur, all);
    std::vector<std::size_t> best;
    double best_total = -std::numeric_limits<double>::infinity();
    for (const auto& s : all) {
        double t = 0.0;
        for (auto a : s) t += w[a];
        if (t > best_total) {
            best_total = t;
            best = s;
        }
    }
    return {best, best_total};
}

}  // namespace

TEST_CASE("top-m argmax picks the heaviest members and breaks ties toward smaller indices") {
    const auto cls = ActionClass::top_m(4, 2);
    const std::vector<double> w{0.1, 0.9, 0.5, 0.9};
    const auto choice = cls.argmax(w);
    CHECK(choice.action.members == std::vector<std::size_t>{1, 3});
    CHECK(choice.total == doctest::Approx(1.8));

    const auto flat = ActionClass::top_m(5, 2).argmax(std::vector<double>(5, 1.0));
    CHECK(flat.action.members == std::vector<std::size_t>{0, 1});
    CHECK(flat.total == 2.0);
}

TEST_CASE("top-m argmax agrees with exhaustive search") {
    Rng rng(11);
    const auto cls = ActionClass::top_m(10, 2);
    CHECK(cls.size() == 45);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> w(10);
        // Coarse grid so ties actually occur.
        for (auto& x : w) x = static_cast<double>(rng.below(5)) / 4.0;
        const auto [members, total] = brute_argmax(10, 2, w);
        const auto choice = cls.argmax(w);
        CHECK(choice.action.members == members);
        CHECK(choice.total == doctest::Approx(total));
    }
    for (std::size_t m = 1; m <= 4; ++m) {
        const auto c = ActionClass::top_m(6, m);
        for (int trial = 0; trial < 30; ++trial) {
            std::vector<double> w(6);
            for (auto& x : w) x = rng.uniform01();
            CHECK(c.argmax(w).action.members == brute_argmax(6, m, w).first);
        }
    }
}

TEST_CASE("infinite weights rank first and finite members still decide the rest") {
    const double inf = std::numeric_limits<double>::infinity();
    const auto cls = ActionClass::top_m(4, 2);
    const auto c1 = cls.argmax(std::vector<double>{0.2, inf, 0.7, 0.1});
    CHECK(c1.action.members == std::vector<std::size_t>{1, 2});
    CHECK(std::isinf(c1.total));

    const auto part = ActionClass::partition(4, {SuperAction({0, 1}), SuperAction({2, 3})});
    // Block {2,3} has one infinite member plus a larger finite one.
    const auto c2 = part.argmax(std::vector<double>{inf, 0.0, inf, 5.0});
    CHECK(c2.action.members == std::vector<std::size_t>{2, 3});
    const auto c3 = part.argmax(std::vector<double>{inf, inf, inf, 5.0});
    CHECK(c3.action.members == std::vector<std::size_t>{0, 1});
}

TEST_CASE("partition and explicit argmax agree with enumeration") {
    Rng rng(5);
    const auto part = ActionClass::partition(6, {SuperAction({4, 5}), SuperAction({0, 1}), SuperAction({2, 3})});
    const auto expl =
        ActionClass::explicit_list(5, {SuperAction({0, 4}), SuperAction({1, 2}), SuperAction({0, 4}), SuperAction({2, 3})});
    for (const auto* cls : {&part, &expl}) {
        for (int trial = 0; trial < 50; ++trial) {
            std::vector<double> w(cls->n_actions());
            for (auto& x : w) x = static_cast<double>(rng.below(3));
            double best = -1.0;
            SuperAction arg;
            for (const auto& a : cls->enumerate()) {
                double t = 0.0;
                for (auto b : a.members) t += w[b];
                if (t > best) {
                    best = t;
                    arg = a;
                }
            }
            const auto choice = cls->argmax(w);
            CHECK(choice.action == arg);
            CHECK(choice.total == best);
        }
    }
}

TEST_CASE("enumeration order and contents") {
    const auto all = ActionClass::top_m(3, 2).enumerate();
    REQUIRE(all.size() == 3);
    CHECK(all[0].members == std::vector<std::size_t>{0, 1});
    CHECK(all[1].members == std::vector<std::size_t>{0, 2});
    CHECK(all[2].members == std::vector<std::size_t>{1, 2});

    const auto blocks = ActionClass::partition(4, {SuperAction({2, 3}), SuperAction({0, 1})}).enumerate();
    REQUIRE(blocks.size() == 2);
    CHECK(blocks[0].members == std::vector<std::size_t>{0, 1});
    CHECK(blocks[1].members == std::vector<std::size_t>{2, 3});

    const auto one = ActionClass::explicit_list(3, {SuperAction({2})}).enumerate();
    REQUIRE(one.size() == 1);
    CHECK(one[0].members == std::vector<std::size_t>{2});

    CHECK(ActionClass::top_m(15, 2).size() == 105);
}

TEST_CASE("empty classes are rejected") {
    const auto empty = ActionClass::explicit_list(3, {});
    CHECK_THROWS_AS(empty.argmax(std::vector<double>(3, 0.0)), EmptyClassError);
    Rng rng(1);
    CHECK_THROWS_AS(empty.uniform(rng), EmptyClassError);
    CHECK_FALSE(empty.problems().empty());
    CHECK_FALSE(ActionClass::partition(4, {SuperAction({0, 1}), SuperAction({1, 2})}).problems().empty());
    CHECK(ActionClass::top_m(4, 2).problems().empty());
}

TEST_CASE("uniform draws cover the class evenly") {
    Rng rng(2024);
    CHECK(ActionClass::top_m(2, 2).uniform(rng).members == std::vector<std::size_t>{0, 1});

    const auto cls = ActionClass::top_m(10, 2);
    std::map<std::vector<std::size_t>, int> freq;
    const int draws = 100'000;
    for (int i = 0; i < draws; ++i) ++freq[cls.uniform(rng).members];
    REQUIRE(freq.size() == 45);
    const double p = 1.0 / 45.0;
    const double se = std::sqrt(p * (1 - p) / draws);
    double chi2 = 0.0;
    for (const auto& [k, c] : freq) {
        const double f = static_cast<double>(c) / draws;
        CHECK(std::abs(f - p) <= 4.0 * se);
        chi2 += (c - draws * p) * (c - draws * p) / (draws * p);
    }
    // 44 degrees of freedom; 99.99th percentile is about 88.
    CHECK(chi2 < 88.0);

    const auto part = ActionClass::partition(6, {SuperAction({0, 1}), SuperAction({2, 3}), SuperAction({4, 5})});
    std::map<std::vector<std::size_t>, int> blocks;
    for (int i = 0; i < 30'000; ++i) ++blocks[part.uniform(rng).members];
    for (const auto& [k, c] : blocks) CHECK(std::abs(c / 30'000.0 - 1.0 / 3.0) <= 4.0 * std::sqrt(2.0 / 9.0 / 30'000));
}

TEST_CASE("inclusion probabilities") {
    const auto top = ActionClass::top_m(5, 2).inclusion_probabilities();
    for (double x : top) CHECK(x == doctest::Approx(0.4));
    const auto part = ActionClass::partition(5, {SuperAction({0, 1}), SuperAction({2, 3})}).inclusion_probabilities();
    CHECK(part == std::vector<double>{0.5, 0.5, 0.5, 0.5, 0.0});
}

TEST_CASE("argmax is deterministic") {
    const auto cls = ActionClass::top_m(8, 3);
    const std::vector<double> w{1, 1, 1, 1, 1, 1, 1, 1};
    CHECK(cls.argmax(w).action == cls.argmax(w).action);
}

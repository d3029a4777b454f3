// SPDX-License-Identifier: Apache-2.0
#include "scsp/lower.hpp"
#include "scsp/oracle.hpp"
#include "support/generators.hpp"

#include <gtest/gtest.h>

using namespace scsp;

namespace {

StochasticModel model_of(const std::string& text) {
    auto r = parse_model(text);
    EXPECT_TRUE(r.ok()) << (r.diagnostics.empty() ? "" : r.diagnostics[0].message);
    return *r.value;
}

const char* m1 = "int x in 0..1 stage 1; stoch w in {0:1/2, 1:1/2} stage 1; chance(1/2) x = w;"
                 "maximize expected x + w;";
const char* m2 = "int x1 in 0..2 stage 1; stoch w1 in {1:1/3, 2:2/3} stage 1; int x2 in 0..2 stage 2;"
                 "x1 + x2 >= w1; minimize expected x1 + x2;";

std::size_t policies_of(const StochasticModel& m) {
    auto tree = build_scenario_tree(m);
    return enumerate_policies(m, make_policy_layout(m, tree)).size();
}

} // namespace

TEST(EnumeratePolicies, Counts) {
    EXPECT_EQ(policies_of(model_of(m1)), 2u);
    // x1 has 3 values and x2 has 3 values on each of the 2 branches
    EXPECT_EQ(policies_of(model_of(m2)), 27u);
    EXPECT_EQ(policies_of(model_of("stoch w in {0:1/2, 1:1/2} stage 1;")), 1u);
}

TEST(EnumeratePolicies, LastSlotFastest) {
    auto m = model_of("int a in 0..1 stage 1; int b in 3..4 stage 1;");
    auto tree = build_scenario_tree(m);
    auto ps = enumerate_policies(m, make_policy_layout(m, tree));
    ASSERT_EQ(ps.size(), 4u);
    EXPECT_EQ(ps[0].values, (std::vector<std::int64_t>{0, 3}));
    EXPECT_EQ(ps[1].values, (std::vector<std::int64_t>{0, 4}));
    EXPECT_EQ(ps[2].values, (std::vector<std::int64_t>{1, 3}));
}

TEST(EnumeratePolicies, CapIsEnforced) {
    auto m = model_of("int a in 0..9 stage 1; int b in 0..9 stage 1;");
    auto tree = build_scenario_tree(m);
    EXPECT_THROW(enumerate_policies(m, make_policy_layout(m, tree), 99), SizeLimitError);
}

TEST(EvaluatePolicy, WorkedModel) {
    auto m = model_of(m1);
    auto tree = build_scenario_tree(m);
    auto ev = evaluate_policy(m, tree, make_policy_layout(m, tree), Policy{{1}});
    EXPECT_EQ(ev.satisfaction[0], Rational(1, 2));
    EXPECT_FALSE(ev.holds_everywhere[0]);
    ASSERT_TRUE(ev.objective);
    EXPECT_EQ(ev.objective->expected, Rational(3, 2));
    EXPECT_EQ(ev.objective->min, 1);
    EXPECT_EQ(ev.objective->max, 2);
}

TEST(EvaluatePolicy, TautologyHoldsEverywhere) {
    auto m = model_of("int x in 0..3 stage 1; stoch w in {0:1/3, 5:2/3} stage 1; x = x;");
    auto tree = build_scenario_tree(m);
    auto layout = make_policy_layout(m, tree);
    for (const auto& p : enumerate_policies(m, layout)) {
        auto ev = evaluate_policy(m, tree, layout, p);
        EXPECT_TRUE(ev.holds_everywhere[0]);
        EXPECT_EQ(ev.satisfaction[0], Rational(1));
    }
}

TEST(EvaluatePolicy, SingleScenarioStats) {
    auto m = model_of("int x in 0..3 stage 1; maximize expected 2*x + 1;");
    auto tree = build_scenario_tree(m);
    auto ev = evaluate_policy(m, tree, make_policy_layout(m, tree), Policy{{3}});
    EXPECT_EQ(ev.objective->expected, Rational(7));
    EXPECT_EQ(ev.objective->min, 7);
    EXPECT_EQ(ev.objective->max, 7);
    EXPECT_EQ(ev.objective->spread, 0);
}

TEST(OracleSolve, WorkedModels) {
    auto r1 = oracle_solve(model_of(m1));
    ASSERT_TRUE(r1.feasible);
    EXPECT_EQ(*r1.objective, Rational(3, 2));
    EXPECT_EQ(r1.policy->values, (std::vector<std::int64_t>{1}));
    EXPECT_EQ(r1.policies_checked, 2u);

    auto r2 = oracle_solve(model_of(m2));
    ASSERT_TRUE(r2.feasible);
    EXPECT_EQ(*r2.objective, Rational(5, 3));
    // x1 = 0, then x2 = w1
    EXPECT_EQ(r2.policy->values, (std::vector<std::int64_t>{0, 1, 2}));
    EXPECT_EQ(r2.policies_checked, 27u);
}

TEST(OracleSolve, ThresholdAboveEveryPolicyIsInfeasible) {
    auto m = model_of("int x in 0..1 stage 1; stoch w in {0:1/2, 1:1/2} stage 1; chance(3/4) x = w;"
                      "maximize expected x + w;");
    auto r = oracle_solve(m);
    EXPECT_FALSE(r.feasible);
    EXPECT_FALSE(r.objective);
    EXPECT_EQ(r.policies_checked, 2u);
}

TEST(OracleSolve, NoObjectiveReturnsFirstFeasible) {
    auto r = oracle_solve(model_of("int x in 0..5 stage 1; x >= 2;"));
    ASSERT_TRUE(r.feasible);
    EXPECT_EQ(r.policy->values, (std::vector<std::int64_t>{2}));
    EXPECT_FALSE(r.objective);
}

TEST(ObjectiveValue, PessimismFollowsSense) {
    ObjectiveStats s{Rational(3), 1, 5, 4};
    auto v = [&](Sense sense, Aggregator a) { return objective_value(ObjectiveDecl{sense, a, ex::lit(0)}, s); };
    EXPECT_EQ(v(Sense::Maximize, Aggregator::Worst), Rational(1));
    EXPECT_EQ(v(Sense::Minimize, Aggregator::Worst), Rational(5));
    EXPECT_EQ(v(Sense::Maximize, Aggregator::Best), Rational(5));
    EXPECT_EQ(v(Sense::Minimize, Aggregator::Best), Rational(1));
    EXPECT_EQ(v(Sense::Minimize, Aggregator::Spread), Rational(4));
    EXPECT_EQ(v(Sense::Minimize, Aggregator::Expected), Rational(3));
}

// Satisfaction probabilities are in [0,1] and equal the mass of the
// scenarios in which the body holds.
TEST(EvaluatePolicy, ProbabilitiesAreScenarioSumsProperty) {
    gen::Rng rng(41);
    for (int i = 0; i < 150; ++i) {
        auto m = gen::random_model(rng);
        auto tree = build_scenario_tree(m);
        auto layout = make_policy_layout(m, tree);
        PolicyEnumerator en(m, layout, 20000);
        Policy p;
        int seen = 0;
        while (en.next(p) && seen++ < 20) {
            auto ev = evaluate_policy(m, tree, layout, p);
            for (std::size_t c = 0; c < m.constraints.size(); ++c) {
                EXPECT_GE(ev.satisfaction[c], Rational(0));
                EXPECT_LE(ev.satisfaction[c], Rational(1));
                EXPECT_EQ(ev.holds_everywhere[c], ev.satisfaction[c] == Rational(1));
                // single-scenario sub-models give the per-scenario truth values
                Rational mass(0);
                for (const auto& s : tree.scenarios) {
                    StochasticModel fixed = m;
                    for (std::size_t k = 0; k < fixed.stochastics.size(); ++k)
                        fixed.stochastics[k].distribution = {{s.values[k], Rational(1)}};
                    auto ft = build_scenario_tree(fixed);
                    auto fl = make_policy_layout(fixed, ft);
                    Policy fp;
                    for (const auto& slot : fl.slots)
                        fp.values.push_back(p.values[layout.slot(slot.decision, tree,
                                                                 tree.ancestor(s.leaf, ft.node(slot.node).depth))]);
                    if (evaluate_policy(fixed, ft, fl, fp).holds_everywhere[c]) mass += s.prob;
                }
                EXPECT_EQ(ev.satisfaction[c], mass);
            }
        }
    }
}

TEST(EvaluatePolicy, HardAndChanceOneAgreeProperty) {
    gen::Rng rng(43);
    for (int i = 0; i < 100; ++i) {
        auto m = gen::random_model(rng);
        auto hard = m;
        auto chance = m;
        for (auto& c : hard.constraints) c = ConstraintDecl::hard(c.body);
        for (auto& c : chance.constraints) c = ConstraintDecl::chance(Rational(1), c.body);
        auto tree = build_scenario_tree(m);
        auto layout = make_policy_layout(m, tree);
        PolicyEvaluator eh(hard, tree, layout), ec(chance, tree, layout);
        PolicyEnumerator en(m, layout, 20000);
        Policy p;
        while (en.next(p)) ASSERT_EQ(feasible(hard, eh.evaluate(p)), feasible(chance, ec.evaluate(p)));
    }
}

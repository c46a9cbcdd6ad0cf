#include <gtest/gtest.h>

#include <random>

#include "descpol/descriptive.hpp"

using namespace descpol;

namespace {
const std::vector<std::size_t> kGrid{4, 5};
}

TEST(FeasibleActions, ConditionsWithoutDecisions) {
    DescriptiveState s(kGrid);
    s.set({2, 3});
    s.set({4, 3});
    const auto actions = feasible_actions(s, {});
    ASSERT_EQ(actions.size(), 2u);
    EXPECT_EQ(actions[0].condition, (Condition{2, 3}));
    EXPECT_EQ(actions[1].condition, (Condition{4, 3}));
    EXPECT_TRUE(actions[0].decisions.empty());
}

TEST(FeasibleActions, ProductWithDecisionSet) {
    DescriptiveState s(kGrid);
    s.set({1, 1});
    const std::vector<DecisionSet> m{{"mode", {0.0, 1.0}}};
    const auto actions = feasible_actions(s, m);
    ASSERT_EQ(actions.size(), 2u);
    EXPECT_EQ(actions[0], (DescriptiveAction{{1, 1}, {0}}));
    EXPECT_EQ(actions[1], (DescriptiveAction{{1, 1}, {1}}));
}

TEST(FeasibleActions, AllOnesGrid) {
    EXPECT_EQ(feasible_actions(DescriptiveState::all_ones(kGrid), {}).size(), 20u);
}

TEST(FeasibleActions, AllZeroIsEmpty) { EXPECT_TRUE(feasible_actions(DescriptiveState(kGrid), {}).empty()); }

TEST(FeasibleActions, CardinalityProperty) {
    std::mt19937_64 rng(3);
    const std::vector<DecisionSet> m{{"a", {1, 2, 3}}, {"b", {1, 2}}};
    for (int trial = 0; trial < 100; ++trial) {
        DescriptiveState s(kGrid);
        for (std::size_t i = 0; i < s.size(); ++i) s.set_flat(i, rng() % 3 == 0);
        const auto actions = feasible_actions(s, m);
        EXPECT_EQ(actions.size(), s.count() * 6);
        for (const auto& a : actions) EXPECT_TRUE(s.test(a.condition));
    }
}

TEST(DescriptiveState, FlattenRowMajor) {
    DescriptiveState s({2, 2});
    s.set({1, 2});
    const auto v = s.flatten();
    ASSERT_EQ(v.size(), 4);
    EXPECT_EQ(v[0], 0.0);
    EXPECT_EQ(v[1], 1.0);
    EXPECT_EQ(v[2], 0.0);
    EXPECT_EQ(v[3], 0.0);
}

TEST(DescriptiveState, FlattenAllZeroAndAllOne) {
    EXPECT_EQ(DescriptiveState(kGrid).flatten(), Eigen::VectorXd::Zero(20));
    EXPECT_EQ(DescriptiveState::all_ones(kGrid).flatten(), Eigen::VectorXd::Ones(20));
}

TEST(DescriptiveState, UnflattenRoundTrip) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        DescriptiveState s({3, 4, 2});
        for (std::size_t i = 0; i < s.size(); ++i) s.set_flat(i, rng() & 1);
        EXPECT_EQ(DescriptiveState::unflatten(s.shape(), s.flatten()), s);
    }
}

TEST(DescriptiveState, UnflattenRejectsNonBinary) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(4);
    v[2] = 0.5;
    EXPECT_THROW(DescriptiveState::unflatten({2, 2}, v), DomainError);
    EXPECT_THROW(DescriptiveState::unflatten({2, 3}, v), ShapeError);
}

TEST(DescriptiveActionSpace, IndexRoundTrip) {
    DescriptiveActionSpace space(kGrid, {{"power", {0, 2.5, 5, 7.5, 10}}});
    EXPECT_EQ(space.size(), 100u);
    for (std::size_t i = 0; i < space.size(); ++i) EXPECT_EQ(space.index_of(space.action_at(i)), i);
    EXPECT_EQ(space.index_of({{1, 2}, {3}}), 1u * 5 + 3);
    EXPECT_THROW(space.index_of({{1, 2}, {5}}), DomainError);
    EXPECT_THROW(space.action_at(100), DomainError);
}

TEST(DescriptiveActionSpace, MaskFollowsStateBits) {
    DescriptiveActionSpace space({2, 2}, {{"m", {0, 1, 2}}});
    DescriptiveState s({2, 2});
    s.set({2, 1});
    const auto mask = space.feasible_mask(s);
    for (std::size_t i = 0; i < mask.size(); ++i) EXPECT_EQ(mask[i], i / 3 == 2 ? 1 : 0);
    EXPECT_THROW(space.feasible_mask(DescriptiveState({2, 3})), ShapeError);
}

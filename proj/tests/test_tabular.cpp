#include <gtest/gtest.h>

#include <random>
#include <set>
#include <sstream>

#include "descpol/item_sale.hpp"
#include "descpol/tabular.hpp"

using namespace descpol;

TEST(ValueIteration, GeometricSeries) {
    TabularMDP m(1, 1, 0.9);
    m.set_utility(0, 0, 1.0);
    m.add_successor(0, 0, 0, 1.0);
    const auto r = value_iteration(m);
    EXPECT_NEAR(r.values[0], 10.0, 1e-11);
}

TEST(ValueIteration, ZeroUtility) {
    TabularMDP m(3, 2, 0.9);
    for (std::size_t s = 0; s < 3; ++s)
        for (std::size_t a = 0; a < 2; ++a) m.add_successor(s, a, (s + a) % 3, 1.0);
    for (double v : value_iteration(m).values) EXPECT_EQ(v, 0.0);
}

TEST(ValueIteration, DeterministicSelfLoops) {
    TabularMDP m(2, 1, 0.5);
    m.set_utility(0, 0, 1.0);
    m.add_successor(0, 0, 0, 1.0);
    m.add_successor(1, 0, 1, 1.0);
    const auto r = value_iteration(m);
    EXPECT_NEAR(r.values[0], 2.0, 1e-12);
    EXPECT_NEAR(r.values[1], 0.0, 1e-12);
}

TEST(ValueIteration, ResidualContracts) {
    std::mt19937_64 g(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    TabularMDP m(6, 3, 0.8);
    for (std::size_t s = 0; s < 6; ++s)
        for (std::size_t a = 0; a < 3; ++a) {
            m.set_utility(s, a, u(g));
            std::vector<double> w(6);
            double total = 0.0;
            for (auto& x : w) total += (x = u(g));
            for (std::size_t n = 0; n < 6; ++n) m.add_successor(s, a, n, w[n] / total);
            double sum = 0.0;
            for (const auto& x : m.successors(s, a)) sum += x.probability;
            // Put any rounding residue on the last entry.
            auto row = m.successors(s, a);
            row.back().probability += 1.0 - sum;
            m.set_successors(s, a, row);
        }
    const auto r = value_iteration(m, 1e-12);
    // Contraction by gamma, up to rounding at the scale of the values (|V| < 5).
    for (std::size_t i = 1; i < r.residuals.size(); ++i)
        EXPECT_LE(r.residuals[i], 0.8 * r.residuals[i - 1] + 1e-14) << i;
}

TEST(ValueIteration, MinimizeObjective) {
    TabularMDP m(1, 2, 0.5, Objective::minimize);
    m.set_utility(0, 0, 3.0);
    m.set_utility(0, 1, 1.0);
    m.add_successor(0, 0, 0, 1.0);
    m.add_successor(0, 1, 0, 1.0);
    const auto r = value_iteration(m);
    EXPECT_NEAR(r.values[0], 2.0, 1e-12);
    EXPECT_EQ(r.policy[0], 1u);
}

TEST(TabularMDP, RejectsNonStochasticRows) {
    TabularMDP m(2, 1, 0.9);
    m.add_successor(0, 0, 0, 0.5);
    m.add_successor(1, 0, 1, 1.0);
    EXPECT_THROW(value_iteration(m), ValidationError);
    TabularMDP g(1, 1, 1.0);
    g.add_successor(0, 0, 0, 1.0);
    EXPECT_THROW(g.validate(), ValidationError);
}

TEST(SupportInstance, TypicalValuesClosedForm) {
    // J*(s) = max_n f_n + gamma/(1-gamma) E[max of two uniform draws on {0, 0.5, 1}] = max f + 9 * 13/18.
    const auto sys = support_instance();
    ASSERT_EQ(sys.states.size(), 9u);
    const auto r = value_iteration(sys.mdp);
    for (std::size_t s = 0; s < 9; ++s) {
        const double best = std::max(sys.states[s].items[0][0], sys.states[s].items[1][0]);
        EXPECT_NEAR(r.values[s], best + 6.5, 1e-10);
    }
}

TEST(InducedMdp, RowsSumToOne) {
    const auto sys = support_instance(3);
    for (unsigned b = 0; b <= 3; ++b) {
        const auto d = induce_descriptive_mdp(sys, PartitionScheme::uniform(b, 1));
        for (std::size_t s = 0; s < d.mdp.state_count(); ++s)
            for (std::size_t a = 0; a < d.mdp.action_count(); ++a) {
                if (!d.mdp.available(s, a)) continue;
                double total = 0.0;
                for (const auto& x : d.mdp.successors(s, a)) total += x.probability;
                EXPECT_NEAR(total, 1.0, 1e-12);
            }
    }
}

TEST(InducedMdp, CoarsestSchemeCollapses) {
    const auto sys = support_instance();
    const auto d = induce_descriptive_mdp(sys, PartitionScheme::uniform(0, 1));
    ASSERT_EQ(d.states.size(), 1u);
    EXPECT_EQ(d.states[0].count(), 1u);
    for (auto t : d.typical_to_descriptive) EXPECT_EQ(t, 0u);
    // One action: a uniform pick, so utility is the mean feature 0.5.
    EXPECT_NEAR(d.mdp.utility(0, 0), 0.5, 1e-15);
}

TEST(InducedMdp, SeparatingSchemeIsBijectiveOnActions) {
    const auto sys = support_instance();
    const auto scheme = PartitionScheme::uniform(2, 1);
    const auto d = induce_descriptive_mdp(sys, scheme);
    for (std::size_t s = 0; s < sys.states.size(); ++s) {
        const auto& st = sys.states[s];
        if (st.items[0] == st.items[1]) continue;
        const auto ds = d.states[d.typical_to_descriptive[s]];
        EXPECT_EQ(ds.count(), 2u);
        std::set<Condition> seen;
        for (std::size_t n = 0; n < 2; ++n) seen.insert(scheme.condition_of(st.items[n]));
        EXPECT_EQ(seen.size(), 2u);
    }
}

TEST(Theorem1, GapVanishesOnSeparatingScheme) {
    const auto g = theorem1_gap(support_instance(), 2);
    EXPECT_LE(g.gap, 1e-9);
}

TEST(Theorem1, GapNonIncreasingInB) {
    double prev = std::numeric_limits<double>::infinity();
    for (unsigned b = 0; b <= 3; ++b) {
        const auto g = theorem1_gap(support_instance(), b);
        EXPECT_LE(g.gap, prev + 1e-12) << "b=" << b;
        prev = g.gap;
    }
}

TEST(Theorem1, CoarseSchemeHasPositiveGap) {
    const auto g = theorem1_gap(support_instance(), 0);
    EXPECT_GT(g.gap, 0.1);
    // In the all-distinct state (0, 1) the coarse policy picks uniformly: 0.5 instead of 1.
    const auto sys = support_instance();
    for (std::size_t s = 0; s < sys.states.size(); ++s) {
        if (sys.states[s].items[0][0] != 0.0 || sys.states[s].items[1][0] != 1.0) continue;
        EXPECT_NEAR(g.typical_values[s] - g.descriptive_values[s], 0.5 + 9 * (13.0 / 18 - 0.5), 1e-9);
    }
}

TEST(Theorem1, UtilityEquivalentValuesHaveNoGap) {
    ItemFeatureDistribution dist{{{0.1}, {0.6}, {0.9}}, {0.25, 0.5, 0.25}};
    const auto sys = build_iid_item_system(2, dist, [](const FeatureVector&, std::size_t) { return 1.0; }, 0.9);
    for (unsigned b = 0; b <= 3; ++b) EXPECT_LE(theorem1_gap(sys, b).gap, 1e-10);
}

TEST(Theorem1, DecisionsAndThreeItems) {
    ItemFeatureDistribution dist{{{0.2}, {0.7}}, {0.5, 0.5}};
    const auto sys = build_iid_item_system(
        3, dist, [](const FeatureVector& f, std::size_t m) { return m == 0 ? f[0] : 0.6 - f[0]; }, 0.8, 2);
    EXPECT_LE(theorem1_gap(sys, 1).gap, 1e-9);
    EXPECT_GT(theorem1_gap(sys, 0).gap, 0.0);
}

TEST(IdenticalStatistics, ViolationNamesThePair) {
    auto sys = support_instance(3);
    EXPECT_NO_THROW(validate_identical_statistics(sys));
    // State 1 is features (0, 0, 0.5): swapping items 0 and 1 fixes it, so the first failing pair is (0, 2).
    sys.mdp.set_utility(1, sys.action_index(2), 42.0);
    try {
        validate_identical_statistics(sys);
        FAIL() << "expected a validation error";
    } catch (const ValidationError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("items 0 and 2"), std::string::npos) << msg;
        EXPECT_NE(msg.find("identical statistics"), std::string::npos) << msg;
    }
    EXPECT_THROW(theorem1_gap(sys, 2), ValidationError);
}

TEST(IdenticalStatistics, AsymmetricTransitionDetected) {
    auto sys = support_instance();
    auto row = sys.mdp.successors(0, 0);
    row[0].probability += 0.01;
    row[1].probability -= 0.01;
    sys.mdp.set_successors(0, 0, row);
    EXPECT_THROW(validate_identical_statistics(sys), ValidationError);
}

TEST(GreedyOracle, Examples) {
    EXPECT_EQ(greedy_oracle({{{0.9, 1}, {0.2, 4}}}).item, 0u);
    EXPECT_EQ(greedy_oracle({{{0.5, 2}, {0.5, 2}}}).item, 0u);
}

TEST(GreedyOracle, MatchesBruteForce) {
    Rng rng(77);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto s = draw_item_sale_state({10}, rng);
        double best = -1.0;
        std::size_t arg = 0;
        for (std::size_t n = 0; n < 10; ++n)
            if (s.items[n][0] * s.items[n][1] > best) {
                best = s.items[n][0] * s.items[n][1];
                arg = n;
            }
        EXPECT_EQ(greedy_oracle(s).item, arg);
    }
}

TEST(TabularFormat, RoundTrip) {
    const auto sys = support_instance(2, 0.75);
    std::stringstream ss;
    write_tabular(ss, sys);
    const auto back = read_tabular(ss);
    EXPECT_EQ(back.items, 2u);
    EXPECT_EQ(back.mdp.gamma(), 0.75);
    ASSERT_EQ(back.states.size(), sys.states.size());
    for (std::size_t s = 0; s < sys.states.size(); ++s) {
        EXPECT_EQ(back.states[s], sys.states[s]);
        for (std::size_t a = 0; a < 2; ++a) {
            EXPECT_EQ(back.mdp.utility(s, a), sys.mdp.utility(s, a));
            ASSERT_EQ(back.mdp.successors(s, a).size(), sys.mdp.successors(s, a).size());
            for (std::size_t i = 0; i < sys.mdp.successors(s, a).size(); ++i)
                EXPECT_EQ(back.mdp.successors(s, a)[i].probability, sys.mdp.successors(s, a)[i].probability);
        }
    }
    EXPECT_EQ(theorem1_gap(back, 1).gap, theorem1_gap(sys, 1).gap);
}

TEST(TabularFormat, HandWrittenModel) {
    std::istringstream in(R"(descpol-mdp 1
# two-state chain
gamma 0.5
states 2
actions 1
u 0 0 1
p 0 0 0 1
p 1 0 1 1
)");
    const auto sys = read_tabular(in);
    const auto r = value_iteration(sys.mdp);
    EXPECT_NEAR(r.values[0], 2.0, 1e-12);
}

TEST(TabularFormat, Errors) {
    std::istringstream no_header("gamma 0.9\n");
    EXPECT_THROW(read_tabular(no_header), ValidationError);
    std::istringstream bad_row("descpol-mdp 1\nstates 1\nactions 1\np 0 0 0 0.3\n");
    EXPECT_THROW(read_tabular(bad_row), ValidationError);
    std::istringstream unknown("descpol-mdp 1\nstates 1\nactions 1\nfoo\n");
    EXPECT_THROW(read_tabular(unknown), ValidationError);
}

TEST(Enumeration, CapIsEnforced) {
    ItemFeatureDistribution dist{std::vector<FeatureVector>(10, FeatureVector{0.5}), std::vector<double>(10, 0.1)};
    dist.probabilities.back() = 1.0 - 0.1 * 9;
    EXPECT_THROW(build_iid_item_system(7, dist, [](const FeatureVector& f, std::size_t) { return f[0]; }, 0.9),
                 ValidationError);
    EXPECT_THROW(TabularMDP(kMaxEnumeratedStates + 1, 1, 0.9), ValidationError);
}

#include <gtest/gtest.h>

#include <random>

#include "descpol/partition.hpp"

using namespace descpol;

TEST(FeaturePartition, UniformHalfOpenIntervals) {
    const auto p = FeaturePartition::uniform(4);
    EXPECT_EQ(p.bin(0.0), 1u);
    EXPECT_EQ(p.bin(0.2499999), 1u);
    EXPECT_EQ(p.bin(0.25), 2u);
    EXPECT_EQ(p.bin(0.5), 3u);
    EXPECT_EQ(p.bin(0.75), 4u);
    EXPECT_EQ(p.bin(1.0), 4u);
}

TEST(FeaturePartition, ExplicitBoundaries) {
    const auto hifi = FeaturePartition::with_boundaries({0.5, 0.75, 0.9});
    EXPECT_EQ(hifi.bin(0.92), 4u);
    EXPECT_EQ(hifi.bin(0.9), 4u);
    EXPECT_EQ(hifi.bin(0.89), 3u);
    EXPECT_EQ(hifi.bin(0.1), 1u);
    const auto lofi = FeaturePartition::with_boundaries({0.1, 0.25, 0.5});
    EXPECT_EQ(lofi.bin(0.1), 2u);
    EXPECT_EQ(lofi.bin(0.6), 4u);
}

TEST(FeaturePartition, OutOfDomainIsDomainError) {
    const auto p = FeaturePartition::uniform(4);
    EXPECT_THROW(p.bin(-1e-12), DomainError);
    EXPECT_THROW(p.bin(1.0000001), DomainError);
    EXPECT_THROW(p.bin(std::nan("")), DomainError);
}

TEST(FeaturePartition, CustomDomain) {
    const auto p = FeaturePartition::uniform(4, 0.0, 2.0);
    EXPECT_EQ(p.bin(0.5), 2u);
    EXPECT_EQ(p.bin(2.0), 4u);
    EXPECT_THROW(p.bin(2.5), DomainError);
}

TEST(FeaturePartition, DiscreteValuesAndGroups) {
    const auto values = FeaturePartition::discrete_values({0, 1, 2, 3, 4});
    EXPECT_EQ(values.size(), 5u);
    EXPECT_EQ(values.bin(0), 1u);
    EXPECT_EQ(values.bin(4), 5u);
    EXPECT_THROW(values.bin(2.5), DomainError);

    const auto grouped = FeaturePartition::discrete({{0, 1, 2}, {3, 4}});
    EXPECT_EQ(grouped.size(), 2u);
    EXPECT_EQ(grouped.bin(2), 1u);
    EXPECT_EQ(grouped.bin(3), 2u);
    EXPECT_THROW(FeaturePartition::discrete({{0, 1}, {1, 2}}), std::invalid_argument);
}

TEST(FeaturePartition, RejectsBadBoundaries) {
    EXPECT_THROW(FeaturePartition::with_boundaries({0.5, 0.4}), std::invalid_argument);
    EXPECT_THROW(FeaturePartition::with_boundaries({0.0}), std::invalid_argument);
    EXPECT_THROW(FeaturePartition::with_boundaries({1.0}), std::invalid_argument);
    EXPECT_THROW(FeaturePartition::uniform(0), std::invalid_argument);
}

TEST(UniformScheme, DegenerateSingleInterval) {
    const auto s = uniform_scheme(0, 1);
    EXPECT_EQ(s.shape(), std::vector<std::size_t>{1});
    EXPECT_EQ(s.bin_index(0, 0.0), 1u);
    EXPECT_EQ(s.bin_index(0, 1.0), 1u);
    EXPECT_EQ(s.dyadic_level(), 0u);
}

TEST(UniformScheme, DyadicSplit) {
    const auto s = uniform_scheme(2, 1);
    const auto edges = s.feature(0).edges();
    ASSERT_EQ(edges.size(), 5u);
    EXPECT_EQ(edges[0], 0.0);
    EXPECT_EQ(edges[1], 0.25);
    EXPECT_EQ(edges[2], 0.5);
    EXPECT_EQ(edges[3], 0.75);
    EXPECT_EQ(edges[4], 1.0);
}

TEST(UniformScheme, TwoFeatures) {
    const auto s = uniform_scheme(1, 2);
    EXPECT_EQ(s.condition_count(), 4u);
    EXPECT_EQ(s.shape(), (std::vector<std::size_t>{2, 2}));
}

TEST(UniformScheme, IntervalsTileExactly) {
    for (unsigned b = 0; b <= 10; ++b) {
        const auto s = uniform_scheme(b, 1);
        const auto e = s.feature(0).edges();
        const double width = std::ldexp(1.0, -static_cast<int>(b));
        ASSERT_EQ(e.size(), (std::size_t{1} << b) + 1);
        EXPECT_EQ(e.front(), 0.0);
        EXPECT_EQ(e.back(), 1.0);
        for (std::size_t i = 0; i + 1 < e.size(); ++i) EXPECT_EQ(e[i + 1] - e[i], width);
    }
}

TEST(PartitionScheme, TotalityOverRandomSchemes) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> inner;
        const int H = 1 + static_cast<int>(rng() % 8);
        for (int i = 0; i < H - 1; ++i) inner.push_back(u(rng));
        std::sort(inner.begin(), inner.end());
        inner.erase(std::unique(inner.begin(), inner.end()), inner.end());
        const auto p = FeaturePartition::with_boundaries(inner);
        const auto e = p.edges();
        for (int k = 0; k < 50; ++k) {
            const double v = k == 0 ? 0.0 : (k == 1 ? 1.0 : u(rng));
            const auto h = p.bin(v);
            ASSERT_GE(h, 1u);
            ASSERT_LE(h, p.size());
            int owners = 0;
            for (std::size_t i = 0; i + 1 < e.size(); ++i) {
                const bool last = i + 2 == e.size();
                if (v >= e[i] && (v < e[i + 1] || (last && v <= e[i + 1]))) {
                    ++owners;
                    EXPECT_EQ(h, i + 1);
                }
            }
            EXPECT_EQ(owners, 1);
        }
    }
}

TEST(PartitionScheme, FlatIndexIsRowMajor) {
    const std::vector<std::size_t> shape{4, 5};
    EXPECT_EQ(flat_index(shape, Condition{1, 1}), 0u);
    EXPECT_EQ(flat_index(shape, Condition{1, 2}), 1u);
    EXPECT_EQ(flat_index(shape, Condition{2, 1}), 5u);
    EXPECT_EQ(flat_index(shape, Condition{4, 5}), 19u);
    for (std::size_t i = 0; i < 20; ++i) EXPECT_EQ(flat_index(shape, condition_at(shape, i)), i);
    EXPECT_THROW(flat_index(shape, Condition{0, 1}), DomainError);
    EXPECT_THROW(flat_index(shape, Condition{5, 1}), DomainError);
    EXPECT_THROW(flat_index(shape, Condition{1}), ShapeError);
}

TEST(PartitionScheme, ConditionOfItem) {
    PartitionScheme s({FeaturePartition::uniform(4), FeaturePartition::discrete_values({0, 1, 2, 3, 4})});
    const std::vector<double> f{0.3, 2.0};
    EXPECT_EQ(s.condition_of(f), (Condition{2, 3}));
    const std::vector<double> bad{0.3};
    EXPECT_THROW(s.condition_of(bad), ShapeError);
}

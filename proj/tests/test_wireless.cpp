#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "descpol/environment.hpp"
#include "descpol/wireless.hpp"

using namespace descpol;

namespace {

MultiplierVector zero_mu(std::size_t n, double limit = 0.0) {
    return MultiplierVector(std::vector<double>(n, limit), ConstraintSense::at_least);
}

}  // namespace

TEST(Units, NoiseDensityConversion) {
    EXPECT_NEAR(dbm_to_watt(-106.0) / std::pow(10.0, -13.6), 1.0, 1e-14);
    EXPECT_NEAR(dbm_to_watt(30.0), 1.0, 1e-15);
    EXPECT_NEAR(db_to_linear(-40.0), 1e-4, 1e-19);
    EXPECT_NEAR(linear_to_db(1e-3), -30.0, 1e-12);
    EXPECT_EQ(uniform_power_levels(), (std::vector<double>{0.0, 2.5, 5.0, 7.5, 10.0}));
}

TEST(Shannon, ReferenceValue) {
    const double gain = 1e-4, p = 10.0, W = 5e6, n0 = std::pow(10.0, -16.6);
    // SNR = 1e-3 / (5e6 * 10^-16.6) = 10^7.6 / 5.
    const long double snr = std::pow(10.0L, 7.6L) / 5.0L;
    const long double ref = 5e6L * std::log2(1.0L + snr);
    EXPECT_NEAR(shannon_rate(gain, p, W, n0), static_cast<double>(ref), 1e-3);
    EXPECT_NEAR(shannon_rate(gain, p, W, n0), 1.146e8, 0.001e8);
}

TEST(Shannon, ZeroPowerAndShape) {
    const double n0 = dbm_to_watt(-106.0);
    EXPECT_EQ(shannon_rate(1e-4, 0.0, 5e6, n0), 0.0);
    EXPECT_EQ(shannon_rate(1e-9, 0.0, 5e6, n0), 0.0);
    const double r1 = shannon_rate(1e-4, 10.0, 5e6, n0);
    const double r2 = shannon_rate(1e-4, 10.0, 1e7, n0);
    EXPECT_GT(r2, r1);
    EXPECT_LT(r2, 2.0 * r1);
}

TEST(Shannon, MonotoneInGainAndPower) {
    const double n0 = dbm_to_watt(-106.0);
    double prev = -1.0;
    for (double g = 1e-5; g <= 1e-3; g *= 1.2) {
        const double r = shannon_rate(g, 5.0, 5e6, n0);
        EXPECT_GE(r, prev);
        prev = r;
    }
    prev = -1.0;
    for (double p = 0.0; p <= 10.0; p += 0.5) {
        const double r = shannon_rate(1e-4, p, 5e6, n0);
        EXPECT_GE(r, prev);
        prev = r;
    }
}

TEST(Channel, ClampAtBothEnds) {
    const auto c = table1_system('A');
    const auto& user = c.users[0];
    EXPECT_EQ(channel_gain_db(c, user, std::numeric_limits<double>::infinity()), -30.0);
    EXPECT_EQ(channel_gain_db(c, user, -std::numeric_limits<double>::infinity()), -50.0);
    EXPECT_NEAR(db_to_linear(channel_gain_db(c, user, 1e300)), 1e-3, 1e-18);
    EXPECT_NEAR(db_to_linear(channel_gain_db(c, user, -1e300)), 1e-5, 1e-20);
}

TEST(Channel, PathlossAtTwentyMetres) {
    EXPECT_NEAR(pathloss_db(20.0, 3.76), -37.6 * std::log10(20.0), 1e-12);
    EXPECT_NEAR(pathloss_db(20.0, 3.76), -48.92, 0.01);
    const auto c = table1_system('A');
    Rng rng(5);
    double sum = 0.0;
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) sum += pathloss_db(20.0, c.pathloss_exponent) + draw_shadowing_db(c, rng);
    // Standard error of the mean is 10 / sqrt(1e5) ~ 0.032 dB.
    EXPECT_NEAR(sum / draws, -48.92, 0.13);
}

TEST(Channel, GainsStayInRange) {
    const auto c = table1_system('C');
    Rng rng(6);
    for (int i = 0; i < 20000; ++i)
        for (const auto& u : c.users) {
            const double g = channel_draw(c, u, rng);
            ASSERT_GE(g, 1e-5 * (1 - 1e-12));
            ASSERT_LE(g, 1e-3 * (1 + 1e-12));
        }
}

TEST(Channel, FeatureMapping) {
    const auto c = table1_system('A');
    EXPECT_EQ(channel_feature(c, -30.0), 0.0);
    EXPECT_EQ(channel_feature(c, -50.0), 1.0);
    EXPECT_DOUBLE_EQ(channel_feature(c, -40.0), 0.5);
}

TEST(WirelessStep, CostExamples) {
    auto c = table1_system('A');
    const std::vector<double> gains(4, 1e-4);
    for (std::size_t level = 0; level < 5; ++level) {
        const auto r = wireless_step(c, zero_mu(4, 10.0), gains, {1, {level}});
        EXPECT_EQ(r.cost, c.power_levels_w[level]);
    }

    // One user, mu = 1, dbar = 5 Mbps, delivered rate exactly 5 Mbps, power 2.5 W.
    WirelessConfig one;
    one.users = {{20.0, 0.5e6}};
    const double p = 2.5;
    const double snr_needed = std::exp2(5e6 / one.bandwidth_hz) - 1.0;
    const double gain = snr_needed * one.bandwidth_hz * one.noise_density_w_per_hz / p;
    one.power_levels_w = {0.0, p};
    const MultiplierVector mu({5.0}, ConstraintSense::at_least, {}, {1.0});
    const auto r = wireless_step(one, mu, {gain}, {0, {1}});
    EXPECT_NEAR(r.rates_bps[0], 5e6, 1e-6);
    EXPECT_NEAR(r.cost, p, 1e-12);

    // Zero power delivers nothing: cost is sum mu_n dbar_n.
    const MultiplierVector mu4({10.0, 10.0, 10.0, 10.0}, ConstraintSense::at_least, {}, {0.5, 1.0, 0.0, 2.0});
    const auto z = wireless_step(c, mu4, gains, {2, {0}});
    EXPECT_DOUBLE_EQ(z.cost, 35.0);
    EXPECT_EQ(z.rates_bps, std::vector<double>(4, 0.0));
}

TEST(WirelessStep, OnlyScheduledUserGetsRate) {
    const auto c = table1_system('B');
    const std::vector<double> gains(9, 1e-4);
    const auto r = wireless_step(c, zero_mu(9), gains, {4, {4}});
    for (std::size_t n = 0; n < 9; ++n) EXPECT_EQ(r.rates_bps[n] > 0.0, n == 4);
    EXPECT_THROW(wireless_step(c, zero_mu(9), gains, {9, {0}}), DomainError);
    EXPECT_THROW(wireless_step(c, zero_mu(9), gains, {0, {5}}), DomainError);
    EXPECT_THROW(wireless_step(c, zero_mu(9), gains, {0, {}}), DomainError);
}

TEST(Systems, TableDefinitions) {
    auto count = [](const WirelessConfig& c, double d) {
        return std::count_if(c.users.begin(), c.users.end(), [d](const WirelessUser& u) { return u.distance_m == d; });
    };
    const auto a = table1_system('A'), b = table1_system('B'), c = table1_system('C');
    EXPECT_EQ(a.users.size(), 4u);
    EXPECT_EQ(count(a, 20), 1);
    EXPECT_EQ(count(a, 50), 2);
    EXPECT_EQ(count(a, 80), 1);
    EXPECT_EQ(a.users[3].distance_m, 80.0);
    EXPECT_EQ(b.users.size(), 9u);
    EXPECT_EQ(count(b, 20), 3);
    EXPECT_EQ(count(b, 80), 3);
    EXPECT_EQ(c.users.size(), 20u);
    EXPECT_EQ(count(c, 50), 10);
    EXPECT_EQ(a.users[0].rate_requirement_bps, 1e6);
    EXPECT_EQ(b.users[0].rate_requirement_bps, 0.5e6);
    EXPECT_EQ(c.users[0].rate_requirement_bps, 0.2e6);
    EXPECT_THROW(table1_system('D'), ConfigError);
}

TEST(WirelessSystem, MultipliersTrackViolations) {
    WirelessSystem sys(table1_system('A'), 3, 0.9, StepSize{0.01});
    EXPECT_EQ(sys.multipliers().limits(), std::vector<double>(4, 10.0));
    for (int t = 0; t < 10; ++t) sys.step({0, {0}});
    for (double mu : sys.multipliers().values()) EXPECT_NEAR(mu, 1.0, 1e-12);
    for (const auto& f : sys.features().items) {
        ASSERT_EQ(f.size(), 2u);
        EXPECT_NEAR(f[1], 1.0, 1e-12);
        EXPECT_GE(f[0], 0.0);
        EXPECT_LE(f[0], 1.0);
    }
}

TEST(WirelessSystem, ChannelsIndependentOfActions) {
    WirelessSystem a(table1_system('B'), 8, 0.9), b(table1_system('B'), 8, 0.9);
    for (int t = 0; t < 100; ++t) {
        ASSERT_EQ(a.channel().gains_db(), b.channel().gains_db());
        a.step({0, {4}});
        b.step({static_cast<std::size_t>(t % 9), {static_cast<std::size_t>(t % 5)}});
    }
}

TEST(Environment, WrapsBothKinds) {
    Environment items(EnvironmentSpec::items({3}), 1, 0.9);
    EXPECT_EQ(items.item_count(), 3u);
    EXPECT_EQ(items.conventional_input().size(), 6);
    EXPECT_TRUE(items.multipliers().empty());
    EXPECT_EQ(items.spec().objective(), Objective::maximize);

    Environment radio(EnvironmentSpec::radio(table1_system('A')), 1, 0.9);
    EXPECT_EQ(radio.spec().objective(), Objective::minimize);
    EXPECT_EQ(radio.spec().decision_sizes(), std::vector<std::size_t>{5});
    const auto o = radio.step({3, {4}});
    EXPECT_EQ(o.power_w, 10.0);
    EXPECT_EQ(o.rates_bps.size(), 4u);
    EXPECT_EQ(radio.multipliers().size(), 4u);
}

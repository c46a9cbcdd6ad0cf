#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "descpol/errors.hpp"
#include "descpol/lagrangian.hpp"
#include "descpol/random.hpp"
#include "descpol/translation.hpp"

namespace descpol {

inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double linear) { return 10.0 * std::log10(linear); }

/// Candidate power levels from uniformly discretizing [0, max_w] into `count` values.
inline std::vector<double> uniform_power_levels(double max_w = 10.0, std::size_t count = 5) {
    if (count < 2) return {max_w};
    std::vector<double> levels(count);
    for (std::size_t i = 0; i < count; ++i)
        levels[i] = max_w * static_cast<double>(i) / static_cast<double>(count - 1);
    return levels;
}

struct WirelessUser {
    double distance_m = 20.0;
    double rate_requirement_bps = 1e6;
};

struct WirelessConfig {
    std::vector<WirelessUser> users;
    double bandwidth_hz = 5e6;
    double noise_density_w_per_hz = dbm_to_watt(-106.0);
    std::vector<double> power_levels_w = uniform_power_levels(10.0, 5);
    double pathloss_exponent = 3.76;
    double shadowing_std_db = 10.0;
    double gain_floor_db = -50.0;
    double gain_ceiling_db = -30.0;
    // Rates enter the multiplier update and the Lagrangian cost in this unit (Mbps by default).
    double rate_unit_bps = 1e6;

    void validate() const {
        if (users.empty()) throw ConfigError("users", "at least one user is required");
        for (std::size_t n = 0; n < users.size(); ++n) {
            if (!(users[n].distance_m > 0.0))
                throw ConfigError("users[" + std::to_string(n) + "].distance_m", "must be positive");
            if (!(users[n].rate_requirement_bps >= 0.0))
                throw ConfigError("users[" + std::to_string(n) + "].rate_requirement_bps", "must be >= 0");
        }
        if (power_levels_w.empty()) throw ConfigError("power_levels_w", "must not be empty");
        for (double p : power_levels_w)
            if (!(p >= 0.0)) throw ConfigError("power_levels_w", "levels must be >= 0");
        if (!(bandwidth_hz > 0.0)) throw ConfigError("bandwidth_hz", "must be positive");
        if (!(noise_density_w_per_hz > 0.0)) throw ConfigError("noise_density_w_per_hz", "must be positive");
        if (!(gain_floor_db < gain_ceiling_db)) throw ConfigError("gain_range_db", "floor must be below ceiling");
        if (!(rate_unit_bps > 0.0)) throw ConfigError("rate_unit_bps", "must be positive");
    }
};

/// Reference systems: 'A' (4 users, 1 Mbps), 'B' (9 users, 0.5 Mbps), 'C' (20 users, 0.2 Mbps).
inline WirelessConfig table1_system(char name) {
    auto build = [](std::size_t near, std::size_t mid, std::size_t far, double req) {
        WirelessConfig c;
        for (std::size_t i = 0; i < near; ++i) c.users.push_back({20.0, req});
        for (std::size_t i = 0; i < mid; ++i) c.users.push_back({50.0, req});
        for (std::size_t i = 0; i < far; ++i) c.users.push_back({80.0, req});
        return c;
    };
    switch (name) {
        case 'A': return build(1, 2, 1, 1e6);
        case 'B': return build(3, 3, 3, 0.5e6);
        case 'C': return build(5, 10, 5, 0.2e6);
        default: throw ConfigError("system", std::string("unknown wireless system '") + name + "'");
    }
}

/// W log2(1 + gain * power / (W N0)) in bits/s; zero at zero power.
inline double shannon_rate(double gain, double power_w, double bandwidth_hz, double noise_density_w_per_hz) {
    if (power_w <= 0.0) return 0.0;
    return bandwidth_hz * std::log2(1.0 + gain * power_w / (bandwidth_hz * noise_density_w_per_hz));
}

/// Distance-dependent pathloss in dB, -10 eta log10(d), with no reference-distance offset.
inline double pathloss_db(double distance_m, double exponent) { return -10.0 * exponent * std::log10(distance_m); }

/// Pathloss plus shadowing, clamped to the configured gain range [floor, ceiling] dB.
inline double channel_gain_db(const WirelessConfig& config, const WirelessUser& user, double shadowing_db) {
    const double raw = pathloss_db(user.distance_m, config.pathloss_exponent) + shadowing_db;
    if (std::isnan(raw)) throw DomainError("channel gain is NaN");
    return std::clamp(raw, config.gain_floor_db, config.gain_ceiling_db);
}

template <class Generator>
double draw_shadowing_db(const WirelessConfig& config, Generator& rng) {
    std::normal_distribution<double> shadow(0.0, config.shadowing_std_db);
    return shadow(rng);
}

/// Linear channel gain of one user for one slot (independent log-normal shadowing).
template <class Generator>
double channel_draw(const WirelessConfig& config, const WirelessUser& user, Generator& rng) {
    return db_to_linear(channel_gain_db(config, user, draw_shadowing_db(config, rng)));
}

/// Gain feature in [0, 1]: 0 at the ceiling (best channel), 1 at the floor.
inline double channel_feature(const WirelessConfig& config, double gain_db) {
    const double f = (config.gain_ceiling_db - gain_db) / (config.gain_ceiling_db - config.gain_floor_db);
    return std::clamp(f, 0.0, 1.0);
}

struct WirelessStepResult {
    double cost = 0.0;     // power + sum_n mu_n (dbar_n - r_n), rates in rate units
    double power_w = 0.0;
    std::vector<double> rates_bps;
};

/// Pure slot evaluation: the scheduled user gets the Shannon rate at the chosen power,
/// every other user gets zero.
inline WirelessStepResult wireless_step(const WirelessConfig& config, const MultiplierVector& multipliers,
                                        const std::vector<double>& gains_linear, const TypicalAction& action) {
    const std::size_t n_users = config.users.size();
    if (action.item >= n_users) throw DomainError("user index " + std::to_string(action.item) + " out of range");
    if (action.decisions.size() != 1 || action.decisions[0] >= config.power_levels_w.size())
        throw DomainError("invalid power level");
    if (gains_linear.size() != n_users || multipliers.size() != n_users)
        throw ShapeError("wireless_step: gains/multipliers do not match user count");

    WirelessStepResult r;
    r.power_w = config.power_levels_w[action.decisions[0]];
    r.rates_bps.assign(n_users, 0.0);
    r.rates_bps[action.item] =
        shannon_rate(gains_linear[action.item], r.power_w, config.bandwidth_hz, config.noise_density_w_per_hz);
    std::vector<double> rates_unit(n_users);
    for (std::size_t n = 0; n < n_users; ++n) rates_unit[n] = r.rates_bps[n] / config.rate_unit_bps;
    r.cost = lagrangian_cost(r.power_w, rates_unit, multipliers);
    return r;
}

/// Channel process: i.i.d. log-normal shadowing per user and slot. Draws do not depend on actions.
class WirelessChannel {
public:
    WirelessChannel(WirelessConfig config, std::uint64_t seed) : config_(std::move(config)), rng_(seed) {
        config_.validate();
        redraw();
    }

    const WirelessConfig& config() const noexcept { return config_; }
    const std::vector<double>& gains_db() const noexcept { return gains_db_; }
    const std::vector<double>& gains_linear() const noexcept { return gains_linear_; }

    void redraw() {
        gains_db_.resize(config_.users.size());
        gains_linear_.resize(config_.users.size());
        for (std::size_t n = 0; n < config_.users.size(); ++n) {
            gains_db_[n] = channel_gain_db(config_, config_.users[n], draw_shadowing_db(config_, rng_));
            gains_linear_[n] = db_to_linear(gains_db_[n]);
        }
    }

private:
    WirelessConfig config_;
    Rng rng_;
    std::vector<double> gains_db_;
    std::vector<double> gains_linear_;
};

struct WirelessOutcome {
    double utility = 0.0;  // Lagrangian cost (to be minimized)
    double power_w = 0.0;
    std::vector<double> rates_bps;
};

/// Constrained wireless scheduling system as seen by a policy: channels plus the policy's own
/// rate-requirement multipliers. Item features are (channel feature, multiplier clamped to
/// [0, multiplier_domain_max]).
class WirelessSystem {
public:
    WirelessSystem(WirelessConfig config, std::uint64_t seed, double gamma, StepSize step = {},
                   double multiplier_domain_max = 2.0)
        : channel_(std::move(config), seed), domain_max_(multiplier_domain_max) {
        const auto& c = channel_.config();
        std::vector<double> limits;
        for (const auto& u : c.users) limits.push_back(discounted_constraint(u.rate_requirement_bps, gamma) / c.rate_unit_bps);
        multipliers_ = MultiplierVector(std::move(limits), ConstraintSense::at_least, step);
        refresh_features();
    }

    const WirelessConfig& config() const noexcept { return channel_.config(); }
    const WirelessChannel& channel() const noexcept { return channel_; }
    const MultiplierVector& multipliers() const noexcept { return multipliers_; }
    const TypicalState& features() const noexcept { return features_; }
    std::size_t item_count() const noexcept { return channel_.config().users.size(); }
    double multiplier_domain_max() const noexcept { return domain_max_; }

    /// Cost with the current multipliers, then multiplier update, then next channel draw.
    WirelessOutcome step(const TypicalAction& action) {
        const auto& c = channel_.config();
        auto r = wireless_step(c, multipliers_, channel_.gains_linear(), action);
        std::vector<double> rates_unit(r.rates_bps.size());
        for (std::size_t n = 0; n < rates_unit.size(); ++n) rates_unit[n] = r.rates_bps[n] / c.rate_unit_bps;
        multipliers_.update(rates_unit);
        channel_.redraw();
        refresh_features();
        return WirelessOutcome{r.cost, r.power_w, std::move(r.rates_bps)};
    }

    /// (channel_1, mu_1 / max, ..., channel_N, mu_N / max).
    Eigen::VectorXd conventional_input() const {
        Eigen::VectorXd x(static_cast<Eigen::Index>(2 * features_.item_count()));
        for (std::size_t n = 0; n < features_.item_count(); ++n) {
            x[static_cast<Eigen::Index>(2 * n)] = features_.items[n][0];
            x[static_cast<Eigen::Index>(2 * n + 1)] = features_.items[n][1] / domain_max_;
        }
        return x;
    }

private:
    void refresh_features() {
        TypicalState s;
        s.items.reserve(channel_.gains_db().size());
        for (double g : channel_.gains_db()) s.items.push_back({channel_feature(channel_.config(), g)});
        features_ = augment_state(s, multipliers_, domain_max_);
    }

    WirelessChannel channel_;
    MultiplierVector multipliers_;
    double domain_max_;
    TypicalState features_;
};

}  // namespace descpol

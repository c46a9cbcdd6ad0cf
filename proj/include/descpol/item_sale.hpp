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
#include "descpol/random.hpp"
#include "descpol/translation.hpp"

namespace descpol {

enum class PriceDistribution { uniform, truncated_exponential };

/// Item-sale scenario: N items with price p in [0,1] and quantity g in {0,...,4}, both
/// redrawn i.i.d. every timestep; selling item n yields p_n^e * g_n.
struct ItemSaleConfig {
    std::size_t items = 2;
    PriceDistribution price = PriceDistribution::uniform;
    double reward_exponent = 1.0;

    void validate() const {
        if (items < 1) throw ConfigError("items", "must be >= 1");
        if (!(reward_exponent >= 1.0)) throw ConfigError("reward_exponent", "must be >= 1");
    }
};

inline constexpr int kMaxQuantity = 4;
inline constexpr double kTruncationPoint = 5.0;

// Feature layout of an item: {price, quantity}.
inline constexpr std::size_t kPriceFeature = 0;
inline constexpr std::size_t kQuantityFeature = 1;

/// p = 1 - phi/5 with phi ~ e^{-x} / (1 - e^{-5}) on [0, 5], sampled by inverse CDF.
template <class Generator>
double draw_truncated_exponential_price(Generator& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double phi = -std::log1p(-u(rng) * -std::expm1(-kTruncationPoint));
    return std::clamp(1.0 - phi / kTruncationPoint, 0.0, 1.0);
}

/// Closed-form CDF of the truncated-exponential price.
inline double truncated_exponential_price_cdf(double p) {
    if (p <= 0.0) return 0.0;
    if (p >= 1.0) return 1.0;
    return (std::exp(-kTruncationPoint * (1.0 - p)) - std::exp(-kTruncationPoint)) / -std::expm1(-kTruncationPoint);
}

template <class Generator>
TypicalState draw_item_sale_state(const ItemSaleConfig& config, Generator& rng) {
    std::uniform_real_distribution<double> uniform_price(0.0, 1.0);
    std::uniform_int_distribution<int> quantity(0, kMaxQuantity);
    TypicalState s;
    s.items.resize(config.items);
    for (auto& f : s.items) {
        const double p = config.price == PriceDistribution::uniform ? uniform_price(rng)
                                                                     : draw_truncated_exponential_price(rng);
        f = {p, static_cast<double>(quantity(rng))};
    }
    return s;
}

inline double item_sale_reward(const FeatureVector& item, double exponent) {
    const double p = item[kPriceFeature];
    return (exponent == 1.0 ? p : std::pow(p, exponent)) * item[kQuantityFeature];
}

/// Reward of serving `action.item` in `state`. Only the chosen item's features matter.
inline double item_sale_utility(const TypicalState& state, const TypicalAction& action, double exponent = 1.0) {
    if (action.item >= state.item_count())
        throw DomainError("item index " + std::to_string(action.item) + " outside 0.." +
                          std::to_string(state.item_count() - 1));
    return item_sale_reward(state.items[action.item], exponent);
}

/// Conventional-policy encoding: (p_1, g_1/4, ..., p_N, g_N/4).
inline Eigen::VectorXd item_sale_conventional_input(const TypicalState& state) {
    Eigen::VectorXd x(static_cast<Eigen::Index>(2 * state.item_count()));
    for (std::size_t n = 0; n < state.item_count(); ++n) {
        x[static_cast<Eigen::Index>(2 * n)] = state.items[n][kPriceFeature];
        x[static_cast<Eigen::Index>(2 * n + 1)] = state.items[n][kQuantityFeature] / kMaxQuantity;
    }
    return x;
}

struct ItemSaleOutcome {
    double utility = 0.0;
};

/// Stateful simulator. The random stream is consumed identically regardless of the actions
/// taken, so two instances with the same seed see the same state sequence.
class ItemSaleEnvironment {
public:
    ItemSaleEnvironment(ItemSaleConfig config, std::uint64_t seed) : config_(config), rng_(seed) {
        config_.validate();
        state_ = draw_item_sale_state(config_, rng_);
    }

    const ItemSaleConfig& config() const noexcept { return config_; }
    const TypicalState& features() const noexcept { return state_; }
    std::size_t item_count() const noexcept { return config_.items; }

    ItemSaleOutcome step(const TypicalAction& action) {
        ItemSaleOutcome out{item_sale_utility(state_, action, config_.reward_exponent)};
        state_ = draw_item_sale_state(config_, rng_);
        return out;
    }

private:
    ItemSaleConfig config_;
    Rng rng_;
    TypicalState state_;
};

}  // namespace descpol

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "descpol/descriptive.hpp"
#include "descpol/errors.hpp"
#include "descpol/item_sale.hpp"
#include "descpol/lagrangian.hpp"
#include "descpol/network.hpp"
#include "descpol/translation.hpp"
#include "descpol/wireless.hpp"

namespace descpol {

enum class EnvironmentKind { item_sale, wireless };

inline const char* to_string(EnvironmentKind k) { return k == EnvironmentKind::item_sale ? "item_sale" : "wireless"; }

struct EnvironmentSpec {
    EnvironmentKind kind = EnvironmentKind::item_sale;
    ItemSaleConfig item_sale;
    WirelessConfig wireless;
    StepSize multiplier_step;
    double multiplier_domain_max = 2.0;

    static EnvironmentSpec items(ItemSaleConfig c) {
        EnvironmentSpec s;
        s.kind = EnvironmentKind::item_sale;
        s.item_sale = c;
        return s;
    }
    static EnvironmentSpec radio(WirelessConfig c, StepSize step = {}) {
        EnvironmentSpec s;
        s.kind = EnvironmentKind::wireless;
        s.wireless = std::move(c);
        s.multiplier_step = step;
        return s;
    }

    void validate() const {
        if (kind == EnvironmentKind::item_sale) {
            item_sale.validate();
        } else {
            wireless.validate();
            if (!(multiplier_step.base > 0.0)) throw ConfigError("multiplier_step", "must be positive");
            if (!(multiplier_domain_max > 0.0)) throw ConfigError("multiplier_domain_max", "must be positive");
        }
    }

    std::size_t item_count() const {
        return kind == EnvironmentKind::item_sale ? item_sale.items : wireless.users.size();
    }
    std::size_t feature_count() const { return 2; }
    Objective objective() const { return kind == EnvironmentKind::item_sale ? Objective::maximize : Objective::minimize; }

    std::vector<DecisionSet> decision_sets() const {
        if (kind == EnvironmentKind::item_sale) return {};
        return {DecisionSet{"power_w", wireless.power_levels_w}};
    }
    std::vector<std::size_t> decision_sizes() const {
        std::vector<std::size_t> out;
        for (const auto& d : decision_sets()) out.push_back(d.size());
        return out;
    }
    std::size_t conventional_input_width() const { return item_count() * feature_count(); }
};

struct StepOutcome {
    double utility = 0.0;
    double power_w = 0.0;
    std::vector<double> rates_bps;  // wireless only
};

/// One simulated system instance. Item-sale and wireless share this interface so the runner
/// and the federated harness can drive either.
class Environment {
public:
    Environment(const EnvironmentSpec& spec, std::uint64_t seed, double gamma) : spec_(spec) {
        spec_.validate();
        if (spec_.kind == EnvironmentKind::item_sale)
            impl_.emplace<ItemSaleEnvironment>(spec_.item_sale, seed);
        else
            impl_.emplace<WirelessSystem>(spec_.wireless, seed, gamma, spec_.multiplier_step,
                                          spec_.multiplier_domain_max);
    }

    const EnvironmentSpec& spec() const noexcept { return spec_; }
    std::size_t item_count() const { return spec_.item_count(); }

    const TypicalState& features() const {
        if (const auto* w = std::get_if<WirelessSystem>(&impl_)) return w->features();
        return std::get<ItemSaleEnvironment>(impl_).features();
    }

    Eigen::VectorXd conventional_input() const {
        if (const auto* w = std::get_if<WirelessSystem>(&impl_)) return w->conventional_input();
        return item_sale_conventional_input(features());
    }

    StepOutcome step(const TypicalAction& action) {
        if (auto* w = std::get_if<WirelessSystem>(&impl_)) {
            auto o = w->step(action);
            return StepOutcome{o.utility, o.power_w, std::move(o.rates_bps)};
        }
        return StepOutcome{std::get<ItemSaleEnvironment>(impl_).step(action).utility, 0.0, {}};
    }

    /// Current multipliers (wireless) or an empty vector.
    std::vector<double> multipliers() const {
        if (const auto* w = std::get_if<WirelessSystem>(&impl_)) return w->multipliers().values();
        return {};
    }

private:
    EnvironmentSpec spec_;
    std::variant<std::monostate, ItemSaleEnvironment, WirelessSystem> impl_;
};

}  // namespace descpol

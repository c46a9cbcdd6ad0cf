#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <span>
#include <string>
#include <vector>

#include "descpol/errors.hpp"
#include "descpol/partition.hpp"
#include "descpol/translation.hpp"

namespace descpol {

/// Direction of the per-item constraint the multiplier enforces.
///
/// at_most:  U_n <= delta_n,  update mu <- [mu - alpha (delta_n - u_n)]^+
/// at_least: R_n >= dbar_n,   update mu <- [mu - alpha (r_n - dbar_n)]^+
enum class ConstraintSense { at_most, at_least };

/// Constant step alpha, optionally decayed as alpha / sqrt(t).
struct StepSize {
    double base = 0.01;
    bool inverse_sqrt_decay = false;

    double at(std::uint64_t t) const {
        if (!inverse_sqrt_decay) return base;
        return base / std::sqrt(static_cast<double>(std::max<std::uint64_t>(t, 1)));
    }
};

/// dbar = delta / (1 - gamma): turns a per-slot average requirement into a discounted-sum one.
///
/// 1 - gamma is formed from the shortest decimal that round-trips gamma, in extended precision,
/// so a configured 0.9 yields a factor of exactly 10 rather than 10.000000000000002.
inline double discounted_constraint(double per_slot, double gamma) {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw DomainError("discount factor must lie in [0, 1)");
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf - 1, gamma);
    *res.ptr = '\0';
    const long double g = std::strtold(buf, nullptr);
    return static_cast<double>(static_cast<long double>(per_slot) / (1.0L - g));
}

/// Per-item Lagrangian multipliers mu_n >= 0 with their constraint constants.
class MultiplierVector {
public:
    MultiplierVector() = default;
    MultiplierVector(std::vector<double> limits, ConstraintSense sense, StepSize step = {},
                     std::vector<double> initial = {})
        : limits_(std::move(limits)), sense_(sense), step_(step), values_(std::move(initial)) {
        if (values_.empty()) values_.assign(limits_.size(), 0.0);
        if (values_.size() != limits_.size()) throw ShapeError("multiplier and constraint counts differ");
        for (double v : values_)
            if (!(v >= 0.0)) throw DomainError("multipliers must be non-negative");
    }

    std::size_t size() const noexcept { return values_.size(); }
    const std::vector<double>& values() const noexcept { return values_; }
    const std::vector<double>& limits() const noexcept { return limits_; }
    ConstraintSense sense() const noexcept { return sense_; }
    const StepSize& step_size() const noexcept { return step_; }
    std::uint64_t updates() const noexcept { return updates_; }

    /// Projected subgradient step with an explicit alpha.
    void update(std::span<const double> observed, double alpha) {
        if (!(alpha > 0.0)) throw DomainError("multiplier step size must be positive");
        if (observed.size() != values_.size()) throw ShapeError("observed utility count differs from multipliers");
        for (std::size_t n = 0; n < values_.size(); ++n) {
            const double subgradient =
                sense_ == ConstraintSense::at_most ? limits_[n] - observed[n] : observed[n] - limits_[n];
            values_[n] = std::max(0.0, values_[n] - alpha * subgradient);
        }
        ++updates_;
    }

    /// Step with alpha taken from the configured schedule at the next update index.
    void update(std::span<const double> observed) { update(observed, step_.at(updates_ + 1)); }

private:
    std::vector<double> limits_;
    ConstraintSense sense_ = ConstraintSense::at_most;
    StepSize step_;
    std::vector<double> values_;
    std::uint64_t updates_ = 0;
};

inline MultiplierVector update_multipliers(MultiplierVector mu, std::span<const double> observed, double alpha) {
    mu.update(observed, alpha);
    return mu;
}

/// u^mu = u - sum_n mu_n u_n.
inline double lagrangian_utility(double utility, std::span<const double> item_utilities,
                                 std::span<const double> multipliers) {
    if (item_utilities.size() != multipliers.size()) throw ShapeError("utility and multiplier counts differ");
    double out = utility;
    for (std::size_t n = 0; n < multipliers.size(); ++n) out -= multipliers[n] * item_utilities[n];
    return out;
}

/// Minimization form for at-least constraints: cost + sum_n mu_n (dbar_n - r_n).
inline double lagrangian_cost(double cost, std::span<const double> item_utilities, const MultiplierVector& mu) {
    if (item_utilities.size() != mu.size()) throw ShapeError("utility and multiplier counts differ");
    double out = cost;
    for (std::size_t n = 0; n < mu.size(); ++n) out += mu.values()[n] * (mu.limits()[n] - item_utilities[n]);
    return out;
}

/// Appends each item's own multiplier, clamped to [0, domain_max], as an extra feature.
inline TypicalState augment_state(const TypicalState& s, std::span<const double> multipliers,
                                  double domain_max = 2.0) {
    if (multipliers.size() != s.item_count())
        throw ShapeError("augment_state: " + std::to_string(multipliers.size()) + " multipliers for " +
                         std::to_string(s.item_count()) + " items");
    TypicalState out = s;
    for (std::size_t n = 0; n < out.items.size(); ++n)
        out.items[n].push_back(std::clamp(multipliers[n], 0.0, domain_max));
    return out;
}

inline TypicalState augment_state(const TypicalState& s, const MultiplierVector& mu, double domain_max = 2.0) {
    return augment_state(s, std::span<const double>(mu.values()), domain_max);
}

/// Multiplier partition over [0, domain_max] refined near zero: interior boundaries at
/// domain_max * (k / bins)^2 for k = 1..bins-1.
inline FeaturePartition quadratic_partition(std::size_t bins = 10, double domain_max = 2.0) {
    if (bins < 1) throw std::invalid_argument("quadratic partition needs at least one bin");
    std::vector<double> inner;
    for (std::size_t k = 1; k < bins; ++k) {
        const double r = static_cast<double>(k) / static_cast<double>(bins);
        inner.push_back(domain_max * r * r);
    }
    return FeaturePartition::with_boundaries(std::move(inner), 0.0, domain_max);
}

}  // namespace descpol

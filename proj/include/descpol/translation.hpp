#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "descpol/descriptive.hpp"
#include "descpol/errors.hpp"
#include "descpol/partition.hpp"

namespace descpol {

using FeatureVector = std::vector<double>;

/// Indexed system state: one feature vector per item. Item indices are 0-based.
struct TypicalState {
    std::vector<FeatureVector> items;

    std::size_t item_count() const noexcept { return items.size(); }
    std::size_t feature_count() const noexcept { return items.empty() ? 0 : items.front().size(); }

    friend bool operator==(const TypicalState&, const TypicalState&) = default;
};

/// Chosen item plus auxiliary decision indices.
struct TypicalAction {
    std::size_t item = 0;
    std::vector<std::size_t> decisions;

    friend bool operator==(const TypicalAction&, const TypicalAction&) = default;
};

/// d_s: marks every condition that holds at least one item.
inline DescriptiveState translate_state(const TypicalState& s, const PartitionScheme& scheme) {
    if (s.items.empty()) throw DomainError("typical state has no items");
    DescriptiveState out(scheme.shape());
    for (const auto& f : s.items) out.set(scheme.condition_of(f));
    return out;
}

/// N(h): items whose features all fall in condition h, in increasing index order.
inline std::vector<std::size_t> items_in_condition(const TypicalState& s, const Condition& h,
                                                   const PartitionScheme& scheme) {
    std::vector<std::size_t> out;
    for (std::size_t n = 0; n < s.items.size(); ++n)
        if (scheme.condition_of(s.items[n]) == h) out.push_back(n);
    return out;
}

/// d_a: picks an item of N(h) uniformly at random and passes the decisions through.
template <class Rng>
TypicalAction translate_action(const DescriptiveAction& action, const TypicalState& s,
                               const PartitionScheme& scheme, Rng& rng) {
    const auto members = items_in_condition(s, action.condition, scheme);
    if (members.empty())
        throw InfeasibleActionError("no item in condition " + to_string(action.condition));
    std::size_t pick = 0;
    if (members.size() > 1) {
        std::uniform_int_distribution<std::size_t> dist(0, members.size() - 1);
        pick = dist(rng);
    }
    return TypicalAction{members[pick], action.decisions};
}

}  // namespace descpol

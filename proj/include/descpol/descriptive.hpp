#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "descpol/errors.hpp"
#include "descpol/partition.hpp"

namespace descpol {

/// Binary tensor over the condition grid: bit h is set iff some item lies in condition h.
///
/// Bits are stored row-major with the last feature varying fastest, which is also the
/// order of `flatten()` and of the network input.
class DescriptiveState {
public:
    DescriptiveState() = default;
    explicit DescriptiveState(std::vector<std::size_t> shape)
        : shape_(std::move(shape)), bits_(shape_volume(shape_), 0) {
        for (auto h : shape_)
            if (h < 1) throw ShapeError("descriptive state dimensions must be >= 1");
    }

    static DescriptiveState all_ones(std::vector<std::size_t> shape) {
        DescriptiveState s(std::move(shape));
        std::fill(s.bits_.begin(), s.bits_.end(), std::uint8_t{1});
        return s;
    }

    static DescriptiveState unflatten(std::vector<std::size_t> shape, const Eigen::VectorXd& flat) {
        DescriptiveState s(std::move(shape));
        if (static_cast<std::size_t>(flat.size()) != s.size())
            throw ShapeError("flattened state has length " + std::to_string(flat.size()) + ", expected " +
                             std::to_string(s.size()));
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (flat[i] == 1.0)
                s.bits_[i] = 1;
            else if (flat[i] != 0.0)
                throw DomainError("flattened descriptive state must be binary");
        }
        return s;
    }

    const std::vector<std::size_t>& shape() const noexcept { return shape_; }
    std::size_t size() const noexcept { return bits_.size(); }
    std::span<const std::uint8_t> bits() const noexcept { return bits_; }

    bool test(const Condition& h) const { return bits_[flat_index(shape_, h)] != 0; }
    void set(const Condition& h, bool value = true) { bits_[flat_index(shape_, h)] = value ? 1 : 0; }
    bool test_flat(std::size_t i) const { return bits_.at(i) != 0; }
    void set_flat(std::size_t i, bool value = true) { bits_.at(i) = value ? 1 : 0; }

    std::size_t count() const {
        std::size_t n = 0;
        for (auto b : bits_) n += b;
        return n;
    }

    std::vector<Condition> occupied() const {
        std::vector<Condition> out;
        for (std::size_t i = 0; i < bits_.size(); ++i)
            if (bits_[i]) out.push_back(condition_at(shape_, i));
        return out;
    }

    Eigen::VectorXd flatten() const {
        Eigen::VectorXd v(static_cast<Eigen::Index>(bits_.size()));
        for (std::size_t i = 0; i < bits_.size(); ++i) v[static_cast<Eigen::Index>(i)] = bits_[i];
        return v;
    }

    friend bool operator==(const DescriptiveState&, const DescriptiveState&) = default;

private:
    std::vector<std::size_t> shape_;
    std::vector<std::uint8_t> bits_;
};

/// Finite set M_l of auxiliary decisions (e.g. transmission power levels).
struct DecisionSet {
    std::string name;
    std::vector<double> values;

    std::size_t size() const noexcept { return values.size(); }
};

/// (h, m): a condition plus one index into each decision set.
struct DescriptiveAction {
    Condition condition;
    std::vector<std::size_t> decisions;

    friend bool operator==(const DescriptiveAction&, const DescriptiveAction&) = default;
    friend auto operator<=>(const DescriptiveAction&, const DescriptiveAction&) = default;
};

/// Flat enumeration of descriptive actions: index = flat(h) * prod|M_l| + mixed-radix(m).
class DescriptiveActionSpace {
public:
    DescriptiveActionSpace() = default;
    DescriptiveActionSpace(std::vector<std::size_t> shape, std::vector<DecisionSet> decisions)
        : shape_(std::move(shape)), decisions_(std::move(decisions)) {
        for (const auto& d : decisions_)
            if (d.size() == 0) throw ShapeError("decision set '" + d.name + "' is empty");
    }

    const std::vector<std::size_t>& shape() const noexcept { return shape_; }
    const std::vector<DecisionSet>& decisions() const noexcept { return decisions_; }
    std::size_t condition_count() const { return shape_volume(shape_); }

    std::size_t decision_combinations() const {
        std::size_t n = 1;
        for (const auto& d : decisions_) n *= d.size();
        return n;
    }

    std::size_t size() const { return condition_count() * decision_combinations(); }

    std::size_t index_of(const DescriptiveAction& a) const {
        if (a.decisions.size() != decisions_.size()) throw ShapeError("action has wrong number of decisions");
        std::size_t m = 0;
        for (std::size_t l = 0; l < decisions_.size(); ++l) {
            if (a.decisions[l] >= decisions_[l].size())
                throw DomainError("decision index outside decision set '" + decisions_[l].name + "'");
            m = m * decisions_[l].size() + a.decisions[l];
        }
        return flat_index(shape_, a.condition) * decision_combinations() + m;
    }

    DescriptiveAction action_at(std::size_t index) const {
        if (index >= size()) throw DomainError("descriptive action index out of range");
        const std::size_t combos = decision_combinations();
        DescriptiveAction a;
        a.condition = condition_at(shape_, index / combos);
        std::size_t m = index % combos;
        a.decisions.resize(decisions_.size());
        for (std::size_t l = decisions_.size(); l-- > 0;) {
            a.decisions[l] = m % decisions_[l].size();
            m /= decisions_[l].size();
        }
        return a;
    }

    /// One byte per flat action; 1 where the action's condition bit is set in `state`.
    std::vector<std::uint8_t> feasible_mask(const DescriptiveState& state) const {
        if (state.shape() != shape_) throw ShapeError("descriptive state shape does not match action space");
        const std::size_t combos = decision_combinations();
        std::vector<std::uint8_t> mask(size(), 0);
        for (std::size_t c = 0; c < state.size(); ++c)
            if (state.test_flat(c)) std::fill_n(mask.begin() + static_cast<std::ptrdiff_t>(c * combos), combos, 1);
        return mask;
    }

private:
    std::vector<std::size_t> shape_;
    std::vector<DecisionSet> decisions_;
};

/// Feasible set {(h, m) : s(h) = 1, m in prod M_l}, in flat-index order.
inline std::vector<DescriptiveAction> feasible_actions(const DescriptiveState& state,
                                                       std::span<const DecisionSet> decision_sets) {
    DescriptiveActionSpace space(state.shape(), {decision_sets.begin(), decision_sets.end()});
    const auto mask = space.feasible_mask(state);
    std::vector<DescriptiveAction> out;
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask[i]) out.push_back(space.action_at(i));
    return out;
}

}  // namespace descpol

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "descpol/dqn.hpp"
#include "descpol/errors.hpp"
#include "descpol/translation.hpp"

namespace descpol {

/// Conv-P: a DQN whose input is the concatenated per-item features and whose output indexes
/// (item, decision) pairs directly. Widths are tied to one item count.
class ConventionalPolicy {
public:
    ConventionalPolicy(std::size_t items, std::size_t input_width, std::vector<std::size_t> decision_sizes,
                       AgentConfig config, std::uint64_t seed)
        : items_(items),
          decision_sizes_(std::move(decision_sizes)),
          combos_(combinations(decision_sizes_)),
          agent_(input_width, items * combos_, std::move(config), seed),
          mask_(items * combos_, 1) {
        if (items < 1) throw ShapeError("conventional policy needs at least one item");
    }

    std::size_t item_count() const noexcept { return items_; }
    std::size_t action_count() const noexcept { return mask_.size(); }
    DqnAgent& agent() noexcept { return agent_; }
    const DqnAgent& agent() const noexcept { return agent_; }

    TypicalAction action_at(std::size_t index) const {
        if (index >= mask_.size()) throw DomainError("conventional action index out of range");
        TypicalAction a{index / combos_, std::vector<std::size_t>(decision_sizes_.size())};
        std::size_t m = index % combos_;
        for (std::size_t l = decision_sizes_.size(); l-- > 0;) {
            a.decisions[l] = m % decision_sizes_[l];
            m /= decision_sizes_[l];
        }
        return a;
    }

    std::size_t decide(const Eigen::VectorXd& input) {
        check(input);
        return agent_.act(input, mask_);
    }

    std::size_t greedy(const Eigen::VectorXd& input) const {
        check(input);
        return agent_.greedy(input, mask_);
    }

    TrainingReport learn(Eigen::VectorXd input, std::size_t action, double utility, Eigen::VectorXd next) {
        check(next);
        return agent_.observe(Transition{std::move(input), action, utility, std::move(next), mask_});
    }

private:
    static std::size_t combinations(const std::vector<std::size_t>& sizes) {
        std::size_t n = 1;
        for (auto s : sizes) {
            if (s < 1) throw ShapeError("empty decision set");
            n *= s;
        }
        return n;
    }

    void check(const Eigen::VectorXd& input) const {
        if (static_cast<std::size_t>(input.size()) != agent_.online().architecture().input_width)
            throw ShapeError("conventional policy input has width " + std::to_string(input.size()) + ", expected " +
                             std::to_string(agent_.online().architecture().input_width));
    }

    std::size_t items_;
    std::vector<std::size_t> decision_sizes_;
    std::size_t combos_;
    DqnAgent agent_;
    std::vector<std::uint8_t> mask_;
};

}  // namespace descpol

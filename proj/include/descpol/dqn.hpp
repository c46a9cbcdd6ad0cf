#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "descpol/descriptive.hpp"
#include "descpol/errors.hpp"
#include "descpol/network.hpp"
#include "descpol/random.hpp"
#include "descpol/translation.hpp"

namespace descpol {

/// Exploration rate as a function of the 1-based timestep.
///
/// `piecewise` is 0.1 (the `value` field) for t < threshold and 1/t afterwards.
struct EpsilonSchedule {
    enum class Kind { constant, piecewise };

    Kind kind = Kind::piecewise;
    double value = 0.1;
    std::uint64_t threshold = 10'000;

    static EpsilonSchedule constant(double c) { return {Kind::constant, c, 0}; }
    static EpsilonSchedule piecewise(std::uint64_t threshold = 10'000, double early = 0.1) {
        return {Kind::piecewise, early, threshold};
    }
};

inline double epsilon_at(const EpsilonSchedule& schedule, std::uint64_t t) {
    if (t < 1) throw DomainError("epsilon schedule is defined for t >= 1");
    if (schedule.kind == EpsilonSchedule::Kind::constant) return schedule.value;
    return t < schedule.threshold ? schedule.value : 1.0 / static_cast<double>(t);
}

/// Bounded FIFO of transitions; the oldest entry is evicted first.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity = 300) : capacity_(capacity) {
        if (capacity_ < 1) throw std::invalid_argument("replay buffer capacity must be >= 1");
    }

    void push(Transition t) {
        if (items_.size() == capacity_) items_.pop_front();
        items_.push_back(std::move(t));
    }

    std::size_t size() const noexcept { return items_.size(); }
    std::size_t capacity() const noexcept { return capacity_; }
    bool empty() const noexcept { return items_.empty(); }
    void clear() noexcept { items_.clear(); }

    /// Oldest first.
    const Transition& operator[](std::size_t i) const { return items_.at(i); }

    /// Uniform draw with replacement.
    template <class Generator>
    std::vector<const Transition*> sample(std::size_t count, Generator& rng) const {
        if (items_.empty()) throw std::logic_error("sampling from an empty replay buffer");
        std::uniform_int_distribution<std::size_t> dist(0, items_.size() - 1);
        std::vector<const Transition*> out(count);
        for (auto& p : out) p = &items_[dist(rng)];
        return out;
    }

private:
    std::size_t capacity_;
    std::deque<Transition> items_;
};

struct AgentConfig {
    double gamma = 0.9;
    EpsilonSchedule epsilon = EpsilonSchedule::piecewise();
    std::size_t buffer_capacity = 300;
    std::size_t batch_size = 30;
    std::size_t train_interval = 10;
    std::size_t target_sync_interval = 100;
    double learning_rate = 1e-3;
    std::vector<std::size_t> hidden{100, 100};
    Objective objective = Objective::maximize;
    bool clear_buffer_on_change = false;

    void validate() const {
        if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("gamma", "must lie in [0, 1)");
        if (epsilon.kind == EpsilonSchedule::Kind::constant && !(epsilon.value >= 0.0 && epsilon.value <= 1.0))
            throw ConfigError("epsilon", "must lie in [0, 1]");
        if (epsilon.kind == EpsilonSchedule::Kind::piecewise &&
            (!(epsilon.value >= 0.0 && epsilon.value <= 1.0) || epsilon.threshold < 1))
            throw ConfigError("epsilon", "piecewise schedule needs an early value in [0, 1] and threshold >= 1");
        if (buffer_capacity < 1) throw ConfigError("buffer_capacity", "must be >= 1");
        if (batch_size < 1) throw ConfigError("batch_size", "must be >= 1");
        if (train_interval < 1) throw ConfigError("train_interval", "must be >= 1");
        if (target_sync_interval < 1) throw ConfigError("target_sync_interval", "must be >= 1");
        if (!(learning_rate > 0.0)) throw ConfigError("learning_rate", "must be positive");
        for (auto h : hidden)
            if (h < 1) throw ConfigError("hidden", "layer widths must be >= 1");
    }
};

/// Epsilon-greedy choice among feasible outputs. Exploration is uniform over the feasible set;
/// exploitation takes the best feasible Q-value with ties to the lowest index.
template <class Generator>
std::size_t select_action(const QNetwork& params, const Eigen::VectorXd& input, std::span<const std::uint8_t> mask,
                          double epsilon, Objective objective, Generator& rng) {
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (coin(rng) < epsilon) {
        std::vector<std::size_t> feasible;
        for (std::size_t i = 0; i < mask.size(); ++i)
            if (mask[i]) feasible.push_back(i);
        if (feasible.empty()) throw InvariantViolation("no feasible action");
        std::uniform_int_distribution<std::size_t> pick(0, feasible.size() - 1);
        return feasible[pick(rng)];
    }
    return best_feasible(params.forward(input), mask, objective).first;
}

struct TrainingReport {
    bool trained = false;
    bool synced = false;
    std::optional<double> loss;
};

/// DQN learner over fixed input/output widths: replay, periodic training, fixed target network.
class DqnAgent {
public:
    DqnAgent(std::size_t input_width, std::size_t action_count, AgentConfig config, std::uint64_t seed)
        : config_(std::move(config)), rng_(seed), buffer_(config_.buffer_capacity) {
        config_.validate();
        online_ = QNetwork::initialized(NetworkArchitecture{input_width, config_.hidden, action_count}, rng_);
        target_ = online_;
        adam_ = AdamState::for_network(online_, AdamOptions{config_.learning_rate});
    }

    const AgentConfig& config() const noexcept { return config_; }
    std::uint64_t timestep() const noexcept { return t_; }
    bool frozen() const noexcept { return frozen_; }
    void set_frozen(bool frozen) noexcept { frozen_ = frozen; }

    double current_epsilon() const { return frozen_ ? 0.0 : epsilon_at(config_.epsilon, t_); }

    std::size_t act(const Eigen::VectorXd& input, std::span<const std::uint8_t> mask) {
        const auto a = select_action(online_, input, mask, current_epsilon(), config_.objective, rng_);
        if (!mask[a]) throw InvariantViolation("selected an infeasible action");
        return a;
    }

    std::size_t greedy(const Eigen::VectorXd& input, std::span<const std::uint8_t> mask) const {
        return best_feasible(online_.forward(input), mask, config_.objective).first;
    }

    Eigen::VectorXd q_values(const Eigen::VectorXd& input) const { return online_.forward(input); }

    /// Stores the transition, trains every `train_interval` steps once the buffer holds a batch,
    /// syncs the target every `target_sync_interval` steps, then advances t.
    TrainingReport observe(Transition transition) {
        TrainingReport report;
        if (!frozen_) {
            buffer_.push(std::move(transition));
            if (t_ % config_.train_interval == 0 && buffer_.size() >= config_.batch_size) {
                const auto batch = buffer_.sample(config_.batch_size, rng_);
                auto lg = td_loss_and_gradient(online_, target_, std::span<const Transition* const>(batch),
                                               config_.gamma, config_.objective);
                adam_step(online_, lg.gradient, adam_);
                report.trained = true;
                report.loss = lg.loss;
                last_loss_ = lg.loss;
                ++updates_;
            }
        }
        if (t_ % config_.target_sync_interval == 0) {
            target_ = online_;
            report.synced = true;
        }
        ++t_;
        return report;
    }

    const QNetwork& online() const noexcept { return online_; }
    const QNetwork& target() const noexcept { return target_; }
    void set_online(QNetwork params) {
        if (!params.same_shape(online_)) throw ShapeError("replacement parameters have a different architecture");
        online_ = std::move(params);
    }

    const AdamState& optimizer() const noexcept { return adam_; }
    void set_optimizer(AdamState state) {
        if (!state.first_moment.same_shape(online_)) throw ShapeError("optimizer state does not match network");
        adam_ = std::move(state);
    }

    const ReplayBuffer& buffer() const noexcept { return buffer_; }
    void clear_buffer() noexcept { buffer_.clear(); }

    std::optional<double> last_loss() const noexcept { return last_loss_; }
    std::uint64_t training_updates() const noexcept { return updates_; }

private:
    AgentConfig config_;
    Rng rng_;
    QNetwork online_;
    QNetwork target_;
    AdamState adam_;
    ReplayBuffer buffer_;
    std::uint64_t t_ = 1;
    bool frozen_ = false;
    std::optional<double> last_loss_;
    std::uint64_t updates_ = 0;
};

/// Everything the descriptive policy decided for one timestep.
struct DescriptiveDecision {
    DescriptiveState state;
    Eigen::VectorXd input;
    std::vector<std::uint8_t> mask;
    std::size_t action_index = 0;
    DescriptiveAction action;
    TypicalAction typical;
};

/// Desc-P: a DQN over descriptive states/actions plus the d_s / d_a translations.
///
/// Network widths depend only on the partition scheme and decision sets, so one instance
/// can schedule systems with any number of items.
class DescriptivePolicy {
public:
    DescriptivePolicy(PartitionScheme scheme, std::vector<DecisionSet> decisions, AgentConfig config,
                      std::uint64_t seed)
        : scheme_(std::move(scheme)),
          space_(scheme_.shape(), std::move(decisions)),
          agent_(scheme_.condition_count(), space_.size(), std::move(config), seed),
          tie_rng_(derive_seed(seed, Stream::tie_break)) {}

    const PartitionScheme& scheme() const noexcept { return scheme_; }
    const DescriptiveActionSpace& action_space() const noexcept { return space_; }
    DqnAgent& agent() noexcept { return agent_; }
    const DqnAgent& agent() const noexcept { return agent_; }

    DescriptiveDecision decide(const TypicalState& s) {
        DescriptiveDecision d;
        d.state = translate_state(s, scheme_);
        d.input = d.state.flatten();
        d.mask = space_.feasible_mask(d.state);
        d.action_index = agent_.act(d.input, d.mask);
        d.action = space_.action_at(d.action_index);
        d.typical = translate_action(d.action, s, scheme_, tie_rng_);
        return d;
    }

    /// Greedy (epsilon = 0) choice without touching any random stream.
    DescriptiveAction greedy_action(const TypicalState& s) const {
        const auto state = translate_state(s, scheme_);
        return space_.action_at(agent_.greedy(state.flatten(), space_.feasible_mask(state)));
    }

    TrainingReport learn(DescriptiveDecision decision, double utility, const TypicalState& next) {
        const auto next_state = translate_state(next, scheme_);
        Transition t{std::move(decision.input), decision.action_index, utility, next_state.flatten(),
                     space_.feasible_mask(next_state)};
        return agent_.observe(std::move(t));
    }

    /// Called when the scheduled system is replaced by one with different characteristics.
    void on_system_change() {
        if (agent_.config().clear_buffer_on_change) agent_.clear_buffer();
    }

private:
    PartitionScheme scheme_;
    DescriptiveActionSpace space_;
    DqnAgent agent_;
    Rng tie_rng_;
};

struct StepRecord {
    DescriptiveDecision decision;
    double utility = 0.0;
    TrainingReport training;
};

/// One iteration of the descriptive learning loop: choose a feasible descriptive action,
/// translate it, apply it to `system`, translate the next state, store and train.
///
/// `System` needs `const TypicalState& features() const` and `step(const TypicalAction&)`
/// returning an object with a `utility` member.
template <class System>
StepRecord step(DescriptivePolicy& policy, System& system) {
    StepRecord record;
    record.decision = policy.decide(system.features());
    const TypicalAction chosen = record.decision.typical;
    const auto outcome = system.step(chosen);
    record.utility = outcome.utility;
    record.training = policy.learn(record.decision, outcome.utility, system.features());
    return record;
}

}  // namespace descpol

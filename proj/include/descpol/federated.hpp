#pragma once

#include <atomic>
#include <barrier>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "descpol/dqn.hpp"
#include "descpol/environment.hpp"
#include "descpol/errors.hpp"
#include "descpol/network.hpp"
#include "descpol/partition.hpp"

namespace descpol {

struct FederatedSystem {
    EnvironmentSpec environment;
    std::uint64_t agent_seed = 0;
    std::uint64_t environment_seed = 0;
    PartitionScheme scheme;
    AgentConfig agent;
};

struct FederatedConfig {
    std::vector<FederatedSystem> systems;
    std::uint64_t steps = 1000;
    std::size_t aggregation_interval = 10;
    bool aggregate = true;  // false runs the same systems as independent learners
    bool parallel = false;

    void validate() const {
        if (systems.size() < 2) throw ConfigError("systems", "federated learning needs at least two systems");
        if (steps < 1) throw ConfigError("steps", "must be >= 1");
        if (aggregation_interval < 1) throw ConfigError("aggregation_interval", "must be >= 1");
        const auto& first = systems.front();
        for (std::size_t i = 0; i < systems.size(); ++i) {
            const auto& s = systems[i];
            const std::string path = "systems[" + std::to_string(i) + "]";
            s.environment.validate();
            s.agent.validate();
            if (s.scheme.feature_count() != s.environment.feature_count())
                throw ConfigError(path + ".scheme", "feature count does not match the environment");
            if (!(s.scheme == first.scheme)) throw ConfigError(path + ".scheme", "partition schemes differ across systems");
            if (s.agent.hidden != first.agent.hidden)
                throw ConfigError(path + ".agent.hidden", "network architectures differ across systems");
            if (s.environment.decision_sizes() != first.environment.decision_sizes())
                throw ConfigError(path + ".environment", "decision sets differ across systems");
            if (s.environment.objective() != first.environment.objective())
                throw ConfigError(path + ".environment", "objectives differ across systems");
        }
    }
};

struct FederatedResult {
    std::vector<std::vector<double>> utilities;      // [system][t - 1]
    std::vector<std::uint64_t> aggregation_steps;    // timesteps at which parameters were averaged
    std::vector<QNetwork> final_params;              // online parameters per system
    std::vector<std::uint64_t> steps_executed;       // environment steps per system
};

/// Per-round observer: (t, system index, step record). Called from the stepping thread.
using FederatedObserver = std::function<void(std::uint64_t, std::size_t, const StepRecord&)>;

/// Lockstep federated learning over descriptive-policy learners. Each round every system takes
/// one step; if local training happened in that round and t is a multiple of the aggregation
/// interval, the online networks are replaced by their elementwise mean. Only parameter
/// snapshots cross systems. Target networks and optimizer state stay local.
class FederatedRun {
public:
    explicit FederatedRun(FederatedConfig config) : config_(std::move(config)) {
        config_.validate();
        for (auto& s : config_.systems) {
            auto agent = s.agent;
            agent.objective = s.environment.objective();
            policies_.push_back(std::make_unique<DescriptivePolicy>(s.scheme, s.environment.decision_sets(), agent,
                                                                    s.agent_seed));
            environments_.push_back(std::make_unique<Environment>(s.environment, s.environment_seed, agent.gamma));
        }
        for (std::size_t i = 1; i < policies_.size(); ++i)
            if (!policies_[i]->agent().online().same_shape(policies_.front()->agent().online()))
                throw ConfigError("systems[" + std::to_string(i) + "]", "network architectures differ across systems");
    }

    std::size_t system_count() const noexcept { return policies_.size(); }
    const DescriptivePolicy& policy(std::size_t i) const { return *policies_.at(i); }
    const Environment& environment(std::size_t i) const { return *environments_.at(i); }

    FederatedResult run(const FederatedObserver& observer = {}) {
        const std::size_t K = policies_.size();
        FederatedResult result;
        result.utilities.assign(K, std::vector<double>(config_.steps));
        result.steps_executed.assign(K, 0);
        std::vector<std::uint8_t> trained(K, 0);

        auto step_system = [&](std::uint64_t t, std::size_t i) {
            auto record = step(*policies_[i], *environments_[i]);
            result.utilities[i][t - 1] = record.utility;
            ++result.steps_executed[i];
            trained[i] = record.training.trained ? 1 : 0;
            if (observer) observer(t, i, record);
        };
        auto barrier_action = [&](std::uint64_t t) {
            bool any = false;
            for (auto v : trained) any = any || v;
            if (config_.aggregate && any && t % config_.aggregation_interval == 0) {
                aggregate();
                result.aggregation_steps.push_back(t);
            }
        };

        if (!config_.parallel) {
            for (std::uint64_t t = 1; t <= config_.steps; ++t) {
                for (std::size_t i = 0; i < K; ++i) step_system(t, i);
                barrier_action(t);
            }
        } else {
            run_parallel(step_system, barrier_action);
        }

        for (const auto& p : policies_) result.final_params.push_back(p->agent().online());
        return result;
    }

    /// Elementwise mean of all online networks, redistributed to every system.
    void aggregate() {
        std::vector<QNetwork> snapshots;
        snapshots.reserve(policies_.size());
        for (const auto& p : policies_) snapshots.push_back(p->agent().online());
        const auto mean = average_params(snapshots);
        for (auto& p : policies_) p->agent().set_online(mean);
    }

private:
    template <class StepFn, class BarrierFn>
    void run_parallel(StepFn& step_system, BarrierFn& barrier_action) {
        const std::size_t K = policies_.size();
        std::uint64_t round = 1;
        std::atomic<bool> failed{false};
        std::vector<std::exception_ptr> errors(K);
        auto completion = [&]() noexcept {
            if (!failed.load()) {
                try {
                    barrier_action(round);
                } catch (...) {
                    errors[0] = std::current_exception();
                    failed.store(true);
                }
            }
            ++round;
        };
        std::barrier sync(static_cast<std::ptrdiff_t>(K), completion);
        {
            std::vector<std::thread> workers;
            workers.reserve(K);
            for (std::size_t i = 0; i < K; ++i)
                workers.emplace_back([&, i] {
                    for (std::uint64_t t = 1; t <= config_.steps; ++t) {
                        if (!failed.load()) {
                            try {
                                step_system(t, i);
                            } catch (...) {
                                errors[i] = std::current_exception();
                                failed.store(true);
                            }
                        }
                        sync.arrive_and_wait();
                    }
                });
            for (auto& w : workers) w.join();
        }
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    FederatedConfig config_;
    std::vector<std::unique_ptr<DescriptivePolicy>> policies_;
    std::vector<std::unique_ptr<Environment>> environments_;
};

inline FederatedResult federated_run(FederatedConfig config, const FederatedObserver& observer = {}) {
    FederatedRun run(std::move(config));
    return run.run(observer);
}

}  // namespace descpol

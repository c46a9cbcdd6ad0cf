#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "descpol/conventional.hpp"
#include "descpol/dqn.hpp"
#include "descpol/environment.hpp"
#include "descpol/errors.hpp"
#include "descpol/network_io.hpp"
#include "descpol/output.hpp"
#include "descpol/partition.hpp"
#include "descpol/random.hpp"
#include "descpol/tabular.hpp"

namespace descpol {

enum class PolicyKind { desc, conv, opt, random, random_max_power };

inline const char* to_string(PolicyKind k) {
    switch (k) {
        case PolicyKind::desc: return "desc";
        case PolicyKind::conv: return "conv";
        case PolicyKind::opt: return "opt";
        case PolicyKind::random: return "random";
        case PolicyKind::random_max_power: return "random_max_power";
    }
    return "?";
}

inline std::optional<PolicyKind> parse_policy_kind(const std::string& s) {
    for (auto k : {PolicyKind::desc, PolicyKind::conv, PolicyKind::opt, PolicyKind::random,
                   PolicyKind::random_max_power})
        if (s == to_string(k)) return k;
    return std::nullopt;
}

struct PhaseConfig {
    std::string name;
    std::uint64_t steps = 1;
    EnvironmentSpec environment;
    bool train_desc = true;
    bool train_conv = true;
    std::uint64_t conv_pretrain_steps = 0;  // Conv-P training on a separate stream before the phase
};

struct MetricsConfig {
    std::size_t window = 1000;   // trailing window, reset at phase boundaries
    std::size_t stride = 1;      // record every stride-th phase step (plus the first and last)
    std::size_t tail = 1000;     // summary statistics over the last `tail` steps of each phase
};

struct ScenarioConfig {
    std::string name = "scenario";
    std::uint64_t seed = 0;
    AgentConfig agent;
    std::optional<AgentConfig> conv_agent;
    PartitionScheme scheme;
    std::vector<PolicyKind> policies{PolicyKind::desc};
    std::vector<PhaseConfig> phases;
    MetricsConfig metrics;

    void validate() const {
        agent.validate();
        if (conv_agent) conv_agent->validate();
        if (phases.empty()) throw ConfigError("phases", "at least one phase is required");
        if (policies.empty()) throw ConfigError("policies", "at least one policy is required");
        if (metrics.window < 1) throw ConfigError("metrics.window", "must be >= 1");
        if (metrics.stride < 1) throw ConfigError("metrics.stride", "must be >= 1");
        if (metrics.tail < 1) throw ConfigError("metrics.tail", "must be >= 1");
        for (std::size_t i = 0; i < policies.size(); ++i)
            for (std::size_t j = 0; j < i; ++j)
                if (policies[i] == policies[j])
                    throw ConfigError("policies[" + std::to_string(i) + "]", "duplicate policy");
        for (std::size_t p = 0; p < phases.size(); ++p) {
            const auto& ph = phases[p];
            const std::string path = "phases[" + std::to_string(p) + "]";
            if (ph.steps < 1) throw ConfigError(path + ".steps", "must be >= 1");
            try {
                ph.environment.validate();
            } catch (const ConfigError& e) {
                throw ConfigError(path + ".environment." + e.path(), e.message());
            }
            if (ph.environment.kind != phases.front().environment.kind)
                throw ConfigError(path + ".environment.type", "all phases must use the same environment type");
            if (ph.environment.decision_sizes() != phases.front().environment.decision_sizes())
                throw ConfigError(path + ".environment", "decision sets must be identical across phases");
            for (auto k : policies) {
                if (k == PolicyKind::opt && ph.environment.kind != EnvironmentKind::item_sale)
                    throw ConfigError("policies", "the oracle policy is available for item-sale phases only");
                if (k == PolicyKind::random_max_power && ph.environment.kind != EnvironmentKind::wireless)
                    throw ConfigError("policies", "random_max_power applies to wireless phases only");
            }
        }
        const bool has_desc = std::find(policies.begin(), policies.end(), PolicyKind::desc) != policies.end();
        if (has_desc && scheme.feature_count() != phases.front().environment.feature_count())
            throw ConfigError("scheme", "expected " + std::to_string(phases.front().environment.feature_count()) +
                                            " feature partitions, got " + std::to_string(scheme.feature_count()));
    }

    std::uint64_t total_steps() const {
        std::uint64_t n = 0;
        for (const auto& p : phases) n += p.steps;
        return n;
    }
};

struct MetricRow {
    std::uint64_t t = 0;
    std::size_t phase = 0;
    std::uint64_t phase_step = 0;
    double utility = 0.0;
    double window_avg = 0.0;
    double phase_avg = 0.0;
    double epsilon = 0.0;
    std::optional<double> loss;
    double power_w = 0.0;
    std::vector<double> window_rates_bps;
    std::vector<double> multipliers;
};

struct PhaseSummary {
    std::size_t phase = 0;
    std::string phase_name;
    PolicyKind policy = PolicyKind::desc;
    std::uint64_t steps = 0;
    double mean_utility = 0.0;
    double tail_mean_utility = 0.0;
    double mean_power_w = 0.0;
    double tail_mean_power_w = 0.0;
    std::vector<double> mean_rates_bps;
    std::vector<double> tail_rates_bps;
    std::uint64_t training_updates = 0;
};

struct ScenarioResult {
    std::vector<PhaseSummary> summaries;
    std::map<PolicyKind, std::vector<MetricRow>> rows;
    std::vector<std::uint64_t> phase_starts;  // global timestep of each phase's first step
    std::shared_ptr<DescriptivePolicy> desc;

    const PhaseSummary& summary(std::size_t phase, PolicyKind policy) const {
        for (const auto& s : summaries)
            if (s.phase == phase && s.policy == policy) return s;
        throw std::out_of_range(std::string("no summary for policy ") + to_string(policy));
    }
};

// Per-run seeds. Every policy in a phase sees the environment stream of that phase.
inline std::uint64_t phase_environment_seed(std::uint64_t seed, std::size_t phase) {
    return derive_seed(derive_seed(seed, Stream::environment), phase);
}
inline std::uint64_t descriptive_seed(std::uint64_t seed) { return derive_seed(seed, Stream::descriptive); }
inline std::uint64_t conventional_seed(std::uint64_t seed, std::size_t phase) {
    return derive_seed(derive_seed(seed, Stream::conventional), phase);
}
inline std::uint64_t baseline_seed(std::uint64_t seed, std::size_t phase) {
    return derive_seed(derive_seed(seed, Stream::baseline), phase);
}
inline std::uint64_t pretrain_seed(std::uint64_t seed, std::size_t phase) {
    return derive_seed(derive_seed(seed, Stream::pretrain), phase);
}

namespace detail {

class PhaseMetrics {
public:
    PhaseMetrics(std::size_t window, std::size_t tail, std::size_t users, std::uint64_t steps)
        : window_(window), tail_start_(steps > tail ? steps - tail : 0), window_rates_(users, 0.0),
          total_rates_(users, 0.0), tail_rates_(users, 0.0) {}

    void add(std::uint64_t k, double utility, double power, const std::vector<double>& rates) {
        utilities_.push_back(utility);
        window_sum_ += utility;
        if (!rates.empty()) {
            rates_.push_back(rates);
            for (std::size_t n = 0; n < rates.size(); ++n) {
                window_rates_[n] += rates[n];
                total_rates_[n] += rates[n];
            }
        }
        if (utilities_.size() > window_) {
            window_sum_ -= utilities_.front();
            utilities_.pop_front();
            if (!rates_.empty()) {
                for (std::size_t n = 0; n < window_rates_.size(); ++n) window_rates_[n] -= rates_.front()[n];
                rates_.pop_front();
            }
        }
        total_ += utility;
        power_total_ += power;
        ++count_;
        if (k > tail_start_) {
            tail_ += utility;
            tail_power_ += power;
            ++tail_count_;
            for (std::size_t n = 0; n < rates.size(); ++n) tail_rates_[n] += rates[n];
        }
    }

    double window_avg() const { return window_sum_ / static_cast<double>(utilities_.size()); }
    double phase_avg() const { return total_ / static_cast<double>(count_); }
    std::vector<double> window_rates() const {
        std::vector<double> out(window_rates_);
        for (auto& r : out) r /= static_cast<double>(std::max<std::size_t>(rates_.size(), 1));
        return out;
    }

    void fill(PhaseSummary& s) const {
        s.steps = count_;
        s.mean_utility = total_ / static_cast<double>(count_);
        s.tail_mean_utility = tail_ / static_cast<double>(tail_count_);
        s.mean_power_w = power_total_ / static_cast<double>(count_);
        s.tail_mean_power_w = tail_power_ / static_cast<double>(tail_count_);
        for (double r : total_rates_) s.mean_rates_bps.push_back(r / static_cast<double>(count_));
        for (double r : tail_rates_) s.tail_rates_bps.push_back(r / static_cast<double>(tail_count_));
    }

private:
    std::size_t window_;
    std::uint64_t tail_start_;
    std::deque<double> utilities_;
    std::deque<std::vector<double>> rates_;
    double window_sum_ = 0.0;
    std::vector<double> window_rates_, total_rates_, tail_rates_;
    double total_ = 0.0, power_total_ = 0.0, tail_ = 0.0, tail_power_ = 0.0;
    std::uint64_t count_ = 0, tail_count_ = 0;
};

inline std::size_t max_power_index(const EnvironmentSpec& spec) {
    const auto& levels = spec.wireless.power_levels_w;
    return static_cast<std::size_t>(std::max_element(levels.begin(), levels.end()) - levels.begin());
}

}  // namespace detail

/// Runs every phase for every policy on paired environment streams. Desc-P persists across
/// phases; Conv-P is rebuilt at each phase boundary.
inline ScenarioResult run_scenario(const ScenarioConfig& config) {
    config.validate();
    ScenarioResult result;
    const auto& first_env = config.phases.front().environment;
    const auto objective = first_env.objective();

    auto desc_agent = config.agent;
    desc_agent.objective = objective;
    const bool has_desc =
        std::find(config.policies.begin(), config.policies.end(), PolicyKind::desc) != config.policies.end();
    if (has_desc)
        result.desc = std::make_shared<DescriptivePolicy>(config.scheme, first_env.decision_sets(), desc_agent,
                                                          descriptive_seed(config.seed));

    std::uint64_t t0 = 0;
    for (std::size_t p = 0; p < config.phases.size(); ++p) {
        const auto& phase = config.phases[p];
        result.phase_starts.push_back(t0 + 1);
        const auto env_seed = phase_environment_seed(config.seed, p);
        const std::size_t users = phase.environment.kind == EnvironmentKind::wireless ? phase.environment.item_count() : 0;

        for (auto kind : config.policies) {
            Environment env(phase.environment, env_seed, config.agent.gamma);
            detail::PhaseMetrics metrics(config.metrics.window, config.metrics.tail, users, phase.steps);
            auto& rows = result.rows[kind];
            Rng baseline_rng(baseline_seed(config.seed, p));
            std::unique_ptr<ConventionalPolicy> conv;
            const std::uint64_t updates_before = has_desc ? result.desc->agent().training_updates() : 0;

            if (kind == PolicyKind::desc) {
                result.desc->agent().set_frozen(!phase.train_desc);
                if (p > 0) result.desc->on_system_change();
            } else if (kind == PolicyKind::conv) {
                auto cfg = config.conv_agent.value_or(config.agent);
                cfg.objective = objective;
                conv = std::make_unique<ConventionalPolicy>(phase.environment.item_count(),
                                                            phase.environment.conventional_input_width(),
                                                            phase.environment.decision_sizes(), cfg,
                                                            conventional_seed(config.seed, p));
                if (phase.conv_pretrain_steps > 0) {
                    Environment pre(phase.environment, pretrain_seed(config.seed, p), config.agent.gamma);
                    for (std::uint64_t k = 0; k < phase.conv_pretrain_steps; ++k) {
                        auto x = pre.conventional_input();
                        const auto a = conv->decide(x);
                        const auto o = pre.step(conv->action_at(a));
                        conv->learn(std::move(x), a, o.utility, pre.conventional_input());
                    }
                }
                conv->agent().set_frozen(!phase.train_conv);
            }

            std::optional<double> last_loss;
            for (std::uint64_t k = 1; k <= phase.steps; ++k) {
                double epsilon = 0.0;
                StepOutcome outcome;
                if (kind == PolicyKind::desc) {
                    epsilon = result.desc->agent().current_epsilon();
                    auto decision = result.desc->decide(env.features());
                    outcome = env.step(decision.typical);
                    auto report = result.desc->learn(std::move(decision), outcome.utility, env.features());
                    if (report.loss) last_loss = report.loss;
                } else if (kind == PolicyKind::conv) {
                    epsilon = conv->agent().current_epsilon();
                    auto x = env.conventional_input();
                    const auto a = conv->decide(x);
                    outcome = env.step(conv->action_at(a));
                    auto report = conv->learn(std::move(x), a, outcome.utility, env.conventional_input());
                    if (report.loss) last_loss = report.loss;
                } else if (kind == PolicyKind::opt) {
                    outcome = env.step(greedy_oracle(env.features(), phase.environment.item_sale.reward_exponent));
                } else {
                    epsilon = 1.0;
                    std::uniform_int_distribution<std::size_t> pick(0, env.item_count() - 1);
                    TypicalAction a{pick(baseline_rng), {}};
                    for (auto size : phase.environment.decision_sizes()) {
                        std::uniform_int_distribution<std::size_t> level(0, size - 1);
                        a.decisions.push_back(kind == PolicyKind::random_max_power
                                                  ? detail::max_power_index(phase.environment)
                                                  : level(baseline_rng));
                    }
                    outcome = env.step(a);
                }
                metrics.add(k, outcome.utility, outcome.power_w, outcome.rates_bps);
                if (k == 1 || k == phase.steps || k % config.metrics.stride == 0) {
                    MetricRow row;
                    row.t = t0 + k;
                    row.phase = p;
                    row.phase_step = k;
                    row.utility = outcome.utility;
                    row.window_avg = metrics.window_avg();
                    row.phase_avg = metrics.phase_avg();
                    row.epsilon = epsilon;
                    row.loss = last_loss;
                    row.power_w = outcome.power_w;
                    if (users > 0) {
                        row.window_rates_bps = metrics.window_rates();
                        row.multipliers = env.multipliers();
                    }
                    rows.push_back(std::move(row));
                }
            }

            PhaseSummary summary;
            summary.phase = p;
            summary.phase_name = phase.name;
            summary.policy = kind;
            metrics.fill(summary);
            if (kind == PolicyKind::desc) summary.training_updates = result.desc->agent().training_updates() - updates_before;
            if (kind == PolicyKind::conv) summary.training_updates = conv->agent().training_updates();
            result.summaries.push_back(std::move(summary));
        }
        t0 += phase.steps;
    }
    if (result.desc) result.desc->agent().set_frozen(false);
    return result;
}

/// Per-condition Q-values for a probe state: for each condition, the best (max or min per the
/// objective) Q-value over the auxiliary decisions; infeasible conditions are absent.
struct QHeatmap {
    std::vector<std::size_t> shape;
    std::vector<std::optional<double>> values;  // flat condition order

    std::optional<Condition> best(Objective objective) const {
        std::optional<Condition> out;
        double v = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (!values[i]) continue;
            const bool better = objective == Objective::maximize ? *values[i] > v : *values[i] < v;
            if (!out || better) {
                out = condition_at(shape, i);
                v = *values[i];
            }
        }
        return out;
    }
};

inline QHeatmap q_heatmap(const QNetwork& params, const DescriptiveActionSpace& space, const DescriptiveState& probe,
                          Objective objective) {
    if (probe.shape() != space.shape()) throw ShapeError("probe state shape does not match the action space");
    const auto q = params.forward(probe.flatten());
    if (static_cast<std::size_t>(q.size()) != space.size()) throw ShapeError("network output width mismatch");
    QHeatmap map;
    map.shape = probe.shape();
    const std::size_t combos = space.decision_combinations();
    map.values.resize(probe.size());
    for (std::size_t h = 0; h < probe.size(); ++h) {
        if (!probe.test_flat(h)) continue;
        double v = q[static_cast<Eigen::Index>(h * combos)];
        for (std::size_t m = 1; m < combos; ++m) {
            const double x = q[static_cast<Eigen::Index>(h * combos + m)];
            v = objective == Objective::maximize ? std::max(v, x) : std::min(v, x);
        }
        map.values[h] = v;
    }
    return map;
}

inline void write_heatmap_csv(std::ostream& out, const QHeatmap& map) {
    CsvWriter csv(out);
    for (std::size_t k = 0; k < map.shape.size(); ++k) csv.field("h" + std::to_string(k + 1));
    csv.field("q");
    csv.end();
    for (std::size_t i = 0; i < map.values.size(); ++i) {
        const auto h = condition_at(map.shape, i);
        for (auto idx : h.index) csv.field(idx);
        csv.field(map.values[i]);
        csv.end();
    }
}

/// Writes heatmap.csv and heatmap.svg into `dir`.
inline void emit_q_heatmap(const std::filesystem::path& dir, const QNetwork& params,
                           const DescriptiveActionSpace& space, const DescriptiveState& probe, Objective objective,
                           const std::vector<std::string>& feature_names = {}) {
    std::filesystem::create_directories(dir);
    const auto map = q_heatmap(params, space, probe, objective);
    {
        auto out = open_output((dir / "heatmap.csv").string());
        write_heatmap_csv(out, map);
    }
    const std::size_t rows = map.shape.empty() ? 1 : map.shape[0];
    const std::size_t cols = map.shape.size() >= 2 ? map.values.size() / rows : 1;
    auto name = [&](std::size_t k) {
        return k < feature_names.size() ? feature_names[k] : "feature " + std::to_string(k + 1);
    };
    auto out = open_output((dir / "heatmap.svg").string());
    write_heatmap_svg(out, std::string("Q-values per condition (") + to_string(objective) + " over decisions)",
                      name(0), map.shape.size() >= 2 ? name(1) : "", rows, cols, map.values);
}

inline std::vector<std::string> feature_names(EnvironmentKind kind) {
    if (kind == EnvironmentKind::item_sale) return {"price", "quantity"};
    return {"channel", "multiplier"};
}

/// Writes per-policy metric CSVs, per-user CSVs (wireless), summary.csv, run_meta.json,
/// plot.svg and the Desc-P checkpoint.
inline void write_scenario_outputs(const std::filesystem::path& dir, const ScenarioConfig& config,
                                   const ScenarioResult& result, const std::string& config_text = {}) {
    std::filesystem::create_directories(dir);
    const bool wireless = config.phases.front().environment.kind == EnvironmentKind::wireless;

    for (auto kind : config.policies) {
        const auto& rows = result.rows.at(kind);
        {
            auto out = open_output((dir / (std::string(to_string(kind)) + ".csv")).string());
            out << "# stride=" << config.metrics.stride << " window=" << config.metrics.window << "\r\n";
            CsvWriter csv(out);
            csv.row({"t", "phase", "phase_step", "policy", "utility", "window_avg", "phase_avg", "epsilon", "loss",
                     "power_w"});
            for (const auto& r : rows) {
                csv.field(r.t).field(config.phases[r.phase].name).field(r.phase_step).field(to_string(kind));
                csv.field(r.utility).field(r.window_avg).field(r.phase_avg).field(r.epsilon).field(r.loss);
                csv.field(r.power_w);
                csv.end();
            }
        }
        if (wireless) {
            auto out = open_output((dir / (std::string(to_string(kind)) + "_users.csv")).string());
            out << "# stride=" << config.metrics.stride << " window=" << config.metrics.window << "\r\n";
            CsvWriter csv(out);
            csv.row({"t", "phase", "phase_step", "policy", "user", "window_rate_bps", "multiplier"});
            for (const auto& r : rows)
                for (std::size_t n = 0; n < r.window_rates_bps.size(); ++n) {
                    csv.field(r.t).field(config.phases[r.phase].name).field(r.phase_step).field(to_string(kind));
                    csv.field(n).field(r.window_rates_bps[n]).field(r.multipliers[n]);
                    csv.end();
                }
        }
    }

    {
        auto out = open_output((dir / "summary.csv").string());
        CsvWriter csv(out);
        csv.row({"phase", "policy", "steps", "mean_utility", "tail_mean_utility", "mean_power_w", "tail_mean_power_w",
                 "training_updates", "tail_rates_bps"});
        for (const auto& s : result.summaries) {
            std::string rates;
            for (std::size_t n = 0; n < s.tail_rates_bps.size(); ++n)
                rates += (n ? ";" : "") + format_number(s.tail_rates_bps[n]);
            csv.field(s.phase_name).field(to_string(s.policy)).field(s.steps).field(s.mean_utility);
            csv.field(s.tail_mean_utility).field(s.mean_power_w).field(s.tail_mean_power_w).field(s.training_updates);
            csv.field(rates);
            csv.end();
        }
    }

    {
        nlohmann::ordered_json meta;
        meta["name"] = config.name;
        meta["seed"] = config.seed;
        meta["window"] = config.metrics.window;
        meta["stride"] = config.metrics.stride;
        meta["tail"] = config.metrics.tail;
        meta["phases"] = nlohmann::ordered_json::array();
        for (std::size_t p = 0; p < config.phases.size(); ++p) {
            const auto& ph = config.phases[p];
            meta["phases"].push_back({{"name", ph.name},
                                      {"start", result.phase_starts[p]},
                                      {"steps", ph.steps},
                                      {"environment_seed", phase_environment_seed(config.seed, p)},
                                      {"train_desc", ph.train_desc},
                                      {"train_conv", ph.train_conv},
                                      {"conv_pretrain_steps", ph.conv_pretrain_steps}});
        }
        meta["notes"] = "conv_pretrain_steps is a reduced desk-scale pre-training budget";
        if (!config_text.empty()) meta["config"] = nlohmann::ordered_json::parse(config_text);
        auto out = open_output((dir / "run_meta.json").string());
        out << meta.dump(2) << "\n";
    }

    {
        std::vector<PlotSeries> series;
        for (auto kind : config.policies) {
            PlotSeries s{to_string(kind), {}, {}};
            for (const auto& r : result.rows.at(kind)) {
                s.x.push_back(static_cast<double>(r.t));
                s.y.push_back(r.window_avg);
            }
            series.push_back(std::move(s));
        }
        std::vector<double> markers;
        for (std::size_t p = 1; p < result.phase_starts.size(); ++p)
            markers.push_back(static_cast<double>(result.phase_starts[p]));
        auto out = open_output((dir / "plot.svg").string());
        write_line_plot_svg(out, config.name, wireless ? "windowed cost" : "windowed reward", series, markers);
    }

    if (result.desc) {
        auto out = open_output((dir / "desc_checkpoint.txt").string());
        write_checkpoint(out, result.desc->agent().online(), result.desc->agent().optimizer());
    }
}

struct SweepSetting {
    std::string label;
    PartitionScheme scheme;
};

struct SweepConfig {
    ScenarioConfig base;
    std::vector<SweepSetting> settings;
    std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
    std::optional<std::size_t> evaluation_phase;  // default: last phase
};

struct SweepEntry {
    std::string label;
    std::uint64_t seed = 0;
    PolicyKind policy = PolicyKind::desc;
    double mean_utility = 0.0;
};

struct SweepResult {
    std::vector<SweepEntry> entries;

    /// Mean and standard error across seeds for one (label, policy).
    std::pair<double, double> statistics(const std::string& label, PolicyKind policy = PolicyKind::desc) const {
        std::vector<double> xs;
        for (const auto& e : entries)
            if (e.label == label && e.policy == policy) xs.push_back(e.mean_utility);
        if (xs.empty()) throw std::out_of_range("no sweep entries for " + label);
        double mean = 0.0;
        for (double x : xs) mean += x;
        mean /= static_cast<double>(xs.size());
        double var = 0.0;
        for (double x : xs) var += (x - mean) * (x - mean);
        const double se = xs.size() > 1 ? std::sqrt(var / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size())) : 0.0;
        return {mean, se};
    }
};

/// One full run per (setting, seed); every setting sees the same seeds. Reports the mean
/// utility of each policy in the evaluation phase.
inline SweepResult fineness_sweep(const SweepConfig& config,
                                  const std::function<void(const SweepEntry&)>& progress = {}) {
    if (config.settings.empty()) throw ConfigError("settings", "at least one partition setting is required");
    if (config.seeds.empty()) throw ConfigError("seeds", "at least one seed is required");
    SweepResult out;
    for (const auto& setting : config.settings)
        for (auto seed : config.seeds) {
            auto scenario = config.base;
            scenario.scheme = setting.scheme;
            scenario.seed = seed;
            const auto result = run_scenario(scenario);
            const std::size_t phase = config.evaluation_phase.value_or(scenario.phases.size() - 1);
            for (auto kind : scenario.policies) {
                SweepEntry e{setting.label, seed, kind, result.summary(phase, kind).mean_utility};
                if (progress) progress(e);
                out.entries.push_back(e);
            }
        }
    return out;
}

inline void write_sweep_csv(std::ostream& out, const SweepResult& result) {
    CsvWriter csv(out);
    csv.row({"setting", "seed", "policy", "mean_utility"});
    for (const auto& e : result.entries) {
        csv.field(e.label).field(e.seed).field(to_string(e.policy)).field(e.mean_utility);
        csv.end();
    }
}

}  // namespace descpol

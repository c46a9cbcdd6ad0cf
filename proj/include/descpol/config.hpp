#pragma once

#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "descpol/dqn.hpp"
#include "descpol/environment.hpp"
#include "descpol/errors.hpp"
#include "descpol/experiment.hpp"
#include "descpol/federated.hpp"
#include "descpol/lagrangian.hpp"
#include "descpol/partition.hpp"
#include "descpol/wireless.hpp"

namespace descpol {

using Json = nlohmann::json;

namespace config_detail {

inline std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
inline std::string at_index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

inline void require_object(const Json& j, const std::string& path) {
    if (!j.is_object()) throw ConfigError(path, "expected an object");
}

inline void allow_keys(const Json& j, const std::string& path, std::initializer_list<const char*> keys) {
    require_object(j, path);
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [k, v] : j.items())
        if (!allowed.count(k)) throw ConfigError(join(path, k), "unknown field");
}

inline const Json& require(const Json& j, const std::string& path, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) throw ConfigError(join(path, key), "required field is missing");
    return *it;
}

inline double number(const Json& j, const std::string& path) {
    if (!j.is_number()) throw ConfigError(path, "expected a number");
    return j.get<double>();
}

inline std::uint64_t count(const Json& j, const std::string& path) {
    if (!j.is_number_integer() || j.get<std::int64_t>() < 0) throw ConfigError(path, "expected a non-negative integer");
    return j.get<std::uint64_t>();
}

inline bool boolean(const Json& j, const std::string& path) {
    if (!j.is_boolean()) throw ConfigError(path, "expected true or false");
    return j.get<bool>();
}

inline std::string text(const Json& j, const std::string& path) {
    if (!j.is_string()) throw ConfigError(path, "expected a string");
    return j.get<std::string>();
}

inline std::vector<double> numbers(const Json& j, const std::string& path) {
    if (!j.is_array()) throw ConfigError(path, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], at_index(path, i)));
    return out;
}

template <class F>
auto wrap(const std::string& path, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(path, e.what());
    }
}

}  // namespace config_detail

inline Json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open config file " + path);
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ConfigError("", path + ": " + e.what());
    }
}

/// {"uniform": H, "domain": [lo, hi]} | {"boundaries": [...], "domain": [...]} |
/// {"quadratic": bins, "domain": [0, max]} | {"discrete": [v, [v, v], ...]}
inline FeaturePartition parse_feature_partition(const Json& j, const std::string& path) {
    using namespace config_detail;
    allow_keys(j, path, {"uniform", "boundaries", "quadratic", "discrete", "domain"});
    double lo = 0.0, hi = 1.0;
    if (j.contains("domain")) {
        const auto d = numbers(j["domain"], join(path, "domain"));
        if (d.size() != 2) throw ConfigError(join(path, "domain"), "expected [lower, upper]");
        lo = d[0];
        hi = d[1];
    }
    const int kinds = j.contains("uniform") + j.contains("boundaries") + j.contains("quadratic") + j.contains("discrete");
    if (kinds != 1) throw ConfigError(path, "expected exactly one of uniform, boundaries, quadratic, discrete");
    if (j.contains("uniform"))
        return wrap(join(path, "uniform"), [&] {
            return FeaturePartition::uniform(count(j["uniform"], join(path, "uniform")), lo, hi);
        });
    if (j.contains("boundaries"))
        return wrap(join(path, "boundaries"), [&] {
            return FeaturePartition::with_boundaries(numbers(j["boundaries"], join(path, "boundaries")), lo, hi);
        });
    if (j.contains("quadratic")) {
        if (lo != 0.0) throw ConfigError(join(path, "domain"), "quadratic partitions start at 0");
        return wrap(join(path, "quadratic"), [&] {
            return quadratic_partition(count(j["quadratic"], join(path, "quadratic")), hi);
        });
    }
    const auto& groups = j["discrete"];
    const auto gpath = join(path, "discrete");
    if (!groups.is_array() || groups.empty()) throw ConfigError(gpath, "expected a nonempty array");
    std::vector<std::vector<double>> out;
    for (std::size_t i = 0; i < groups.size(); ++i) {
        if (groups[i].is_array())
            out.push_back(numbers(groups[i], at_index(gpath, i)));
        else
            out.push_back({number(groups[i], at_index(gpath, i))});
    }
    return wrap(gpath, [&] { return FeaturePartition::discrete(std::move(out)); });
}

inline PartitionScheme parse_scheme(const Json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) throw ConfigError(path, "expected a nonempty array of feature partitions");
    std::vector<FeaturePartition> features;
    for (std::size_t k = 0; k < j.size(); ++k)
        features.push_back(parse_feature_partition(j[k], config_detail::at_index(path, k)));
    return PartitionScheme(std::move(features));
}

inline EpsilonSchedule parse_epsilon(const Json& j, const std::string& path) {
    using namespace config_detail;
    if (j.is_number()) return EpsilonSchedule::constant(number(j, path));
    allow_keys(j, path, {"kind", "value", "threshold"});
    EpsilonSchedule e;
    const auto kind = j.contains("kind") ? text(j["kind"], join(path, "kind")) : std::string("piecewise");
    if (kind == "constant")
        e.kind = EpsilonSchedule::Kind::constant;
    else if (kind != "piecewise")
        throw ConfigError(join(path, "kind"), "expected constant or piecewise");
    if (j.contains("value")) e.value = number(j["value"], join(path, "value"));
    if (j.contains("threshold")) e.threshold = count(j["threshold"], join(path, "threshold"));
    return e;
}

inline AgentConfig parse_agent(const Json& j, const std::string& path, AgentConfig base = {}) {
    using namespace config_detail;
    allow_keys(j, path,
               {"gamma", "epsilon", "buffer_capacity", "batch_size", "train_interval", "target_sync_interval",
                "learning_rate", "hidden", "clear_buffer_on_change"});
    AgentConfig a = std::move(base);
    if (j.contains("gamma")) a.gamma = number(j["gamma"], join(path, "gamma"));
    if (j.contains("epsilon")) a.epsilon = parse_epsilon(j["epsilon"], join(path, "epsilon"));
    if (j.contains("buffer_capacity")) a.buffer_capacity = count(j["buffer_capacity"], join(path, "buffer_capacity"));
    if (j.contains("batch_size")) a.batch_size = count(j["batch_size"], join(path, "batch_size"));
    if (j.contains("train_interval")) a.train_interval = count(j["train_interval"], join(path, "train_interval"));
    if (j.contains("target_sync_interval"))
        a.target_sync_interval = count(j["target_sync_interval"], join(path, "target_sync_interval"));
    if (j.contains("learning_rate")) a.learning_rate = number(j["learning_rate"], join(path, "learning_rate"));
    if (j.contains("hidden")) {
        const auto& h = j["hidden"];
        if (!h.is_array()) throw ConfigError(join(path, "hidden"), "expected an array of layer widths");
        a.hidden.clear();
        for (std::size_t i = 0; i < h.size(); ++i) a.hidden.push_back(count(h[i], at_index(join(path, "hidden"), i)));
    }
    if (j.contains("clear_buffer_on_change"))
        a.clear_buffer_on_change = boolean(j["clear_buffer_on_change"], join(path, "clear_buffer_on_change"));
    try {
        a.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(join(path, e.path()), e.message());
    }
    return a;
}

/// {"type": "item_sale", "items": N, "price": "uniform"|"truncated_exponential", "reward_exponent": e}
/// {"type": "wireless", "system": "A"} or with explicit "users": [{"distance_m", "rate_requirement_bps"}],
/// plus optional radio parameters and multiplier settings.
inline EnvironmentSpec parse_environment(const Json& j, const std::string& path) {
    using namespace config_detail;
    const auto type = text(require(j, path, "type"), join(path, "type"));
    if (type == "item_sale") {
        allow_keys(j, path, {"type", "items", "price", "reward_exponent"});
        ItemSaleConfig c;
        c.items = count(require(j, path, "items"), join(path, "items"));
        if (j.contains("price")) {
            const auto p = text(j["price"], join(path, "price"));
            if (p == "uniform") c.price = PriceDistribution::uniform;
            else if (p == "truncated_exponential") c.price = PriceDistribution::truncated_exponential;
            else throw ConfigError(join(path, "price"), "expected uniform or truncated_exponential");
        }
        if (j.contains("reward_exponent")) c.reward_exponent = number(j["reward_exponent"], join(path, "reward_exponent"));
        auto spec = EnvironmentSpec::items(c);
        try {
            spec.validate();
        } catch (const ConfigError& e) {
            throw ConfigError(join(path, e.path()), e.message());
        }
        return spec;
    }
    if (type != "wireless") throw ConfigError(join(path, "type"), "expected item_sale or wireless");
    allow_keys(j, path,
               {"type", "system", "users", "bandwidth_hz", "noise_dbm_per_hz", "power_levels_w", "pathloss_exponent",
                "shadowing_std_db", "gain_range_db", "rate_unit_bps", "multiplier_step", "multiplier_decay",
                "multiplier_domain_max"});
    WirelessConfig c;
    if (j.contains("system") == j.contains("users"))
        throw ConfigError(path, "expected exactly one of system, users");
    if (j.contains("system")) {
        const auto s = text(j["system"], join(path, "system"));
        if (s.size() != 1) throw ConfigError(join(path, "system"), "expected A, B or C");
        c = wrap(join(path, "system"), [&] { return table1_system(s[0]); });
    } else {
        const auto& users = j["users"];
        const auto upath = join(path, "users");
        if (!users.is_array()) throw ConfigError(upath, "expected an array");
        for (std::size_t i = 0; i < users.size(); ++i) {
            const auto p = at_index(upath, i);
            allow_keys(users[i], p, {"distance_m", "rate_requirement_bps"});
            c.users.push_back({number(require(users[i], p, "distance_m"), join(p, "distance_m")),
                               number(require(users[i], p, "rate_requirement_bps"), join(p, "rate_requirement_bps"))});
        }
    }
    if (j.contains("bandwidth_hz")) c.bandwidth_hz = number(j["bandwidth_hz"], join(path, "bandwidth_hz"));
    if (j.contains("noise_dbm_per_hz"))
        c.noise_density_w_per_hz = dbm_to_watt(number(j["noise_dbm_per_hz"], join(path, "noise_dbm_per_hz")));
    if (j.contains("power_levels_w")) c.power_levels_w = numbers(j["power_levels_w"], join(path, "power_levels_w"));
    if (j.contains("pathloss_exponent"))
        c.pathloss_exponent = number(j["pathloss_exponent"], join(path, "pathloss_exponent"));
    if (j.contains("shadowing_std_db")) c.shadowing_std_db = number(j["shadowing_std_db"], join(path, "shadowing_std_db"));
    if (j.contains("gain_range_db")) {
        const auto r = numbers(j["gain_range_db"], join(path, "gain_range_db"));
        if (r.size() != 2) throw ConfigError(join(path, "gain_range_db"), "expected [floor, ceiling]");
        c.gain_floor_db = r[0];
        c.gain_ceiling_db = r[1];
    }
    if (j.contains("rate_unit_bps")) c.rate_unit_bps = number(j["rate_unit_bps"], join(path, "rate_unit_bps"));
    StepSize step;
    if (j.contains("multiplier_step")) step.base = number(j["multiplier_step"], join(path, "multiplier_step"));
    if (j.contains("multiplier_decay"))
        step.inverse_sqrt_decay = boolean(j["multiplier_decay"], join(path, "multiplier_decay"));
    auto spec = EnvironmentSpec::radio(std::move(c), step);
    if (j.contains("multiplier_domain_max"))
        spec.multiplier_domain_max = number(j["multiplier_domain_max"], join(path, "multiplier_domain_max"));
    try {
        spec.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(join(path, e.path()), e.message());
    }
    return spec;
}

inline MetricsConfig parse_metrics(const Json& j, const std::string& path) {
    using namespace config_detail;
    allow_keys(j, path, {"window", "stride", "tail"});
    MetricsConfig m;
    if (j.contains("window")) m.window = count(j["window"], join(path, "window"));
    if (j.contains("stride")) m.stride = count(j["stride"], join(path, "stride"));
    m.tail = m.window;
    if (j.contains("tail")) m.tail = count(j["tail"], join(path, "tail"));
    return m;
}

/// Scenario file: seed, agent, optional conv_agent, scheme, policies, metrics, phases.
inline ScenarioConfig parse_scenario(const Json& j) {
    using namespace config_detail;
    allow_keys(j, "", {"name", "seed", "agent", "conv_agent", "scheme", "policies", "metrics", "phases"});
    ScenarioConfig c;
    if (j.contains("name")) c.name = text(j["name"], "name");
    if (j.contains("seed")) c.seed = count(j["seed"], "seed");
    if (j.contains("agent")) c.agent = parse_agent(j["agent"], "agent");
    if (j.contains("conv_agent")) c.conv_agent = parse_agent(j["conv_agent"], "conv_agent", c.agent);
    if (j.contains("metrics")) c.metrics = parse_metrics(j["metrics"], "metrics");
    if (j.contains("policies")) {
        const auto& p = j["policies"];
        if (!p.is_array()) throw ConfigError("policies", "expected an array");
        c.policies.clear();
        for (std::size_t i = 0; i < p.size(); ++i) {
            const auto name = text(p[i], at_index("policies", i));
            const auto kind = parse_policy_kind(name);
            if (!kind) throw ConfigError(at_index("policies", i), "unknown policy '" + name + "'");
            c.policies.push_back(*kind);
        }
    }
    const auto& phases = require(j, "", "phases");
    if (!phases.is_array()) throw ConfigError("phases", "expected an array");
    for (std::size_t i = 0; i < phases.size(); ++i) {
        const auto p = at_index("phases", i);
        allow_keys(phases[i], p, {"name", "steps", "environment", "train_desc", "train_conv", "conv_pretrain_steps"});
        PhaseConfig ph;
        ph.name = phases[i].contains("name") ? text(phases[i]["name"], join(p, "name")) : std::to_string(i);
        ph.steps = count(require(phases[i], p, "steps"), join(p, "steps"));
        ph.environment = parse_environment(require(phases[i], p, "environment"), join(p, "environment"));
        if (phases[i].contains("train_desc")) ph.train_desc = boolean(phases[i]["train_desc"], join(p, "train_desc"));
        if (phases[i].contains("train_conv")) ph.train_conv = boolean(phases[i]["train_conv"], join(p, "train_conv"));
        if (phases[i].contains("conv_pretrain_steps"))
            ph.conv_pretrain_steps = count(phases[i]["conv_pretrain_steps"], join(p, "conv_pretrain_steps"));
        c.phases.push_back(std::move(ph));
    }
    if (j.contains("scheme")) {
        c.scheme = parse_scheme(j["scheme"], "scheme");
    } else if (!c.phases.empty()) {
        const bool wireless = c.phases.front().environment.kind == EnvironmentKind::wireless;
        c.scheme = wireless ? PartitionScheme({FeaturePartition::uniform(5), quadratic_partition(10, 2.0)})
                            : PartitionScheme({FeaturePartition::uniform(4),
                                               FeaturePartition::discrete_values({0, 1, 2, 3, 4})});
    }
    c.validate();
    return c;
}

inline void override_steps(ScenarioConfig& c, std::uint64_t steps) {
    for (auto& p : c.phases) p.steps = steps;
}

/// Sweep file: {"base": <scenario>, "settings": [{"label", "scheme"}], "seeds": [...], "evaluation_phase": i}
inline SweepConfig parse_sweep(const Json& j) {
    using namespace config_detail;
    allow_keys(j, "", {"base", "settings", "seeds", "evaluation_phase"});
    SweepConfig c;
    try {
        c.base = parse_scenario(require(j, "", "base"));
    } catch (const ConfigError& e) {
        throw ConfigError(join("base", e.path()), e.message());
    }
    const auto& settings = require(j, "", "settings");
    if (!settings.is_array() || settings.empty()) throw ConfigError("settings", "expected a nonempty array");
    for (std::size_t i = 0; i < settings.size(); ++i) {
        const auto p = at_index("settings", i);
        allow_keys(settings[i], p, {"label", "scheme"});
        c.settings.push_back({text(require(settings[i], p, "label"), join(p, "label")),
                              parse_scheme(require(settings[i], p, "scheme"), join(p, "scheme"))});
        if (c.settings.back().scheme.feature_count() != c.base.phases.front().environment.feature_count())
            throw ConfigError(join(p, "scheme"), "feature count does not match the environment");
    }
    if (j.contains("seeds")) {
        const auto& s = j["seeds"];
        if (!s.is_array() || s.empty()) throw ConfigError("seeds", "expected a nonempty array");
        c.seeds.clear();
        for (std::size_t i = 0; i < s.size(); ++i) c.seeds.push_back(count(s[i], at_index("seeds", i)));
    }
    if (j.contains("evaluation_phase")) {
        c.evaluation_phase = count(j["evaluation_phase"], "evaluation_phase");
        if (*c.evaluation_phase >= c.base.phases.size()) throw ConfigError("evaluation_phase", "no such phase");
    }
    return c;
}

struct FederatedExperiment {
    FederatedConfig config;
    MetricsConfig metrics;
    std::uint64_t seed = 0;
    std::vector<std::string> labels;
};

inline std::uint64_t federated_agent_seed(std::uint64_t seed, std::size_t system) {
    return derive_seed(derive_seed(seed, Stream::descriptive), system);
}
inline std::uint64_t federated_environment_seed(std::uint64_t seed, std::size_t system) {
    return derive_seed(derive_seed(seed, Stream::environment), system);
}

/// Federated file: seed, steps, aggregation_interval, aggregate, parallel, agent, scheme, metrics,
/// systems: [{"label", "environment", "count"}]. Per-system seeds derive from the global seed.
inline FederatedExperiment parse_federated(const Json& j) {
    using namespace config_detail;
    allow_keys(j, "", {"seed", "steps", "aggregation_interval", "aggregate", "parallel", "agent", "scheme", "metrics",
                       "systems", "identical_systems"});
    FederatedExperiment x;
    if (j.contains("seed")) x.seed = count(j["seed"], "seed");
    auto& c = x.config;
    c.steps = count(require(j, "", "steps"), "steps");
    if (j.contains("aggregation_interval")) c.aggregation_interval = count(j["aggregation_interval"], "aggregation_interval");
    if (j.contains("aggregate")) c.aggregate = boolean(j["aggregate"], "aggregate");
    if (j.contains("parallel")) c.parallel = boolean(j["parallel"], "parallel");
    const bool identical = j.contains("identical_systems") && boolean(j["identical_systems"], "identical_systems");
    AgentConfig agent = j.contains("agent") ? parse_agent(j["agent"], "agent") : AgentConfig{};
    if (j.contains("metrics")) x.metrics = parse_metrics(j["metrics"], "metrics");
    const auto& systems = require(j, "", "systems");
    if (!systems.is_array()) throw ConfigError("systems", "expected an array");
    std::optional<PartitionScheme> scheme;
    if (j.contains("scheme")) scheme = parse_scheme(j["scheme"], "scheme");
    for (std::size_t i = 0; i < systems.size(); ++i) {
        const auto p = at_index("systems", i);
        allow_keys(systems[i], p, {"label", "environment", "count"});
        const auto env = parse_environment(require(systems[i], p, "environment"), join(p, "environment"));
        const std::uint64_t copies = systems[i].contains("count") ? count(systems[i]["count"], join(p, "count")) : 1;
        const auto label = systems[i].contains("label") ? text(systems[i]["label"], join(p, "label")) : std::to_string(i);
        for (std::uint64_t k = 0; k < copies; ++k) {
            const std::size_t index = c.systems.size();
            FederatedSystem s;
            s.environment = env;
            s.agent = agent;
            s.scheme = scheme ? *scheme
                              : (env.kind == EnvironmentKind::wireless
                                     ? PartitionScheme({FeaturePartition::uniform(5), quadratic_partition(10, 2.0)})
                                     : PartitionScheme({FeaturePartition::uniform(4),
                                                        FeaturePartition::discrete_values({0, 1, 2, 3, 4})}));
            s.agent_seed = federated_agent_seed(x.seed, identical ? 0 : index);
            s.environment_seed = federated_environment_seed(x.seed, identical ? 0 : index);
            c.systems.push_back(std::move(s));
            x.labels.push_back(copies > 1 ? label + "_" + std::to_string(k) : label);
        }
    }
    c.validate();
    return x;
}

}  // namespace descpol

#include <cstdint>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "descpol/descpol.hpp"

namespace fs = std::filesystem;
using namespace descpol;

namespace {

struct CommonOptions {
    std::optional<std::uint64_t> seed;
    std::string out_dir = "out";
    std::optional<std::uint64_t> steps_override;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--seed", o.seed, "Override the configured seed");
    cmd->add_option("--out-dir", o.out_dir, "Output directory")->capture_default_str();
    cmd->add_option("--steps-override", o.steps_override, "Replace every phase length (or federated step count)");
}

std::string read_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int cmd_run(const std::string& config_path, const CommonOptions& o) {
    const auto text = read_text(config_path);
    auto config = parse_scenario(Json::parse(text));
    if (o.seed) config.seed = *o.seed;
    if (o.steps_override) override_steps(config, *o.steps_override);
    config.validate();
    const auto result = run_scenario(config);
    write_scenario_outputs(o.out_dir, config, result, text);
    for (const auto& s : result.summaries)
        std::printf("phase %-8s %-17s mean %.6g  tail %.6g\n", s.phase_name.c_str(), to_string(s.policy),
                    s.mean_utility, s.tail_mean_utility);
    return 0;
}

int cmd_theorem(const std::string& instance, unsigned b_min, unsigned b_max, double tol, const CommonOptions& o) {
    ItemSystemMDP sys;
    if (instance.empty()) {
        sys = support_instance();
    } else {
        std::ifstream in(instance);
        if (!in) throw ConfigError("", "cannot open " + instance);
        sys = read_tabular(in);
    }
    fs::create_directories(o.out_dir);
    auto out = open_output((fs::path(o.out_dir) / "theorem.csv").string());
    CsvWriter csv(out);
    csv.row({"b", "gap", "descriptive_states"});
    std::optional<double> previous;
    bool monotone = true;
    for (unsigned b = b_min; b <= b_max; ++b) {
        const auto g = theorem1_gap(sys, b, tol);
        csv.field(b).field(g.gap).field(g.descriptive_states);
        csv.end();
        if (previous && g.gap > *previous + 1e-9) monotone = false;
        previous = g.gap;
        std::printf("b=%u gap=%.3e descriptive_states=%zu\n", b, g.gap, g.descriptive_states);
    }
    std::printf("non-increasing: %s\n", monotone ? "yes" : "no");
    return 0;
}

int cmd_fl(const std::string& config_path, const CommonOptions& o) {
    auto j = load_json_file(config_path);
    if (o.seed) j["seed"] = *o.seed;
    if (o.steps_override) j["steps"] = *o.steps_override;
    auto x = parse_federated(j);
    const std::size_t K = x.config.systems.size();
    const std::size_t window = x.metrics.window, stride = x.metrics.stride;

    FederatedRun run(x.config);
    std::vector<std::deque<double>> recent(K);
    std::vector<double> sums(K, 0.0);
    std::vector<std::vector<std::pair<std::uint64_t, double>>> windowed(K);
    auto result = run.run([&](std::uint64_t t, std::size_t i, const StepRecord& r) {
        recent[i].push_back(r.utility);
        sums[i] += r.utility;
        if (recent[i].size() > window) {
            sums[i] -= recent[i].front();
            recent[i].pop_front();
        }
        if (t == 1 || t == x.config.steps || t % stride == 0)
            windowed[i].push_back({t, sums[i] / static_cast<double>(recent[i].size())});
    });

    fs::create_directories(o.out_dir);
    std::vector<PlotSeries> series;
    for (std::size_t i = 0; i < K; ++i) {
        auto out = open_output((fs::path(o.out_dir) / ("system_" + x.labels[i] + ".csv")).string());
        out << "# stride=" << stride << " window=" << window << "\r\n";
        CsvWriter csv(out);
        csv.row({"t", "system", "utility", "window_avg"});
        PlotSeries s{x.labels[i], {}, {}};
        for (const auto& [t, avg] : windowed[i]) {
            csv.field(t).field(x.labels[i]).field(result.utilities[i][t - 1]).field(avg);
            csv.end();
            s.x.push_back(static_cast<double>(t));
            s.y.push_back(avg);
        }
        series.push_back(std::move(s));
    }
    {
        auto out = open_output((fs::path(o.out_dir) / "aggregation.csv").string());
        CsvWriter csv(out);
        csv.row({"t"});
        for (auto t : result.aggregation_steps) {
            csv.field(t);
            csv.end();
        }
    }
    {
        auto out = open_output((fs::path(o.out_dir) / "summary.csv").string());
        CsvWriter csv(out);
        csv.row({"system", "steps", "mean_utility"});
        for (std::size_t i = 0; i < K; ++i) {
            double total = 0.0;
            for (double u : result.utilities[i]) total += u;
            csv.field(x.labels[i]).field(result.steps_executed[i]).field(total / static_cast<double>(x.config.steps));
            csv.end();
            std::printf("%-12s mean utility %.6g\n", x.labels[i].c_str(), total / static_cast<double>(x.config.steps));
        }
    }
    {
        auto out = open_output((fs::path(o.out_dir) / "plot.svg").string());
        write_line_plot_svg(out, x.config.aggregate ? "federated run" : "independent learners", "windowed utility", series);
    }
    save_network((fs::path(o.out_dir) / "global_params.txt").string(), result.final_params.front());
    std::printf("aggregations: %zu\n", result.aggregation_steps.size());
    return 0;
}

int cmd_sweep(const std::string& config_path, const CommonOptions& o) {
    auto config = parse_sweep(load_json_file(config_path));
    if (o.seed) config.seeds = {*o.seed};
    if (o.steps_override) override_steps(config.base, *o.steps_override);
    const auto result = fineness_sweep(config, [](const SweepEntry& e) {
        std::printf("%-10s seed %-4llu %-17s %.6g\n", e.label.c_str(), static_cast<unsigned long long>(e.seed),
                    to_string(e.policy), e.mean_utility);
        std::fflush(stdout);
    });
    fs::create_directories(o.out_dir);
    {
        auto out = open_output((fs::path(o.out_dir) / "sweep.csv").string());
        write_sweep_csv(out, result);
    }
    auto out = open_output((fs::path(o.out_dir) / "sweep_summary.csv").string());
    CsvWriter csv(out);
    csv.row({"setting", "policy", "mean", "standard_error", "seeds"});
    for (const auto& s : config.settings)
        for (auto kind : config.base.policies) {
            const auto [mean, se] = result.statistics(s.label, kind);
            csv.field(s.label).field(to_string(kind)).field(mean).field(se).field(config.seeds.size());
            csv.end();
        }
    return 0;
}

int cmd_heatmap(const std::string& config_path, const std::string& checkpoint, const std::string& probe,
                std::size_t phase, const CommonOptions& o) {
    const auto config = parse_scenario(load_json_file(config_path));
    if (phase >= config.phases.size()) throw ConfigError("--phase", "no such phase");
    const auto& env = config.phases[phase].environment;
    std::ifstream in(checkpoint);
    if (!in) throw ConfigError("", "cannot open " + checkpoint);
    const auto ckpt = read_checkpoint(in);
    DescriptiveActionSpace space(config.scheme.shape(), env.decision_sets());
    DescriptiveState state = DescriptiveState::all_ones(config.scheme.shape());
    if (!probe.empty() && probe != "all-ones") {
        std::vector<double> bits;
        std::stringstream ss(probe);
        std::string tok;
        while (std::getline(ss, tok, ',')) bits.push_back(std::stod(tok));
        state = DescriptiveState::unflatten(config.scheme.shape(),
                                            Eigen::Map<const Eigen::VectorXd>(bits.data(), static_cast<Eigen::Index>(bits.size())));
    }
    emit_q_heatmap(o.out_dir, ckpt.network, space, state, env.objective(), feature_names(env.kind));
    const auto map = q_heatmap(ckpt.network, space, state, env.objective());
    if (const auto best = map.best(env.objective())) std::printf("best condition %s\n", to_string(*best).c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Descriptive scheduling policies: experiments and checks"};
    app.require_subcommand(1);

    CommonOptions run_opts, thm_opts, fl_opts, sweep_opts, heat_opts;
    std::string run_config, fl_config, sweep_config, heat_config, checkpoint, instance, probe = "all-ones";
    unsigned b_min = 0, b_max = 3;
    double tol = 1e-12;
    std::size_t heat_phase = 0;

    auto* run = app.add_subcommand("run", "Run a scenario (phases x policies)");
    run->add_option("config", run_config, "Scenario config (JSON)")->required()->check(CLI::ExistingFile);
    add_common(run, run_opts);

    auto* thm = app.add_subcommand("theorem-check", "Exact value-iteration gap between typical and descriptive optima");
    thm->add_option("--instance", instance, "Tabular model file (default: built-in two-item instance)");
    thm->add_option("--b-min", b_min)->capture_default_str();
    thm->add_option("--b-max", b_max)->capture_default_str();
    thm->add_option("--tol", tol, "Value-iteration tolerance")->capture_default_str();
    add_common(thm, thm_opts);

    auto* fl = app.add_subcommand("fl-run", "Federated run over several systems");
    fl->add_option("config", fl_config, "Federated config (JSON)")->required()->check(CLI::ExistingFile);
    add_common(fl, fl_opts);

    auto* sweep = app.add_subcommand("sweep", "Partition fineness / strategy sweep");
    sweep->add_option("config", sweep_config, "Sweep config (JSON)")->required()->check(CLI::ExistingFile);
    add_common(sweep, sweep_opts);

    auto* heat = app.add_subcommand("heatmap", "Per-condition Q-values of a trained descriptive policy");
    heat->add_option("config", heat_config, "Scenario config the checkpoint was trained with")->required()->check(
        CLI::ExistingFile);
    heat->add_option("--checkpoint", checkpoint, "Checkpoint file")->required()->check(CLI::ExistingFile);
    heat->add_option("--probe", probe, "'all-ones' or comma-separated flat descriptive state bits")->capture_default_str();
    heat->add_option("--phase", heat_phase, "Phase whose environment defines the decision sets")->capture_default_str();
    add_common(heat, heat_opts);

    CLI11_PARSE(app, argc, argv);
    try {
        if (*run) return cmd_run(run_config, run_opts);
        if (*thm) return cmd_theorem(instance, b_min, b_max, tol, thm_opts);
        if (*fl) return cmd_fl(fl_config, fl_opts);
        if (*sweep) return cmd_sweep(sweep_config, sweep_opts);
        if (*heat) return cmd_heatmap(heat_config, checkpoint, probe, heat_phase, heat_opts);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}

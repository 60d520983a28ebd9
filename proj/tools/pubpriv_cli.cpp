// Command-line front end: gen / run / sweep / verify / bounds.
//
// Exit codes: 0 ok, 1 usage or config error, 2 experiment failure,
// 3 verify failure.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>

#include "pubpriv/bounds.hpp"
#include "pubpriv/errors.hpp"
#include "pubpriv/harness.hpp"
#include "pubpriv/mechanisms.hpp"
#include "pubpriv/models.hpp"
#include "pubpriv/verify.hpp"

namespace {

using namespace pubpriv;

struct CommonFlags {
    std::string problem;
    std::optional<int> d, n, m, trials;
    std::optional<double> tau, eps, delta, clip;
    std::optional<std::uint64_t> seed;
    std::string mechanism;
    std::string config_path;
    std::string out_path;
    std::string format = "csv";
    std::vector<std::string> outputs;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags, bool with_config) {
    cmd->add_option("--problem", flags.problem, "mean or reg");
    cmd->add_option("--d", flags.d, "dimension");
    cmd->add_option("--n", flags.n, "private sample count");
    cmd->add_option("--m", flags.m, "public sample count");
    cmd->add_option("--tau", flags.tau, "shift magnitude");
    cmd->add_option("--eps", flags.eps, "privacy epsilon");
    cmd->add_option("--delta", flags.delta, "privacy delta");
    cmd->add_option("--trials", flags.trials, "Monte Carlo trials");
    cmd->add_option("--seed", flags.seed, "root seed");
    cmd->add_option("--mechanism", flags.mechanism, "mechanism kind name");
    cmd->add_option("--clip", flags.clip, "clip radius for DP mechanisms");
    cmd->add_option("--out", flags.out_path, "output path (default stdout)");
    cmd->add_option("--format", flags.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--outputs", flags.outputs, "requested aggregates")->delimiter(',');
    if (with_config) {
        cmd->add_option("--config", flags.config_path, "JSON config file (flags override it)");
    }
}

harness::ExperimentConfig build_config(const CommonFlags& flags) {
    harness::ExperimentConfig config;
    if (!flags.config_path.empty()) {
        std::ifstream in(flags.config_path);
        if (!in) {
            throw ParameterError("cannot open config file: " + flags.config_path);
        }
        std::stringstream buffer;
        buffer << in.rdbuf();
        config = harness::config_from_json_text(buffer.str());
    } else {
        config.outputs = {harness::Aggregate::err_l2, harness::Aggregate::err_l2_sq,
                          harness::Aggregate::sum_total, harness::Aggregate::sum_priv};
    }
    if (!flags.problem.empty()) config.problem = harness::parse_problem(flags.problem);
    if (flags.d) config.mean.d = config.reg.d = *flags.d;
    if (flags.n) config.mean.n = config.reg.n = *flags.n;
    if (flags.m) config.mean.m = config.reg.m = *flags.m;
    if (flags.tau) config.mean.tau = config.reg.tau = *flags.tau;
    if (flags.eps) config.mechanism.budget.eps = *flags.eps;
    if (flags.delta) config.mechanism.budget.delta = *flags.delta;
    if (flags.trials) config.trials = *flags.trials;
    if (flags.seed) config.seed.root = *flags.seed;
    if (!flags.mechanism.empty()) config.mechanism.kind = mechanisms::parse_kind(flags.mechanism);
    if (flags.clip) config.mechanism.clip_radius = *flags.clip;
    if (!flags.outputs.empty()) {
        config.outputs.clear();
        for (const auto& name : flags.outputs) {
            config.outputs.push_back(harness::parse_aggregate(name));
        }
    }
    return config;
}

void emit_rows(const CommonFlags& flags, const std::vector<harness::SweepRow>& rows) {
    std::ostringstream text;
    if (flags.format == "json") {
        harness::write_json(text, rows);
    } else {
        harness::write_csv(text, rows);
    }
    if (flags.out_path.empty()) {
        std::cout << text.str();
    } else {
        std::ofstream out(flags.out_path);
        if (!out) {
            throw ParameterError("cannot open output path: " + flags.out_path);
        }
        out << text.str();
    }
}

int cmd_gen(const CommonFlags& flags) {
    const auto config = build_config(flags);
    std::ostringstream text;
    const RngSeed seed = config.seed;
    if (config.problem == harness::Problem::mean) {
        const auto inst = models::sample_mean_instance(config.mean, substream(seed, 0));
        const auto ds = models::sample_mean_dataset(config.mean, inst, substream(seed, 1));
        models::write_dataset(text, config.mean, ds);
    } else {
        const auto inst = models::sample_reg_instance(config.reg, substream(seed, 0));
        const auto ds = models::sample_reg_dataset(config.reg, inst, substream(seed, 1));
        models::write_dataset(text, config.reg, ds);
    }
    if (flags.out_path.empty()) {
        std::cout << text.str();
    } else {
        std::ofstream out(flags.out_path);
        if (!out) {
            throw ParameterError("cannot open output path: " + flags.out_path);
        }
        out << text.str();
    }
    return 0;
}

int cmd_run(const CommonFlags& flags) {
    const auto config = build_config(flags);
    harness::SweepRow row;
    row.axis_value = 0.0; // single run; schema keeps the sweep column
    row.result = harness::run_experiment(config);
    emit_rows(flags, {row});
    if (row.result.failed) {
        std::cerr << "experiment failed: " << row.result.trial_errors << "/"
                  << row.result.trials << " trials errored (first: " << row.result.first_error
                  << ")\n";
        return 2;
    }
    return 0;
}

int cmd_sweep(const CommonFlags& flags, const std::string& axis_name,
              const std::vector<double>& values) {
    const auto config = build_config(flags);
    const auto rows = harness::run_sweep(config, harness::parse_axis(axis_name), values);
    emit_rows(flags, rows);
    for (const auto& row : rows) {
        if (row.result.failed) {
            std::cerr << "experiment failed at axis value " << row.axis_value << "\n";
            return 2;
        }
    }
    return 0;
}

int cmd_verify(const std::string& level) {
    const auto report = harness::verify_suite(
        level == "full" ? harness::VerifyLevel::full : harness::VerifyLevel::fast, &std::cout);
    std::cout << (report.all_pass() ? "VERIFY PASS" : "VERIFY FAIL") << " ("
              << report.checks.size() << " checks, " << report.seconds << " s)\n";
    return report.all_pass() ? 0 : 3;
}

int cmd_bounds(const CommonFlags& flags, double alpha, double c, bool as_json) {
    models::MeanModelParams params;
    params.d = flags.d.value_or(10);
    params.n = flags.n.value_or(100);
    params.m = flags.m.value_or(100);
    params.tau = flags.tau.value_or(0.0);
    const double eps = flags.eps.value_or(1.0);
    const auto pred = bounds::predict_mean(params, eps, alpha, c);
    const auto regime = bounds::classify_regime(params);
    const double sigma2 = 1.0;
    const double reg_ub =
        bounds::reg_upper_bound(params.n, params.m, params.d, params.tau, eps, alpha, sigma2, c);

    if (as_json) {
        nlohmann::json j;
        j["kappa"] = pred.kappa;
        j["gamma_tau"] = std::isinf(pred.gamma_tau) ? nlohmann::json() : nlohmann::json(pred.gamma_tau);
        j["regime"] = regime.regime == bounds::Regime::large_shift ? "large_shift" : "small_shift";
        j["threshold_tau"] = regime.threshold_tau;
        j["mean_upper_sum_z"] = pred.upper_sum_z;
        j["reg_upper_sum_z"] = reg_ub;
        j["lower_sum_z_floor"] = pred.lower_sum_z_floor;
        j["n_threshold_dp"] = pred.n_threshold_dp;
        j["n_threshold_stat"] = pred.n_threshold_stat;
        j["m_threshold_pub"] = pred.m_threshold_pub;
        j["posterior_concentration"] = pred.posterior_concentration;
        std::cout << j.dump(2) << '\n';
        return 0;
    }
    auto line = [](const char* key, double value) {
        std::printf("%-26s = %.10g\n", key, value);
    };
    line("kappa", pred.kappa);
    line("gamma_tau", pred.gamma_tau);
    std::printf("%-26s = %s\n", "regime",
                regime.regime == bounds::Regime::large_shift ? "large_shift" : "small_shift");
    line("threshold_tau", regime.threshold_tau);
    line("mean_upper_sum_z", pred.upper_sum_z);
    line("reg_upper_sum_z", reg_ub);
    line("lower_sum_z_floor", pred.lower_sum_z_floor);
    line("n_threshold_dp", pred.n_threshold_dp);
    line("n_threshold_stat", pred.n_threshold_stat);
    line("m_threshold_pub", pred.m_threshold_pub);
    line("posterior_concentration", pred.posterior_concentration);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"public-private estimation simulation lab"};
    app.require_subcommand(1);

    CommonFlags gen_flags, run_flags, sweep_flags, bounds_flags;
    std::string sweep_axis;
    std::vector<double> sweep_values;
    std::string verify_level = "fast";
    double alpha = 0.5, constant = 1.0;
    bool bounds_json = false;

    auto* gen = app.add_subcommand("gen", "emit a sampled dataset in the text dump format");
    add_common_flags(gen, gen_flags, true);

    auto* run = app.add_subcommand("run", "run a single Monte Carlo experiment");
    add_common_flags(run, run_flags, true);

    auto* sweep = app.add_subcommand("sweep", "run one experiment per axis value");
    add_common_flags(sweep, sweep_flags, true);
    sweep->add_option("--axis", sweep_axis, "n, m, d, tau, eps or trials")->required();
    sweep->add_option("--values", sweep_values, "axis values")->required()->delimiter(',');

    auto* verify = app.add_subcommand("verify", "run the invariant/acceptance suite");
    verify->add_option("--level", verify_level, "fast or full")
        ->check(CLI::IsMember({"fast", "full"}));

    auto* bounds_cmd = app.add_subcommand("bounds", "print closed-form predictions");
    add_common_flags(bounds_cmd, bounds_flags, false);
    bounds_cmd->add_option("--alpha", alpha, "target/measured accuracy");
    bounds_cmd->add_option("--c", constant, "explicit constant in the bound");
    bounds_cmd->add_flag("--json", bounds_json, "emit JSON instead of key=value lines");

    try {
        app.parse(argc, argv);
        if (gen->parsed()) return cmd_gen(gen_flags);
        if (run->parsed()) return cmd_run(run_flags);
        if (sweep->parsed()) return cmd_sweep(sweep_flags, sweep_axis, sweep_values);
        if (verify->parsed()) return cmd_verify(verify_level);
        if (bounds_cmd->parsed()) return cmd_bounds(bounds_flags, alpha, constant, bounds_json);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}

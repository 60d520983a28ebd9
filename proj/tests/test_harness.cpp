#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "pubpriv/errors.hpp"
#include "pubpriv/estimators.hpp"
#include "pubpriv/harness.hpp"
#include "test_support.hpp"

using namespace pubpriv;
using harness::Aggregate;

namespace {

harness::ExperimentConfig smoke_config() {
    harness::ExperimentConfig config;
    config.problem = harness::Problem::mean;
    config.mean = {.d = 4, .n = 20, .m = 20, .tau = 0.2};
    config.mechanism.kind = mechanisms::MechanismKind::BayesPosterior;
    config.trials = 200;
    config.seed = RngSeed{7, 0};
    config.outputs = {Aggregate::err_l2, Aggregate::err_l2_sq, Aggregate::sum_total,
                      Aggregate::sum_priv};
    return config;
}

} // namespace

TEST_CASE("running stat push and merge agree") {
    harness::RunningStat whole, left, right;
    Rng rng(RngSeed{1, 1});
    for (int i = 0; i < 500; ++i) {
        const double x = rng.next_gaussian() * 3.0 + 1.0;
        whole.push(x);
        (i < 250 ? left : right).push(x);
    }
    left.merge(right);
    CHECK(left.count() == whole.count());
    CHECK(left.mean() == doctest::Approx(whole.mean()).epsilon(1e-12));
    CHECK(left.variance_sample() == doctest::Approx(whole.variance_sample()).epsilon(1e-12));
    CHECK(left.min() == whole.min());
    CHECK(left.max() == whole.max());
}

TEST_CASE("trial records replay exactly") {
    const auto config = smoke_config();
    const auto a = harness::run_trial(config, 17);
    const auto b = harness::run_trial(config, 17);
    CHECK_FALSE(a.failed);
    CHECK(a.alpha == b.alpha);
    REQUIRE(a.values.size() == b.values.size());
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        CHECK(a.values[i].second == b.values[i].second);
    }
}

TEST_CASE("no-output config still reports the realized error") {
    auto config = smoke_config();
    config.outputs.clear();
    const auto rec = harness::run_trial(config, 0);
    CHECK_FALSE(rec.failed);
    CHECK(std::isfinite(rec.alpha));
    CHECK(rec.values.empty());
    CHECK(rec.seconds >= 0.0);
}

TEST_CASE("serial and parallel execution produce identical aggregates") {
    const auto config = smoke_config();
    const auto serial = harness::run_experiment(config, harness::Execution::serial);
    const auto parallel = harness::run_experiment(config, harness::Execution::parallel);
    REQUIRE(serial.stats.size() == parallel.stats.size());
    for (std::size_t i = 0; i < serial.stats.size(); ++i) {
        CHECK(serial.stats[i].mean == parallel.stats[i].mean);
        CHECK(serial.stats[i].stderr_ == parallel.stats[i].stderr_);
        CHECK(serial.stats[i].count == parallel.stats[i].count);
        CHECK(serial.stats[i].min == parallel.stats[i].min);
        CHECK(serial.stats[i].max == parallel.stats[i].max);
    }
}

TEST_CASE("trials=1 reports the undefined-stderr sentinel") {
    auto config = smoke_config();
    config.trials = 1;
    const auto result = harness::run_experiment(config);
    for (const auto& stat : result.stats) {
        CHECK(stat.count == 1);
        CHECK(std::isnan(stat.stderr_));
    }
}

TEST_CASE("constant statistic has zero stderr") {
    // no private rows: sum_priv is identically zero
    harness::ExperimentConfig config;
    config.problem = harness::Problem::mean;
    config.mean = {.d = 2, .n = 0, .m = 6, .tau = 0.0};
    config.mechanism.kind = mechanisms::MechanismKind::PublicOnlyMean;
    config.trials = 50;
    config.seed = RngSeed{8, 0};
    config.outputs = {Aggregate::sum_priv};
    const auto result = harness::run_experiment(config);
    CHECK(result.stats[0].mean == 0.0);
    CHECK(result.stats[0].stderr_ == 0.0);
    CHECK(result.stats[0].min == 0.0);
    CHECK(result.stats[0].max == 0.0);
}

TEST_CASE("doubling trials shrinks stderr by about sqrt(2)") {
    auto small = smoke_config();
    small.trials = 4000;
    auto big = smoke_config();
    big.trials = 8000;
    const auto rs = harness::run_experiment(small);
    const auto rb = harness::run_experiment(big);
    const double ratio = rb.stats[0].stderr_ / rs.stats[0].stderr_;
    CHECK(ratio == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(0.2));
}

TEST_CASE("bayes posterior risk decreases with total sample size") {
    double prev = std::numeric_limits<double>::infinity();
    for (int total : {100, 200, 400}) {
        harness::ExperimentConfig config;
        config.problem = harness::Problem::mean;
        config.mean = {.d = 5, .n = total / 2, .m = total / 2, .tau = 0.0};
        config.mechanism.kind = mechanisms::MechanismKind::BayesPosterior;
        config.trials = 500;
        config.seed = RngSeed{9, 0};
        config.outputs = {Aggregate::err_l2_sq};
        const auto result = harness::run_experiment(config);
        CHECK(result.stats[0].mean < prev);
        prev = result.stats[0].mean;
    }
}

TEST_CASE("per-trial module errors are collected, not thrown") {
    harness::ExperimentConfig config;
    config.problem = harness::Problem::regression;
    config.reg = {.d = 5, .n = 30, .m = 3, .tau = 0.0}; // m < d: public OLS is singular
    config.mechanism.kind = mechanisms::MechanismKind::PublicOnlyOls;
    config.trials = 10;
    config.seed = RngSeed{10, 0};
    config.outputs = {Aggregate::err_l2};
    const auto result = harness::run_experiment(config);
    CHECK(result.trial_errors == 10);
    CHECK(result.failed); // > 10% errored
    CHECK_FALSE(result.first_error.empty());
}

TEST_CASE("config validation rejects mismatched aggregates and kinds") {
    auto config = smoke_config();
    config.outputs.push_back(Aggregate::gls_score);
    CHECK_THROWS_AS(config.validate(), ParameterError);

    auto wrong_kind = smoke_config();
    wrong_kind.mechanism.kind = mechanisms::MechanismKind::GlsPosterior;
    CHECK_THROWS_AS(wrong_kind.validate(), ParameterError);

    auto bad_trials = smoke_config();
    bad_trials.trials = 0;
    CHECK_THROWS_AS(bad_trials.validate(), ParameterError);
}

TEST_CASE("sweep over a single tau value equals a plain run") {
    const auto config = smoke_config();
    const auto rows = harness::run_sweep(config, harness::SweepAxis::tau, {0.2});
    REQUIRE(rows.size() == 1);
    const auto direct = harness::run_experiment(config);
    for (std::size_t i = 0; i < direct.stats.size(); ++i) {
        CHECK(rows[0].result.stats[i].mean == direct.stats[i].mean);
    }
}

TEST_CASE("sweep axis application") {
    auto config = smoke_config();
    const auto rows = harness::run_sweep(config, harness::SweepAxis::trials, {50, 100});
    CHECK(rows[0].result.stats[0].count == 50);
    CHECK(rows[1].result.stats[0].count == 100);
    CHECK_THROWS_AS(harness::parse_axis("sigma"), ParameterError);
}

TEST_CASE("csv schema is exact") {
    auto config = smoke_config();
    config.trials = 5;
    config.outputs = {Aggregate::err_l2};
    const auto rows = harness::run_sweep(config, harness::SweepAxis::tau, {0.0, 1.0});
    std::ostringstream out;
    harness::write_csv(out, rows);
    std::istringstream in(out.str());
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line == "axis_value,stat_name,mean,stderr,count,min,max");
    int data_lines = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ++data_lines;
        CHECK(line.find("err_l2") != std::string::npos);
        int commas = 0;
        for (char ch : line) commas += ch == ',';
        CHECK(commas == 6);
    }
    CHECK(data_lines == 2);
}

TEST_CASE("json results carry the same keys") {
    auto config = smoke_config();
    config.trials = 5;
    config.outputs = {Aggregate::err_l2};
    const auto rows = harness::run_sweep(config, harness::SweepAxis::tau, {0.5});
    std::ostringstream out;
    harness::write_json(out, rows);
    const std::string text = out.str();
    for (const char* key :
         {"axis_value", "stat_name", "mean", "stderr", "count", "min", "max"}) {
        CHECK(text.find(key) != std::string::npos);
    }
}

TEST_CASE("config json round trip") {
    harness::ExperimentConfig config;
    config.problem = harness::Problem::regression;
    config.reg = {.d = 7, .n = 120, .m = 60, .tau = 0.75, .noise_sigma2 = 2.0};
    config.reg.prior_precision_b = 0.3;
    config.mechanism.kind = mechanisms::MechanismKind::GaussianMechReg;
    config.mechanism.budget = {1.5, 1e-6};
    config.mechanism.clip_radius = 3.0;
    config.trials = 77;
    config.seed = RngSeed{424242, 5};
    config.kappa_override = 2.5;
    config.outputs = {Aggregate::err_l2, Aggregate::gls_score};
    config.zprime_samples = 4;

    const auto text = harness::config_to_json_text(config);
    const auto parsed = harness::config_from_json_text(text);
    CHECK(parsed.problem == config.problem);
    CHECK(parsed.reg.d == config.reg.d);
    CHECK(parsed.reg.n == config.reg.n);
    CHECK(parsed.reg.m == config.reg.m);
    CHECK(parsed.reg.tau == config.reg.tau);
    CHECK(parsed.reg.noise_sigma2 == config.reg.noise_sigma2);
    CHECK(parsed.reg.prior_precision_b == config.reg.prior_precision_b);
    CHECK(parsed.mechanism.kind == config.mechanism.kind);
    CHECK(parsed.mechanism.budget.eps == config.mechanism.budget.eps);
    CHECK(parsed.mechanism.budget.delta == config.mechanism.budget.delta);
    CHECK(parsed.mechanism.clip_radius == config.mechanism.clip_radius);
    CHECK(parsed.trials == config.trials);
    CHECK(parsed.seed.root == config.seed.root);
    CHECK(parsed.seed.stream == config.seed.stream);
    REQUIRE(parsed.kappa_override.has_value());
    CHECK(*parsed.kappa_override == 2.5);
    CHECK(parsed.outputs == config.outputs);
    CHECK(parsed.zprime_samples == 4);
}

TEST_CASE("config json rejects unknown keys") {
    CHECK_THROWS_AS(harness::config_from_json_text(R"({"problems": "mean"})"), ParameterError);
    CHECK_THROWS_AS(harness::config_from_json_text("not json"), ParameterError);
    CHECK_THROWS_AS(
        harness::config_from_json_text(R"({"mechanism": {"kinds": "BayesPosterior"}})"),
        ParameterError);
}

TEST_CASE("kappa override feeds the statistics") {
    auto config = smoke_config();
    config.mean.tau = 0.8; // default kappa would be m tau^2/d + 1 > 1
    config.outputs = {Aggregate::sum_total, Aggregate::sum_pub_weighted};
    config.trials = 1;

    auto forced = config;
    forced.kappa_override = 1.0;
    const auto with_default = harness::run_trial(config, 0);
    const auto with_override = harness::run_trial(forced, 0);
    // same trial seed, same data; only the public weight changes
    CHECK(with_default.values[1].second != with_override.values[1].second);

    // override of 1 reproduces the unweighted pooled identity
    const auto inst = models::sample_mean_instance(forced.mean, substream(with_override.seed, 0));
    const auto ds = models::sample_mean_dataset(forced.mean, inst, substream(with_override.seed, 1));
    const auto out = mechanisms::estimate_mean(forced.mechanism, ds, forced.mean,
                                               substream(with_override.seed, 2));
    const double direct = (forced.mean.n + forced.mean.m) *
                          (out.estimate - inst.mu_priv)
                              .dot(estimators::kappa_weighted_pooled_mean(ds, 1.0) - inst.mu_priv);
    CHECK(test_support::rel_diff(with_override.values[0].second, direct) < 1e-10);
}

TEST_CASE("zprime private-row restriction round trips and validates") {
    auto config = smoke_config();
    config.zprime_private_rows = true;
    config.outputs = {Aggregate::zprime};
    const auto text = harness::config_to_json_text(config);
    CHECK(harness::config_from_json_text(text).zprime_private_rows);

    config.mean.n = 0;
    config.mean.m = 10;
    config.mechanism.kind = mechanisms::MechanismKind::PublicOnlyMean;
    CHECK_THROWS_AS(config.validate(), ParameterError);
}

TEST_CASE("zprime aggregates count every draw") {
    auto config = smoke_config();
    config.trials = 40;
    config.zprime_samples = 4;
    config.outputs = {Aggregate::zprime, Aggregate::zprime_sq};
    const auto result = harness::run_experiment(config);
    CHECK(result.stats[0].count == 160);
    CHECK(result.stats[1].count == 160);
    CHECK(result.stats[1].mean >= 0.0);
}

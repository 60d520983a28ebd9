#include "pubpriv/verify.hpp"

#include <Eigen/Eigenvalues>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <ostream>

#include "pubpriv/bounds.hpp"
#include "pubpriv/errors.hpp"
#include "pubpriv/estimators.hpp"
#include "pubpriv/fingerprint.hpp"
#include "pubpriv/harness.hpp"
#include "pubpriv/mechanisms.hpp"
#include "pubpriv/models.hpp"

namespace pubpriv::harness {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using models::MeanModelParams;
using models::RegModelParams;

std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof(buf), format, args);
    va_end(args);
    return std::string(buf);
}

double rel_diff(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1.0});
}

double rel_diff(const VectorXd& a, const VectorXd& b) {
    return (a - b).norm() / std::max({a.norm(), b.norm(), 1.0});
}

// Monte Carlo loop over independent trial streams, folded in index order.
RunningStat monte_carlo(int trials, RngSeed root, const std::function<double(RngSeed)>& fn) {
    std::vector<double> values(static_cast<std::size_t>(trials));
#pragma omp parallel for schedule(dynamic)
    for (int t = 0; t < trials; ++t) {
        values[static_cast<std::size_t>(t)] = fn(substream(root, static_cast<std::uint64_t>(t)));
    }
    RunningStat acc;
    for (double v : values) acc.push(v);
    return acc;
}

double slope_loglog(const std::vector<double>& xs, const std::vector<double>& ys) {
    const auto k = xs.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < k; ++i) {
        const double lx = std::log(xs[i]);
        const double ly = std::log(ys[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double kd = static_cast<double>(k);
    return (kd * sxy - sx * sy) / (kd * sxx - sx * sx);
}

const SummaryStat& stat_of(const ExperimentResult& result, Aggregate a) {
    for (const auto& s : result.stats) {
        if (s.name == aggregate_name(a)) return s;
    }
    throw ParameterError("requested aggregate missing from result");
}

// ---------------------------------------------------------------------------
// Criterion 1: whitened GLS risk E|Sigma^{-1/2} X (beta_hat - beta)|^2 = d
// ---------------------------------------------------------------------------

CheckResult criterion_1() {
    const RegModelParams params{.d = 8, .n = 400, .m = 400, .tau = 1.0, .noise_sigma2 = 1.0};
    const int trials = 2000;
    const auto acc = monte_carlo(trials, RngSeed{0xACC001, 0}, [&](RngSeed seed) {
        const auto inst = models::sample_reg_instance(params, substream(seed, 0));
        const auto ds = models::sample_reg_dataset(params, inst, substream(seed, 1));
        const estimators::SigmaInverse inv(ds.x_pub(), params.tau, params.noise_sigma2, params.n);
        const VectorXd beta_hat = estimators::gls_estimate(ds.x, ds.y, inv);
        const VectorXd r = ds.x * (beta_hat - inst.beta_priv);
        return r.dot(inv.apply(r));
    });
    const double target = params.d;
    const double tol = std::max(0.05 * target, 3.0 * acc.stderr_of_mean());
    const bool pass = std::abs(acc.mean() - target) <= tol;
    return {"c1_gls_whitened_risk", pass,
            fmt("mean=%.4f target=%.1f tol=%.4f stderr=%.4f trials=%d", acc.mean(), target, tol,
                acc.stderr_of_mean(), trials)};
}

// ---------------------------------------------------------------------------
// Criterion 2: OLS projected risk E|X(beta_hat - beta)|^2 = sigma^2 d
// ---------------------------------------------------------------------------

CheckResult criterion_2() {
    bool pass = true;
    std::string detail;
    for (double sigma2 : {1.0, 4.0}) {
        const RegModelParams params{.d = 5, .n = 500, .m = 0, .tau = 0.0, .noise_sigma2 = sigma2};
        const auto acc = monte_carlo(2000, RngSeed{0xACC002, static_cast<std::uint64_t>(sigma2)},
                                     [&](RngSeed seed) {
                                         const auto inst =
                                             models::sample_reg_instance(params, substream(seed, 0));
                                         const auto ds = models::sample_reg_dataset(
                                             params, inst, substream(seed, 1));
                                         const VectorXd beta_hat = estimators::ols(ds.x, ds.y);
                                         return (ds.x * (beta_hat - inst.beta_priv)).squaredNorm();
                                     });
        const double target = sigma2 * params.d;
        const double tol = std::max(0.05 * target, 3.0 * acc.stderr_of_mean());
        const bool ok = std::abs(acc.mean() - target) <= tol;
        pass = pass && ok;
        detail += fmt("[sigma2=%.0f mean=%.4f target=%.1f tol=%.4f] ", sigma2, acc.mean(), target,
                      tol);
    }
    return {"c2_ols_projected_risk", pass, detail};
}

// ---------------------------------------------------------------------------
// Criterion 3: resampled statistics are a null: E[Z'] = 0, E[(Z')^2] ~ alpha^2
// ---------------------------------------------------------------------------

CheckResult criterion_3() {
    bool pass = true;
    std::string detail;
    for (double tau : {0.0, 0.5}) {
        ExperimentConfig config;
        config.problem = Problem::mean;
        config.mean = MeanModelParams{.d = 10, .n = 50, .m = 50, .tau = tau};
        config.mechanism.kind = mechanisms::MechanismKind::BayesPosterior;
        config.trials = 1250;
        config.zprime_samples = 8; // 1250 * 8 = 1e4 paired draws
        // The zero-mean null covers all rows when tau = 0; under shift it is
        // a statement about private rows (public rows pick up w_pub tau^2).
        config.zprime_private_rows = tau > 0.0;
        config.seed = RngSeed{0xACC003, static_cast<std::uint64_t>(tau * 2)};
        config.outputs = {Aggregate::zprime, Aggregate::zprime_sq, Aggregate::err_l2_sq};
        const auto result = run_experiment(config);
        const auto& zp = stat_of(result, Aggregate::zprime);
        const auto& zp2 = stat_of(result, Aggregate::zprime_sq);
        const auto& err2 = stat_of(result, Aggregate::err_l2_sq);
        const bool null_ok = std::abs(zp.mean) <= 3.0 * zp.stderr_;
        const bool moment_ok = zp2.mean <= 1.2 * err2.mean;
        pass = pass && null_ok && moment_ok;
        detail += fmt("[tau=%.1f mean_zp=%.5f 3se=%.5f draws=%lld zp2=%.4f cap=%.4f] ", tau,
                      zp.mean, 3.0 * zp.stderr_, zp.count, zp2.mean, 1.2 * err2.mean);
    }
    return {"c3_resampled_null", pass, detail};
}

// ---------------------------------------------------------------------------
// Criterion 4: algebraic identities of the statistics
// ---------------------------------------------------------------------------

CheckResult criterion_4() {
    const int instances = 100;
    double worst_a = 0, worst_b = 0, worst_c = 0;
    const RngSeed root{0xACC004, 0};
    for (int i = 0; i < instances; ++i) {
        Rng pick(substream(root, static_cast<std::uint64_t>(i)));
        const int d = 1 + static_cast<int>(pick.next_below(6));
        const int n = 1 + static_cast<int>(pick.next_below(30));
        const int m = 1 + static_cast<int>(pick.next_below(30));
        const double sigma2 = 0.5 + 1.5 * pick.next_unit();
        const double tau = 3.0 * pick.next_unit();

        // (a) tau = 0, kappa = 1 pooled-sum identity
        {
            const MeanModelParams params{.d = d, .n = n, .m = m, .tau = 0.0, .prior_sigma2 = sigma2};
            const auto inst = models::sample_mean_instance(params, substream(root, 1000 + i));
            const auto ds = models::sample_mean_dataset(params, inst, substream(root, 2000 + i));
            VectorXd estimate(d);
            for (int j = 0; j < d; ++j) estimate(j) = inst.mu_priv(j) + pick.next_gaussian();
            const auto trace = fingerprint::mean_statistics(estimate, ds, inst, 1.0);
            const VectorXd pooled = estimators::kappa_weighted_pooled_mean(ds, 1.0);
            const double direct =
                (n + m) * (estimate - inst.mu_priv).dot(pooled - inst.mu_priv);
            worst_a = std::max(worst_a, rel_diff(trace.sum_total, direct));
        }
        // (b) decomposition identity at the sampled tau
        {
            const MeanModelParams params{.d = d, .n = n, .m = m, .tau = tau, .prior_sigma2 = sigma2};
            const auto inst = models::sample_mean_instance(params, substream(root, 3000 + i));
            const auto ds = models::sample_mean_dataset(params, inst, substream(root, 4000 + i));
            VectorXd estimate(d);
            for (int j = 0; j < d; ++j) estimate(j) = inst.mu_priv(j) + pick.next_gaussian();
            const double kappa = bounds::kappa(m, tau, d);
            const auto trace = fingerprint::mean_statistics(estimate, ds, inst, kappa);
            const auto decomp = fingerprint::bayes_decomposition(estimate, ds, inst, params, kappa);
            const double recomposed =
                decomp.pool_size_effective * (decomp.quad_term + decomp.cross_term);
            worst_b = std::max(worst_b, rel_diff(trace.sum_total, recomposed));
        }
        // (c) regression per-row sums vs the vectorized score
        {
            const RegModelParams params{.d = d, .n = n, .m = m, .tau = tau};
            const auto inst = models::sample_reg_instance(params, substream(root, 5000 + i));
            const auto ds = models::sample_reg_dataset(params, inst, substream(root, 6000 + i));
            VectorXd estimate(d);
            for (int j = 0; j < d; ++j) estimate(j) = inst.beta_priv(j) + pick.next_gaussian();
            const auto trace = fingerprint::reg_score_statistics(estimate, ds, inst);
            const double vectorized =
                (estimate - inst.beta_priv)
                    .dot(ds.x.transpose() * ds.y - (ds.x.transpose() * ds.x) * inst.beta_priv);
            worst_c = std::max(worst_c, rel_diff(trace.sum_total, vectorized));
        }
    }
    const bool pass = worst_a <= 1e-10 && worst_b <= 1e-10 && worst_c <= 1e-10;
    return {"c4_fingerprint_identities", pass,
            fmt("worst rel: pooled-sum=%.2e decomposition=%.2e reg-score=%.2e (tol 1e-10)", worst_a,
                worst_b, worst_c)};
}

// ---------------------------------------------------------------------------
// Criterion 5: posterior oracle equivalence + GLS two-route equivalence
// ---------------------------------------------------------------------------

CheckResult criterion_5() {
    const RngSeed root{0xACC005, 0};
    double worst_mean = 0;
    for (int i = 0; i < 100; ++i) {
        Rng pick(substream(root, static_cast<std::uint64_t>(i)));
        const MeanModelParams params{.d = 1 + static_cast<int>(pick.next_below(4)),
                                     .n = 1 + static_cast<int>(pick.next_below(20)),
                                     .m = 1 + static_cast<int>(pick.next_below(20)),
                                     .tau = 5.0 * pick.next_unit(),
                                     .prior_sigma2 = 0.5 + 1.5 * pick.next_unit()};
        const auto inst = models::sample_mean_instance(params, substream(root, 1000 + i));
        const auto ds = models::sample_mean_dataset(params, inst, substream(root, 2000 + i));
        const VectorXd closed_form = estimators::posterior_mean_shifted(ds, params);
        const VectorXd oracle = estimators::joint_gaussian_conditional(
            params, estimators::empirical_mean(ds.x_pub), estimators::empirical_mean(ds.x_priv));
        worst_mean = std::max(worst_mean, rel_diff(closed_form, oracle));
    }
    double worst_gls = 0;
    for (int i = 0; i < 100; ++i) {
        Rng pick(substream(root, 5000 + static_cast<std::uint64_t>(i)));
        RegModelParams params{.d = 2 + static_cast<int>(pick.next_below(4)),
                              .n = 20 + static_cast<int>(pick.next_below(41)),
                              .m = 20 + static_cast<int>(pick.next_below(41)),
                              .tau = std::exp(std::log(0.05) +
                                              std::log(10.0 / 0.05) * pick.next_unit()),
                              .noise_sigma2 = 0.5 + 1.5 * pick.next_unit()};
        params.prior_precision_b = 0.05 + 1.95 * pick.next_unit();
        if (i % 10 == 0) params.tau = 0.0; // exercise the short-circuit too
        const auto inst = models::sample_reg_instance(params, substream(root, 6000 + i));
        const auto ds = models::sample_reg_dataset(params, inst, substream(root, 7000 + i));
        const estimators::SigmaInverse inv(ds.x_pub(), params.tau, params.noise_sigma2, params.n);
        const VectorXd direct =
            estimators::gls_posterior_mean(ds.x, ds.y, inv, params.prior_precision());
        const VectorXd restated = estimators::reg_posterior_via_M_m(ds, params);
        worst_gls = std::max(worst_gls, rel_diff(direct, restated));
    }
    const bool pass = worst_mean <= 1e-8 && worst_gls <= 1e-9;
    return {"c5_posterior_oracle_equivalence", pass,
            fmt("worst rel: mean-oracle=%.2e (tol 1e-8) gls-two-route=%.2e (tol 1e-9)", worst_mean,
                worst_gls)};
}

// ---------------------------------------------------------------------------
// Criterion 6: structured Sigma^{-1} vs dense inverse
// ---------------------------------------------------------------------------

CheckResult criterion_6() {
    const int n = 20, m = 40, d = 4;
    const RngSeed root{0xACC006, 0};
    double worst = 0;
    int step = 0;
    for (double tau : {0.1, 1.0, 10.0}) {
        Rng pick(substream(root, static_cast<std::uint64_t>(step++)));
        MatrixXd x_pub(m, d);
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < d; ++j) x_pub(i, j) = pick.next_gaussian();
        }
        const double sigma2 = 1.3;
        const auto cov = estimators::GlsCovariance::build(x_pub, tau, sigma2, d, n + m);
        const estimators::SigmaInverse inv(x_pub, tau, sigma2, n);
        const MatrixXd dense_inverse = cov.dense().inverse(); // dense oracle
        MatrixXd structured(n + m, n + m);
        for (int j = 0; j < n + m; ++j) {
            VectorXd e = VectorXd::Zero(n + m);
            e(j) = 1.0;
            structured.col(j) = inv.apply(e);
        }
        worst = std::max(worst,
                         (structured - dense_inverse).norm() / dense_inverse.norm());
    }
    return {"c6_woodbury_vs_dense", worst <= 1e-9,
            fmt("worst relative Frobenius diff=%.2e (tol 1e-9, m=%d d=%d tau in {0.1,1,10})", worst,
                m, d)};
}

// ---------------------------------------------------------------------------
// Criterion 7: lower-bound floor and closed form of the statistic sum
// ---------------------------------------------------------------------------

CheckResult criterion_7() {
    ExperimentConfig config;
    config.problem = Problem::mean;
    config.mean = MeanModelParams{.d = 10, .n = 50, .m = 50, .tau = 0.0, .prior_sigma2 = 1.0};
    config.mechanism.kind = mechanisms::MechanismKind::BayesPosterior;
    config.trials = 5000;
    config.seed = RngSeed{0xACC007, 0};
    config.outputs = {Aggregate::sum_total};
    const auto result = run_experiment(config);
    const auto& st = stat_of(result, Aggregate::sum_total);
    const double big_n = config.mean.n + config.mean.m;
    const double target = config.mean.d * big_n / (big_n + 1.0); // d * N sigma^2/(N sigma^2 + 1)
    const bool closed_form_ok = std::abs(st.mean - target) <= 3.0 * st.stderr_;
    const bool floor_ok = st.mean >= 0.8 * config.mean.d;
    return {"c7_sum_statistic_floor", closed_form_ok && floor_ok,
            fmt("mean=%.4f target=%.4f 3se=%.4f floor=%.1f", st.mean, target, 3.0 * st.stderr_,
                0.8 * config.mean.d)};
}

// ---------------------------------------------------------------------------
// Criterion 8: DP suppression of the private statistic sum across eps
// ---------------------------------------------------------------------------

CheckResult criterion_8() {
    ExperimentConfig base;
    base.problem = Problem::mean;
    base.mean = MeanModelParams{.d = 10, .n = 1000, .m = 0, .tau = 0.0, .prior_sigma2 = 1.0};
    base.mechanism.kind = mechanisms::MechanismKind::GaussianMechMean;
    base.mechanism.budget.delta = 1e-5;
    base.trials = 5000;
    base.seed = RngSeed{0xACC008, 0};
    base.outputs = {Aggregate::sum_priv, Aggregate::err_l2};
    const std::vector<double> eps_grid{0.25, 0.5, 1.0, 2.0};
    const auto rows = run_sweep(base, SweepAxis::eps, eps_grid);

    std::vector<double> means, stderrs, normalized;
    for (const auto& row : rows) {
        const auto& sp = stat_of(row.result, Aggregate::sum_priv);
        const auto& alpha = stat_of(row.result, Aggregate::err_l2);
        means.push_back(sp.mean);
        stderrs.push_back(sp.stderr_);
        normalized.push_back(sp.mean / (base.mean.n * alpha.mean));
    }
    bool increasing = true;
    for (std::size_t i = 1; i < means.size(); ++i) {
        increasing = increasing && means[i] > means[i - 1];
    }
    const double separation = means.back() - means.front();
    const double combined = std::hypot(stderrs.front(), stderrs.back());
    const bool separated = separation >= 3.0 * combined;
    const double slope = slope_loglog(eps_grid, normalized);
    const bool slope_ok = slope >= 0.6 && slope <= 1.4;
    const bool pass = increasing && separated && slope_ok;
    std::string detail = fmt("means=[%.3f %.3f %.3f %.3f] increasing=%d sep=%.3f need>=%.3f "
                             "slope=%.3f in [0.6,1.4]=%d",
                             means[0], means[1], means[2], means[3], increasing ? 1 : 0, separation,
                             3.0 * combined, slope, slope_ok ? 1 : 0);
    return {"c8_dp_suppression", pass, detail};
}

// ---------------------------------------------------------------------------
// Criterion 9: posterior-gap scaling against the effective pool size
// ---------------------------------------------------------------------------

CheckResult criterion_9() {
    const int d = 5;
    const std::vector<double> pools{50, 100, 200, 400};
    std::vector<double> means;
    for (double pool : pools) {
        const int n = static_cast<int>(pool) / 2;
        const int m = static_cast<int>(pool); // kappa = 2 makes m/kappa = pool/2
        ExperimentConfig config;
        config.problem = Problem::mean;
        config.mean = MeanModelParams{
            .d = d, .n = n, .m = m, .tau = std::sqrt(static_cast<double>(d) / m)};
        config.mechanism.kind = mechanisms::MechanismKind::BayesPosterior;
        config.trials = 5000;
        config.seed = RngSeed{0xACC009, static_cast<std::uint64_t>(pool)};
        config.outputs = {Aggregate::posterior_gap};
        const auto result = run_experiment(config);
        means.push_back(stat_of(result, Aggregate::posterior_gap).mean);
    }
    const double slope = slope_loglog(pools, means);
    const bool pass = slope >= -3.5 && slope <= -2.5;
    return {"c9_posterior_concentration_scaling", pass,
            fmt("slope=%.3f window=[-3.5,-2.5] means=[%.3e %.3e %.3e %.3e]", slope, means[0],
                means[1], means[2], means[3])};
}

// ---------------------------------------------------------------------------
// Criterion 10: regime transition of the Bayes mechanism across tau
// ---------------------------------------------------------------------------

CheckResult criterion_10() {
    const int d = 10, n = 100, m = 1000;
    const int trials = 10000;
    const RngSeed root{0xACC010, 0}; // shared across runs: common random numbers
    const double tau_star = std::sqrt(static_cast<double>(d) / m);

    auto bayes_error = [&](int m_rows, double tau) {
        ExperimentConfig config;
        config.problem = Problem::mean;
        config.mean = MeanModelParams{.d = d, .n = n, .m = m_rows, .tau = tau};
        config.mechanism.kind = mechanisms::MechanismKind::BayesPosterior;
        config.trials = trials;
        config.seed = root;
        config.outputs = {Aggregate::err_l2_sq};
        return stat_of(run_experiment(config), Aggregate::err_l2_sq).mean;
    };

    std::vector<double> taus;
    for (int i = 0; i < 7; ++i) {
        taus.push_back(tau_star * std::pow(10.0, -1.0 + 2.0 * i / 6.0)); // 0.1x .. 10x
    }
    std::vector<double> errors;
    errors.reserve(taus.size());
    for (double tau : taus) errors.push_back(bayes_error(m, tau));
    const double err_private_only = bayes_error(0, 0.0);
    const double err_pooled = bayes_error(m, 0.0);

    const double gap_large = std::abs(errors.back() - err_private_only) / err_private_only;
    const double gap_small = std::abs(errors.front() - err_pooled) / err_pooled;

    bool weights_monotone = true;
    double prev = std::numeric_limits<double>::infinity();
    for (double tau : taus) {
        const MeanModelParams params{.d = d, .n = n, .m = m, .tau = tau};
        const double w_pub = estimators::posterior_weights_mean(params).w_pub;
        weights_monotone = weights_monotone && w_pub < prev;
        prev = w_pub;
    }
    const bool pass = gap_large <= 0.10 && gap_small <= 0.10 && weights_monotone;
    return {"c10_regime_transition", pass,
            fmt("large-shift gap=%.3f%% small-shift gap=%.3f%% (tol 10%%) w_pub monotone=%d",
                100 * gap_large, 100 * gap_small, weights_monotone ? 1 : 0)};
}

// ---------------------------------------------------------------------------
// Criterion 11: extreme-eigenvalue tail audit for Wishart designs
// ---------------------------------------------------------------------------

CheckResult criterion_11() {
    const int N = 300, d = 3, draws = 1000;
    const double lower = 0.63 * N;
    const double upper = bounds::eigval_tail(N, d, 0.1, bounds::Tail::max).threshold;
    int below = 0, above = 0;
    const RngSeed root{0xACC011, 0};
    for (int t = 0; t < draws; ++t) {
        Rng rng(substream(root, static_cast<std::uint64_t>(t)));
        MatrixXd x(N, d);
        for (int i = 0; i < N; ++i) {
            for (int j = 0; j < d; ++j) x(i, j) = rng.next_gaussian();
        }
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(x.transpose() * x, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < lower) ++below;
        if (es.eigenvalues().maxCoeff() > upper) ++above;
    }
    const double frac_below = static_cast<double>(below) / draws;
    const double frac_above = static_cast<double>(above) / draws;
    const bool pass = frac_below <= 0.01 && frac_above <= 0.01;
    return {"c11_eigenvalue_tails", pass,
            fmt("P[lmin<%.0f]=%.4f P[lmax>%.1f]=%.4f (tol 0.01 each, %d draws)", lower, frac_below,
                upper, frac_above, draws)};
}

// ---------------------------------------------------------------------------
// Statistical audits beyond the numbered criteria (full level)
// ---------------------------------------------------------------------------

CheckResult check_quad_term_mean() {
    // mean of |Xbar - mu|^2 is d / (n + m/kappa); kappa = 2 at tau = sqrt(d/m)
    ExperimentConfig config;
    config.problem = Problem::mean;
    config.mean = MeanModelParams{.d = 10, .n = 100, .m = 100, .tau = std::sqrt(10.0 / 100.0)};
    config.mechanism.kind = mechanisms::MechanismKind::BayesPosterior;
    config.trials = 5000;
    config.seed = RngSeed{0xAD0004, 0};
    config.outputs = {Aggregate::quad_term};
    const auto& quad = stat_of(run_experiment(config), Aggregate::quad_term);
    const double kappa = bounds::kappa(config.mean.m, config.mean.tau, config.mean.d);
    const double target = config.mean.d / (config.mean.n + config.mean.m / kappa);
    const bool pass = std::abs(quad.mean - target) <= 0.10 * target;
    return {"quad_term_pool_variance", pass,
            fmt("mean=%.5f target=%.5f (tol 10%%)", quad.mean, target)};
}

CheckResult check_gls_unbiasedness() {
    const RegModelParams params{.d = 4, .n = 150, .m = 150, .tau = 1.0};
    const int trials = 2000;
    std::vector<RunningStat> coords(params.d);
    std::vector<VectorXd> diffs(trials);
#pragma omp parallel for schedule(dynamic)
    for (int t = 0; t < trials; ++t) {
        const RngSeed seed = substream(RngSeed{0xAD0001, 4}, static_cast<std::uint64_t>(t));
        const auto inst = models::sample_reg_instance(params, substream(seed, 0));
        const auto ds = models::sample_reg_dataset(params, inst, substream(seed, 1));
        const estimators::SigmaInverse inv(ds.x_pub(), params.tau, params.noise_sigma2, params.n);
        diffs[static_cast<std::size_t>(t)] = estimators::gls_estimate(ds.x, ds.y, inv) - inst.beta_priv;
    }
    for (const auto& diff : diffs) {
        for (int j = 0; j < params.d; ++j) coords[static_cast<std::size_t>(j)].push(diff(j));
    }
    bool pass = true;
    double worst_t = 0;
    for (const auto& acc : coords) {
        const double tstat = std::abs(acc.mean()) / acc.stderr_of_mean();
        worst_t = std::max(worst_t, tstat);
        pass = pass && tstat <= 3.0;
    }
    return {"gls_unbiasedness", pass, fmt("worst |mean|/stderr=%.2f (tol 3)", worst_t)};
}

CheckResult check_zprime_stderr_meta() {
    int covered = 0;
    const int reps = 100;
    for (int r = 0; r < reps; ++r) {
        ExperimentConfig config;
        config.problem = Problem::mean;
        config.mean = MeanModelParams{.d = 5, .n = 20, .m = 20, .tau = 0.0};
        config.mechanism.kind = mechanisms::MechanismKind::BayesPosterior;
        config.trials = 50;
        config.zprime_samples = 4;
        config.seed = RngSeed{0xAD0002, static_cast<std::uint64_t>(r)};
        config.outputs = {Aggregate::zprime};
        const auto& zp = stat_of(run_experiment(config), Aggregate::zprime);
        if (std::abs(zp.mean) <= 3.0 * zp.stderr_) ++covered;
    }
    return {"zprime_stderr_meta", covered >= 95,
            fmt("3-stderr interval covered 0 in %d/100 repeats (need >= 95)", covered)};
}

CheckResult check_dp_indistinguishability_audit() {
    const int param_draws = 20;
    const int trials = 2000;
    int satisfied = 0;
    for (int r = 0; r < param_draws; ++r) {
        Rng pick(substream(RngSeed{0xAD0003, 0}, static_cast<std::uint64_t>(r)));
        const MeanModelParams params{.d = 2 + static_cast<int>(pick.next_below(7)),
                                     .n = 100 + static_cast<int>(pick.next_below(301)),
                                     .m = static_cast<int>(pick.next_below(201)),
                                     .tau = pick.next_unit()};
        mechanisms::MechanismSpec spec;
        spec.kind = mechanisms::MechanismKind::GaussianMechMean;
        spec.budget.eps = 0.25 + 0.75 * pick.next_unit();
        spec.budget.delta = std::pow(10.0, -6.0 + 2.0 * pick.next_unit());
        RunningStat a, abs_a, sq_a, b, sq_b;
        for (int t = 0; t < trials; ++t) {
            const RngSeed seed =
                substream(RngSeed{0xAD0003, 1000 + static_cast<std::uint64_t>(r)},
                          static_cast<std::uint64_t>(t));
            const auto inst = models::sample_mean_instance(params, substream(seed, 0));
            const auto ds = models::sample_mean_dataset(params, inst, substream(seed, 1));
            const auto out = mechanisms::estimate_mean(spec, ds, params, substream(seed, 2));
            const double z0 = (out.estimate - inst.mu_priv)
                                  .dot(ds.x_priv.row(0).transpose() - inst.mu_priv);
            const double z0p = fingerprint::resampled_statistic(spec, ds, inst, params, 0,
                                                                substream(seed, 3));
            a.push(z0);
            abs_a.push(std::abs(z0));
            sq_a.push(z0 * z0);
            b.push(z0p);
            sq_b.push(z0p * z0p);
        }
        const double bound = bounds::dp_indistinguishability_bound(
            abs_a.mean(), sq_a.mean(), sq_b.mean(), spec.budget.eps, spec.budget.delta);
        if (std::abs(a.mean() - b.mean()) <= bound) ++satisfied;
    }
    return {"dp_indistinguishability_audit", satisfied >= static_cast<int>(0.95 * param_draws),
            fmt("moment bound held for %d/%d parameter draws (need >= 19)", satisfied,
                param_draws)};
}

CheckResult check_eigval_brackets() {
    // lower threshold >= 0.63 z always; upper <= 1.44 z once z > 100 d
    double worst_low = 1.0, worst_high = 0.0;
    for (int d = 1; d <= 10; ++d) {
        for (int mult = 101; mult <= 104; ++mult) {
            const double z = static_cast<double>(mult) * d;
            const auto lo = bounds::eigval_tail(z, d, 0.1, bounds::Tail::min);
            const auto hi = bounds::eigval_tail(z, d, 0.1, bounds::Tail::max);
            worst_low = std::min(worst_low, lo.threshold / z);
            worst_high = std::max(worst_high, hi.threshold / z);
        }
    }
    const bool pass = worst_low >= 0.63 && worst_high <= 1.44;
    return {"eigval_threshold_brackets", pass,
            fmt("min threshold/z >= %.4f (need 0.63); max threshold/z <= %.4f (need 1.44)",
                worst_low, worst_high)};
}

// ---------------------------------------------------------------------------
// Fast-level identity and collapse checks
// ---------------------------------------------------------------------------

CheckResult check_collapse_mean_upper_bound() {
    bool pass = true;
    for (double n : {10.0, 100.0}) {
        for (double m : {4.0, 400.0}) {
            const double shifted = bounds::mean_upper_bound(n, m, 4, 0.0, 1.0, 0.5, 1.0);
            const double unshifted = n * 1.0 * 0.5 + 0.5 * std::sqrt(m * 4);
            pass = pass && shifted == unshifted;
        }
    }
    const double example = bounds::mean_upper_bound(100, 400, 4, 0.0, 1.0, 0.5, 1.0);
    pass = pass && example == 70.0;
    return {"collapse_mean_upper_bound", pass, fmt("tau=0 arithmetic example=%.1f (want 70)", example)};
}

CheckResult check_collapse_posterior_concentration() {
    bool pass = true;
    for (double n : {10.0, 200.0}) {
        for (double m : {10.0, 300.0}) {
            const double shifted = bounds::posterior_concentration_bound(n, m, 6, 0.0);
            const double pool = n + m;
            pass = pass && shifted == 6.0 / (pool * pool * pool);
        }
    }
    const double example = bounds::posterior_concentration_bound(10, 10, 1, std::sqrt(1.0 / 10));
    pass = pass && rel_diff(example, 1.0 / (15.0 * 15.0 * 15.0)) < 1e-12;
    return {"collapse_posterior_concentration", pass, fmt("kappa=2 example=%.6e (want 1/3375)", example)};
}

CheckResult check_reg_upper_bound_shape() {
    const double md = bounds::reg_upper_bound_radicand(400, 4, 0.0, 1.0);
    bool pass = md == 1600.0; // tau = 0 collapse, exact
    const double far = bounds::reg_upper_bound_radicand(400, 4, 1e9, 1.0);
    pass = pass && far >= 0.0 && far <= 1600.0 && far < 1e-4 * 1600.0;
    // radicand decays monotonically as tau grows
    double prev = md;
    bool monotone = true;
    for (double tau = 0.01; tau <= 1e4; tau *= 4.0) {
        const double cur = bounds::reg_upper_bound_radicand(400, 4, tau, 1.0);
        monotone = monotone && cur <= prev + 1e-12;
        prev = cur;
    }
    pass = pass && monotone;
    const double at_zero = bounds::reg_upper_bound(100, 400, 4, 1e9, 1.0, 0.5, 1.0);
    pass = pass && std::abs(at_zero - 100 * 0.5) / 50.0 < 1e-3; // only the private term survives
    return {"reg_upper_bound_limits", pass,
            fmt("radicand: tau=0 -> %.0f, tau=1e9 -> %.3e, monotone=%d", md, far, monotone ? 1 : 0)};
}

CheckResult check_kappa_and_gamma() {
    bool pass = true;
    for (int d = 1; d <= 8; ++d) {
        for (int m : {3, 10, 77, 1000}) {
            const double k = bounds::kappa(m, std::sqrt(static_cast<double>(d) / m), d);
            pass = pass && std::abs(k - 2.0) < 1e-12;
        }
    }
    pass = pass && bounds::kappa(100, 0.2, 4) == 2.0;
    pass = pass && std::isinf(bounds::gamma_tau(0.0, 4, 100, 1.0));
    pass = pass && bounds::gamma_tau(2.0, 4, 100, 1.0) == 101.0;
    double prev = std::numeric_limits<double>::infinity();
    for (double tau = 0.1; tau < 1e3; tau *= 3) {
        const double g = bounds::gamma_tau(tau, 4, 100, 1.0);
        pass = pass && g < prev;
        prev = g;
    }
    pass = pass && std::abs(bounds::gamma_tau(1e9, 4, 100, 1.0) - 100.0) < 1e-6;
    return {"kappa_gamma_formulas", pass, "kappa(tau*)=2, gamma limits and monotonicity"};
}

CheckResult check_regime_rules() {
    bool pass = true;
    pass = pass && bounds::classify_regime({.d = 100, .n = 10, .m = 100, .tau = 2.0}).regime ==
                       bounds::Regime::large_shift;
    pass = pass && bounds::classify_regime({.d = 100, .n = 10, .m = 100, .tau = 0.0}).regime ==
                       bounds::Regime::small_shift;
    const double thr = std::sqrt(100.0 / 100.0);
    pass = pass && bounds::classify_regime({.d = 100, .n = 10, .m = 100, .tau = thr}).regime ==
                       bounds::Regime::small_shift; // boundary goes small
    return {"regime_classification", pass, "threshold sqrt(d/m), boundary -> small_shift"};
}

CheckResult check_posterior_weight_limits() {
    bool pass = true;
    const MeanModelParams unit{.d = 1, .n = 1, .m = 1, .tau = 0.0, .prior_sigma2 = 1.0};
    const auto w = estimators::posterior_weights_mean(unit);
    pass = pass && rel_diff(w.w_priv, 1.0 / 3.0) < 1e-12 && rel_diff(w.w_pub, 1.0 / 3.0) < 1e-12;

    const MeanModelParams a{.d = 3, .n = 7, .m = 19, .tau = 0.0};
    const MeanModelParams b{.d = 3, .n = 19, .m = 7, .tau = 0.0};
    const auto wa = estimators::posterior_weights_mean(a);
    const auto wb = estimators::posterior_weights_mean(b);
    pass = pass && rel_diff(wa.w_priv, wb.w_pub) < 1e-12 && rel_diff(wa.w_pub, wb.w_priv) < 1e-12;

    const MeanModelParams far{.d = 1, .n = 10, .m = 10, .tau = 1e9};
    pass = pass && estimators::posterior_weights_mean(far).w_pub < 1e-8;

    double prev = std::numeric_limits<double>::infinity();
    bool monotone = true;
    for (double tau = 0.0; tau <= 64.0; tau = tau == 0.0 ? 0.125 : tau * 2) {
        const MeanModelParams p{.d = 4, .n = 30, .m = 60, .tau = tau};
        const auto wt = estimators::posterior_weights_mean(p);
        pass = pass && wt.w_priv > 0 && wt.w_priv < 1 && wt.w_pub > 0 && wt.w_pub < 1;
        monotone = monotone && wt.w_pub < prev;
        prev = wt.w_pub;
    }
    pass = pass && monotone;
    return {"posterior_weight_limits", pass, "1/3 case, swap symmetry, w_pub -> 0 monotone in tau"};
}

CheckResult check_sigma_paths_agree() {
    Rng rng(RngSeed{0xFA57, 3});
    const int n = 30, m = 50, d = 5;
    MatrixXd x_pub(m, d);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < d; ++j) x_pub(i, j) = rng.next_gaussian();
    }
    const auto cov = estimators::GlsCovariance::build(x_pub, 0.8, 1.7, d, n + m);
    double worst = 0;
    for (int k = 0; k < 50; ++k) {
        VectorXd z(n + m);
        for (int i = 0; i < n + m; ++i) z(i) = rng.next_gaussian();
        worst = std::max(worst, rel_diff(VectorXd(cov.dense() * z), cov.apply_structured(z)));
    }
    return {"sigma_dense_vs_structured", worst <= 1e-10,
            fmt("worst rel diff over 50 vectors=%.2e (tol 1e-10)", worst)};
}

CheckResult check_sigma_inverse_identity() {
    Rng rng(RngSeed{0xFA57, 4});
    const int n = 50, m = 100, d = 8;
    MatrixXd x_pub(m, d);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < d; ++j) x_pub(i, j) = rng.next_gaussian();
    }
    const auto cov = estimators::GlsCovariance::build(x_pub, 1.0, 1.0, d, n + m);
    const estimators::SigmaInverse inv(x_pub, 1.0, 1.0, n);
    double worst = 0;
    for (int k = 0; k < 100; ++k) {
        VectorXd z(n + m);
        for (int i = 0; i < n + m; ++i) z(i) = rng.next_gaussian();
        worst = std::max(worst, (cov.apply_structured(inv.apply(z)) - z).norm() /
                                    std::max(1.0, z.norm()));
    }
    return {"sigma_inverse_identity", worst <= 1e-9,
            fmt("worst |Sigma Sigma^-1 z - z|/|z|=%.2e (tol 1e-9)", worst)};
}

CheckResult check_gls_tau0_equals_ols() {
    const RegModelParams params{.d = 5, .n = 60, .m = 60, .tau = 0.0, .noise_sigma2 = 2.0};
    const auto inst = models::sample_reg_instance(params, RngSeed{0xFA57, 5});
    const auto ds = models::sample_reg_dataset(params, inst, RngSeed{0xFA57, 6});
    const estimators::SigmaInverse inv(ds.x_pub(), 0.0, params.noise_sigma2, params.n);
    const double diff =
        rel_diff(estimators::gls_estimate(ds.x, ds.y, inv), estimators::ols(ds.x, ds.y));
    return {"gls_tau0_equals_ols", diff <= 1e-9, fmt("rel diff=%.2e (tol 1e-9)", diff)};
}

CheckResult check_effective_public_fraction() {
    const double d = 10, n = 100, m = 1000;
    double prev = 1.0;
    bool monotone = true;
    for (int i = 0; i <= 20; ++i) {
        const double tau = std::sqrt(d / m) * std::pow(10.0, -2.0 + 4.0 * i / 20.0);
        const double kappa = bounds::kappa(m, tau, d);
        const double frac = (m / kappa) / (n + m / kappa);
        monotone = monotone && frac < prev;
        prev = frac;
    }
    return {"effective_public_fraction_monotone", monotone,
            "(m/kappa)/(n + m/kappa) decreasing over a log tau grid"};
}

// ---------------------------------------------------------------------------

std::vector<CheckResult> fast_checks() {
    return {
        criterion_4(),
        criterion_5(),
        criterion_6(),
        check_collapse_mean_upper_bound(),
        check_collapse_posterior_concentration(),
        check_reg_upper_bound_shape(),
        check_kappa_and_gamma(),
        check_regime_rules(),
        check_posterior_weight_limits(),
        check_sigma_paths_agree(),
        check_sigma_inverse_identity(),
        check_gls_tau0_equals_ols(),
        check_effective_public_fraction(),
    };
}

} // namespace

bool VerifyReport::all_pass() const {
    for (const auto& check : checks) {
        if (!check.pass) return false;
    }
    return true;
}

CheckResult run_acceptance_criterion(int k, std::ostream* progress) {
    if (progress) {
        *progress << "running acceptance criterion " << k << "...\n" << std::flush;
    }
    switch (k) {
        case 1: return criterion_1();
        case 2: return criterion_2();
        case 3: return criterion_3();
        case 4: return criterion_4();
        case 5: return criterion_5();
        case 6: return criterion_6();
        case 7: return criterion_7();
        case 8: return criterion_8();
        case 9: return criterion_9();
        case 10: return criterion_10();
        case 11: return criterion_11();
        case 12: {
            const auto t0 = std::chrono::steady_clock::now();
            const auto fast = verify_suite(VerifyLevel::fast);
            const double fast_seconds = fast.seconds;
            bool covers = true;
            for (const char* needed : {"c4_fingerprint_identities", "c5_posterior_oracle_equivalence",
                                       "c6_woodbury_vs_dense", "collapse_mean_upper_bound",
                                       "collapse_posterior_concentration"}) {
                bool found = false;
                for (const auto& check : fast.checks) found = found || check.name == needed;
                covers = covers && found;
            }
            for (int i = 1; i <= 11; ++i) {
                (void)run_acceptance_criterion(i, progress);
            }
            const double full_seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            const bool pass =
                covers && fast.all_pass() && fast_seconds < 60.0 && full_seconds < 1800.0;
            return {"c12_suite_budget", pass,
                    fmt("fast=%.2fs (<60, all_pass=%d) criteria 1-11=%.1fs (<1800) coverage=%d",
                        fast_seconds, fast.all_pass() ? 1 : 0, full_seconds, covers ? 1 : 0)};
        }
        default:
            throw ParameterError("acceptance criterion index must be in 1..12");
    }
}

VerifyReport verify_suite(VerifyLevel level, std::ostream* progress) {
    const auto t0 = std::chrono::steady_clock::now();
    VerifyReport report;
    auto add = [&](CheckResult check) {
        if (progress) {
            *progress << (check.pass ? "PASS " : "FAIL ") << check.name << " — " << check.detail
                      << '\n'
                      << std::flush;
        }
        report.checks.push_back(std::move(check));
    };

    for (auto& check : fast_checks()) add(std::move(check));

    if (level == VerifyLevel::full) {
        for (int k : {1, 2, 3, 7, 8, 9, 10, 11}) {
            add(run_acceptance_criterion(k));
        }
        add(check_quad_term_mean());
        add(check_gls_unbiasedness());
        add(check_zprime_stderr_meta());
        add(check_dp_indistinguishability_audit());
        add(check_eigval_brackets());
    }

    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

} // namespace pubpriv::harness

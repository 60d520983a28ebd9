#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pubpriv/errors.hpp"
#include "pubpriv/estimators.hpp"
#include "pubpriv/models.hpp"
#include "test_support.hpp"

using namespace pubpriv;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using test_support::rel_diff;

namespace {

MatrixXd random_matrix(int rows, int cols, RngSeed seed) {
    Rng rng(seed);
    MatrixXd x(rows, cols);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) x(i, j) = rng.next_gaussian();
    }
    return x;
}

} // namespace

TEST_CASE("empirical mean basics") {
    MatrixXd one(1, 3);
    one << 1.0, -2.0, 0.5;
    CHECK(estimators::empirical_mean(one) == one.row(0).transpose());

    MatrixXd two(2, 2);
    two << 0, 0, 2, 4;
    const VectorXd mean = estimators::empirical_mean(two);
    CHECK(mean(0) == 1.0);
    CHECK(mean(1) == 2.0);

    CHECK_THROWS_AS(estimators::empirical_mean(MatrixXd(0, 2)), EmptyInputError);
}

TEST_CASE("empirical mean concentrates") {
    const models::MeanModelParams params{.d = 4, .n = 100000, .m = 1, .tau = 0.0};
    const auto inst = models::sample_mean_instance(params, RngSeed{61, 0});
    const auto ds = models::sample_mean_dataset(params, inst, RngSeed{61, 1});
    const double err = (estimators::empirical_mean(ds.x_priv) - inst.mu_priv).norm();
    CHECK(err < 3.0 * std::sqrt(static_cast<double>(params.d) / params.n));
}

TEST_CASE("kappa weighted pool") {
    models::MeanDataset ds;
    ds.x_priv = MatrixXd::Constant(1, 1, 2.0);
    ds.x_pub = MatrixXd::Constant(1, 1, 0.0);
    // n = m = 1, kappa = 2: 2 * 1/(1 + 1/2) = 4/3
    CHECK(estimators::kappa_weighted_pooled_mean(ds, 2.0)(0) == doctest::Approx(4.0 / 3.0));

    // kappa = 1 is the plain pool
    models::MeanDataset pool;
    pool.x_priv = random_matrix(3, 2, RngSeed{62, 0});
    pool.x_pub = random_matrix(5, 2, RngSeed{62, 1});
    MatrixXd all(8, 2);
    all << pool.x_priv, pool.x_pub;
    CHECK(rel_diff(estimators::kappa_weighted_pooled_mean(pool, 1.0),
                   estimators::empirical_mean(all)) < 1e-14);

    // no public rows: kappa is irrelevant
    models::MeanDataset priv_only;
    priv_only.x_priv = random_matrix(4, 3, RngSeed{62, 2});
    priv_only.x_pub = MatrixXd(0, 3);
    CHECK(estimators::kappa_weighted_pooled_mean(priv_only, 5.0) ==
          estimators::empirical_mean(priv_only.x_priv));

    models::MeanDataset empty;
    empty.x_priv = MatrixXd(0, 2);
    empty.x_pub = MatrixXd(0, 2);
    CHECK_THROWS_AS(estimators::kappa_weighted_pooled_mean(empty, 1.0), EmptyInputError);
    CHECK_THROWS_AS(estimators::kappa_weighted_pooled_mean(priv_only, 0.5), ParameterError);
}

TEST_CASE("posterior weights refuse a missing source") {
    CHECK_THROWS_AS(estimators::posterior_weights_mean({.d = 2, .n = 0, .m = 5, .tau = 0.0}),
                    DegeneratePathError);
    CHECK_THROWS_AS(estimators::posterior_weights_mean({.d = 2, .n = 5, .m = 0, .tau = 0.0}),
                    DegeneratePathError);
}

TEST_CASE("posterior mean shrinks constants and collapses at tau=0") {
    const models::MeanModelParams params{.d = 2, .n = 4, .m = 6, .tau = 0.0, .prior_sigma2 = 1.0};
    models::MeanDataset ds;
    ds.x_priv = MatrixXd::Constant(params.n, params.d, 3.0);
    ds.x_pub = MatrixXd::Constant(params.m, params.d, 3.0);
    const VectorXd post = estimators::posterior_mean_shifted(ds, params);
    const auto w = estimators::posterior_weights_mean(params);
    CHECK(rel_diff(post(0), (w.w_priv + w.w_pub) * 3.0) < 1e-14);
    CHECK(post(0) < 3.0);
    CHECK(post(0) > 0.0);

    const double big_n = params.n + params.m;
    const double c = big_n * params.prior_sigma2 / (big_n * params.prior_sigma2 + 1.0);
    const VectorXd pooled = estimators::kappa_weighted_pooled_mean(ds, 1.0);
    CHECK(rel_diff(post, VectorXd(c * pooled)) < 1e-10);
}

TEST_CASE("joint gaussian conditional oracle") {
    const models::MeanModelParams params{.d = 1, .n = 1, .m = 1, .tau = 0.0, .prior_sigma2 = 1.0};
    // both observed means at 3 gives pooled shrinkage (2/3) * 3 = 2
    const VectorXd three = VectorXd::Constant(1, 3.0);
    CHECK(estimators::joint_gaussian_conditional(params, three, three)(0) ==
          doctest::Approx(2.0).epsilon(1e-12));

    const VectorXd zero = VectorXd::Zero(1);
    CHECK(estimators::joint_gaussian_conditional(params, zero, zero)(0) == 0.0);
}

TEST_CASE("ols basics") {
    MatrixXd x(2, 1);
    x << 1, 1;
    VectorXd y(2);
    y << 0, 2;
    CHECK(estimators::ols(x, y)(0) == doctest::Approx(1.0)); // scalar average

    // exact recovery without noise
    const MatrixXd design = random_matrix(40, 3, RngSeed{63, 0});
    VectorXd beta(3);
    beta << 0.5, -1.0, 2.0;
    const VectorXd labels = design * beta;
    CHECK(rel_diff(estimators::ols(design, labels), beta) < 1e-8);

    // rank deficiency: duplicated column
    MatrixXd bad(10, 2);
    bad.col(0) = random_matrix(10, 1, RngSeed{63, 1});
    bad.col(1) = bad.col(0);
    CHECK_THROWS_AS(estimators::ols(bad, VectorXd::Zero(10)), SingularDesignError);
    CHECK_THROWS_AS(estimators::ols(MatrixXd(2, 3), VectorXd::Zero(2)), SingularDesignError);
}

TEST_CASE("ridge posterior") {
    MatrixXd x(1, 1);
    x << 1.0;
    VectorXd y(1);
    y << 2.0;
    const auto post = estimators::ridge_posterior(x, y, 1.0, 1.0);
    CHECK(post.precision(0, 0) == 2.0);
    CHECK(post.mean(0) == doctest::Approx(1.0));

    const MatrixXd design = random_matrix(50, 3, RngSeed{64, 0});
    const VectorXd labels = random_matrix(50, 1, RngSeed{64, 1});
    // b -> infinity pins the mean at zero
    CHECK(estimators::ridge_posterior(design, labels, 1.0, 1e14).mean.norm() < 1e-9);
    // b -> 0 recovers least squares
    CHECK(rel_diff(estimators::ridge_posterior(design, labels, 1.0, 1e-12).mean,
                   estimators::ols(design, labels)) < 1e-6);
    CHECK_THROWS_AS(estimators::ridge_posterior(design, labels, 0.0, 1.0), ParameterError);
}

TEST_CASE("covariance structure: private block untouched, tau=0 diagonal") {
    const MatrixXd x_pub = random_matrix(6, 2, RngSeed{65, 0});
    const int n = 4, total = 10;
    const auto cov0 = estimators::GlsCovariance::build(x_pub, 0.0, 2.5, 2, total);
    CHECK(cov0.dense() == MatrixXd(2.5 * MatrixXd::Identity(total, total)));

    const auto cov = estimators::GlsCovariance::build(x_pub, 1.5, 2.5, 2, total);
    const MatrixXd dense = cov.dense();
    CHECK(dense.topLeftCorner(n, n) == MatrixXd(2.5 * MatrixXd::Identity(n, n)));
    CHECK(dense.topRightCorner(n, total - n).isZero(0.0));
}

TEST_CASE("sigma inverse identity and tau=0 short circuit") {
    const MatrixXd x_pub = random_matrix(30, 4, RngSeed{66, 0});
    const int n = 10;
    const estimators::SigmaInverse inv0(x_pub, 0.0, 4.0, n);
    Rng rng(RngSeed{66, 1});
    VectorXd z(40);
    for (int i = 0; i < 40; ++i) z(i) = rng.next_gaussian();
    CHECK(inv0.apply(z) == VectorXd(z / 4.0)); // exact

    const estimators::SigmaInverse inv(x_pub, 0.7, 1.3, n);
    const auto cov = estimators::GlsCovariance::build(x_pub, 0.7, 1.3, 4, 40);
    CHECK((cov.apply_structured(inv.apply(z)) - z).norm() < 1e-9 * z.norm());
}

TEST_CASE("public-block inverse matches the dense public block") {
    const MatrixXd x_pub = random_matrix(25, 3, RngSeed{72, 0});
    const int n = 15;
    const double tau = 0.9, sigma2 = 1.4;
    const estimators::SigmaInverse inv(x_pub, tau, sigma2, n);
    const auto cov = estimators::GlsCovariance::build(x_pub, tau, sigma2, 3, n + 25);
    const MatrixXd pub_block = cov.dense().bottomRightCorner(25, 25);
    const MatrixXd pub_inverse = pub_block.inverse();
    Rng rng(RngSeed{72, 1});
    for (int k = 0; k < 20; ++k) {
        VectorXd z(25);
        for (int i = 0; i < 25; ++i) z(i) = rng.next_gaussian();
        CHECK((inv.apply_public(z) - pub_inverse * z).norm() < 1e-10 * z.norm());
    }
}

TEST_CASE("tampered low-rank update sign makes the inverse check fail") {
    const MatrixXd x_pub = random_matrix(20, 3, RngSeed{67, 0});
    const int n = 5;
    const double sigma2 = 1.0, tau = 1.0;
    const estimators::SigmaInverse inv(x_pub, tau, sigma2, n);
    const auto cov = estimators::GlsCovariance::build(x_pub, tau, sigma2, 3, 25);
    Rng rng(RngSeed{67, 1});
    VectorXd z(25);
    for (int i = 0; i < 25; ++i) z(i) = rng.next_gaussian();

    // flipped-sign variant assembled from the same pieces
    const MatrixXd w = inv.w_matrix();
    VectorXd wrong = z / sigma2;
    wrong.tail(20) += (x_pub * (w * (x_pub.transpose() * z.tail(20)))) / (sigma2 * sigma2);
    const double good_residual = (cov.apply_structured(inv.apply(z)) - z).norm();
    const double bad_residual = (cov.apply_structured(wrong) - z).norm();
    CHECK(good_residual < 1e-9 * z.norm());
    CHECK(bad_residual > 1e-3 * z.norm());
}

TEST_CASE("gls estimate: noiseless recovery and singular surface") {
    models::RegModelParams params{.d = 3, .n = 30, .m = 30, .tau = 0.8, .noise_sigma2 = 1.0};
    const auto inst = models::sample_reg_instance(params, RngSeed{68, 0});
    auto ds = models::sample_reg_dataset(params, inst, RngSeed{68, 1});
    // strip noise and shift: y = X beta_priv exactly
    ds.y = ds.x * inst.beta_priv;
    const estimators::SigmaInverse inv(ds.x_pub(), params.tau, params.noise_sigma2, params.n);
    CHECK((estimators::gls_estimate(ds.x, ds.y, inv) - inst.beta_priv).norm() < 1e-8);

    CHECK_THROWS_AS(
        estimators::gls_estimate(MatrixXd::Zero(2, 3), VectorXd::Zero(2),
                                 estimators::SigmaInverse(MatrixXd(0, 3), 0.0, 1.0, 2)),
        SingularDesignError);
}

TEST_CASE("gls posterior mean limits") {
    models::RegModelParams params{.d = 4, .n = 40, .m = 40, .tau = 1.0, .noise_sigma2 = 1.5};
    const auto inst = models::sample_reg_instance(params, RngSeed{69, 0});
    const auto ds = models::sample_reg_dataset(params, inst, RngSeed{69, 1});
    const estimators::SigmaInverse inv(ds.x_pub(), params.tau, params.noise_sigma2, params.n);

    // b -> 0 approaches pure GLS
    CHECK(rel_diff(estimators::gls_posterior_mean(ds.x, ds.y, inv, 1e-12),
                   estimators::gls_estimate(ds.x, ds.y, inv)) < 1e-6);
    // all-zero labels give the zero vector
    CHECK(estimators::gls_posterior_mean(ds.x, VectorXd::Zero(ds.total()), inv, 0.3).norm() ==
          0.0);
}

TEST_CASE("M/m restatement: tau=0 collapse and no-public reduction") {
    models::RegModelParams params{.d = 3, .n = 50, .m = 20, .tau = 0.0, .noise_sigma2 = 2.0};
    params.prior_precision_b = 0.4;
    const auto inst = models::sample_reg_instance(params, RngSeed{70, 0});
    const auto ds = models::sample_reg_dataset(params, inst, RngSeed{70, 1});

    // tau = 0: (X^T X / s2 + b I)^{-1} X^T y / s2
    const double s2 = params.noise_sigma2;
    const MatrixXd lhs = ds.x.transpose() * ds.x / s2 +
                         params.prior_precision_b * MatrixXd::Identity(params.d, params.d);
    const VectorXd direct = lhs.ldlt().solve(ds.x.transpose() * ds.y / s2);
    CHECK(rel_diff(estimators::reg_posterior_via_M_m(ds, params), direct) < 1e-10);

    // m = 0: S = 0, reduces to the private-only ridge posterior
    models::RegModelParams solo{.d = 3, .n = 50, .m = 0, .tau = 1.0, .noise_sigma2 = 2.0};
    solo.prior_precision_b = 0.4;
    const auto solo_inst = models::sample_reg_instance(solo, RngSeed{70, 2});
    const auto solo_ds = models::sample_reg_dataset(solo, solo_inst, RngSeed{70, 3});
    const auto comps = estimators::gls_components(solo_ds, solo);
    CHECK(comps.S.isZero(0.0));
    const MatrixXd solo_lhs = solo_ds.x.transpose() * solo_ds.x / s2 +
                              solo.prior_precision_b * MatrixXd::Identity(3, 3);
    const VectorXd solo_direct = solo_lhs.ldlt().solve(solo_ds.x.transpose() * solo_ds.y / s2);
    CHECK(rel_diff(estimators::reg_posterior_via_M_m(solo_ds, solo), solo_direct) < 1e-10);
}

TEST_CASE("gls posterior component invariants") {
    models::RegModelParams params{.d = 4, .n = 60, .m = 60, .tau = 0.9, .noise_sigma2 = 1.0};
    const auto inst = models::sample_reg_instance(params, RngSeed{71, 0});
    const auto ds = models::sample_reg_dataset(params, inst, RngSeed{71, 1});
    const auto comps = estimators::gls_components(ds, params);
    CHECK(rel_diff(comps.S, MatrixXd(comps.S.transpose())) < 1e-14);
    CHECK(rel_diff(comps.W, MatrixXd(comps.W.transpose())) < 1e-14);
    // M equals X^T Sigma^{-1} X up to round-off
    const estimators::SigmaInverse inv(ds.x_pub(), params.tau, params.noise_sigma2, params.n);
    MatrixXd whitened(ds.total(), params.d);
    for (int j = 0; j < params.d; ++j) whitened.col(j) = inv.apply(ds.x.col(j));
    CHECK(rel_diff(comps.M, MatrixXd(ds.x.transpose() * whitened)) < 1e-10);
}

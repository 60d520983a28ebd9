#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pubpriv/errors.hpp"
#include "pubpriv/mechanisms.hpp"
#include "test_support.hpp"

using namespace pubpriv;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using test_support::rel_diff;

namespace {

struct MeanFixture {
    models::MeanModelParams params;
    models::MeanInstance instance;
    models::MeanDataset ds;

    explicit MeanFixture(models::MeanModelParams p, RngSeed seed = RngSeed{77, 0}) : params(p) {
        instance = models::sample_mean_instance(params, substream(seed, 0));
        ds = models::sample_mean_dataset(params, instance, substream(seed, 1));
    }
};

} // namespace

TEST_CASE("budget validation") {
    mechanisms::PrivacyBudget ok{1.0, 1e-5};
    ok.validate();
    CHECK(ok.in_small_delta_regime(10));
    CHECK_FALSE(mechanisms::PrivacyBudget{0.1, 0.5}.in_small_delta_regime(10));
    CHECK_THROWS_AS((mechanisms::PrivacyBudget{-1.0, 0.0}.validate()), BudgetError);
    CHECK_THROWS_AS((mechanisms::PrivacyBudget{1.0, 1.0}.validate()), BudgetError);
}

TEST_CASE("kind names round trip") {
    for (auto kind : {mechanisms::MechanismKind::BayesPosterior,
                      mechanisms::MechanismKind::PublicOnlyMean,
                      mechanisms::MechanismKind::GaussianMechMean,
                      mechanisms::MechanismKind::PublicOnlyOls,
                      mechanisms::MechanismKind::GlsPosterior,
                      mechanisms::MechanismKind::GaussianMechReg}) {
        CHECK(mechanisms::parse_kind(mechanisms::kind_name(kind)) == kind);
    }
    CHECK_THROWS_AS(mechanisms::parse_kind("NoSuchMechanism"), ParameterError);
}

TEST_CASE("noise calibration formula") {
    // R=5, n=1000, eps=1, delta=1e-5, unit weight
    const double s = mechanisms::gaussian_noise_scale(5.0, 1000, {1.0, 1e-5});
    CHECK(s == doctest::Approx(0.01 * std::sqrt(2.0 * std::log(1.25e5))).epsilon(1e-12));
    CHECK(s == doctest::Approx(0.04845).epsilon(1e-3));

    // doubling eps halves the scale exactly
    const double s1 = mechanisms::gaussian_noise_scale(3.0, 500, {0.5, 1e-6});
    const double s2 = mechanisms::gaussian_noise_scale(3.0, 500, {1.0, 1e-6});
    CHECK(s1 == 2.0 * s2);
}

TEST_CASE("clipping is a no-op inside the ball") {
    MatrixXd rows(3, 2);
    rows << 0.5, 0.5, -0.25, 0.1, 0.0, -0.9;
    CHECK(mechanisms::clip_and_average(rows, 10.0) == VectorXd(rows.colwise().mean()));
    // and shrinks rows outside it
    MatrixXd big(1, 2);
    big << 30.0, 40.0; // norm 50
    CHECK(mechanisms::clip_and_average(big, 5.0).norm() == doctest::Approx(5.0));
}

TEST_CASE("bayes posterior mechanism matches the estimator") {
    MeanFixture fx({.d = 5, .n = 10, .m = 15, .tau = 0.4});
    mechanisms::MechanismSpec spec;
    spec.kind = mechanisms::MechanismKind::BayesPosterior;
    const auto out = mechanisms::estimate_mean(spec, fx.ds, fx.params, RngSeed{78, 0});
    CHECK(out.estimate == estimators::posterior_mean_shifted(fx.ds, fx.params));
    CHECK(std::isinf(out.declared.eps));
    CHECK_FALSE(out.heuristic_dp);
}

TEST_CASE("public-only mean ignores private rows bitwise") {
    MeanFixture fx({.d = 4, .n = 8, .m = 6, .tau = 0.0});
    mechanisms::MechanismSpec spec;
    spec.kind = mechanisms::MechanismKind::PublicOnlyMean;
    const auto before = mechanisms::estimate_mean(spec, fx.ds, fx.params, RngSeed{79, 0});
    auto perturbed = fx.ds;
    perturbed.x_priv.array() += 123.0;
    const auto after = mechanisms::estimate_mean(spec, perturbed, fx.params, RngSeed{79, 1});
    CHECK(before.estimate == after.estimate);
}

TEST_CASE("gaussian mean mechanism: vanishing noise limit") {
    MeanFixture fx({.d = 3, .n = 50, .m = 20, .tau = 0.2});
    mechanisms::MechanismSpec spec;
    spec.kind = mechanisms::MechanismKind::GaussianMechMean;
    spec.budget = {1e9, 1e-5};
    const auto noisy = mechanisms::estimate_mean(spec, fx.ds, fx.params, RngSeed{80, 0});

    // un-noised clipped mix with the same weights
    const double radius = mechanisms::default_clip_radius(spec.kind, fx.params.d,
                                                          fx.params.prior_sigma2);
    const double s0 = mechanisms::gaussian_noise_scale(radius, fx.params.n, spec.budget);
    const auto w = mechanisms::mean_mix_weights(spec, fx.params, s0 * s0);
    const VectorXd mix = w.w_priv * mechanisms::clip_and_average(fx.ds.x_priv, radius) +
                         w.w_pub * estimators::empirical_mean(fx.ds.x_pub);
    CHECK((noisy.estimate - mix).norm() < 1e-6);
}

TEST_CASE("gaussian mean mechanism requires a real budget") {
    MeanFixture fx({.d = 3, .n = 5, .m = 5, .tau = 0.0});
    mechanisms::MechanismSpec spec;
    spec.kind = mechanisms::MechanismKind::GaussianMechMean;
    spec.budget = {std::numeric_limits<double>::infinity(), 1e-5};
    CHECK_THROWS_AS(mechanisms::estimate_mean(spec, fx.ds, fx.params, RngSeed{81, 0}), BudgetError);
    spec.budget = {1.0, 0.0};
    CHECK_THROWS_AS(mechanisms::estimate_mean(spec, fx.ds, fx.params, RngSeed{81, 1}), BudgetError);
    spec.budget = {1.0, 1e-5};
    spec.clip_radius = -2.0;
    // negative explicit radius falls back is not allowed: <=0 means default,
    // so this one succeeds; force a bad radius through the scale helper
    CHECK_THROWS_AS(mechanisms::gaussian_noise_scale(0.0, 10, spec.budget), ParameterError);
}

TEST_CASE("mechanisms are deterministic given (spec, ds, seed)") {
    MeanFixture fx({.d = 6, .n = 30, .m = 10, .tau = 0.1});
    mechanisms::MechanismSpec spec;
    spec.kind = mechanisms::MechanismKind::GaussianMechMean;
    spec.budget = {1.0, 1e-5};
    const auto a = mechanisms::estimate_mean(spec, fx.ds, fx.params, RngSeed{82, 7});
    const auto b = mechanisms::estimate_mean(spec, fx.ds, fx.params, RngSeed{82, 7});
    CHECK(a.estimate == b.estimate);
    const auto c = mechanisms::estimate_mean(spec, fx.ds, fx.params, RngSeed{82, 8});
    CHECK(a.estimate != c.estimate);
}

TEST_CASE("noise-aware default weights favor private data more as eps grows") {
    const models::MeanModelParams params{.d = 10, .n = 1000, .m = 0, .tau = 0.0};
    mechanisms::MechanismSpec spec;
    spec.kind = mechanisms::MechanismKind::GaussianMechMean;
    double prev = 0.0;
    for (double eps : {0.25, 0.5, 1.0, 2.0}) {
        spec.budget = {eps, 1e-5};
        const double radius =
            mechanisms::default_clip_radius(spec.kind, params.d, params.prior_sigma2);
        const double s0 = mechanisms::gaussian_noise_scale(radius, params.n, spec.budget);
        const double w = mechanisms::mean_mix_weights(spec, params, s0 * s0).w_priv;
        CHECK(w > prev);
        prev = w;
    }
    CHECK(prev < 1.0);
}

TEST_CASE("single-source weights") {
    const models::MeanModelParams priv_only{.d = 4, .n = 20, .m = 0, .tau = 0.0};
    const auto wp = mechanisms::mean_mix_weights({}, priv_only);
    CHECK(wp.w_pub == 0.0);
    CHECK(wp.w_priv == doctest::Approx(20.0 / 21.0));

    const models::MeanModelParams pub_only{.d = 4, .n = 0, .m = 10, .tau = 1.0};
    const auto wq = mechanisms::mean_mix_weights({}, pub_only);
    CHECK(wq.w_priv == 0.0);
    CHECK(wq.w_pub == doctest::Approx(1.0 / (1.0 + 0.25 + 0.1)));
}

// --- regression side -------------------------------------------------------

namespace {

struct RegFixture {
    models::RegModelParams params;
    models::RegInstance instance;
    models::RegDataset ds;

    explicit RegFixture(models::RegModelParams p, RngSeed seed = RngSeed{90, 0}) : params(p) {
        instance = models::sample_reg_instance(params, substream(seed, 0));
        ds = models::sample_reg_dataset(params, instance, substream(seed, 1));
    }
};

} // namespace

TEST_CASE("gls posterior mechanism wraps the estimator") {
    RegFixture fx({.d = 4, .n = 50, .m = 50, .tau = 0.5});
    mechanisms::MechanismSpec spec;
    spec.kind = mechanisms::MechanismKind::GlsPosterior;
    const auto out = mechanisms::estimate_reg(spec, fx.ds, fx.params, RngSeed{91, 0});
    const estimators::SigmaInverse inv(fx.ds.x_pub(), fx.params.tau, fx.params.noise_sigma2,
                                       fx.params.n);
    CHECK(out.estimate ==
          estimators::gls_posterior_mean(fx.ds.x, fx.ds.y, inv, fx.params.prior_precision()));
}

TEST_CASE("public-only OLS surfaces rank deficiency when m < d") {
    RegFixture fx({.d = 5, .n = 30, .m = 3, .tau = 0.0});
    mechanisms::MechanismSpec spec;
    spec.kind = mechanisms::MechanismKind::PublicOnlyOls;
    CHECK_THROWS_AS(mechanisms::estimate_reg(spec, fx.ds, fx.params, RngSeed{92, 0}),
                    SingularDesignError);
}

TEST_CASE("gaussian regression mechanism: vanishing noise and heuristic flag") {
    RegFixture fx({.d = 3, .n = 60, .m = 40, .tau = 0.3});
    mechanisms::MechanismSpec spec;
    spec.kind = mechanisms::MechanismKind::GaussianMechReg;
    spec.budget = {1e9, 1e-5};
    const auto out = mechanisms::estimate_reg(spec, fx.ds, fx.params, RngSeed{93, 0});
    CHECK(out.heuristic_dp);

    const estimators::SigmaInverse inv(fx.ds.x_pub(), fx.params.tau, fx.params.noise_sigma2,
                                       fx.params.n);
    VectorXd base =
        estimators::gls_posterior_mean(fx.ds.x, fx.ds.y, inv, fx.params.prior_precision());
    const double radius = mechanisms::default_clip_radius(spec.kind, fx.params.d, 1.0);
    if (base.norm() > radius) base *= radius / base.norm();
    CHECK((out.estimate - base).norm() < 1e-6);
}

TEST_CASE("gls posterior risk improves with more public data at tau=0") {
    const int trials = 500;
    double prev = std::numeric_limits<double>::infinity();
    for (int m : {200, 400, 800}) {
        const models::RegModelParams params{.d = 4, .n = 50, .m = m, .tau = 0.0};
        double total = 0.0;
        for (int t = 0; t < trials; ++t) {
            const RngSeed seed = substream(RngSeed{94, static_cast<std::uint64_t>(m)}, t);
            const auto inst = models::sample_reg_instance(params, substream(seed, 0));
            const auto ds = models::sample_reg_dataset(params, inst, substream(seed, 1));
            mechanisms::MechanismSpec spec;
            spec.kind = mechanisms::MechanismKind::GlsPosterior;
            const auto out = mechanisms::estimate_reg(spec, ds, params, substream(seed, 2));
            total += (out.estimate - inst.beta_priv).squaredNorm();
        }
        const double risk = total / trials;
        CHECK(risk < prev);
        prev = risk;
    }
}

#include "pubpriv/mechanisms.hpp"

#include <cmath>

#include "pubpriv/errors.hpp"

namespace pubpriv::mechanisms {

void PrivacyBudget::validate() const {
    if (std::isnan(eps) || eps < 0.0) {
        throw BudgetError("privacy budget: eps must be >= 0");
    }
    if (!(delta >= 0.0) || delta >= 1.0) {
        throw BudgetError("privacy budget: delta must lie in [0, 1)");
    }
}

bool PrivacyBudget::in_small_delta_regime(int d) const {
    return delta < eps * eps / static_cast<double>(d);
}

const char* kind_name(MechanismKind kind) {
    switch (kind) {
        case MechanismKind::BayesPosterior: return "BayesPosterior";
        case MechanismKind::PublicOnlyMean: return "PublicOnlyMean";
        case MechanismKind::GaussianMechMean: return "GaussianMechMean";
        case MechanismKind::PublicOnlyOls: return "PublicOnlyOls";
        case MechanismKind::GlsPosterior: return "GlsPosterior";
        case MechanismKind::GaussianMechReg: return "GaussianMechReg";
    }
    throw ParameterError("unknown mechanism kind");
}

MechanismKind parse_kind(const std::string& name) {
    for (MechanismKind kind :
         {MechanismKind::BayesPosterior, MechanismKind::PublicOnlyMean,
          MechanismKind::GaussianMechMean, MechanismKind::PublicOnlyOls,
          MechanismKind::GlsPosterior, MechanismKind::GaussianMechReg}) {
        if (name == kind_name(kind)) {
            return kind;
        }
    }
    throw ParameterError("unknown mechanism kind: " + name);
}

bool is_dp_kind(MechanismKind kind) {
    return kind == MechanismKind::GaussianMechMean || kind == MechanismKind::GaussianMechReg;
}

bool is_mean_kind(MechanismKind kind) {
    return kind == MechanismKind::BayesPosterior || kind == MechanismKind::PublicOnlyMean ||
           kind == MechanismKind::GaussianMechMean;
}

bool is_reg_kind(MechanismKind kind) {
    return kind == MechanismKind::PublicOnlyOls || kind == MechanismKind::GlsPosterior ||
           kind == MechanismKind::GaussianMechReg;
}

double default_clip_radius(MechanismKind kind, int d, double prior_sigma2) {
    if (kind == MechanismKind::GaussianMechMean) {
        return 2.0 * std::sqrt(static_cast<double>(d) * prior_sigma2);
    }
    return 2.0;
}

double gaussian_noise_scale(double clip_radius, int n, const PrivacyBudget& budget) {
    if (!(clip_radius > 0.0)) {
        throw ParameterError("gaussian_noise_scale: clip radius must be > 0");
    }
    if (n < 1) {
        throw ParameterError("gaussian_noise_scale: need n >= 1");
    }
    if (!std::isfinite(budget.eps) || budget.eps <= 0.0 || budget.delta <= 0.0) {
        throw BudgetError("gaussian mechanism: needs finite eps > 0 and delta > 0");
    }
    return (2.0 * clip_radius / n) * std::sqrt(2.0 * std::log(1.25 / budget.delta)) / budget.eps;
}

VectorXd clip_and_average(const Eigen::Ref<const MatrixXd>& rows, double radius) {
    if (rows.rows() == 0) {
        throw EmptyInputError("clip_and_average: no rows");
    }
    if (!(radius > 0.0)) {
        throw ParameterError("clip_and_average: radius must be > 0");
    }
    VectorXd acc = VectorXd::Zero(rows.cols());
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
        const double norm = rows.row(i).norm();
        const double scale = norm > radius ? radius / norm : 1.0;
        acc += scale * rows.row(i).transpose();
    }
    return acc / static_cast<double>(rows.rows());
}

estimators::PosteriorWeights mean_mix_weights(const MechanismSpec& spec,
                                              const models::MeanModelParams& params,
                                              double dp_noise_var) {
    if (spec.mix_weights) {
        return *spec.mix_weights;
    }
    const double s2 = params.prior_sigma2;
    if (params.n == 0 && params.m == 0) {
        throw EmptyInputError("mean_mix_weights: no data");
    }
    if (params.m == 0) {
        const double p = 1.0 / params.n + dp_noise_var;
        return {s2 / (s2 + p), 0.0};
    }
    const double q = params.tau * params.tau / params.d + 1.0 / params.m;
    if (params.n == 0) {
        return {0.0, s2 / (s2 + q)};
    }
    const double p = 1.0 / params.n + dp_noise_var;
    return estimators::posterior_weights_general(s2, q, p);
}

VectorXd bayes_posterior_mean_any(const models::MeanDataset& ds,
                                  const models::MeanModelParams& params) {
    if (params.n >= 1 && params.m >= 1) {
        return estimators::posterior_mean_shifted(ds, params);
    }
    const auto w = mean_mix_weights(MechanismSpec{}, params);
    if (params.m == 0) {
        return w.w_priv * estimators::empirical_mean(ds.x_priv);
    }
    return w.w_pub * estimators::empirical_mean(ds.x_pub);
}

namespace {

void check_mean_shapes(const models::MeanDataset& ds, const models::MeanModelParams& params) {
    params.validate();
    if (ds.x_priv.rows() != params.n || ds.x_pub.rows() != params.m ||
        (params.n > 0 && ds.x_priv.cols() != params.d) ||
        (params.m > 0 && ds.x_pub.cols() != params.d)) {
        throw ShapeError("estimate_mean: dataset does not match params");
    }
}

VectorXd gaussian_vector(int d, double scale, Rng& rng) {
    VectorXd out(d);
    for (int j = 0; j < d; ++j) {
        out(j) = scale * rng.next_gaussian();
    }
    return out;
}

} // namespace

MechanismOutput estimate_mean(const MechanismSpec& spec, const models::MeanDataset& ds,
                              const models::MeanModelParams& params, RngSeed seed) {
    if (!is_mean_kind(spec.kind)) {
        throw ParameterError("estimate_mean: not a mean-estimation mechanism kind");
    }
    check_mean_shapes(ds, params);
    spec.budget.validate();

    MechanismOutput out;
    out.declared = spec.budget;

    switch (spec.kind) {
        case MechanismKind::BayesPosterior: {
            if (spec.mix_weights) {
                const auto w = *spec.mix_weights;
                out.estimate = VectorXd::Zero(params.d);
                if (params.n > 0) out.estimate += w.w_priv * estimators::empirical_mean(ds.x_priv);
                if (params.m > 0) out.estimate += w.w_pub * estimators::empirical_mean(ds.x_pub);
            } else {
                out.estimate = bayes_posterior_mean_any(ds, params);
            }
            return out;
        }
        case MechanismKind::PublicOnlyMean: {
            out.estimate = estimators::empirical_mean(ds.x_pub);
            return out;
        }
        case MechanismKind::GaussianMechMean: {
            if (!std::isfinite(spec.budget.eps) || spec.budget.delta <= 0.0) {
                throw BudgetError("GaussianMechMean: needs finite eps and delta > 0");
            }
            if (params.n < 1) {
                throw ParameterError("GaussianMechMean: needs at least one private row");
            }
            const double radius = spec.clip_radius > 0.0
                                      ? spec.clip_radius
                                      : default_clip_radius(spec.kind, params.d, params.prior_sigma2);
            if (!(radius > 0.0)) {
                throw ParameterError("GaussianMechMean: clip radius must be > 0");
            }
            const double s0 = gaussian_noise_scale(radius, params.n, spec.budget);
            const auto w = mean_mix_weights(spec, params, s0 * s0);
            Rng rng(seed);
            out.estimate = w.w_priv * clip_and_average(ds.x_priv, radius);
            if (params.m > 0) {
                out.estimate += w.w_pub * estimators::empirical_mean(ds.x_pub);
            }
            // noise scale s = w_priv * s0 keeps the release a post-processing
            // of an (eps, delta)-DP clipped mean
            out.estimate += gaussian_vector(params.d, w.w_priv * s0, rng);
            return out;
        }
        default:
            throw ParameterError("estimate_mean: unreachable kind");
    }
}

MechanismOutput estimate_reg(const MechanismSpec& spec, const models::RegDataset& ds,
                             const models::RegModelParams& params, RngSeed seed) {
    if (!is_reg_kind(spec.kind)) {
        throw ParameterError("estimate_reg: not a regression mechanism kind");
    }
    params.validate();
    if (ds.total() != params.n + params.m || ds.n_private != params.n || ds.x.cols() != params.d) {
        throw ShapeError("estimate_reg: dataset does not match params");
    }
    spec.budget.validate();

    MechanismOutput out;
    out.declared = spec.budget;

    auto gls_posterior = [&]() {
        const estimators::SigmaInverse inv(ds.x_pub(), params.tau, params.noise_sigma2,
                                           params.n);
        return estimators::gls_posterior_mean(ds.x, ds.y, inv, params.prior_precision());
    };

    switch (spec.kind) {
        case MechanismKind::GlsPosterior: {
            out.estimate = gls_posterior();
            return out;
        }
        case MechanismKind::PublicOnlyOls: {
            out.estimate = estimators::ols(ds.x_pub(), ds.y_pub());
            return out;
        }
        case MechanismKind::GaussianMechReg: {
            if (!std::isfinite(spec.budget.eps) || spec.budget.delta <= 0.0) {
                throw BudgetError("GaussianMechReg: needs finite eps and delta > 0");
            }
            if (params.n < 1) {
                throw ParameterError("GaussianMechReg: needs at least one private row");
            }
            const double radius =
                spec.clip_radius > 0.0 ? spec.clip_radius : default_clip_radius(spec.kind, params.d, 1.0);
            VectorXd base = gls_posterior();
            const double norm = base.norm();
            if (norm > radius) {
                base *= radius / norm;
            }
            const double w =
                spec.sensitivity_weight > 0.0 ? spec.sensitivity_weight : 1.0 / params.n;
            const double s =
                2.0 * radius * w * std::sqrt(2.0 * std::log(1.25 / spec.budget.delta)) /
                spec.budget.eps;
            Rng rng(seed);
            out.estimate = base + gaussian_vector(params.d, s, rng);
            out.heuristic_dp = true; // surrogate sensitivity, not a worst-case proof
            return out;
        }
        default:
            throw ParameterError("estimate_reg: unreachable kind");
    }
}

} // namespace pubpriv::mechanisms

#include "pubpriv/fingerprint.hpp"

#include <cmath>

#include "pubpriv/bounds.hpp"
#include "pubpriv/errors.hpp"

namespace pubpriv::fingerprint {

FingerprintTrace mean_statistics(const VectorXd& estimate, const models::MeanDataset& ds,
                                 const models::MeanInstance& instance, double kappa) {
    const auto d = instance.mu_priv.size();
    if (estimate.size() != d || (ds.x_priv.rows() > 0 && ds.x_priv.cols() != d) ||
        (ds.x_pub.rows() > 0 && ds.x_pub.cols() != d)) {
        throw ShapeError("mean_statistics: dimension mismatch");
    }
    if (!(kappa >= 1.0)) {
        throw ParameterError("mean_statistics: kappa must be >= 1");
    }
    const VectorXd delta = estimate - instance.mu_priv;
    FingerprintTrace trace;
    trace.z_priv = (ds.x_priv.rowwise() - instance.mu_priv.transpose()) * delta;
    trace.z_pub = (ds.x_pub.rowwise() - instance.mu_priv.transpose()) * delta;
    trace.pub_weight = 1.0 / kappa;
    trace.sum_priv = trace.z_priv.sum();
    trace.sum_pub_weighted = trace.pub_weight * trace.z_pub.sum();
    trace.sum_total = trace.sum_priv + trace.sum_pub_weighted;
    return trace;
}

FingerprintTrace reg_score_statistics(const VectorXd& estimate, const models::RegDataset& ds,
                                      const models::RegInstance& instance) {
    const auto d = instance.beta_priv.size();
    if (estimate.size() != d || ds.x.cols() != d || ds.y.size() != ds.x.rows()) {
        throw ShapeError("reg_score_statistics: dimension mismatch");
    }
    const int n = ds.n_private;
    const int total = ds.total();
    const VectorXd delta = estimate - instance.beta_priv;
    FingerprintTrace trace;
    trace.z_priv.resize(n);
    trace.z_pub.resize(total - n);
    for (int i = 0; i < total; ++i) {
        const double residual = ds.y(i) - ds.x.row(i).dot(instance.beta_priv);
        const double z = residual * ds.x.row(i).dot(delta);
        if (i < n) {
            trace.z_priv(i) = z;
        } else {
            trace.z_pub(i - n) = z;
        }
    }
    trace.pub_weight = 1.0;
    trace.sum_priv = trace.z_priv.sum();
    trace.sum_pub_weighted = trace.z_pub.sum();
    trace.sum_total = trace.sum_priv + trace.sum_pub_weighted;
    return trace;
}

double gls_score_statistic(const VectorXd& estimate, const models::RegDataset& ds,
                           const models::RegInstance& instance,
                           const estimators::SigmaInverse& sigma_inv) {
    if (estimate.size() != instance.beta_priv.size() || ds.x.cols() != estimate.size()) {
        throw ShapeError("gls_score_statistic: dimension mismatch");
    }
    if (sigma_inv.n_private() + sigma_inv.n_public() != ds.total()) {
        throw ShapeError("gls_score_statistic: sigma_inv built for a different layout");
    }
    const VectorXd residual = ds.x * instance.beta_priv - ds.y;
    const VectorXd whitened = sigma_inv.apply(residual);
    return (estimate - instance.beta_priv).dot(ds.x.transpose() * whitened);
}

double resampled_statistic(const mechanisms::MechanismSpec& spec, const models::MeanDataset& ds,
                           const models::MeanInstance& instance,
                           const models::MeanModelParams& params, int index, RngSeed seed) {
    const int total = params.n + params.m;
    if (index < 0 || index >= total) {
        throw ParameterError("resampled_statistic: index out of range");
    }
    Rng row_rng(substream(seed, 0));
    models::MeanDataset modified = ds;
    const bool is_private = index < params.n;
    const VectorXd& mean = is_private ? instance.mu_priv : instance.mu_pub;
    VectorXd fresh(params.d);
    for (int j = 0; j < params.d; ++j) {
        fresh(j) = mean(j) + row_rng.next_gaussian();
    }
    VectorXd original;
    if (is_private) {
        original = ds.x_priv.row(index);
        modified.x_priv.row(index) = fresh.transpose();
    } else {
        original = ds.x_pub.row(index - params.n);
        modified.x_pub.row(index - params.n) = fresh.transpose();
    }
    const auto rerun = mechanisms::estimate_mean(spec, modified, params, substream(seed, 1));
    return (rerun.estimate - instance.mu_priv).dot(original - instance.mu_priv);
}

double resampled_statistic(const mechanisms::MechanismSpec& spec, const models::RegDataset& ds,
                           const models::RegInstance& instance,
                           const models::RegModelParams& params, int index, RngSeed seed) {
    const int total = params.n + params.m;
    if (index < 0 || index >= total) {
        throw ParameterError("resampled_statistic: index out of range");
    }
    Rng row_rng(substream(seed, 0));
    models::RegDataset modified = ds;
    const bool is_private = index < params.n;
    const VectorXd& beta = is_private ? instance.beta_priv : instance.beta_pub;
    VectorXd x_new(params.d);
    for (int j = 0; j < params.d; ++j) {
        x_new(j) = row_rng.next_gaussian();
    }
    const double eta_new = std::sqrt(params.noise_sigma2) * row_rng.next_gaussian();
    modified.x.row(index) = x_new.transpose();
    modified.eta(index) = eta_new;
    modified.y(index) = x_new.dot(beta) + eta_new;

    const auto rerun = mechanisms::estimate_reg(spec, modified, params, substream(seed, 1));
    const double residual = ds.y(index) - ds.x.row(index).dot(instance.beta_priv);
    return residual * ds.x.row(index).dot(rerun.estimate - instance.beta_priv);
}

BayesDecomposition bayes_decomposition(const VectorXd& estimate, const models::MeanDataset& ds,
                                       const models::MeanInstance& instance,
                                       const models::MeanModelParams& params, double kappa) {
    if (estimate.size() != params.d || instance.mu_priv.size() != params.d) {
        throw ShapeError("bayes_decomposition: dimension mismatch");
    }
    const double k = kappa > 0.0 ? kappa : bounds::kappa(params.m, params.tau, params.d);
    const VectorXd pooled = estimators::kappa_weighted_pooled_mean(ds, k);
    const VectorXd centered = pooled - instance.mu_priv;
    BayesDecomposition out;
    out.quad_term = centered.squaredNorm();
    out.cross_term = (estimate - pooled).dot(centered);
    out.pool_size_effective = params.n + params.m / k;
    return out;
}

} // namespace pubpriv::fingerprint

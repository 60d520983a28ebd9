#include "pubpriv/models.hpp"

#include <cmath>

#include "pubpriv/errors.hpp"

namespace pubpriv::models {

namespace {

bool finite(double x) { return std::isfinite(x); }

void fill_gaussian_rows(MatrixXd& out, const VectorXd& mean, Rng& rng) {
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        for (Eigen::Index j = 0; j < out.cols(); ++j) {
            out(i, j) = mean(j) + rng.next_gaussian();
        }
    }
}

VectorXd gaussian_vector(int d, double scale, Rng& rng) {
    VectorXd v(d);
    for (int j = 0; j < d; ++j) {
        v(j) = scale * rng.next_gaussian();
    }
    return v;
}

} // namespace

void MeanModelParams::validate() const {
    if (d < 1) throw ParameterError("mean params: d must be >= 1");
    if (n < 0 || m < 0) throw ParameterError("mean params: n and m must be >= 0");
    if (n + m < 1) throw ParameterError("mean params: need at least one sample (n + m >= 1)");
    if (!finite(tau) || tau < 0.0) throw ParameterError("mean params: tau must be finite and >= 0");
    if (!finite(prior_sigma2) || prior_sigma2 <= 0.0)
        throw ParameterError("mean params: prior_sigma2 must be finite and > 0");
}

void RegModelParams::validate() const {
    if (d < 1) throw ParameterError("reg params: d must be >= 1");
    if (n < 0 || m < 0) throw ParameterError("reg params: n and m must be >= 0");
    if (n + m < 1) throw ParameterError("reg params: need at least one sample (n + m >= 1)");
    if (!finite(tau) || tau < 0.0) throw ParameterError("reg params: tau must be finite and >= 0");
    if (!finite(noise_sigma2) || noise_sigma2 <= 0.0)
        throw ParameterError("reg params: noise_sigma2 must be finite and > 0");
    if (!finite(prior_precision()) || prior_precision() <= 0.0)
        throw ParameterError("reg params: prior precision must be finite and > 0");
}

MeanInstance sample_mean_instance(const MeanModelParams& params, RngSeed seed) {
    params.validate();
    Rng rng(seed);
    MeanInstance inst;
    inst.mu_priv = gaussian_vector(params.d, std::sqrt(params.prior_sigma2), rng);
    if (params.tau == 0.0) {
        inst.v = VectorXd::Zero(params.d); // exact zeros, bitwise-testable
    } else {
        inst.v = gaussian_vector(params.d, params.tau / std::sqrt(params.d), rng);
    }
    inst.mu_pub = inst.mu_priv + inst.v;
    return inst;
}

MeanDataset sample_mean_dataset(const MeanModelParams& params, const MeanInstance& instance,
                                RngSeed seed) {
    params.validate();
    if (instance.mu_priv.size() != params.d || instance.mu_pub.size() != params.d) {
        throw ShapeError("sample_mean_dataset: instance dimension does not match params");
    }
    Rng rng(seed);
    MeanDataset ds;
    ds.x_priv.resize(params.n, params.d);
    ds.x_pub.resize(params.m, params.d);
    fill_gaussian_rows(ds.x_priv, instance.mu_priv, rng);
    fill_gaussian_rows(ds.x_pub, instance.mu_pub, rng);
    return ds;
}

RegInstance sample_reg_instance(const RegModelParams& params, RngSeed seed) {
    params.validate();
    Rng rng(seed);
    RegInstance inst;
    inst.beta_priv = gaussian_vector(params.d, 1.0 / std::sqrt(params.prior_precision()), rng);
    if (params.tau == 0.0) {
        inst.v = VectorXd::Zero(params.d);
    } else {
        inst.v = gaussian_vector(params.d, params.tau / std::sqrt(params.d), rng);
    }
    inst.beta_pub = inst.beta_priv + inst.v;
    return inst;
}

RegDataset sample_reg_dataset(const RegModelParams& params, const RegInstance& instance,
                              RngSeed seed) {
    params.validate();
    if (instance.beta_priv.size() != params.d || instance.beta_pub.size() != params.d) {
        throw ShapeError("sample_reg_dataset: instance dimension does not match params");
    }
    Rng rng(seed);
    const int total = params.n + params.m;
    RegDataset ds;
    ds.n_private = params.n;
    ds.x.resize(total, params.d);
    for (int i = 0; i < total; ++i) {
        for (int j = 0; j < params.d; ++j) {
            ds.x(i, j) = rng.next_gaussian();
        }
    }
    ds.eta = gaussian_vector(total, std::sqrt(params.noise_sigma2), rng);
    ds.y.resize(total);
    for (int i = 0; i < total; ++i) {
        const VectorXd& beta = i < params.n ? instance.beta_priv : instance.beta_pub;
        ds.y(i) = ds.x.row(i).dot(beta) + ds.eta(i);
    }
    return ds;
}

} // namespace pubpriv::models

#include "pubpriv/estimators.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "pubpriv/errors.hpp"

namespace pubpriv::estimators {

namespace {

constexpr double kRankTolerancePerRow = 1e-10;

// Smallest eigenvalue of a symmetric matrix; the d x d normal matrices here
// are tiny, so a full eigendecomposition is fine.
double min_eigenvalue(const MatrixXd& sym) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(sym, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) {
        throw NumericalError("eigenvalue computation failed");
    }
    return es.eigenvalues().minCoeff();
}

} // namespace

VectorXd empirical_mean(const Eigen::Ref<const MatrixXd>& rows) {
    if (rows.rows() == 0) {
        throw EmptyInputError("empirical_mean: no rows");
    }
    return rows.colwise().mean();
}

VectorXd kappa_weighted_pooled_mean(const models::MeanDataset& ds, double kappa) {
    if (!(kappa >= 1.0) || !std::isfinite(kappa)) {
        throw ParameterError("kappa_weighted_pooled_mean: kappa must be finite and >= 1");
    }
    const auto n = ds.x_priv.rows();
    const auto m = ds.x_pub.rows();
    if (n + m == 0) {
        throw EmptyInputError("kappa_weighted_pooled_mean: empty dataset");
    }
    if (m == 0) return empirical_mean(ds.x_priv);
    if (n == 0) return empirical_mean(ds.x_pub);
    const double m_eff = static_cast<double>(m) / kappa;
    const double pool = static_cast<double>(n) + m_eff;
    return empirical_mean(ds.x_pub) * (m_eff / pool) + empirical_mean(ds.x_priv) * (n / pool);
}

PosteriorWeights posterior_weights_general(double prior_sigma2, double q_pub, double p_priv) {
    const double det = prior_sigma2 * (p_priv + q_pub) + p_priv * q_pub;
    return PosteriorWeights{prior_sigma2 * q_pub / det, prior_sigma2 * p_priv / det};
}

PosteriorWeights posterior_weights_mean(const models::MeanModelParams& params) {
    params.validate();
    if (params.n < 1 || params.m < 1) {
        throw DegeneratePathError(
            "posterior_weights_mean: both sources required; use the single-source posterior");
    }
    const double q = params.tau * params.tau / params.d + 1.0 / params.m;
    const double p = 1.0 / params.n;
    return posterior_weights_general(params.prior_sigma2, q, p);
}

VectorXd posterior_mean_shifted(const models::MeanDataset& ds, const models::MeanModelParams& params) {
    if (ds.x_priv.rows() != params.n || ds.x_pub.rows() != params.m ||
        (params.n > 0 && ds.x_priv.cols() != params.d) ||
        (params.m > 0 && ds.x_pub.cols() != params.d)) {
        throw ShapeError("posterior_mean_shifted: dataset does not match params");
    }
    const PosteriorWeights w = posterior_weights_mean(params);
    return w.w_priv * empirical_mean(ds.x_priv) + w.w_pub * empirical_mean(ds.x_pub);
}

VectorXd joint_gaussian_conditional(const models::MeanModelParams& params,
                                    const VectorXd& mu_bar_pub, const VectorXd& mu_bar_priv) {
    params.validate();
    if (params.n < 1 || params.m < 1) {
        throw DegeneratePathError("joint_gaussian_conditional: both sources required");
    }
    const int d = params.d;
    if (mu_bar_pub.size() != d || mu_bar_priv.size() != d) {
        throw ShapeError("joint_gaussian_conditional: vector length mismatch");
    }
    const double s2 = params.prior_sigma2;
    const double var_pub = s2 + params.tau * params.tau / params.d + 1.0 / params.m;
    const double var_priv = s2 + 1.0 / params.n;

    MatrixXd cov_obs = MatrixXd::Zero(2 * d, 2 * d); // (mu_bar_pub, mu_bar_priv)
    cov_obs.topLeftCorner(d, d) = var_pub * MatrixXd::Identity(d, d);
    cov_obs.bottomRightCorner(d, d) = var_priv * MatrixXd::Identity(d, d);
    cov_obs.topRightCorner(d, d) = s2 * MatrixXd::Identity(d, d);
    cov_obs.bottomLeftCorner(d, d) = s2 * MatrixXd::Identity(d, d);

    MatrixXd cross(d, 2 * d); // Cov(mu_priv, (mu_bar_pub, mu_bar_priv))
    cross.leftCols(d) = s2 * MatrixXd::Identity(d, d);
    cross.rightCols(d) = s2 * MatrixXd::Identity(d, d);

    VectorXd obs(2 * d);
    obs.head(d) = mu_bar_pub;
    obs.tail(d) = mu_bar_priv;

    Eigen::LDLT<MatrixXd> ldlt(cov_obs);
    if (ldlt.info() != Eigen::Success) {
        throw NumericalError("joint_gaussian_conditional: conditioning solve failed");
    }
    VectorXd result = cross * ldlt.solve(obs);
    if (!result.allFinite()) {
        throw NumericalError("joint_gaussian_conditional: non-finite conditional mean");
    }
    return result;
}

VectorXd ols(const MatrixXd& x, const VectorXd& y) {
    const auto rows = x.rows();
    const auto d = x.cols();
    if (y.size() != rows) {
        throw ShapeError("ols: x and y row counts differ");
    }
    if (rows < d) {
        throw SingularDesignError("ols: fewer rows than unknowns");
    }
    const MatrixXd normal = x.transpose() * x;
    if (min_eigenvalue(normal) <= kRankTolerancePerRow * static_cast<double>(rows)) {
        throw SingularDesignError("ols: design numerically rank-deficient");
    }
    return Eigen::LLT<MatrixXd>(normal).solve(x.transpose() * y);
}

RidgePosterior ridge_posterior(const MatrixXd& x, const VectorXd& y, double a, double b) {
    if (!(a > 0.0) || !(b > 0.0)) {
        throw ParameterError("ridge_posterior: a and b must be > 0");
    }
    if (y.size() != x.rows()) {
        throw ShapeError("ridge_posterior: x and y row counts differ");
    }
    RidgePosterior post;
    post.precision = a * (x.transpose() * x) + b * MatrixXd::Identity(x.cols(), x.cols());
    post.mean = a * Eigen::LLT<MatrixXd>(post.precision).solve(x.transpose() * y);
    return post;
}

// ---------------------------------------------------------------------------
// GlsCovariance
// ---------------------------------------------------------------------------

GlsCovariance GlsCovariance::build(const MatrixXd& x_pub, double tau, double sigma2, int d,
                                   int n_total) {
    if (d < 1 || n_total < static_cast<int>(x_pub.rows())) {
        throw ShapeError("GlsCovariance: inconsistent sizes");
    }
    if (x_pub.rows() > 0 && x_pub.cols() != d) {
        throw ShapeError("GlsCovariance: x_pub column count != d");
    }
    GlsCovariance cov;
    cov.x_pub_ = x_pub;
    cov.tau_ = tau;
    cov.sigma2_ = sigma2;
    cov.d_ = d;
    cov.n_total_ = n_total;
    cov.prefer_dense_ = n_total <= 512;
    return cov;
}

VectorXd GlsCovariance::apply_structured(const VectorXd& z) const {
    if (z.size() != n_total_) {
        throw ShapeError("GlsCovariance::apply: wrong vector length");
    }
    VectorXd out = sigma2_ * z;
    const auto m = x_pub_.rows();
    if (m > 0 && tau_ != 0.0) {
        const double scale = tau_ * tau_ / d_;
        out.tail(m) += scale * (x_pub_ * (x_pub_.transpose() * z.tail(m)));
    }
    return out;
}

const MatrixXd& GlsCovariance::dense() const {
    if (!dense_ready_) {
        dense_ = sigma2_ * MatrixXd::Identity(n_total_, n_total_);
        const auto m = x_pub_.rows();
        if (m > 0 && tau_ != 0.0) {
            dense_.bottomRightCorner(m, m) += (tau_ * tau_ / d_) * (x_pub_ * x_pub_.transpose());
        }
        dense_ready_ = true;
    }
    return dense_;
}

VectorXd GlsCovariance::apply(const VectorXd& z) const {
    if (prefer_dense_) {
        if (z.size() != n_total_) {
            throw ShapeError("GlsCovariance::apply: wrong vector length");
        }
        return dense() * z;
    }
    return apply_structured(z);
}

// ---------------------------------------------------------------------------
// SigmaInverse
// ---------------------------------------------------------------------------

SigmaInverse::SigmaInverse(const Eigen::Ref<const MatrixXd>& x_pub, double tau, double sigma2,
                           int n_private)
    : x_pub_(x_pub),
      tau_(tau),
      sigma2_(sigma2),
      n_(n_private),
      m_(static_cast<int>(x_pub.rows())),
      d_(static_cast<int>(x_pub.cols())),
      identity_path_(tau == 0.0 || x_pub.rows() == 0) {
    if (!(sigma2 > 0.0)) {
        throw ParameterError("SigmaInverse: sigma2 must be > 0");
    }
    if (tau < 0.0) {
        throw ParameterError("SigmaInverse: tau must be >= 0");
    }
    if (n_private < 0) {
        throw ParameterError("SigmaInverse: negative private count");
    }
    if (!identity_path_) {
        const MatrixXd inner = (d_ / (tau_ * tau_)) * MatrixXd::Identity(d_, d_) +
                               (x_pub_.transpose() * x_pub_) / sigma2_;
        inner_llt_.compute(inner);
        if (inner_llt_.info() != Eigen::Success) {
            throw NumericalError("SigmaInverse: inner matrix factorization failed");
        }
    }
}

VectorXd SigmaInverse::apply(const VectorXd& z) const {
    if (z.size() != n_ + m_) {
        throw ShapeError("SigmaInverse::apply: wrong vector length");
    }
    VectorXd out = z / sigma2_;
    if (!identity_path_) {
        const VectorXd inner = inner_llt_.solve(x_pub_.transpose() * z.tail(m_));
        out.tail(m_) -= (x_pub_ * inner) / (sigma2_ * sigma2_);
    }
    return out;
}

VectorXd SigmaInverse::apply_public(const VectorXd& z_pub) const {
    if (z_pub.size() != m_) {
        throw ShapeError("SigmaInverse::apply_public: wrong vector length");
    }
    VectorXd out = z_pub / sigma2_;
    if (!identity_path_) {
        const VectorXd inner = inner_llt_.solve(x_pub_.transpose() * z_pub);
        out -= (x_pub_ * inner) / (sigma2_ * sigma2_);
    }
    return out;
}

MatrixXd SigmaInverse::w_matrix() const {
    if (identity_path_) {
        return MatrixXd::Zero(d_, d_);
    }
    return inner_llt_.solve(MatrixXd::Identity(d_, d_));
}

// ---------------------------------------------------------------------------
// GLS solves
// ---------------------------------------------------------------------------

namespace {

// X^T Sigma^{-1} X and X^T Sigma^{-1} y in one pass over the columns.
void whitened_normal_equations(const MatrixXd& x, const VectorXd& y, const SigmaInverse& inv,
                               MatrixXd& normal, VectorXd& rhs) {
    const auto d = x.cols();
    MatrixXd sx(x.rows(), d);
    for (Eigen::Index j = 0; j < d; ++j) {
        sx.col(j) = inv.apply(x.col(j));
    }
    normal = x.transpose() * sx;
    normal = ((normal + normal.transpose()) * 0.5).eval(); // symmetrize round-off
    rhs = sx.transpose() * y;
}

} // namespace

VectorXd gls_estimate(const MatrixXd& x, const VectorXd& y, const SigmaInverse& sigma_inv) {
    const auto rows = x.rows();
    if (y.size() != rows) {
        throw ShapeError("gls_estimate: x and y row counts differ");
    }
    if (rows < x.cols()) {
        throw SingularDesignError("gls_estimate: fewer rows than unknowns");
    }
    MatrixXd normal;
    VectorXd rhs;
    whitened_normal_equations(x, y, sigma_inv, normal, rhs);
    if (min_eigenvalue(normal) <= kRankTolerancePerRow * static_cast<double>(rows)) {
        throw SingularDesignError("gls_estimate: whitened design numerically rank-deficient");
    }
    return Eigen::LLT<MatrixXd>(normal).solve(rhs);
}

VectorXd gls_posterior_mean(const MatrixXd& x, const VectorXd& y, const SigmaInverse& sigma_inv,
                            double b) {
    if (!(b > 0.0)) {
        throw ParameterError("gls_posterior_mean: b must be > 0");
    }
    if (y.size() != x.rows()) {
        throw ShapeError("gls_posterior_mean: x and y row counts differ");
    }
    MatrixXd normal;
    VectorXd rhs;
    whitened_normal_equations(x, y, sigma_inv, normal, rhs);
    normal += b * MatrixXd::Identity(x.cols(), x.cols());
    Eigen::LLT<MatrixXd> llt(normal);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("gls_posterior_mean: factorization failed");
    }
    return llt.solve(rhs);
}

GlsComponents gls_components(const models::RegDataset& ds, const models::RegModelParams& params) {
    params.validate();
    if (ds.total() != params.n + params.m || ds.n_private != params.n || ds.x.cols() != params.d) {
        throw ShapeError("gls_components: dataset does not match params");
    }
    const double s2 = params.noise_sigma2;
    const int d = params.d;
    GlsComponents comps;
    const MatrixXd x_pub = ds.x_pub();
    comps.S = x_pub.transpose() * x_pub;
    if (params.tau == 0.0 || params.m == 0) {
        comps.W = MatrixXd::Zero(d, d); // d/tau^2 -> infinity kills the update
    } else {
        const MatrixXd inner =
            (d / (params.tau * params.tau)) * MatrixXd::Identity(d, d) + comps.S / s2;
        Eigen::LLT<MatrixXd> llt(inner);
        if (llt.info() != Eigen::Success) {
            throw NumericalError("gls_components: inner factorization failed");
        }
        comps.W = llt.solve(MatrixXd::Identity(d, d));
    }
    comps.M = (ds.x.transpose() * ds.x) / s2 - (comps.S * comps.W * comps.S) / (s2 * s2);
    comps.m_vec = (ds.x.transpose() * ds.y) / s2 -
                  (comps.S * comps.W * (x_pub.transpose() * ds.y_pub())) / (s2 * s2);
    return comps;
}

VectorXd reg_posterior_via_M_m(const models::RegDataset& ds, const models::RegModelParams& params) {
    const GlsComponents comps = gls_components(ds, params);
    const double b = params.prior_precision();
    const MatrixXd system =
        comps.M + b * MatrixXd::Identity(params.d, params.d);
    Eigen::LLT<MatrixXd> llt(system);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("reg_posterior_via_M_m: factorization failed");
    }
    return llt.solve(comps.m_vec);
}

} // namespace pubpriv::estimators

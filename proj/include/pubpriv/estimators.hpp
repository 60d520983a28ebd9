#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "pubpriv/models.hpp"

namespace pubpriv::estimators {

using Eigen::MatrixXd;
using Eigen::VectorXd;

VectorXd empirical_mean(const Eigen::Ref<const MatrixXd>& rows);

// kappa-discounted pool of the two sample means:
//   Xbar = Xbar_pub * (m/kappa)/(n + m/kappa) + Xbar_priv * n/(n + m/kappa)
// kappa = 1 collapses to the plain pooled mean.
VectorXd kappa_weighted_pooled_mean(const models::MeanDataset& ds, double kappa);

struct PosteriorWeights {
    double w_priv = 0.0;
    double w_pub = 0.0;
};

// Weights of the Gaussian posterior mean when the private parameter is
// observed through two noisy views: a private one with per-coordinate
// deviation variance p_priv and a public one with q_pub (q folds in both
// the sampling noise and the shift prior).
PosteriorWeights posterior_weights_general(double prior_sigma2, double q_pub, double p_priv);

// Shift-aware posterior weights; requires n >= 1 and m >= 1 (a missing
// source must go through the single-source path instead).
PosteriorWeights posterior_weights_mean(const models::MeanModelParams& params);

// w_priv * mean(x_priv) + w_pub * mean(x_pub)
VectorXd posterior_mean_shifted(const models::MeanDataset& ds, const models::MeanModelParams& params);

// Brute-force oracle: conditions the jointly Gaussian triple
// (mu_priv, mu_bar_pub, mu_bar_priv) by a dense solve on the 2d x 2d block.
// Kept deliberately direct; it cross-checks posterior_mean_shifted.
VectorXd joint_gaussian_conditional(const models::MeanModelParams& params,
                                    const VectorXd& mu_bar_pub, const VectorXd& mu_bar_priv);

// Least squares via factorization. The design counts as rank-deficient when
// the smallest eigenvalue of X^T X is <= 1e-10 * N.
VectorXd ols(const MatrixXd& x, const VectorXd& y);

struct RidgePosterior {
    MatrixXd precision; // a X^T X + b I
    VectorXd mean;      // a * precision^{-1} X^T y
};

RidgePosterior ridge_posterior(const MatrixXd& x, const VectorXd& y, double a, double b);

// ---------------------------------------------------------------------------
// Correlated label noise Sigma = sigma^2 I_N + (tau^2/d) P P^T, where P is
// the design with private rows zeroed (P is never materialized).
// ---------------------------------------------------------------------------

class GlsCovariance {
public:
    // Auto-selects the dense representation for N <= 512, the implicit pair
    // otherwise. Both application paths stay available for cross-checks.
    static GlsCovariance build(const MatrixXd& x_pub, double tau, double sigma2, int d, int n_total);

    VectorXd apply(const VectorXd& z) const;            // Sigma * z via the selected path
    VectorXd apply_structured(const VectorXd& z) const; // sigma^2 z + (tau^2/d) P (P^T z)
    const MatrixXd& dense() const;                      // materializes on demand

    bool prefers_dense() const { return prefer_dense_; }
    int total() const { return n_total_; }

private:
    MatrixXd x_pub_;
    double tau_ = 0.0;
    double sigma2_ = 1.0;
    int d_ = 1;
    int n_total_ = 0;
    bool prefer_dense_ = false;
    mutable MatrixXd dense_;
    mutable bool dense_ready_ = false;
};

// Applies Sigma^{-1} in O(N d + d^3) through the low-rank update
//   Sigma^{-1} = (1/sigma^2) I - (1/sigma^4) U W U^T,
//   W = (d/tau^2 I + S/sigma^2)^{-1},  S = X_pub^T X_pub,
// with U the zero-padded public design. tau = 0 short-circuits to
// (1/sigma^2) I.
class SigmaInverse {
public:
    SigmaInverse(const Eigen::Ref<const MatrixXd>& x_pub, double tau, double sigma2, int n_private);

    VectorXd apply(const VectorXd& z) const;            // z has n_private + m entries
    VectorXd apply_public(const VectorXd& z_pub) const; // public block only

    MatrixXd w_matrix() const; // W above (zero matrix when tau = 0)

    double sigma2() const { return sigma2_; }
    double tau() const { return tau_; }
    int n_private() const { return n_; }
    int n_public() const { return m_; }
    int dim() const { return d_; }

private:
    MatrixXd x_pub_;
    double tau_;
    double sigma2_;
    int n_;
    int m_;
    int d_;
    bool identity_path_;
    Eigen::LLT<MatrixXd> inner_llt_; // of d/tau^2 I + S/sigma^2
};

// (X^T Sigma^{-1} X)^{-1} X^T Sigma^{-1} y, solved by factorization.
VectorXd gls_estimate(const MatrixXd& x, const VectorXd& y, const SigmaInverse& sigma_inv);

// (X^T Sigma^{-1} X + b I)^{-1} X^T Sigma^{-1} y
VectorXd gls_posterior_mean(const MatrixXd& x, const VectorXd& y, const SigmaInverse& sigma_inv,
                            double b);

// The S / W / M / m restatement of the same posterior:
//   M = (1/sigma^2) X^T X - (1/sigma^4) S W S
//   m = (1/sigma^2) X^T y - (1/sigma^4) S W X_pub^T y_pub
//   E[beta | X, y] = (M + b I)^{-1} m
struct GlsComponents {
    MatrixXd S;
    MatrixXd W;
    MatrixXd M;
    VectorXd m_vec;
    bool sigma_inv_implicit = true; // Sigma^{-1} was never materialized
};

GlsComponents gls_components(const models::RegDataset& ds, const models::RegModelParams& params);

VectorXd reg_posterior_via_M_m(const models::RegDataset& ds, const models::RegModelParams& params);

} // namespace pubpriv::estimators

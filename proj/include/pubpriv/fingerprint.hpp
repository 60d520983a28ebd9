#pragma once

#include "pubpriv/estimators.hpp"
#include "pubpriv/mechanisms.hpp"
#include "pubpriv/models.hpp"

namespace pubpriv::fingerprint {

using Eigen::VectorXd;

// Per-sample correlation statistics between a mechanism output and the data,
// taken against the TRUE instance parameters. These are analysis-side
// quantities used to audit mechanisms, not attacker-computable ones.
struct FingerprintTrace {
    VectorXd z_priv;              // length n
    VectorXd z_pub;               // length m
    double pub_weight = 1.0;      // 1/kappa for shifted mean statistics, 1 otherwise
    double sum_priv = 0.0;        // sum z_priv
    double sum_pub_weighted = 0.0; // pub_weight * sum z_pub
    double sum_total = 0.0;       // sum_priv + sum_pub_weighted
};

// z_priv[i] = <estimate - mu_priv, x_priv[i] - mu_priv>, public rows
// analogous and entering the sums with weight 1/kappa.
FingerprintTrace mean_statistics(const VectorXd& estimate, const models::MeanDataset& ds,
                                 const models::MeanInstance& instance, double kappa);

// Score statistics z_i = (y_i - x_i . beta_priv) * <estimate - beta_priv, x_i>,
// computed row by row; pub_weight = 1.
FingerprintTrace reg_score_statistics(const VectorXd& estimate, const models::RegDataset& ds,
                                      const models::RegInstance& instance);

// <estimate - beta_priv, X^T Sigma^{-1} (X beta_priv - y)>. Note the
// orientation: X beta - y, the opposite sign of the per-row score sums.
double gls_score_statistic(const VectorXd& estimate, const models::RegDataset& ds,
                           const models::RegInstance& instance,
                           const estimators::SigmaInverse& sigma_inv);

// Replaces row `index` (0-based, private rows first) with a fresh draw from
// its own source distribution, reruns the mechanism on the modified data
// with a fresh mechanism seed, and returns the inner product against the
// ORIGINAL row.
double resampled_statistic(const mechanisms::MechanismSpec& spec, const models::MeanDataset& ds,
                           const models::MeanInstance& instance,
                           const models::MeanModelParams& params, int index, RngSeed seed);

double resampled_statistic(const mechanisms::MechanismSpec& spec, const models::RegDataset& ds,
                           const models::RegInstance& instance,
                           const models::RegModelParams& params, int index, RngSeed seed);

// sum_total = pool_size_effective * (quad_term + cross_term) exactly, with
// Xbar the kappa-weighted pool.
struct BayesDecomposition {
    double quad_term = 0.0;           // |Xbar - mu_priv|^2
    double cross_term = 0.0;          // <estimate - Xbar, Xbar - mu_priv>
    double pool_size_effective = 0.0; // n + m/kappa
};

// kappa < 0 derives m tau^2/d + 1 from the params.
BayesDecomposition bayes_decomposition(const VectorXd& estimate, const models::MeanDataset& ds,
                                       const models::MeanInstance& instance,
                                       const models::MeanModelParams& params, double kappa = -1.0);

} // namespace pubpriv::fingerprint

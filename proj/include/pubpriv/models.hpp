#pragma once

#include <Eigen/Dense>
#include <iosfwd>

#include "pubpriv/rng.hpp"

namespace pubpriv::models {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Gaussian mean estimation under mean shift
// ---------------------------------------------------------------------------

struct MeanModelParams {
    int d = 1;                 // dimension
    int n = 0;                 // private sample count
    int m = 0;                 // public sample count
    double tau = 0.0;          // l2 shift magnitude between the two means
    double prior_sigma2 = 1.0; // prior variance of the private mean

    void validate() const; // throws ParameterError
};

// Ground truth for one simulated problem instance. mu_pub = mu_priv + v
// holds exactly; tau = 0 stores v as exact zeros.
struct MeanInstance {
    VectorXd mu_priv;
    VectorXd v;
    VectorXd mu_pub;
};

struct MeanDataset {
    MatrixXd x_priv; // n x d
    MatrixXd x_pub;  // m x d
};

// ---------------------------------------------------------------------------
// Linear regression under parameter shift
// ---------------------------------------------------------------------------

struct RegModelParams {
    int d = 1;
    int n = 0;
    int m = 0;
    double tau = 0.0;              // l2 shift between beta_pub and beta_priv
    double noise_sigma2 = 1.0;     // label noise variance
    double prior_precision_b = 0.0; // <= 0 selects the default 1/d

    double prior_precision() const {
        return prior_precision_b > 0.0 ? prior_precision_b : 1.0 / static_cast<double>(d);
    }

    void validate() const;
};

struct RegInstance {
    VectorXd beta_priv;
    VectorXd v;
    VectorXd beta_pub;
};

// Design matrix with private rows first (indices 0..n-1), then public rows.
// eta keeps the realized label noise so construction can be audited exactly.
struct RegDataset {
    MatrixXd x;     // N x d, N = n + m
    VectorXd y;     // N
    VectorXd eta;   // N
    int n_private = 0;

    int total() const { return static_cast<int>(x.rows()); }
    int n_public() const { return total() - n_private; }
    auto x_pub() const { return x.bottomRows(n_public()); }
    auto y_pub() const { return y.tail(n_public()); }
};

// ---------------------------------------------------------------------------
// Sampling (pure functions of params + seed; draw order is frozen)
// ---------------------------------------------------------------------------

// mu_priv ~ N(0, sigma^2 I) then v ~ N(0, (tau^2/d) I), in that order.
MeanInstance sample_mean_instance(const MeanModelParams& params, RngSeed seed);

// Private rows first, then public rows; each row filled left to right.
MeanDataset sample_mean_dataset(const MeanModelParams& params, const MeanInstance& instance,
                                RngSeed seed);

// beta_priv ~ N(0, b^{-1} I) then v ~ N(0, (tau^2/d) I).
RegInstance sample_reg_instance(const RegModelParams& params, RngSeed seed);

// All N covariate rows first, then the N noise draws; labels assembled as
// y_i = x_i . beta_row(i) + eta_i with the private parameter on rows < n.
RegDataset sample_reg_dataset(const RegModelParams& params, const RegInstance& instance,
                              RngSeed seed);

// ---------------------------------------------------------------------------
// Dataset dump ("pubpriv-dataset v1" text format, 17 significant digits)
// ---------------------------------------------------------------------------

void write_dataset(std::ostream& out, const MeanModelParams& params, const MeanDataset& ds);
void write_dataset(std::ostream& out, const RegModelParams& params, const RegDataset& ds);

} // namespace pubpriv::models

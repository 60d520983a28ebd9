#pragma once

#include <string>

#include "pubpriv/models.hpp"

namespace pubpriv::bounds {

// Public-sample discount factor: m tau^2 / d + 1.
double kappa(double m, double tau, double d);

// d / tau^2 + m / sigma^2. tau = 0 returns +infinity, the documented
// sentinel that routes callers onto the unshifted code paths.
double gamma_tau(double tau, double d, double m, double sigma2);

enum class Regime { small_shift, large_shift };

struct RegimeClassification {
    Regime regime = Regime::small_shift;
    double threshold_tau = 0.0; // sqrt(d/m); crossover fixed at constant 1
    std::string public_helpful_iff;
};

// large_shift iff tau > sqrt(d/m); the boundary itself is small_shift.
RegimeClassification classify_regime(const models::MeanModelParams& params);

// c * (n eps alpha + (1/kappa) * (alpha sqrt(md) + alpha tau sqrt(md)))
double mean_upper_bound(double n, double m, double d, double tau, double eps, double alpha,
                        double c = 1.0);

// (1/sigma^2) m d - (1/sigma^4) m^2 d / (d/tau^2 + m/sigma^2); exact m d / sigma^2
// at tau = 0, decays to 0 as tau -> infinity. Round-off below zero is clamped.
double reg_upper_bound_radicand(double m, double d, double tau, double sigma2);

// c * (n eps alpha + alpha * sqrt(radicand))
double reg_upper_bound(double n, double m, double d, double tau, double eps, double alpha,
                       double sigma2, double c = 1.0);

// d / (n + m/kappa)^3
double posterior_concentration_bound(double n, double m, double d, double tau);

enum class Tail { min, max };

struct EigvalTail {
    double threshold = 0.0;
    double prob_bound = 1.0; // exp(-N psi^2 / 2)
};

// Deviation thresholds for the extreme eigenvalues of X^T X with standard
// Gaussian rows: N (1 -+ sqrt(d/N) -+ psi)^2, each holding but for
// probability exp(-N psi^2 / 2).
EigvalTail eigval_tail(double N, double d, double psi, Tail which);

struct BoundPrediction {
    double kappa = 1.0;
    double gamma_tau = 0.0;
    double upper_sum_z = 0.0;        // with the caller-supplied constant c
    double lower_sum_z_floor = 0.0;  // c_floor * d with c_floor = 1
    double n_threshold_dp = 0.0;     // d / (alpha eps)
    double n_threshold_stat = 0.0;   // d / alpha^2
    double m_threshold_pub = 0.0;    // d / alpha^2
    double posterior_concentration = 0.0; // d / (n + m/kappa)^3
};

// Threshold fields only (the others stay zero).
BoundPrediction sample_thresholds(double d, double alpha, double eps);

// Every closed form for one mean-estimation parameter set.
BoundPrediction predict_mean(const models::MeanModelParams& params, double eps, double alpha,
                             double c = 1.0);

// Right-hand side of the indistinguishability moment bound for a pair of
// random variables coupled by an (eps, delta)-DP mechanism:
//   2 eps E|A| + 2 sqrt(delta (E[A^2] + E[B^2])).
// The hypothesis wants eps <= 1 and delta <= 1/2; outside that range the
// value is still returned (callers decide how to flag it).
double dp_indistinguishability_bound(double mean_abs_a, double mean_sq_a, double mean_sq_b,
                                     double eps, double delta);

} // namespace pubpriv::bounds

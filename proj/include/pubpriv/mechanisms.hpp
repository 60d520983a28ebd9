#pragma once

#include <optional>
#include <string>

#include "pubpriv/estimators.hpp"
#include "pubpriv/models.hpp"

namespace pubpriv::mechanisms {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct PrivacyBudget {
    double eps = std::numeric_limits<double>::infinity();
    double delta = 0.0;

    void validate() const; // eps >= 0, delta in [0, 1)

    // delta < eps^2 / d, the regime the sample-complexity statements assume.
    bool in_small_delta_regime(int d) const;
};

enum class MechanismKind {
    BayesPosterior,  // shift-aware posterior mean, non-private reference
    PublicOnlyMean,
    GaussianMechMean,
    PublicOnlyOls,
    GlsPosterior,    // non-private reference for regression
    GaussianMechReg,
};

const char* kind_name(MechanismKind kind);
MechanismKind parse_kind(const std::string& name);
bool is_dp_kind(MechanismKind kind);
bool is_mean_kind(MechanismKind kind);
bool is_reg_kind(MechanismKind kind);

struct MechanismSpec {
    MechanismKind kind = MechanismKind::BayesPosterior;
    PrivacyBudget budget;
    double clip_radius = 0.0;         // <= 0 selects the kind default
    double sensitivity_weight = 0.0;  // reg heuristic surrogate; <= 0 selects 1/n
    std::optional<estimators::PosteriorWeights> mix_weights;
};

struct MechanismOutput {
    VectorXd estimate;
    PrivacyBudget declared;   // bookkeeping for downstream bound comparison
    bool heuristic_dp = false;
};

// Kind defaults: 2 sqrt(d) * sigma_prior for the mean problem, 2 for regression.
double default_clip_radius(MechanismKind kind, int d, double prior_sigma2);

// Noise scale of the Gaussian mechanism on a clipped mean of n rows:
// (2 R / n) * sqrt(2 ln(1.25/delta)) / eps. Doubling eps halves it exactly.
double gaussian_noise_scale(double clip_radius, int n, const PrivacyBudget& budget);

// Rows clipped to the l2 ball of the given radius, then averaged.
VectorXd clip_and_average(const Eigen::Ref<const MatrixXd>& rows, double radius);

// Posterior-mean weights actually used for the mean problem. Resolution
// order: explicit override; single-source weights when n = 0 or m = 0;
// otherwise the shift-aware weights. dp_noise_var (per-coordinate variance
// of DP noise on the private mean) widens the private deviation term so the
// Gaussian mechanism's plug-in weights stay Bayes-consistent with the noise
// it is about to add.
estimators::PosteriorWeights mean_mix_weights(const MechanismSpec& spec,
                                              const models::MeanModelParams& params,
                                              double dp_noise_var = 0.0);

// Posterior mean of the private mean usable for any n, m >= 0 (n + m >= 1);
// routes through the single-source path when one side is empty.
VectorXd bayes_posterior_mean_any(const models::MeanDataset& ds,
                                  const models::MeanModelParams& params);

MechanismOutput estimate_mean(const MechanismSpec& spec, const models::MeanDataset& ds,
                              const models::MeanModelParams& params, RngSeed seed);

MechanismOutput estimate_reg(const MechanismSpec& spec, const models::RegDataset& ds,
                             const models::RegModelParams& params, RngSeed seed);

} // namespace pubpriv::mechanisms

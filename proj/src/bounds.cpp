#include "pubpriv/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pubpriv/errors.hpp"

namespace pubpriv::bounds {

double kappa(double m, double tau, double d) {
    if (m < 0.0 || d < 1.0 || tau < 0.0) {
        throw ParameterError("kappa: need m >= 0, d >= 1, tau >= 0");
    }
    return m * tau * tau / d + 1.0;
}

double gamma_tau(double tau, double d, double m, double sigma2) {
    if (tau < 0.0 || !(sigma2 > 0.0)) {
        throw ParameterError("gamma_tau: need tau >= 0 and sigma2 > 0");
    }
    if (tau == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return d / (tau * tau) + m / sigma2;
}

RegimeClassification classify_regime(const models::MeanModelParams& params) {
    params.validate();
    if (params.m < 1) {
        throw ParameterError("classify_regime: need m >= 1");
    }
    RegimeClassification out;
    out.threshold_tau = std::sqrt(static_cast<double>(params.d) / params.m);
    out.regime = params.tau > out.threshold_tau ? Regime::large_shift : Regime::small_shift;
    out.public_helpful_iff =
        out.regime == Regime::large_shift
            ? "alpha >~ tau (tau < alpha forces m = Omega(d/alpha^2))"
            : "always; public samples count as m/kappa unshifted ones";
    return out;
}

double mean_upper_bound(double n, double m, double d, double tau, double eps, double alpha,
                        double c) {
    if (n < 0 || m < 0 || d < 1 || tau < 0 || eps < 0 || alpha < 0 || !(c > 0)) {
        throw ParameterError("mean_upper_bound: nonnegative arguments and c > 0 required");
    }
    const double k = kappa(m, tau, d);
    const double pub_term = (alpha * std::sqrt(m * d) + alpha * tau * std::sqrt(m * d)) / k;
    return c * (n * eps * alpha + pub_term);
}

double reg_upper_bound_radicand(double m, double d, double tau, double sigma2) {
    if (m < 0 || d < 1 || tau < 0 || !(sigma2 > 0)) {
        throw ParameterError("reg_upper_bound_radicand: invalid arguments");
    }
    const double lead = m * d / sigma2;
    if (tau == 0.0) {
        return lead;
    }
    const double gamma = d / (tau * tau) + m / sigma2;
    const double correction = m * m * d / (sigma2 * sigma2 * gamma);
    return std::max(0.0, lead - correction);
}

double reg_upper_bound(double n, double m, double d, double tau, double eps, double alpha,
                       double sigma2, double c) {
    if (n < 0 || eps < 0 || alpha < 0 || !(c > 0)) {
        throw ParameterError("reg_upper_bound: invalid arguments");
    }
    return c * (n * eps * alpha + alpha * std::sqrt(reg_upper_bound_radicand(m, d, tau, sigma2)));
}

double posterior_concentration_bound(double n, double m, double d, double tau) {
    if (n < 0 || m < 0 || n + m < 1) {
        throw ParameterError("posterior_concentration_bound: need n + m >= 1");
    }
    const double pool = n + m / kappa(m, tau, d);
    return d / (pool * pool * pool);
}

EigvalTail eigval_tail(double N, double d, double psi, Tail which) {
    if (!(N >= d) || !(d >= 1)) {
        throw ParameterError("eigval_tail: need N >= d >= 1");
    }
    const double ratio = std::sqrt(d / N);
    if (which == Tail::min) {
        if (!(psi > 0.0) || !(psi < 1.0 - ratio)) {
            throw ParameterError("eigval_tail: need 0 < psi < 1 - sqrt(d/N) for the lower tail");
        }
    } else if (!(psi > 0.0)) {
        throw ParameterError("eigval_tail: need psi > 0");
    }
    EigvalTail out;
    const double edge = which == Tail::min ? 1.0 - ratio - psi : 1.0 + ratio + psi;
    out.threshold = N * edge * edge;
    out.prob_bound = std::exp(-N * psi * psi / 2.0);
    return out;
}

BoundPrediction sample_thresholds(double d, double alpha, double eps) {
    if (!(alpha > 0.0) || !(eps > 0.0)) {
        throw ParameterError("sample_thresholds: alpha and eps must be > 0");
    }
    BoundPrediction out;
    out.n_threshold_dp = d / (alpha * eps);
    out.n_threshold_stat = d / (alpha * alpha);
    out.m_threshold_pub = d / (alpha * alpha);
    return out;
}

BoundPrediction predict_mean(const models::MeanModelParams& params, double eps, double alpha,
                             double c) {
    params.validate();
    BoundPrediction out = sample_thresholds(params.d, alpha, eps);
    out.kappa = kappa(params.m, params.tau, params.d);
    out.gamma_tau = gamma_tau(params.tau, params.d, params.m, params.prior_sigma2);
    out.upper_sum_z = mean_upper_bound(params.n, params.m, params.d, params.tau, eps, alpha, c);
    out.lower_sum_z_floor = static_cast<double>(params.d);
    out.posterior_concentration =
        posterior_concentration_bound(params.n, params.m, params.d, params.tau);
    return out;
}

double dp_indistinguishability_bound(double mean_abs_a, double mean_sq_a, double mean_sq_b,
                                     double eps, double delta) {
    if (mean_abs_a < 0 || mean_sq_a < 0 || mean_sq_b < 0 || eps < 0 || delta < 0) {
        throw ParameterError("dp_indistinguishability_bound: negative moment or budget");
    }
    return 2.0 * eps * mean_abs_a + 2.0 * std::sqrt(delta * (mean_sq_a + mean_sq_b));
}

} // namespace pubpriv::bounds

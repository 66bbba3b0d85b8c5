#pragma once

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "sdseq/core.hpp"

namespace sdseq {

// Parameters of the sub-exponential tail assumption and of the gamma mixture:
// nu is the variance proxy, scale_c the exponential scale (distinct from the
// bet cap), rho the mixture-tuning parameter. rho defaults to nu^2 * t_opt
// with t_opt = 100, i.e. the mixture is tuned to an intrinsic time of 100
// rounds; see make_tuned().
struct SubExpParams {
    double nu = 1.0;
    double scale_c = 1.0;
    double rho = 100.0;

    SubExpParams(double nu_, double c_, double rho_) : nu(nu_), scale_c(c_), rho(rho_) {
        if (!(nu > 0.0) || !(scale_c > 0.0) || !(rho > 0.0))
            throw std::invalid_argument("SubExpParams: nu, scale_c, rho must be positive");
    }

    static SubExpParams make_tuned(double nu, double scale_c, double t_opt = 100.0) {
        return SubExpParams(nu, scale_c, nu * nu * t_opt);
    }
};

// Cumulant of a centered exponential with scale c:
// psi_E(lambda; c) = (-log(1 - c*lambda) - c*lambda) / c^2, for 0 <= lambda < 1/c.
inline double psi_e(double lambda, double scale_c) {
    if (!(scale_c > 0.0))
        throw std::invalid_argument("psi_e: scale must be positive");
    if (!(lambda >= 0.0 && lambda < 1.0 / scale_c))
        throw std::invalid_argument("psi_e: lambda outside [0, 1/c)");
    const double cl = scale_c * lambda;
    // log1p keeps the c -> 0 (Gaussian) limit lambda^2/2 accurate.
    return (-std::log1p(-cl) - cl) / (scale_c * scale_c);
}

// Per-round sub-exponential e-variable for the k-SD null (k = 2 or 3):
// exp(lambda * delta - psi_E(lambda; c) nu^2) with
// delta = (z - x)_+^(k-1) - (z - y)_+^(k-1).
inline double subexp_e(double lambda, double z, const ObservationPair& pair,
                       const SubExpParams& params, int k = 2) {
    if (k != 2 && k != 3)
        throw std::invalid_argument("subexp_e: only k = 2 and k = 3 are supported");
    const double px = std::max(z - pair.x, 0.0);
    const double py = std::max(z - pair.y, 0.0);
    const double delta = (k == 2) ? (px - py) : (px * px - py * py);
    return std::exp(lambda * delta - psi_e(lambda, params.scale_c) * params.nu * params.nu);
}

namespace detail {

// log of the regularized lower incomplete gamma P(a, x); stable for tiny P
// values far below DBL_MIN. Uses the ascending series in log space when
// x < a + 1 and boost's gamma_p otherwise (where P is bounded away from 0).
inline double log_reg_lower_gamma(double a, double x) {
    if (!(a > 0.0))
        throw std::invalid_argument("log_reg_lower_gamma: a must be positive");
    if (x <= 0.0) return -std::numeric_limits<double>::infinity();
    if (x < a + 1.0) {
        // gamma(a, x) = x^a e^-x sum_{n>=0} x^n / (a (a+1) ... (a+n))
        double term = 1.0 / a;
        double sum = term;
        double denom = a;
        for (int n = 1; n < 100000000; ++n) {
            denom += 1.0;
            term *= x / denom;
            sum += term;
            if (term < sum * 1e-17) break;
        }
        return a * std::log(x) - x + std::log(sum) - boost::math::lgamma(a);
    }
    return std::log(boost::math::gamma_p(a, x));
}

// log of C(a) = a^a / (Gamma(a) * P(a, a)), the normalizer of the truncated
// gamma mixing density.
inline double log_trunc_gamma_normalizer(double a) {
    return a * std::log(a) - boost::math::lgamma(a) - log_reg_lower_gamma(a, a);
}

} // namespace detail

// Log density of the mixing distribution over lambda in [0, 1/c): a
// Gamma(shape rho/c^2, rate rho/c^2) law in the variable 1 - c*lambda,
// truncated to (0, 1]. Exposed so tests can integrate against it directly.
inline double gamma_exp_mixture_log_density(double lambda, const SubExpParams& params) {
    const double c = params.scale_c;
    if (!(lambda >= 0.0 && lambda < 1.0 / c))
        return -std::numeric_limits<double>::infinity();
    const double a0 = params.rho / (c * c);
    const double u = 1.0 - c * lambda;
    return std::log(c) + detail::log_trunc_gamma_normalizer(a0) + (a0 - 1.0) * std::log(u) - a0 * u;
}

// Gamma-exponential mixture e-process value
//   m(s, v) = int_0^{1/c} exp(lambda * s - psi_E(lambda; c) * v) f_rho(lambda) dlambda
// evaluated in closed form. s is the accumulated payoff sum, v the
// accumulated variance budget (nu^2 * t). In the b <= 0 regime the integral
// has no elementary form and the conservative bound
// C(rho/c^2) exp(-rho/c^2) / ((v + rho)/c^2) <= 1 is returned.
inline double gamma_exp_mixture(double s, double v, const SubExpParams& params) {
    if (!(v >= 0.0))
        throw std::invalid_argument("gamma_exp_mixture: variance budget must be nonnegative");
    if (!std::isfinite(s))
        throw std::invalid_argument("gamma_exp_mixture: non-finite payoff sum");
    const double c = params.scale_c;
    const double c2 = c * c;
    const double a0 = params.rho / c2;
    const double a = (v + params.rho) / c2;
    const double b = (c * s + v + params.rho) / c2;
    const double log_norm = detail::log_trunc_gamma_normalizer(a0);
    if (b > 0.0) {
        const double log_m = log_norm + boost::math::lgamma(a) +
                             detail::log_reg_lower_gamma(a, b) - a * std::log(b) +
                             (c * s + v) / c2;
        return std::exp(log_m);
    }
    const double log_bound = log_norm - a0 - std::log(a);
    return std::exp(std::min(log_bound, 0.0));
}

} // namespace sdseq

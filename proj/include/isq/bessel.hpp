#pragma once

namespace isq {

/// Modified Bessel functions of real order nu >= 0 at x > 0, returned with
/// exponential scaling so that nothing overflows for large x:
///   i  = I_nu(x) e^{-x},   ip = I_nu'(x) e^{-x},
///   k  = K_nu(x) e^{x},    kp = K_nu'(x) e^{x}.
/// Temme's series for x < 2 and Steed's continued fraction otherwise give
/// K_mu, K_{mu+1} at |mu| <= 1/2; K is recurred upwards to nu and I follows
/// from the Wronskian and the continued fraction for I_nu'/I_nu.
struct ScaledBesselIK {
  double i, k, ip, kp;
};

ScaledBesselIK bessel_ik_scaled(double nu, double x);

/// Unscaled values; overflow to +inf (I) or underflow to 0 (K) for x > 700.
double bessel_i(double nu, double x);
double bessel_k(double nu, double x);

/// log I_nu(x) and log K_nu(x). Orders above 40 use the uniform (Debye)
/// expansion to fourth order, which stays finite where I and K themselves
/// underflow or overflow.
struct LogBesselIK {
  double log_i, log_k;
};

LogBesselIK log_bessel_ik(double nu, double x);

/// 1/Gamma(1 + mu) for |mu| <= 1/2 from its Taylor series.
double reciprocal_gamma1p(double mu);

} // namespace isq

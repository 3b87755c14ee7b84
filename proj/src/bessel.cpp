#include "isq/bessel.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "isq/error.hpp"

namespace isq {

namespace {

constexpr double kEps = 1e-16;
constexpr double kTiny = 1e-280;
constexpr int kMaxIter = 200000;

// Taylor coefficients of 1/Gamma(z) = sum_k c[k-1] z^k.
constexpr std::array<double, 26> kRecipGamma = {
    1.0000000000000000,  0.5772156649015329,  -0.6558780715202538, -0.0420026350340952,
    0.1665386113822915,  -0.0421977345555443, -0.0096219715278770, 0.0072189432466630,
    -0.0011651675918591, -0.0002152416741149, 0.0001280502823882,  -0.0000201348547807,
    -0.0000012504934821, 0.0000011330272320,  -0.0000002056338417, 0.0000000061160950,
    0.0000000050020075,  -0.0000000011812746, 0.0000000001043427,  0.0000000000077823,
    -0.0000000000036968, 0.0000000000005100,  -0.0000000000000206, -0.0000000000000054,
    0.0000000000000014,  0.0000000000000001};

// gam1 = (1/G(1-mu) - 1/G(1+mu)) / (2 mu), gam2 = (1/G(1-mu) + 1/G(1+mu)) / 2.
void temme_gammas(double mu, double &gam1, double &gam2) {
  const double mu2 = mu * mu;
  gam1 = 0.0;
  gam2 = 0.0;
  double pw = 1.0;
  for (std::size_t k = 0; k < kRecipGamma.size(); k += 2) {
    gam2 += kRecipGamma[k] * pw;
    if (k + 1 < kRecipGamma.size()) gam1 -= kRecipGamma[k + 1] * pw;
    pw *= mu2;
  }
}

} // namespace

double reciprocal_gamma1p(double mu) {
  double s = 0.0, pw = 1.0;
  for (double c : kRecipGamma) {
    s += c * pw;
    pw *= mu;
  }
  return s;
}

ScaledBesselIK bessel_ik_scaled(double nu, double x) {
  if (!(x > 0.0) || !(nu >= 0.0))
    throw DomainError("bessel_ik_scaled: need x > 0 and nu >= 0");

  const int nl = static_cast<int>(nu + 0.5);
  const double mu = nu - nl;
  const double mu2 = mu * mu;
  const double xi = 1.0 / x;
  const double xi2 = 2.0 * xi;

  // Continued fraction for I_nu'/I_nu (modified Lentz).
  double h = nu * xi;
  if (h < kTiny) h = kTiny;
  double b = xi2 * nu, d = 0.0, c = h;
  int iter = 0;
  for (; iter < kMaxIter; ++iter) {
    b += xi2;
    d = 1.0 / (b + d);
    c = b + 1.0 / c;
    const double del = c * d;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  if (iter == kMaxIter) throw ConvergenceFailure("bessel: I continued fraction", iter);

  // Downward recurrence from nu to mu, unnormalised.
  double ril = kTiny, ripl = h * ril;
  double ril1 = ril, rip1 = ripl;
  double fact = nu * xi;
  for (int l = nl; l >= 1; --l) {
    const double ritemp = fact * ril + ripl;
    fact -= xi;
    ripl = fact * ritemp + ril;
    ril = ritemp;
    if (std::abs(ril) > 1e200) {
      ril *= 1e-200;
      ripl *= 1e-200;
      ril1 *= 1e-200;
      rip1 *= 1e-200;
    }
  }
  const double f = ripl / ril;

  // K_mu and K_{mu+1}, scaled by e^x.
  double rkmu, rk1;
  if (x < 2.0) {
    const double x2 = 0.5 * x;
    const double pimu = std::numbers::pi * mu;
    const double fact1 = std::abs(pimu) < kEps ? 1.0 : pimu / std::sin(pimu);
    double dd = -std::log(x2);
    double e = mu * dd;
    const double fact2 = std::abs(e) < kEps ? 1.0 : std::sinh(e) / e;
    double gam1, gam2;
    temme_gammas(mu, gam1, gam2);
    const double gampl = reciprocal_gamma1p(mu);
    const double gammi = reciprocal_gamma1p(-mu);
    double ff = fact1 * (gam1 * std::cosh(e) + gam2 * fact2 * dd);
    double sum = ff;
    e = std::exp(e);
    double p = 0.5 * e / gampl;
    double q = 0.5 / (e * gammi);
    double cc = 1.0;
    dd = x2 * x2;
    double sum1 = p;
    int i = 1;
    for (; i < kMaxIter; ++i) {
      ff = (i * ff + p + q) / (i * static_cast<double>(i) - mu2);
      cc *= dd / i;
      p /= (i - mu);
      q /= (i + mu);
      const double del = cc * ff;
      sum += del;
      sum1 += cc * (p - i * ff);
      if (std::abs(del) < std::abs(sum) * kEps) break;
    }
    if (i == kMaxIter) throw ConvergenceFailure("bessel: Temme series", i);
    const double scale = std::exp(x);
    rkmu = sum * scale;
    rk1 = sum1 * xi2 * scale;
  } else {
    double bb = 2.0 * (1.0 + x);
    double dd = 1.0 / bb;
    double hh = dd, delh = dd;
    double q1 = 0.0, q2 = 1.0;
    const double a1 = 0.25 - mu2;
    double q = a1, cc = a1;
    double a = -a1;
    double s = 1.0 + q * delh;
    int i = 2;
    for (; i < kMaxIter; ++i) {
      a -= 2 * (i - 1);
      cc = -a * cc / i;
      const double qnew = (q1 - bb * q2) / a;
      q1 = q2;
      q2 = qnew;
      q += cc * qnew;
      bb += 2.0;
      dd = 1.0 / (bb + a * dd);
      delh = (bb * dd - 1.0) * delh;
      hh += delh;
      const double dels = q * delh;
      s += dels;
      if (std::abs(dels / s) < kEps) break;
    }
    if (i == kMaxIter) throw ConvergenceFailure("bessel: K continued fraction", i);
    hh = a1 * hh;
    rkmu = std::sqrt(std::numbers::pi / (2.0 * x)) / s;
    rk1 = rkmu * (mu + x + 0.5 - hh) * xi;
  }

  const double rkmup = mu * xi * rkmu - rk1;
  const double rimu = xi / (f * rkmu - rkmup);
  ScaledBesselIK out;
  if (x < 2.0) {
    // The Wronskian above cancels like 1/x for mu near -1/2; sum the
    // ascending series instead.
    const double q = 0.25 * x * x;
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < kMaxIter && term > kEps * sum; ++k) {
      term *= q / (k * (nu + k));
      sum += term;
    }
    out.i = std::exp(nu * std::log(0.5 * x) - std::lgamma(nu + 1.0) - x) * sum;
    out.ip = h * out.i;
  } else {
    out.i = rimu * ril1 / ril;
    out.ip = rimu * rip1 / ril;
  }
  for (int i = 1; i <= nl; ++i) {
    const double rktemp = (mu + i) * xi2 * rk1 + rkmu;
    rkmu = rk1;
    rk1 = rktemp;
  }
  out.k = rkmu;
  out.kp = nu * xi * rkmu - rk1;
  return out;
}

double bessel_i(double nu, double x) {
  const auto b = bessel_ik_scaled(nu, x);
  return b.i * std::exp(x);
}

double bessel_k(double nu, double x) {
  const auto b = bessel_ik_scaled(nu, x);
  return b.k * std::exp(-x);
}

LogBesselIK log_bessel_ik(double nu, double x) {
  if (!(x > 0.0) || !(nu >= 0.0)) throw DomainError("log_bessel_ik: need x > 0 and nu >= 0");
  if (nu <= 40.0) {
    const auto b = bessel_ik_scaled(nu, x);
    if (b.i > 0.0 && std::isfinite(b.k)) return {std::log(b.i) + x, std::log(b.k) - x};
  }
  const double z = x / nu;
  const double sq = std::sqrt(1.0 + z * z);
  const double t = 1.0 / sq, t2 = t * t;
  const double eta = sq + std::log(z / (1.0 + sq));
  const double u1 = t * (3.0 - 5.0 * t2) / 24.0;
  const double u2 = t2 * (81.0 + t2 * (-462.0 + t2 * 385.0)) / 1152.0;
  const double u3 =
      t * t2 * (30375.0 + t2 * (-369603.0 + t2 * (765765.0 - t2 * 425425.0))) / 414720.0;
  const double u4 =
      t2 * t2 *
      (4465125.0 + t2 * (-94121676.0 + t2 * (349922430.0 + t2 * (-446185740.0 + t2 * 185910725.0)))) /
      39813120.0;
  const double v = 1.0 / nu;
  const double si = 1.0 + v * (u1 + v * (u2 + v * (u3 + v * u4)));
  const double sk = 1.0 + v * (-u1 + v * (u2 + v * (-u3 + v * u4)));
  const double base = -0.25 * std::log(1.0 + z * z);
  return {nu * eta - 0.5 * std::log(2.0 * std::numbers::pi * nu) + base + std::log(si),
          -nu * eta + 0.5 * std::log(std::numbers::pi / (2.0 * nu)) + base + std::log(sk)};
}

} // namespace isq

#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <boost/rational.hpp>

namespace isq {

using Rational = boost::rational<long long>;

// A Lebesgue exponent in [1, inf], held exactly.
class Exponent {
public:
  static Exponent finite(Rational v);
  static Exponent infinity();
  /// "inf", "infinity", an integer, "a/b" or a terminating decimal such as
  /// "1.25". Throws InvalidRange on anything else or on values below 1.
  static Exponent parse(const std::string &text);

  bool is_infinite() const { return infinite_; }
  Rational value() const; // throws DomainError when infinite
  Rational reciprocal() const { return infinite_ ? Rational(0) : Rational(1) / value_; }
  /// Hoelder conjugate: 1/p + 1/p' = 1.
  Exponent conjugate() const;
  double to_double() const;
  std::string str() const;

  friend bool operator==(const Exponent &, const Exponent &) = default;

private:
  Exponent(Rational v, bool inf) : value_(v), infinite_(inf) {}
  Rational value_{1};
  bool infinite_ = false;
};

std::string to_string(const Rational &r);

/// x < sqrt 2, decided exactly.
bool below_sqrt2(const Rational &x);

struct RegionQuery {
  Exponent q = Exponent::finite(2);
  Exponent s = Exponent::finite(2);
};

// Open interval (lower, sqrt 2) of Schur weights p. The lower end is a
// rational or -sqrt 2.
struct WeightInterval {
  bool empty = true;
  bool lower_is_minus_sqrt2 = false;
  Rational lower{0};
  double lower_value() const;
  double upper_value() const;
  bool contains(double p) const;
};

struct RegionVerdict {
  RegionQuery query;
  Rational condition1{0};                 // 1/q + 1/s'
  std::array<Rational, 4> quantities{};   // 2 - 3/s', 2 - 3/q, 3/q - 5/2, 3/s' - 5/2
  Rational condition2{0};                 // max of the four
  bool condition1_holds = false;          // 4/3 <= condition1 <= 5/3
  bool condition2_holds = false;          // condition2 < sqrt 2
  bool admissible = false;
  WeightInterval certificate;             // empty unless admissible
  /// condition2 * |condition2|; compared against 2.
  Rational condition2_signed_square() const { return condition2 * boost::abs(condition2); }
};

RegionVerdict region_check(const RegionQuery &query);

/// (q, s) -> (s', q').
RegionQuery dual_query(const RegionQuery &query);

// ---------------------------------------------------------------------------
// Dyadic Schur test. With a = 1/q, b = 1/s', the three ordered regions
// |x| >= |y| >= 1, |x| >= 1 >= |y| and 1 >= |x| >= |y| reduce to the kernels
//   (1) 2^{(j-k) alpha1 + j beta1},  0 <= j <= k
//   (2) 2^{-k alpha1 - j alpha3},    j, k >= 0
//   (3) 2^{(k-j) alpha3 - k beta3},  0 <= k <= j
// with alpha1 = p + 3a - 2, alpha3 = 5/2 - 3b + p, beta1 = 4 - 3a - 3b and
// beta3 = 5 - 3a - 3b.

struct TailRatio {
  char direction;  // 'k' or 'j'
  double exponent; // geometric decay rate in log2
  double analytic; // 2^{-exponent}
  double observed; // ratio of the last two terms at depth K
};

struct SchurCase {
  int region = 1;
  std::vector<TailRatio> ratios;
  double growth_exponent = 0.0; // beta1, 0 or -beta3: must be <= 0
  double max_row_sum = 0.0, max_column_sum = 0.0;
  double bound = 0.0; // sqrt(max_row_sum * max_column_sum)
  bool convergent = false;
  std::vector<double> bound_trail; // bound at depth 0 .. K
};

struct SchurCertificate {
  RegionQuery query;
  double p = 0.0;
  int depth = 0;
  bool p_in_interval = false;
  std::array<SchurCase, 3> cases;
  bool certified = false; // every case convergent
  double bound = 0.0;     // sum of the three case bounds
};

/// Evaluates the dyadic sums at depth K. A p outside the certificate
/// interval is reported through p_in_interval / convergent, never thrown.
/// Throws InvalidRange if K < 1.
SchurCertificate schur_certificate(const RegionQuery &query, double p, int depth);

} // namespace isq

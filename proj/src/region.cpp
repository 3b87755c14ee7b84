#include "isq/region.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "isq/error.hpp"

namespace isq {

namespace {

constexpr long long max_denominator = 1'000'000;

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

long long parse_digits(const std::string &t, const std::string &whole) {
  if (t.empty() || t.size() > 12 ||
      !std::all_of(t.begin(), t.end(), [](unsigned char c) { return std::isdigit(c); }))
    throw InvalidRange("exponent: cannot parse '" + whole + "'");
  return std::stoll(t);
}

} // namespace

Exponent Exponent::finite(Rational v) {
  if (v < Rational(1)) throw InvalidRange("exponent must be >= 1, got " + to_string(v));
  return {v, false};
}

Exponent Exponent::infinity() { return {Rational(1), true}; }

Exponent Exponent::parse(const std::string &text) {
  const std::string t = lower(text);
  if (t == "inf" || t == "infinity" || t == "∞") return infinity();
  Rational v;
  if (const auto slash = t.find('/'); slash != std::string::npos) {
    const long long den = parse_digits(t.substr(slash + 1), text);
    if (den == 0 || den > max_denominator) throw InvalidRange("exponent: bad denominator in '" + text + "'");
    v = Rational(parse_digits(t.substr(0, slash), text), den);
  } else if (const auto dot = t.find('.'); dot != std::string::npos) {
    const std::string frac = t.substr(dot + 1);
    if (frac.size() > 6) throw InvalidRange("exponent: too many decimals in '" + text + "'");
    long long den = 1;
    for (std::size_t k = 0; k < frac.size(); ++k) den *= 10;
    const long long whole = dot == 0 ? 0 : parse_digits(t.substr(0, dot), text);
    const long long part = frac.empty() ? 0 : parse_digits(frac, text);
    v = Rational(whole * den + part, den);
  } else {
    v = Rational(parse_digits(t, text));
  }
  return finite(v);
}

Rational Exponent::value() const {
  if (infinite_) throw DomainError("exponent is infinite");
  return value_;
}

Exponent Exponent::conjugate() const {
  const Rational inv = Rational(1) - reciprocal();
  if (inv == Rational(0)) return infinity();
  return finite(Rational(1) / inv);
}

double Exponent::to_double() const {
  return infinite_ ? std::numeric_limits<double>::infinity() : boost::rational_cast<double>(value_);
}

std::string Exponent::str() const { return infinite_ ? "inf" : to_string(value_); }

std::string to_string(const Rational &r) {
  if (r.denominator() == 1) return std::to_string(r.numerator());
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

bool below_sqrt2(const Rational &x) { return x < Rational(0) || x * x < Rational(2); }

double WeightInterval::lower_value() const {
  return lower_is_minus_sqrt2 ? -std::sqrt(2.0) : boost::rational_cast<double>(lower);
}

double WeightInterval::upper_value() const { return std::sqrt(2.0); }

bool WeightInterval::contains(double p) const {
  return !empty && p > lower_value() && p < upper_value();
}

RegionVerdict region_check(const RegionQuery &query) {
  RegionVerdict v;
  v.query = query;
  const Rational a = query.q.reciprocal();
  const Rational b = Rational(1) - query.s.reciprocal(); // 1/s'
  const Rational half5(5, 2), two(2), three(3);

  v.condition1 = a + b;
  v.condition1_holds = Rational(4, 3) <= v.condition1 && v.condition1 <= Rational(5, 3);
  v.quantities = {two - three * b, two - three * a, three * a - half5, three * b - half5};
  v.condition2 = *std::max_element(v.quantities.begin(), v.quantities.end());
  v.condition2_holds = below_sqrt2(v.condition2);
  v.admissible = v.condition1_holds && v.condition2_holds;

  if (v.admissible) {
    // 2 - 3/q - p < 0 and 5/2 - 3/s' + p > 0, inside |p| < sqrt 2.
    const Rational lo = std::max(two - three * a, three * b - half5);
    WeightInterval &c = v.certificate;
    c.lower = lo;
    c.lower_is_minus_sqrt2 = lo < Rational(0) && lo * lo >= Rational(2);
    c.empty = !below_sqrt2(lo);
  }
  return v;
}

RegionQuery dual_query(const RegionQuery &query) {
  return {query.s.conjugate(), query.q.conjugate()};
}

} // namespace isq

namespace isq {

namespace {

template <class Term>
SchurCase dyadic_case(int region, int depth, Term term) {
  SchurCase c;
  c.region = region;
  const int n = depth + 1;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n); // m(k, j)
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      if (const auto t = term(k, j)) m(k, j) = *t;
  for (int d = 0; d < n; ++d) {
    const auto block = m.topLeftCorner(d + 1, d + 1);
    const double row = block.rowwise().sum().maxCoeff();
    const double col = block.colwise().sum().maxCoeff();
    c.bound_trail.push_back(std::sqrt(row * col));
    if (d == depth) {
      c.max_row_sum = row;
      c.max_column_sum = col;
      c.bound = c.bound_trail.back();
    }
  }
  return c;
}

TailRatio ratio(char direction, double exponent, double last, double previous) {
  return {direction, exponent, std::exp2(-exponent), last / previous};
}

} // namespace

SchurCertificate schur_certificate(const RegionQuery &query, double p, int depth) {
  if (depth < 1) throw InvalidRange("schur_certificate: depth must be >= 1");
  const double a = boost::rational_cast<double>(query.q.reciprocal());
  const double b = 1.0 - boost::rational_cast<double>(query.s.reciprocal());
  const double alpha1 = p + 3.0 * a - 2.0;
  const double alpha3 = 2.5 - 3.0 * b + p;
  const double beta1 = 4.0 - 3.0 * a - 3.0 * b;
  const double beta3 = 5.0 - 3.0 * a - 3.0 * b;
  using Opt = std::optional<double>;

  SchurCertificate cert;
  cert.query = query;
  cert.p = p;
  cert.depth = depth;
  cert.p_in_interval = region_check(query).certificate.contains(p);

  auto t1 = [&](int k, int j) { return j <= k ? Opt(std::exp2((j - k) * alpha1 + j * beta1)) : Opt(); };
  auto t2 = [&](int k, int j) { return Opt(std::exp2(-k * alpha1 - j * alpha3)); };
  auto t3 = [&](int k, int j) { return k <= j ? Opt(std::exp2((k - j) * alpha3 - k * beta3)) : Opt(); };

  const int K = depth;
  cert.cases[0] = dyadic_case(1, K, t1);
  cert.cases[0].ratios = {ratio('k', alpha1, *t1(K, 0), *t1(K - 1, 0))};
  cert.cases[0].growth_exponent = beta1;
  cert.cases[1] = dyadic_case(2, K, t2);
  cert.cases[1].ratios = {ratio('k', alpha1, *t2(K, 0), *t2(K - 1, 0)),
                          ratio('j', alpha3, *t2(0, K), *t2(0, K - 1))};
  cert.cases[1].growth_exponent = 0.0;
  cert.cases[2] = dyadic_case(3, K, t3);
  cert.cases[2].ratios = {ratio('j', alpha3, *t3(0, K), *t3(0, K - 1))};
  cert.cases[2].growth_exponent = -beta3;

  cert.certified = true;
  for (auto &c : cert.cases) {
    c.convergent = c.growth_exponent <= 0.0;
    for (const auto &r : c.ratios) c.convergent = c.convergent && r.exponent > 0.0;
    cert.certified = cert.certified && c.convergent;
    cert.bound += c.bound;
  }
  return cert;
}

} // namespace isq

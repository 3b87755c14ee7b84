#include "isq/tridiagonal.hpp"

#include <cmath>
#include <limits>

#include <lapacke.h>

#include "isq/error.hpp"

namespace isq {

std::vector<double> multiply(const SymTridiag &t, std::span<const double> x) {
  const std::size_t n = t.size();
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = t.diag[i] * x[i];
    if (i > 0) s += t.off[i - 1] * x[i - 1];
    if (i + 1 < n) s += t.off[i] * x[i + 1];
    y[i] = s;
  }
  return y;
}

std::vector<double> solve_shifted(const SymTridiag &t, double shift,
                                  std::span<const double> rhs) {
  const std::size_t n = t.size();
  std::vector<double> d(n), l(n > 0 ? n - 1 : 0), x(rhs.begin(), rhs.end());
  d[0] = t.diag[0] + shift;
  for (std::size_t i = 1; i < n; ++i) {
    if (d[i - 1] == 0.0)
      throw DomainError("solve_shifted: zero pivot at row " + std::to_string(i - 1));
    l[i - 1] = t.off[i - 1] / d[i - 1];
    d[i] = t.diag[i] + shift - l[i - 1] * t.off[i - 1];
  }
  if (d[n - 1] == 0.0) throw DomainError("solve_shifted: zero pivot at last row");
  for (std::size_t i = 1; i < n; ++i) x[i] -= l[i - 1] * x[i - 1];
  for (std::size_t i = 0; i < n; ++i) x[i] /= d[i];
  for (std::size_t i = n - 1; i-- > 0;) x[i] -= l[i] * x[i + 1];
  return x;
}

TridiagEigen tridiagonal_eigen(const SymTridiag &t, bool want_vectors,
                               SpectrumSelection sel) {
  const lapack_int n = static_cast<lapack_int>(t.size());
  std::vector<double> d = t.diag;
  std::vector<double> e = t.off;
  e.resize(static_cast<std::size_t>(n), 0.0);

  char range = 'A';
  double vl = 0.0, vu = 0.0;
  lapack_int il = 0, iu = 0;
  lapack_int max_count = n;
  if (sel.kind == SpectrumSelection::Kind::index_range) {
    range = 'I';
    il = static_cast<lapack_int>(sel.first) + 1;
    iu = static_cast<lapack_int>(sel.last) + 1;
    max_count = iu - il + 1;
  } else if (sel.kind == SpectrumSelection::Kind::value_range) {
    range = 'V';
    vl = sel.lower;
    vu = sel.upper;
  }

  TridiagEigen out;
  std::vector<double> w(static_cast<std::size_t>(n));
  std::vector<lapack_int> isuppz(2 * static_cast<std::size_t>(n));
  lapack_int m = 0;
  Eigen::MatrixXd z;
  if (want_vectors) z.resize(n, max_count);
  const lapack_int info = LAPACKE_dstevr(
      LAPACK_COL_MAJOR, want_vectors ? 'V' : 'N', range, n, d.data(), e.data(), vl, vu,
      il, iu, 0.0, &m, w.data(), want_vectors ? z.data() : nullptr,
      want_vectors ? n : 1, isuppz.data());
  if (info != 0) throw ConvergenceFailure("dstevr failed to converge", info);

  out.values.assign(w.begin(), w.begin() + m);
  if (want_vectors) out.vectors = z.leftCols(m);
  return out;
}

double smallest_eigenvalue(const SymTridiag &t) {
  return tridiagonal_eigen(t, false, SpectrumSelection::indices(0, 0)).values.at(0);
}

namespace {

Eigen::VectorXd start_vector(std::size_t dim) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < dim; ++i)
    v[static_cast<Eigen::Index>(i)] = 1.0 + 0.25 * std::sin(0.7 * static_cast<double>(i) + 0.3);
  return v.normalized();
}

Eigen::VectorXd apply_op(const SymOperator &op, const Eigen::VectorXd &x) {
  Eigen::VectorXd y(x.size());
  op(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())),
     std::span<double>(y.data(), static_cast<std::size_t>(y.size())));
  return y;
}

} // namespace

TopEigen lanczos_top(const SymOperator &op, std::size_t dim, double rel_tol, int max_steps) {
  const auto n = static_cast<Eigen::Index>(dim);
  max_steps = std::min<int>(max_steps, static_cast<int>(dim));
  Eigen::MatrixXd basis(n, max_steps);
  std::vector<double> alpha, beta;
  basis.col(0) = start_vector(dim);

  TopEigen best;
  for (int j = 0; j < max_steps; ++j) {
    Eigen::VectorXd w = apply_op(op, basis.col(j));
    const double a = basis.col(j).dot(w);
    alpha.push_back(a);
    // Two passes of classical Gram-Schmidt against the whole basis.
    for (int pass = 0; pass < 2; ++pass) {
      const Eigen::VectorXd c = basis.leftCols(j + 1).transpose() * w;
      w -= basis.leftCols(j + 1) * c;
    }
    const double b = w.norm();

    const bool last = (j + 1 == max_steps);
    if (j % 4 == 3 || last || b < 1e-300) {
      const int k = j + 1;
      Eigen::MatrixXd tk = Eigen::MatrixXd::Zero(k, k);
      for (int i = 0; i < k; ++i) {
        tk(i, i) = alpha[static_cast<std::size_t>(i)];
        if (i + 1 < k) tk(i, i + 1) = tk(i + 1, i) = beta[static_cast<std::size_t>(i)];
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tk);
      const double theta = es.eigenvalues()[k - 1];
      const double resid = std::abs(b * es.eigenvectors()(k - 1, k - 1));
      best.value = theta;
      best.iterations = k;
      best.residual = resid;
      if (resid <= rel_tol * std::abs(theta) || last || b < 1e-300) {
        best.vector = basis.leftCols(k) * es.eigenvectors().col(k - 1);
        if (!(resid <= rel_tol * std::abs(theta)) && !(b < 1e-300) && resid > 1e-6 * std::abs(theta))
          throw ConvergenceFailure("lanczos_top: no convergence", k);
        return best;
      }
    }
    beta.push_back(b);
    basis.col(j + 1) = w / b;
  }
  return best;
}

TopEigen power_iteration(const SymOperator &op, std::size_t dim, double rel_tol, int max_iter) {
  Eigen::VectorXd v = start_vector(dim);
  double lambda = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    Eigen::VectorXd w = apply_op(op, v);
    const double next = v.dot(w);
    const double nrm = w.norm();
    if (nrm == 0.0) return {0.0, v, it, 0.0};
    const double resid = (w - next * v).norm();
    v = w / nrm;
    if (resid <= rel_tol * std::abs(next)) return {next, v, it, resid};
    lambda = next;
  }
  throw ConvergenceFailure("power_iteration: no convergence, last estimate " +
                               std::to_string(lambda),
                           max_iter);
}

} // namespace isq

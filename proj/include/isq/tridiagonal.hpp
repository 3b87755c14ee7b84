#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace isq {

/// Real symmetric tridiagonal matrix stored by its diagonal and first
/// off-diagonal (off.size() == diag.size() - 1).
struct SymTridiag {
  std::vector<double> diag;
  std::vector<double> off;

  std::size_t size() const { return diag.size(); }
};

std::vector<double> multiply(const SymTridiag &t, std::span<const double> x);

/// Solves (t + shift I) x = rhs by LDL^T elimination without pivoting.
/// Throws DomainError on a vanishing pivot; callers only use it on matrices
/// known to be positive definite after the shift.
std::vector<double> solve_shifted(const SymTridiag &t, double shift,
                                  std::span<const double> rhs);

/// Which part of the spectrum to compute.
struct SpectrumSelection {
  enum class Kind { all, index_range, value_range } kind = Kind::all;
  // 0-based inclusive indices for index_range.
  std::size_t first = 0, last = 0;
  // half-open (lower, upper] for value_range.
  double lower = 0.0, upper = 0.0;

  static SpectrumSelection everything() { return {}; }
  static SpectrumSelection indices(std::size_t first, std::size_t last) {
    return {Kind::index_range, first, last, 0.0, 0.0};
  }
  static SpectrumSelection values(double lower, double upper) {
    return {Kind::value_range, 0, 0, lower, upper};
  }
};

struct TridiagEigen {
  std::vector<double> values;  // ascending
  Eigen::MatrixXd vectors;     // column k pairs with values[k]; empty if not requested
};

/// LAPACK dstevr (MRRR). Throws ConvergenceFailure with LAPACK's info code.
TridiagEigen tridiagonal_eigen(const SymTridiag &t, bool want_vectors,
                               SpectrumSelection sel = {});

double smallest_eigenvalue(const SymTridiag &t);

/// Action of a symmetric linear operator on R^n.
using SymOperator = std::function<void(std::span<const double>, std::span<double>)>;

struct TopEigen {
  double value = 0.0;
  Eigen::VectorXd vector;
  int iterations = 0;
  double residual = 0.0;
};

/// Largest eigenvalue of a symmetric operator by Lanczos with full
/// reorthogonalisation. Deterministic start vector.
TopEigen lanczos_top(const SymOperator &op, std::size_t dim,
                     double rel_tol = 1e-11, int max_steps = 400);

/// Plain power iteration; used as an independent cross-check of lanczos_top
/// on operators with a well separated dominant eigenvalue.
TopEigen power_iteration(const SymOperator &op, std::size_t dim,
                         double rel_tol = 1e-12, int max_iter = 20000);

} // namespace isq

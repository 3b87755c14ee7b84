#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "isq/radial_core.hpp"
#include "isq/region.hpp"

namespace isq {

enum class OperatorTag {
  resolvent_difference, // P-perp ((H+1)^{-1} - (-Delta+1)^{-1})
  h_resolvent_pperp,    // P-perp (H+1)^{-1}
  free_resolvent,       // (-Delta+1)^{-1}, all sectors
};

enum class NormMethod { power_iteration, kernel_integration, sup_kernel };

std::string to_string(OperatorTag tag);
std::string to_string(NormMethod method);
/// Throws InvalidRange on an unknown name.
OperatorTag parse_operator_tag(const std::string &name);

struct NormTrailEntry {
  std::string label; // "base", "n x2", "domain x2"
  double r_min, r_max;
  std::size_t n;
  double value;
};

struct NormOptions {
  RadialGrid grid = make_grid(1e-3, 60.0, 4096);
  int l_max = 32;
  bool refine = true; // add the n-doubled and domain-doubled trail entries
};

struct NormReport {
  OperatorTag op = OperatorTag::resolvent_difference;
  Exponent q = Exponent::finite(2), s = Exponent::finite(2);
  NormMethod method = NormMethod::power_iteration;
  double estimate = 0.0;       // the upper value on the base grid
  double lower = 0.0, upper = 0.0;
  std::vector<NormTrailEntry> trail;
  double trail_deviation = 0.0; // max |value - base| / base over the trail
  double argmax_radius = 0.0;   // sup location for the sup-kernel routes
  int argmax_sector = -1;       // sector attaining the (2,2) norm
  double tail_fraction = 0.0;
  bool truncation_warning = false;
  bool monotone_in_domain = true; // (2,2) only; reported
};

/// Norm of the discretised operator from L^q to L^s.
///   (2,2):      max over sectors of the top eigenvalue (Lanczos).
///   (2,inf):    sup over x of ||K(x,.)||_2, from kernel rows.
///   (1,2):      sup over y of ||K(.,y)||_2, from point-source responses.
///   (2,s):      upper bound ||T||_{2,2}^{2/s} ||T||_{2,inf}^{1-2/s}; lower
///               bound ||T f||_s / ||f||_2 with f = K(x0,.), x0 the sup point.
///   (q,2):      the same through the adjoint, s = q'.
/// Throws InvalidRange for pairs with neither exponent equal to 2, and
/// ConvergenceFailure if Lanczos stalls.
NormReport estimate_norm(OperatorTag op, const Exponent &q, const Exponent &s,
                         const NormOptions &options = {});

/// Sup over the sampling lattice of the two routes on one grid, exposed for
/// tests of the dual pair.
struct SupKernel {
  double value = 0.0;
  std::size_t argmax = 0; // grid index
  double tail_fraction = 0.0;
  std::vector<std::size_t> lattice_sizes;
};
SupKernel sup_row_norm(OperatorTag op, const RadialGrid &grid, int l_max);
SupKernel sup_column_norm(OperatorTag op, const RadialGrid &grid, int l_max);

/// ||T||_{2,2} on one grid and the sector attaining it.
struct SectorNorm {
  double value = 0.0;
  int ell = 0;
};
SectorNorm l2_norm(OperatorTag op, const RadialGrid &grid, int l_max);

/// ||T f||_s / ||f||_2 for f = K(x0, .), x0 at grid index i0.
double witness_ratio(OperatorTag op, const RadialGrid &grid, int l_max, std::size_t i0, double s);

/// Same log step, r_min and r_max moved out by `factor`.
RadialGrid widen_domain(const RadialGrid &grid, double factor);
/// Same domain, n -> 2n - 1 so that the old nodes are kept.
RadialGrid double_nodes(const RadialGrid &grid);

} // namespace isq

#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "mdl/characters.hpp"
#include "mdl/kernel.hpp"

namespace mdl {

enum class Method { integral, direct, iterated_abel };
const char* method_name(Method m);

enum class Parallel { off, on };

/// Truncation and quadrature parameters actually used by one evaluation.
struct TruncationPlan {
  std::vector<std::uint64_t> cutoffs; // T_i, integer >= 2, period-aligned
  int gauss_nodes = 8;                // G per axis per cell
  double tail_bound = 0.0;            // certified truncation remainder
  double quadrature_estimate = 0.0;   // a-posteriori G vs 2G comparison
};

struct EvaluationResult {
  cplx value = 0.0;
  double error_estimate = 0.0;
  Method method = Method::integral;
  TruncationPlan plan;
  bool in_D = false;
  bool in_D0 = false;
  double wall_time_s = 0.0;
};

/// Default cost ceiling: number of integration cells.  Overridable per call
/// and through the MDL_MAX_CELLS environment variable (CLI).
inline constexpr std::uint64_t kDefaultMaxCells = 10'000'000;

/// The certified bound on the integral restricted to {t1 > T} (equivalently:
/// every prefix t1 + ... + t_i above T), summed over composition terms:
///   sum_k (prod_i alpha_i) (prod_i |(s_i)_{k_i}| / (sigma_r + ... + sigma_i))
///         * (n0 + T)^{-(sigma_1 + ... + sigma_r)}.
/// Requires p in D.
double tail_bound(const SPoint& p, const std::vector<double>& alphas,
                  double T);

/// Certified bound on the integral over {t_j >= T, other axes >= 1}.
/// j is 1-based; for j = 1 this sharpens tail_bound (exact suffix
/// denominators instead of sigma suffixes).  Used to pick box cutoffs.
double axis_tail_bound(const SPoint& p, const std::vector<double>& alphas,
                       int j, double T);

/// Plain tensor-box cell sum: sum over integer cells of
/// prod_i S_i(m_i) * (Gauss tensor quadrature of the kernel over the cell).
/// Deterministic block-pairwise reduction; bit-identical results for
/// Parallel::off and Parallel::on at any thread count.  r <= 3.
cplx integrate_cells(const std::vector<BoundedSequence>& seqs, const SPoint& p,
                     const TruncationPlan& plan,
                     Parallel par = Parallel::on);

/// Full evaluation through the integral representation: box cells plus
/// periodic-mean tail corrections (r <= 2), with certified oscillatory
/// remainders and a G-doubling quadrature estimate.  r = 3 runs the plain
/// box with per-axis certified tails.  Throws region_error outside D (or for
/// sequences without a certified bound) and budget_error when the tolerance
/// is unreachable within max_cells.
EvaluationResult evaluate_integral(const std::vector<BoundedSequence>& seqs,
                                   const SPoint& p, double tol,
                                   std::uint64_t max_cells = kDefaultMaxCells,
                                   Parallel par = Parallel::on);

} // namespace mdl

#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "mdl/characters.hpp"
#include "mdl/integrator.hpp"
#include "mdl/kernel.hpp"

namespace mdl {

/// Result of a series-based evaluation.
struct SummationReport {
  cplx value = 0.0;
  std::vector<std::uint64_t> horizons; // per summation index
  /// Certified tail bound in direct mode; extrapolation spread in
  /// conditional (iterated-abel) mode.
  double spread = 0.0;
  Method mode = Method::direct;
  double wall_time_s = 0.0;
};

/// Nested truncated summation, innermost index last (n_r first in the
/// iterated-limit sense), with certified integral-comparison tails.
/// Requires p strictly in D0; r <= 3.  Principal characters are allowed.
SummationReport evaluate_direct(const std::vector<BoundedSequence>& seqs,
                                const SPoint& p, double tol,
                                std::uint64_t max_terms = 2'000'000'000,
                                Parallel par = Parallel::on);

/// Conditional-region series evaluator, r <= 2.  r = 1: period-aligned,
/// mean-corrected Abel partial sums (certified remainder).  r = 2: inner
/// index resummed through the shifted one-dimensional integral
/// representation (exact per-cell integrals plus mean-corrected tail),
/// outer index summed to period-aligned horizons with Cesaro smoothing
/// until successive averages stabilise below tol.
SummationReport
evaluate_iterated_abel(const std::vector<BoundedSequence>& seqs,
                       const SPoint& p, double tol,
                       std::uint64_t max_outer_terms = 50'000'000,
                       Parallel par = Parallel::on);

/// Outer partial sums at x = 1..X (inner sums resummed as above); feeds the
/// CLI convergence plots.  r <= 2.
std::vector<cplx>
partial_sum_trajectory(const std::vector<BoundedSequence>& seqs,
                       const SPoint& p, std::uint64_t X);

/// sum_{n=1..X} a(n) (shift+n)^{-s} + mu (shift+X)^{-s} at the period-aligned
/// horizon X >= the certified-bound horizon for eps; the building block the
/// conditional oracles share.  Returns the value and its certified remainder.
struct LineSum {
  cplx value = 0.0;
  double bound = 0.0;
  std::uint64_t horizon = 0;
};
LineSum accelerated_line_sum(const BoundedSequence& seq, cplx s, double shift,
                             double eps,
                             std::uint64_t max_terms = 100'000'000);

} // namespace mdl

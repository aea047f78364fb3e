#pragma once

#include <vector>

namespace mdl {

/// Gauss-Legendre rule mapped to [0, 1].
struct GaussRule {
  std::vector<double> nodes;   // in (0, 1)
  std::vector<double> weights; // sum = 1
};

/// Nodes and weights for an n-point rule (Newton iteration on Legendre
/// polynomials); results are memoised per n.
const GaussRule& gauss_rule(int n);

} // namespace mdl

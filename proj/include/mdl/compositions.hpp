#pragma once

#include <cstdint>
#include <vector>

namespace mdl {

/// One term of the kernel's inner sum: a vector k with sum k_i = r,
/// k_1 + ... + k_i <= i and 0 <= k_i <= i, together with its integer
/// coefficient C(1,k_1) * prod_{i>=2} C(i - k_1 - ... - k_{i-1}, k_i).
struct CompositionTerm {
  std::vector<int> k;
  std::uint64_t coeff = 0;

  bool operator==(const CompositionTerm& other) const = default;
};

/// C(n, j) with the convention C(n, j) = 0 for j < 0 or j > n.
std::uint64_t binomial(std::int64_t n, std::int64_t j);

/// The coefficient of a constraint-satisfying vector; throws
/// std::invalid_argument if k violates the constraints.
std::uint64_t composition_coefficient(const std::vector<int>& k);

/// All constrained compositions for rank r, in decreasing lexicographic
/// order (so r = 2 yields (1,1) then (0,2)).  1 <= r <= 12; results are
/// memoised and shared.
const std::vector<CompositionTerm>& enumerate_compositions(int r);

} // namespace mdl

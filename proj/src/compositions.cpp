#include "mdl/compositions.hpp"

#include <algorithm>
#include <array>
#include <mutex>
#include <stdexcept>

namespace mdl {

namespace {

constexpr int kMaxRank = 12; // coefficients stay far below 2^64 up to here

void check_constraints(const std::vector<int>& k) {
  const int r = static_cast<int>(k.size());
  if (r < 1) throw std::invalid_argument("composition: empty vector");
  int prefix = 0;
  for (int i = 0; i < r; ++i) {
    if (k[i] < 0 || k[i] > i + 1)
      throw std::invalid_argument("composition: k_i out of [0, i]");
    prefix += k[i];
    if (prefix > i + 1)
      throw std::invalid_argument("composition: prefix sum exceeds i");
  }
  if (prefix != r)
    throw std::invalid_argument("composition: entries must sum to the rank");
}

void emit(int i, int r, int prefix, std::vector<int>& k,
          std::vector<CompositionTerm>& out) {
  if (i == r) {
    if (prefix == r) out.push_back({k, composition_coefficient(k)});
    return;
  }
  // decreasing k_i gives decreasing lexicographic output order
  int hi = std::min(i + 1 - prefix, r - prefix);
  for (int v = hi; v >= 0; --v) {
    k[i] = v;
    emit(i + 1, r, prefix + v, k, out);
  }
}

} // namespace

std::uint64_t binomial(std::int64_t n, std::int64_t j) {
  if (j < 0 || n < 0 || j > n) return 0;
  if (j > n - j) j = n - j;
  std::uint64_t r = 1;
  for (std::int64_t i = 1; i <= j; ++i)
    r = r * static_cast<std::uint64_t>(n - j + i) /
        static_cast<std::uint64_t>(i);
  return r;
}

std::uint64_t composition_coefficient(const std::vector<int>& k) {
  check_constraints(k);
  std::uint64_t c = binomial(1, k[0]);
  int prefix = k[0];
  for (int i = 2; i <= static_cast<int>(k.size()); ++i) {
    c *= binomial(i - prefix, k[i - 1]);
    prefix += k[i - 1];
  }
  return c;
}

const std::vector<CompositionTerm>& enumerate_compositions(int r) {
  if (r < 1 || r > kMaxRank)
    throw std::invalid_argument(
        "enumerate_compositions: rank must be in [1, 12]");
  static std::array<std::vector<CompositionTerm>, kMaxRank + 1> cache;
  static std::array<std::once_flag, kMaxRank + 1> flags;
  std::call_once(flags[r], [r] {
    std::vector<int> k(r, 0);
    emit(0, r, 0, k, cache[r]);
  });
  return cache[r];
}

} // namespace mdl

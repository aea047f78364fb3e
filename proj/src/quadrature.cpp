#include "mdl/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace mdl {

namespace {

GaussRule build_rule(int n) {
  // Newton iteration on P_n over [-1, 1], then map to [0, 1].
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int m = (n + 1) / 2;
  const double pi = 3.14159265358979323846;
  for (int i = 1; i <= m; ++i) {
    double z = std::cos(pi * (i - 0.25) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - z * z) * pp * pp);
    rule.nodes[i - 1] = 0.5 * (1.0 - z);
    rule.nodes[n - i] = 0.5 * (1.0 + z);
    rule.weights[i - 1] = 0.5 * w;
    rule.weights[n - i] = 0.5 * w;
  }
  return rule;
}

} // namespace

const GaussRule& gauss_rule(int n) {
  if (n < 1 || n > 128)
    throw std::invalid_argument("gauss_rule: order must be in [1, 128]");
  static std::map<int, GaussRule> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, build_rule(n)).first;
  return it->second;
}

} // namespace mdl

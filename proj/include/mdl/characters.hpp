#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace mdl {

using cplx = std::complex<double>;

/// Exact root of unity e^{2*pi*i*num/den}, or zero.  Used for character
/// values so that prefix sums and orthogonality checks do not drift.
struct RootOfUnity {
  std::int64_t num = 0; // 0 <= num < den, gcd(num, den) = 1 unless num = 0
  std::int64_t den = 1;
  bool zero = false;

  static RootOfUnity make(std::int64_t num, std::int64_t den);
  static RootOfUnity zero_value() { return RootOfUnity{0, 1, true}; }
  static RootOfUnity one() { return RootOfUnity{0, 1, false}; }

  RootOfUnity times(const RootOfUnity& other) const;
  RootOfUnity conj() const;
  bool operator==(const RootOfUnity& other) const = default;

  cplx value() const;
};

/// (Z/qZ)^* presented as a product of cyclic groups.  Generators follow a
/// fixed convention: the 2-power factor first (for 2^k with k >= 3 the pair
/// -1, 5; for 4 the single generator -1), then one generator per odd prime
/// power, smallest primitive root, primes increasing.  Lifted to mod q by CRT.
struct UnitGroup {
  std::uint64_t modulus = 1;
  std::uint64_t phi = 1;
  std::vector<std::uint64_t> generators; // g_j mod q
  std::vector<std::uint64_t> orders;     // d_j, prod d_j = phi(q)
  // exponent vector per residue; empty for non-units.
  std::vector<std::vector<std::uint32_t>> dlog;
};

UnitGroup unit_group(std::uint64_t q);

std::uint64_t euler_phi(std::uint64_t q);

/// Dirichlet character mod q addressed by its exponent vector on the
/// unit-group generators.  Immutable; safe to share across threads.
class DirichletCharacter {
public:
  DirichletCharacter(std::uint64_t q, std::vector<std::uint32_t> exponents);

  std::uint64_t modulus() const { return q_; }
  bool principal() const { return principal_; }
  const std::vector<std::uint32_t>& exponents() const { return exponents_; }

  /// Exact value at n (q-periodic, zero off units).
  const RootOfUnity& value(std::uint64_t n) const { return values_[n % q_]; }
  cplx value_c(std::uint64_t n) const { return values_[n % q_].value(); }

  /// S(t) = sum_{n <= floor(t)} chi(n); O(1) via the periodic prefix table.
  cplx partial_sum(double t) const;

  DirichletCharacter conj() const;

  const std::vector<cplx>& prefix_sums() const { return prefix_; }

private:
  std::uint64_t q_;
  std::vector<std::uint32_t> exponents_;
  std::vector<RootOfUnity> values_; // length q, index n mod q
  std::vector<cplx> prefix_;        // prefix_[t] = S(t), t = 0..q
  bool principal_;
};

std::vector<DirichletCharacter> enumerate_characters(std::uint64_t q);

/// Arithmetic function a(n) with a certified bound alpha on all partial sums
/// |sum_{m<=t} a(m)|.  Periodic zero-sum sequences get O(1) partial sums and
/// the mean/oscillation data the integrator's tail corrections need.
class BoundedSequence {
public:
  enum class Provenance { character, alternating, periodic_table, custom };

  static BoundedSequence character(const DirichletCharacter& chi);
  static BoundedSequence alternating();
  /// values = one period of a(n) starting at n = 1; requires zero period sum.
  static BoundedSequence periodic_table(std::vector<cplx> values);
  static BoundedSequence custom(std::function<cplx(std::uint64_t)> eval,
                                std::optional<double> certified_bound);

  Provenance provenance() const { return provenance_; }
  const std::string& label() const { return label_; }
  bool periodic() const { return period_ != 0; }
  std::uint64_t period() const { return period_; }
  bool principal_character() const { return principal_; }

  cplx value(std::uint64_t n) const;

  /// S(t) = sum_{n <= floor(t)} a(n).
  cplx partial_sum(double t) const;

  /// Certified alpha with |S(t)| <= alpha for all t; throws region_error for
  /// principal characters and uncertified custom sequences.
  double partial_sum_bound() const;
  bool has_partial_sum_bound() const;

  /// mu = period average of S(t); 0 for non-periodic sequences.
  cplx mean() const { return mean_; }
  /// beta = max_x |int_0^x (S(u) - mu) du| over one period (piecewise linear,
  /// exact).  Only meaningful when periodic().
  double osc_primitive_bound() const { return osc_bound_; }
  /// max_n |a(n)| (for absolute-convergence majorants).
  double sup_norm() const { return sup_; }

  BoundedSequence conj() const;

private:
  BoundedSequence() = default;
  void finish_periodic(); // fills prefix/mean/osc from values_

  Provenance provenance_ = Provenance::custom;
  std::string label_;
  std::uint64_t period_ = 0;     // 0 = non-periodic
  std::vector<cplx> values_;     // one period, a(1..p); index (n-1) mod p
  std::vector<cplx> prefix_;     // prefix_[t] = S(t), t = 0..p; prefix_[p]
                                 // forced to the exact period sum (0 here)
  cplx period_sum_ = 0.0;
  std::function<cplx(std::uint64_t)> eval_;
  std::optional<double> bound_;
  cplx mean_ = 0.0;
  double osc_bound_ = 0.0;
  double sup_ = 0.0;
  bool principal_ = false;
};

/// Free-function spellings used throughout the evaluators.
cplx partial_sum(const BoundedSequence& seq, double t);
double partial_sum_bound(const BoundedSequence& seq);

/// Loads {"period": p, "values": [[re, im], ...]} and certifies the bound.
BoundedSequence load_periodic_sequence(const std::string& path);
BoundedSequence parse_periodic_sequence(const std::string& json_text);

} // namespace mdl

#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include "mdl/compositions.hpp"

namespace mdl {

using cplx = std::complex<double>;

/// Argument point: the complex exponent vector plus the base shift n0.
struct SPoint {
  explicit SPoint(std::vector<cplx> s_values, std::uint64_t n0_shift = 0);

  int rank() const { return static_cast<int>(s.size()); }

  std::vector<cplx> s;
  std::vector<double> sigma; // sigma[i] = Re(s[i])
  std::uint64_t n0 = 0;
};

/// Rising factorial (s)_k = s (s+1) ... (s+k-1), (s)_0 = 1.
cplx pochhammer(cplx s, unsigned k);

/// Conditional-convergence region: every suffix sum of sigma is > 0.
bool in_domain_D(const SPoint& p);

/// Absolute-convergence region: the suffix sum over the last i+1
/// coordinates exceeds i+1, for each i.
bool in_domain_D0(const SPoint& p);

/// z^w for positive real z via the real logarithm (no branch choice).
cplx pow_pos(double z, cplx w);

struct KernelValue {
  cplx value = 0.0;
  struct TermValue {
    std::vector<int> k;
    std::uint64_t coeff;
    cplx value; // coeff * prod_i (s_i)_{k_i} / base_i^{s_i + k_i}
  };
  std::optional<std::vector<TermValue>> terms;
};

/// Integrand kernel at t (all t_i >= 1): the composition-indexed sum of
/// Pochhammer products over shifted power bases.  Set breakdown to keep the
/// per-term values (used by the CLI --explain flag and tests).
KernelValue kernel_eval(const std::vector<double>& t, const SPoint& p,
                        const std::vector<CompositionTerm>& comps,
                        bool breakdown = false);

/// Hot-path kernel: per-point constants (Pochhammer products, coefficient
/// weights) are prepared once, then eval() costs r logs + one complex
/// exponential per call.  Immutable after construction; call concurrently.
class KernelEvaluator {
public:
  KernelEvaluator(const SPoint& p, const std::vector<CompositionTerm>& comps);

  cplx eval(const double* t) const;
  cplx eval(const std::vector<double>& t) const { return eval(t.data()); }

  int rank() const { return r_; }

private:
  int r_;
  double n0_;
  std::vector<cplx> s_;
  std::vector<cplx> term_const_;         // coeff * prod poch(s_i, k_i)
  std::vector<int> term_k_;              // flattened k vectors, r per term
  std::vector<int> max_k_;               // max k_i over terms, per axis
};

/// Both sides of the telescoping derivative identity behind the kernel:
/// the rhs is the rank-r kernel itself, the lhs the negated t1-derivative
/// of the rank-(r-1) family.  They agree identically; the pair is kept for
/// verification.  lhs requires r >= 3.
cplx derivative_identity_lhs(const std::vector<double>& t, const SPoint& p);
cplx derivative_identity_rhs(const std::vector<double>& t, const SPoint& p);

/// The product f(t1) = (n0+t1)^{-s1} * prod_{i>=2} (s_i)_{k_i} / base_i^{s_i+k_i}
/// for one (r-1)-family vector ks (length r-1, mapped to indices 2..r), and
/// its analytic t1-derivative.  Exposed so finite differences can check the
/// closed-form derivative used in derivative_identity_lhs.
cplx identity_term_value(const std::vector<double>& t, const SPoint& p,
                         const std::vector<int>& ks);
cplx identity_term_dt1(const std::vector<double>& t, const SPoint& p,
                       const std::vector<int>& ks);

} // namespace mdl

#include "mdl/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mdl {

SPoint::SPoint(std::vector<cplx> s_values, std::uint64_t n0_shift)
    : s(std::move(s_values)), n0(n0_shift) {
  if (s.empty()) throw std::invalid_argument("SPoint: empty exponent vector");
  sigma.reserve(s.size());
  for (const auto& z : s) sigma.push_back(z.real());
}

cplx pochhammer(cplx s, unsigned k) {
  cplx p = 1.0;
  for (unsigned i = 0; i < k; ++i) p *= s + static_cast<double>(i);
  return p;
}

bool in_domain_D(const SPoint& p) {
  double suffix = 0.0;
  for (int i = p.rank() - 1; i >= 0; --i) {
    suffix += p.sigma[i];
    if (!(suffix > 0.0)) return false;
  }
  return true;
}

bool in_domain_D0(const SPoint& p) {
  double suffix = 0.0;
  int count = 0;
  for (int i = p.rank() - 1; i >= 0; --i) {
    suffix += p.sigma[i];
    ++count;
    if (!(suffix > static_cast<double>(count))) return false;
  }
  return true;
}

cplx pow_pos(double z, cplx w) {
  const double L = std::log(z);
  if (w.imag() == 0.0) return {std::exp(w.real() * L), 0.0};
  return std::polar(std::exp(w.real() * L), w.imag() * L);
}

namespace {

void check_t(const std::vector<double>& t, const SPoint& p) {
  if (static_cast<int>(t.size()) != p.rank())
    throw std::invalid_argument("kernel: t and s must have the same length");
  for (double ti : t)
    if (!(ti >= 1.0))
      throw std::invalid_argument("kernel: integration variables require t_i >= 1");
}

} // namespace

KernelValue kernel_eval(const std::vector<double>& t, const SPoint& p,
                        const std::vector<CompositionTerm>& comps,
                        bool breakdown) {
  check_t(t, p);
  const int r = p.rank();
  std::vector<double> base(r);
  double acc = static_cast<double>(p.n0);
  for (int i = 0; i < r; ++i) {
    acc += t[i];
    base[i] = acc;
  }
  KernelValue out;
  if (breakdown) out.terms.emplace();
  for (const auto& term : comps) {
    cplx v = static_cast<double>(term.coeff);
    for (int i = 0; i < r; ++i)
      v *= pochhammer(p.s[i], term.k[i]) *
           pow_pos(base[i], -(p.s[i] + static_cast<double>(term.k[i])));
    out.value += v;
    if (breakdown) out.terms->push_back({term.k, term.coeff, v});
  }
  return out;
}

KernelEvaluator::KernelEvaluator(const SPoint& p,
                                 const std::vector<CompositionTerm>& comps)
    : r_(p.rank()), n0_(static_cast<double>(p.n0)), s_(p.s) {
  if (r_ > 12)
    throw std::invalid_argument("kernel evaluator: rank must be <= 12");
  max_k_.assign(r_, 0);
  term_const_.reserve(comps.size());
  term_k_.reserve(comps.size() * r_);
  for (const auto& term : comps) {
    if (static_cast<int>(term.k.size()) != r_)
      throw std::invalid_argument("kernel evaluator: rank mismatch");
    cplx c = static_cast<double>(term.coeff);
    for (int i = 0; i < r_; ++i) {
      c *= pochhammer(s_[i], term.k[i]);
      term_k_.push_back(term.k[i]);
      max_k_[i] = std::max(max_k_[i], term.k[i]);
    }
    term_const_.push_back(c);
  }
}

cplx KernelEvaluator::eval(const double* t) const {
  // prefix bases enter through their logs and small negative integer powers
  double inv_pow[16][16]; // inv_pow[i][e] = base_i^{-e}
  double acc = n0_;
  double re_exp = 0.0, im_exp = 0.0;
  for (int i = 0; i < r_; ++i) {
    acc += t[i];
    const double L = std::log(acc);
    re_exp -= s_[i].real() * L;
    im_exp -= s_[i].imag() * L;
    const double inv = 1.0 / acc;
    inv_pow[i][0] = 1.0;
    for (int e = 1; e <= max_k_[i]; ++e)
      inv_pow[i][e] = inv_pow[i][e - 1] * inv;
  }
  const cplx common = std::polar(std::exp(re_exp), im_exp);
  cplx sum = 0.0;
  const int* k = term_k_.data();
  for (std::size_t m = 0; m < term_const_.size(); ++m, k += r_) {
    double w = 1.0;
    for (int i = 0; i < r_; ++i) w *= inv_pow[i][k[i]];
    sum += term_const_[m] * w;
  }
  return common * sum;
}

// ---------------------------------------------------------------------------
// Derivative identity

cplx identity_term_value(const std::vector<double>& t, const SPoint& p,
                         const std::vector<int>& ks) {
  check_t(t, p);
  const int r = p.rank();
  if (static_cast<int>(ks.size()) != r - 1)
    throw std::invalid_argument("identity term: ks must have length r-1");
  std::vector<double> base(r);
  double acc = static_cast<double>(p.n0);
  for (int i = 0; i < r; ++i) {
    acc += t[i];
    base[i] = acc;
  }
  cplx v = pow_pos(base[0], -p.s[0]);
  for (int i = 1; i < r; ++i)
    v *= pochhammer(p.s[i], ks[i - 1]) *
         pow_pos(base[i], -(p.s[i] + static_cast<double>(ks[i - 1])));
  return v;
}

cplx identity_term_dt1(const std::vector<double>& t, const SPoint& p,
                       const std::vector<int>& ks) {
  check_t(t, p);
  const int r = p.rank();
  if (static_cast<int>(ks.size()) != r - 1)
    throw std::invalid_argument("identity term: ks must have length r-1");
  std::vector<double> base(r);
  double acc = static_cast<double>(p.n0);
  for (int i = 0; i < r; ++i) {
    acc += t[i];
    base[i] = acc;
  }
  // every factor depends on t1; (s)_k (b^{-s-k})' = -(s)_{k+1} b^{-s-k-1}
  std::vector<cplx> P(r);
  for (int i = 1; i < r; ++i)
    P[i] = pochhammer(p.s[i], ks[i - 1]) *
           pow_pos(base[i], -(p.s[i] + static_cast<double>(ks[i - 1])));
  cplx prodP = 1.0;
  for (int i = 1; i < r; ++i) prodP *= P[i];

  cplx d = -p.s[0] * pow_pos(base[0], -(p.s[0] + 1.0)) * prodP;
  const cplx head = pow_pos(base[0], -p.s[0]);
  for (int h = 1; h < r; ++h) {
    cplx bumped = pochhammer(p.s[h], ks[h - 1] + 1) *
                  pow_pos(base[h], -(p.s[h] + static_cast<double>(ks[h - 1]) + 1.0));
    cplx rest = 1.0;
    for (int i = 1; i < r; ++i)
      if (i != h) rest *= P[i];
    d -= head * bumped * rest;
  }
  return d;
}

cplx derivative_identity_lhs(const std::vector<double>& t, const SPoint& p) {
  const int r = p.rank();
  if (r < 3)
    throw std::invalid_argument("derivative identity: requires rank >= 3");
  check_t(t, p);
  cplx sum = 0.0;
  for (const auto& term : enumerate_compositions(r - 1))
    sum -= static_cast<double>(term.coeff) * identity_term_dt1(t, p, term.k);
  return sum;
}

cplx derivative_identity_rhs(const std::vector<double>& t, const SPoint& p) {
  return kernel_eval(t, p, enumerate_compositions(p.rank())).value;
}

} // namespace mdl

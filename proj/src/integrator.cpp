#include "mdl/integrator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>

#include "mdl/errors.hpp"
#include "mdl/quadrature.hpp"

namespace mdl {

const char* method_name(Method m) {
  switch (m) {
    case Method::integral: return "integral";
    case Method::direct: return "direct";
    case Method::iterated_abel: return "iterated-abel";
  }
  return "?";
}

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

/// Deterministic pairwise reduction; independent of how the entries were
/// produced, so parallel and serial passes agree bit for bit.
cplx pairwise_sum(std::vector<cplx> v) {
  if (v.empty()) return 0.0;
  std::size_t n = v.size();
  while (n > 1) {
    const std::size_t half = n / 2;
    for (std::size_t i = 0; i < half; ++i) v[i] = v[2 * i] + v[2 * i + 1];
    if (n & 1) v[half] = v[n - 1];
    n = half + (n & 1);
  }
  return v[0];
}

std::uint64_t align_up(std::uint64_t x, std::uint64_t period) {
  if (period == 0) period = 1;
  const std::uint64_t q = (x + period - 1) / period;
  return std::max<std::uint64_t>(2, q * period);
}

/// Smallest period-aligned cutoff with bound(T) <= target (bounds are
/// decreasing in T).  Returns cap-aligned value when the target is
/// unreachable below the cap; the caller re-checks the achieved bound.
std::uint64_t grow_aligned(const std::function<double(double)>& bound,
                           double target, std::uint64_t period,
                           std::uint64_t cap) {
  std::uint64_t T = align_up(std::max<std::uint64_t>(2, 2 * period), period);
  if (T >= cap) return align_up(cap, period);
  while (T < cap && bound(static_cast<double>(T)) > target) T *= 2;
  if (bound(static_cast<double>(T)) > target) return align_up(cap, period);
  // refine within [T/2, T]
  std::uint64_t lo = T / 2, hi = T;
  while (lo + period < hi) {
    const std::uint64_t mid = align_up(lo + (hi - lo) / 2, period);
    if (mid >= hi) break;
    if (bound(static_cast<double>(mid)) <= target)
      hi = mid;
    else
      lo = mid;
  }
  return align_up(hi, period);
}

struct TermData {
  std::vector<int> k;
  double coeff;
  std::vector<double> abs_poch; // |(s_i)_{k_i}|
};

std::vector<TermData> term_data(const SPoint& p) {
  std::vector<TermData> out;
  for (const auto& term : enumerate_compositions(p.rank())) {
    TermData d;
    d.k = term.k;
    d.coeff = static_cast<double>(term.coeff);
    d.abs_poch.resize(p.rank());
    for (int i = 0; i < p.rank(); ++i)
      d.abs_poch[i] = std::abs(pochhammer(p.s[i], term.k[i]));
    out.push_back(std::move(d));
  }
  return out;
}

void require_in_D(const SPoint& p) {
  if (!in_domain_D(p))
    throw region_error(
        "argument outside the conditional-convergence region (a suffix sum "
        "of the real parts is <= 0)");
}

double product_of(const std::vector<double>& v) {
  double p = 1.0;
  for (double x : v) p *= x;
  return p;
}

} // namespace

double tail_bound(const SPoint& p, const std::vector<double>& alphas,
                  double T) {
  require_in_D(p);
  const int r = p.rank();
  if (static_cast<int>(alphas.size()) != r)
    throw std::invalid_argument("tail_bound: need one alpha per axis");
  if (!(T >= 1.0)) throw std::invalid_argument("tail_bound: T must be >= 1");
  const double alpha_prod = product_of(alphas);
  // suffix sums of sigma
  std::vector<double> suffix(r);
  double acc = 0.0;
  for (int i = r - 1; i >= 0; --i) {
    acc += p.sigma[i];
    suffix[i] = acc;
  }
  const double sigma_total = suffix[0];
  double bound = 0.0;
  for (const auto& term : term_data(p)) {
    double v = alpha_prod;
    for (int i = 0; i < r; ++i) v *= term.abs_poch[i] / suffix[i];
    bound += v;
  }
  return bound * std::pow(static_cast<double>(p.n0) + T, -sigma_total);
}

double axis_tail_bound(const SPoint& p, const std::vector<double>& alphas,
                       int j, double T) {
  require_in_D(p);
  const int r = p.rank();
  if (j < 1 || j > r)
    throw std::invalid_argument("axis_tail_bound: axis out of range");
  if (static_cast<int>(alphas.size()) != r)
    throw std::invalid_argument("axis_tail_bound: need one alpha per axis");
  const double alpha_prod = product_of(alphas);
  const double n0 = static_cast<double>(p.n0);
  double bound = 0.0;
  for (const auto& term : term_data(p)) {
    // W_i - 1 = sum_{u >= i} (sigma_u + k_u) - (r - i) - 1; positive in D
    std::vector<double> margin(r);
    double acc = 0.0;
    int count = 0;
    for (int i = r - 1; i >= 0; --i) {
      acc += p.sigma[i] + term.k[i];
      ++count;
      margin[i] = acc - (count - 1) - 1.0;
    }
    double d = margin[j - 1];
    for (int i = 0; i < j - 1; ++i) d = std::min(d, margin[i]);
    // exponent split: decay a goes to (n0+T), the rest keeps the remaining
    // axis integrals convergent
    const double a = (j == 1) ? d : 0.75 * d;
    double v = alpha_prod;
    for (int i = 0; i < r; ++i) {
      const double divisor = (i < j - 1) ? margin[i] - a : margin[i];
      v *= term.abs_poch[i] / divisor;
    }
    v *= std::pow(n0 + 1.0, -(margin[0] - a));
    v *= std::pow(n0 + T, -a);
    bound += v;
  }
  return bound;
}

// ---------------------------------------------------------------------------
// Box quadrature

namespace {

cplx box_sum(const std::vector<BoundedSequence>& seqs, const SPoint& p,
             const std::vector<std::uint64_t>& T, int G, Parallel par) {
  const int r = p.rank();
  const KernelEvaluator ker(p, enumerate_compositions(r));
  const GaussRule& rule = gauss_rule(G);
  const double* gx = rule.nodes.data();
  const double* gw = rule.weights.data();

  std::uint64_t n_cells = 1;
  std::vector<std::uint64_t> extent(r);
  for (int i = 0; i < r; ++i) {
    extent[i] = T[i] - 1; // cells [m, m+1), m = 1 .. T-1
    n_cells *= extent[i];
  }
  const std::uint64_t block = 1024;
  const std::uint64_t n_blocks = (n_cells + block - 1) / block;
  std::vector<cplx> partial(n_blocks, 0.0);
  const bool use_par = (par == Parallel::on);

#pragma omp parallel for schedule(dynamic, 1) if (use_par)
  for (std::int64_t b = 0; b < static_cast<std::int64_t>(n_blocks); ++b) {
    const std::uint64_t begin = static_cast<std::uint64_t>(b) * block;
    const std::uint64_t end = std::min(begin + block, n_cells);
    cplx acc = 0.0;
    for (std::uint64_t idx = begin; idx < end; ++idx) {
      std::uint64_t rem = idx;
      double m[3];
      cplx w = 1.0;
      for (int i = r - 1; i >= 0; --i) {
        const std::uint64_t mi = rem % extent[i] + 1;
        rem /= extent[i];
        m[i] = static_cast<double>(mi);
        w *= seqs[i].partial_sum(static_cast<double>(mi));
      }
      if (w == cplx(0.0)) continue;
      cplx cell = 0.0;
      double t[3];
      if (r == 1) {
        for (int a = 0; a < G; ++a) {
          t[0] = m[0] + gx[a];
          cell += gw[a] * ker.eval(t);
        }
      } else if (r == 2) {
        for (int a = 0; a < G; ++a) {
          t[0] = m[0] + gx[a];
          cplx row = 0.0;
          for (int c = 0; c < G; ++c) {
            t[1] = m[1] + gx[c];
            row += gw[c] * ker.eval(t);
          }
          cell += gw[a] * row;
        }
      } else {
        for (int a = 0; a < G; ++a) {
          t[0] = m[0] + gx[a];
          for (int c = 0; c < G; ++c) {
            t[1] = m[1] + gx[c];
            cplx row = 0.0;
            for (int d = 0; d < G; ++d) {
              t[2] = m[2] + gx[d];
              row += gw[d] * ker.eval(t);
            }
            cell += gw[a] * gw[c] * row;
          }
        }
      }
      acc += w * cell;
    }
    partial[b] = acc;
  }
  return pairwise_sum(std::move(partial));
}

} // namespace

cplx integrate_cells(const std::vector<BoundedSequence>& seqs, const SPoint& p,
                     const TruncationPlan& plan, Parallel par) {
  const int r = p.rank();
  if (r > 3)
    throw unsupported_error(
        "integrate_cells: tensor-cell integration supports rank <= 3");
  if (static_cast<int>(seqs.size()) != r)
    throw std::invalid_argument("integrate_cells: need one sequence per axis");
  if (static_cast<int>(plan.cutoffs.size()) != r)
    throw std::invalid_argument("integrate_cells: need one cutoff per axis");
  for (auto T : plan.cutoffs)
    if (T < 2) throw std::invalid_argument("integrate_cells: cutoffs must be >= 2");
  if (plan.gauss_nodes < 1)
    throw std::invalid_argument("integrate_cells: gauss_nodes must be >= 1");
  for (const auto& seq : seqs)
    (void)seq.partial_sum_bound(); // principal characters rejected here
  return box_sum(seqs, p, plan.cutoffs, plan.gauss_nodes, par);
}

// ---------------------------------------------------------------------------
// Tail corrections (periodic sequences)

namespace {

// r = 1: integral over [T, inf) of S(t) * s (n0+t)^{-s-1} dt.
// Mean part is exact; the oscillatory remainder is certified by the
// period-primitive bound (T must be period-aligned so the boundary
// term vanishes).
cplx r1_mu_tail(const BoundedSequence& seq, const SPoint& p, double T) {
  return seq.mean() * pow_pos(static_cast<double>(p.n0) + T, -p.s[0]);
}

double r1_osc_bound(const BoundedSequence& seq, const SPoint& p, double T) {
  const double sigma = p.sigma[0];
  const double beta = seq.osc_primitive_bound();
  const double c = std::abs(p.s[0] * (p.s[0] + 1.0));
  return c * beta * std::pow(static_cast<double>(p.n0) + T, -sigma - 1.0) /
         (sigma + 1.0);
}

struct R2Terms {
  // per composition term of rank 2
  std::vector<int> k1, k2;
  std::vector<cplx> poch_prod;  // coeff * (s1)_{k1} (s2)_{k2}
  std::vector<double> abs_poch; // its modulus
};

R2Terms r2_terms(const SPoint& p) {
  R2Terms out;
  for (const auto& term : enumerate_compositions(2)) {
    out.k1.push_back(term.k[0]);
    out.k2.push_back(term.k[1]);
    cplx c = static_cast<double>(term.coeff) * pochhammer(p.s[0], term.k[0]) *
             pochhammer(p.s[1], term.k[1]);
    out.poch_prod.push_back(c);
    out.abs_poch.push_back(std::abs(c));
  }
  return out;
}

// E2 mu-part: cells over t1 in [1, T1), inner tail integrated in closed form
// with S2 replaced by its period mean.
cplx r2_inner_mu_pass(const std::vector<BoundedSequence>& seqs,
                      const SPoint& p, std::uint64_t T1, double T2, int G) {
  const R2Terms terms = r2_terms(p);
  const cplx mu2 = seqs[1].mean();
  if (mu2 == cplx(0.0)) return 0.0;
  const GaussRule& rule = gauss_rule(G);
  const double n0 = static_cast<double>(p.n0);
  std::vector<cplx> cells(T1 - 1, 0.0);
  for (std::uint64_t m = 1; m < T1; ++m) {
    const cplx w = seqs[0].partial_sum(static_cast<double>(m));
    if (w == cplx(0.0)) continue;
    cplx cell = 0.0;
    for (int a = 0; a < G; ++a) {
      const double t1 = static_cast<double>(m) + rule.nodes[a];
      cplx f = 0.0;
      for (std::size_t j = 0; j < terms.poch_prod.size(); ++j) {
        const cplx e2 = p.s[1] + static_cast<double>(terms.k2[j]);
        f += terms.poch_prod[j] / (e2 - 1.0) *
             pow_pos(n0 + t1, -(p.s[0] + static_cast<double>(terms.k1[j]))) *
             pow_pos(n0 + t1 + T2, -(e2 - 1.0));
      }
      cell += rule.weights[a] * f;
    }
    cells[m - 1] = w * cell;
  }
  return mu2 * pairwise_sum(std::move(cells));
}

// E2 oscillatory remainder, certified (T2 period-aligned).
double r2_inner_osc_bound(const std::vector<BoundedSequence>& seqs,
                          const SPoint& p, double T2) {
  const R2Terms terms = r2_terms(p);
  const double alpha1 = seqs[0].partial_sum_bound();
  const double beta2 = seqs[1].osc_primitive_bound();
  const double n0 = static_cast<double>(p.n0);
  const double s1s2 = p.sigma[0] + p.sigma[1];
  const double delta = std::min(0.25, 0.5 * s1s2);
  double bound = 0.0;
  for (std::size_t j = 0; j < terms.poch_prod.size(); ++j) {
    const double e1 = p.sigma[0] + terms.k1[j];
    const double e2 = p.sigma[1] + terms.k2[j];
    const double abs_s2k2 = std::abs(p.s[1] + static_cast<double>(terms.k2[j]));
    double theta = std::max(0.0, 1.0 + delta - e1);
    theta = std::min(theta, e2 - delta);
    bound += terms.abs_poch[j] * (abs_s2k2 / e2) *
             std::pow(n0 + T2, -(e2 - theta)) *
             std::pow(n0 + 1.0, 1.0 - e1 - theta) / (e1 + theta - 1.0);
  }
  return alpha1 * beta2 * bound;
}

// E1 mu x mu part: smooth decaying integrand over [T1, inf), geometric
// blocks of Gauss panels with a certified cut remainder (added to *cut).
cplx r2_outer_mu_value(const std::vector<BoundedSequence>& seqs,
                       const SPoint& p, double T1, int G, double cut_target,
                       double* cut) {
  const R2Terms terms = r2_terms(p);
  const cplx mu1 = seqs[0].mean();
  const cplx mu2 = seqs[1].mean();
  const double n0 = static_cast<double>(p.n0);
  const double s1s2 = p.sigma[0] + p.sigma[1];

  double coeff_abs = 0.0;
  for (std::size_t j = 0; j < terms.poch_prod.size(); ++j)
    coeff_abs += terms.abs_poch[j] /
                 std::abs(p.s[1] + static_cast<double>(terms.k2[j]) - 1.0);
  const double mu_abs = std::abs(mu1 * mu2);
  auto remainder = [&](double B) {
    return mu_abs * coeff_abs * std::pow(n0 + B, -s1s2) / s1s2;
  };
  if (mu_abs == 0.0) {
    *cut += 0.0;
    return 0.0;
  }

  auto g = [&](double t1) {
    cplx f = 0.0;
    for (std::size_t j = 0; j < terms.poch_prod.size(); ++j) {
      const cplx e2 = p.s[1] + static_cast<double>(terms.k2[j]);
      f += terms.poch_prod[j] / (e2 - 1.0) *
           pow_pos(n0 + t1, -(p.s[0] + static_cast<double>(terms.k1[j]))) *
           pow_pos(n0 + t1 + 1.0, -(e2 - 1.0));
    }
    return f;
  };

  const GaussRule& rule = gauss_rule(G);
  cplx acc = 0.0;
  double a = T1;
  int blocks = 0;
  while (remainder(a) > cut_target && blocks < 4000) {
    const double b = a * 1.5;
    cplx panel = 0.0;
    for (int i = 0; i < G; ++i)
      panel += rule.weights[i] * g(a + (b - a) * rule.nodes[i]);
    acc += (b - a) * panel;
    a = b;
    ++blocks;
  }
  *cut += remainder(a);
  return mu1 * mu2 * acc;
}

// E1 oscillatory remainders: the osc1 part against the full inner integral
// plus the mu1 part against the inner oscillation (T1 period-aligned).
double r2_outer_osc_bound(const std::vector<BoundedSequence>& seqs,
                          const SPoint& p, double T1) {
  const R2Terms terms = r2_terms(p);
  const double alpha2 = seqs[1].partial_sum_bound();
  const double beta1 = seqs[0].osc_primitive_bound();
  const double beta2 = seqs[1].osc_primitive_bound();
  const double mu1 = std::abs(seqs[0].mean());
  const double mu2 = std::abs(seqs[1].mean());
  const double n0 = static_cast<double>(p.n0);
  const double w = p.sigma[0] + p.sigma[1] + 1.0;
  double osc1 = 0.0, osc2 = 0.0;
  for (std::size_t j = 0; j < terms.poch_prod.size(); ++j) {
    const double e2 = p.sigma[1] + terms.k2[j];
    const double a1 = std::abs(p.s[0] + static_cast<double>(terms.k1[j]));
    const double a2 = std::abs(p.s[1] + static_cast<double>(terms.k2[j]));
    osc1 += terms.abs_poch[j] * (a1 / (e2 - 1.0) + a2 / e2);
    osc2 += terms.abs_poch[j] * (mu2 + beta2 * a2 / e2);
  }
  const double decay = std::pow(n0 + T1, -w) / w;
  return (beta1 * alpha2 * osc1 + mu1 * osc2) * decay;
}

struct PlanChoice {
  std::vector<std::uint64_t> T;
  double certified_tail = 0.0;
};

std::uint64_t cells_of(const std::vector<std::uint64_t>& T) {
  std::uint64_t c = 1;
  for (auto t : T) c *= (t - 1);
  return c;
}

bool all_periodic(const std::vector<BoundedSequence>& seqs) {
  for (const auto& s : seqs)
    if (!s.periodic()) return false;
  return true;
}

} // namespace

EvaluationResult evaluate_integral(const std::vector<BoundedSequence>& seqs,
                                   const SPoint& p, double tol,
                                   std::uint64_t max_cells, Parallel par) {
  const auto t0 = clock_type::now();
  const int r = p.rank();
  if (r > 3)
    throw unsupported_error(
        "evaluate_integral: integral evaluation supports rank <= 3");
  if (static_cast<int>(seqs.size()) != r)
    throw std::invalid_argument("evaluate_integral: need one sequence per axis");
  if (!(tol > 0.0))
    throw std::invalid_argument("evaluate_integral: tolerance must be > 0");
  require_in_D(p);
  std::vector<double> alphas;
  for (const auto& seq : seqs) alphas.push_back(seq.partial_sum_bound());

  const bool corrected = (r <= 2) && all_periodic(seqs);

  // --- choose cutoffs -------------------------------------------------
  PlanChoice plan;
  plan.T.resize(r);
  const std::uint64_t axis_cap = 400'000'000;
  if (corrected && r == 1) {
    plan.T[0] = grow_aligned(
        [&](double T) { return r1_osc_bound(seqs[0], p, T); }, tol * 0.25,
        seqs[0].period(), axis_cap);
  } else if (corrected && r == 2) {
    plan.T[1] = grow_aligned(
        [&](double T2) { return r2_inner_osc_bound(seqs, p, T2); }, tol / 6.0,
        seqs[1].period(), axis_cap);
    plan.T[0] = grow_aligned(
        [&](double T1) { return r2_outer_osc_bound(seqs, p, T1); }, tol / 6.0,
        seqs[0].period(), axis_cap);
  } else {
    for (int j = 1; j <= r; ++j)
      plan.T[j - 1] = grow_aligned(
          [&](double T) { return axis_tail_bound(p, alphas, j, T); },
          tol / (2.0 * r), seqs[j - 1].periodic() ? seqs[j - 1].period() : 1,
          axis_cap);
  }

  // --- budget ---------------------------------------------------------
  bool budget_capped = false;
  while (cells_of(plan.T) > max_cells) {
    budget_capped = true;
    // shrink the axis with the most cells
    int worst = 0;
    for (int i = 1; i < r; ++i)
      if (plan.T[i] > plan.T[worst]) worst = i;
    const std::uint64_t period =
        seqs[worst].periodic() ? seqs[worst].period() : 1;
    const std::uint64_t shrunk = align_up(plan.T[worst] / 2, period);
    if (shrunk >= plan.T[worst]) break; // cannot shrink further
    plan.T[worst] = shrunk;
  }

  // --- certified tail at the chosen cutoffs ---------------------------
  double cut_remainder = 0.0;
  if (corrected && r == 1) {
    plan.certified_tail =
        r1_osc_bound(seqs[0], p, static_cast<double>(plan.T[0]));
  } else if (corrected && r == 2) {
    plan.certified_tail =
        r2_inner_osc_bound(seqs, p, static_cast<double>(plan.T[1])) +
        r2_outer_osc_bound(seqs, p, static_cast<double>(plan.T[0]));
  } else {
    plan.certified_tail = 0.0;
    for (int j = 1; j <= r; ++j)
      plan.certified_tail += axis_tail_bound(
          p, alphas, j, static_cast<double>(plan.T[j - 1]));
  }

  // --- evaluate with a G-doubling loop --------------------------------
  auto value_at = [&](int G) {
    cplx v = box_sum(seqs, p, plan.T, G, par);
    if (corrected && r == 1) v += r1_mu_tail(seqs[0], p, static_cast<double>(plan.T[0]));
    if (corrected && r == 2) {
      v += r2_inner_mu_pass(seqs, p, plan.T[0],
                            static_cast<double>(plan.T[1]), G);
      double cut = 0.0;
      v += r2_outer_mu_value(seqs, p, static_cast<double>(plan.T[0]), G,
                             tol / 12.0, &cut);
      cut_remainder = cut;
    }
    return v;
  };

  int G = 8;
  const int G_cap = (r == 3) ? 12 : 64;
  cplx low = (r == 3) ? box_sum(seqs, p, plan.T, G / 2, par) : value_at(G);
  cplx high = (r == 3) ? box_sum(seqs, p, plan.T, G, par) : value_at(2 * G);
  double quad_est = std::abs(high - low);
  while (quad_est > tol * 0.5 && G < G_cap) {
    G *= 2;
    low = high;
    high = (r == 3) ? box_sum(seqs, p, plan.T, G, par) : value_at(2 * G);
    quad_est = std::abs(high - low);
  }

  EvaluationResult out;
  out.value = high;
  out.method = Method::integral;
  out.plan.cutoffs = plan.T;
  out.plan.gauss_nodes = G;
  out.plan.tail_bound = plan.certified_tail + cut_remainder;
  out.plan.quadrature_estimate = quad_est + 1e-16 * std::abs(high);
  out.error_estimate = out.plan.tail_bound + out.plan.quadrature_estimate;
  out.in_D = true;
  out.in_D0 = in_domain_D0(p);
  out.wall_time_s = seconds_since(t0);

  if (out.error_estimate > tol) {
    if (budget_capped)
      throw budget_error(
          "evaluate_integral: tolerance unachievable within the cell budget "
          "(best achieved estimate " +
              std::to_string(out.error_estimate) + ")",
          out.value, out.error_estimate);
    throw budget_error(
        "evaluate_integral: requested tolerance not met (achieved " +
            std::to_string(out.error_estimate) + ")",
        out.value, out.error_estimate);
  }
  return out;
}

} // namespace mdl

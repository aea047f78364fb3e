#include "mdl/oracle.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>

#include "mdl/errors.hpp"

namespace mdl {

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

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

double pairwise_sum_d(std::vector<double> v) {
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

/// Deterministic parallel reduction of term(n) for n in [from, to]:
/// fixed-size chunks summed serially, chunk results pairwise-combined.
/// Also accumulates a per-term double (certified bound contributions).
void chunked_sum(std::uint64_t from, std::uint64_t to, bool parallel,
                 const std::function<void(std::uint64_t, cplx*, double*)>& term,
                 cplx* value_out, double* bound_out) {
  if (to < from) {
    *value_out = 0.0;
    *bound_out = 0.0;
    return;
  }
  const std::uint64_t count = to - from + 1;
  const std::uint64_t chunk = 64;
  const std::uint64_t n_chunks = (count + chunk - 1) / chunk;
  std::vector<cplx> values(n_chunks, 0.0);
  std::vector<double> bounds(n_chunks, 0.0);
#pragma omp parallel for schedule(dynamic, 1) if (parallel)
  for (std::int64_t c = 0; c < static_cast<std::int64_t>(n_chunks); ++c) {
    const std::uint64_t lo = from + static_cast<std::uint64_t>(c) * chunk;
    const std::uint64_t hi = std::min(lo + chunk - 1, to);
    cplx v = 0.0;
    double bd = 0.0;
    for (std::uint64_t n = lo; n <= hi; ++n) term(n, &v, &bd);
    values[c] = v;
    bounds[c] = bd;
  }
  *value_out = pairwise_sum(std::move(values));
  *bound_out = pairwise_sum_d(std::move(bounds));
}

} // namespace

LineSum accelerated_line_sum(const BoundedSequence& seq, cplx s, double shift,
                             double eps, std::uint64_t max_terms) {
  const double sigma = s.real();
  if (!(sigma > 0.0))
    throw region_error("line sum: requires Re(s) > 0");
  if (!(eps > 0.0)) throw std::invalid_argument("line sum: eps must be > 0");

  LineSum out;
  std::uint64_t X;
  std::function<double(double)> bound;
  std::uint64_t period = 1;
  if (seq.periodic()) {
    period = seq.period();
    const double beta = seq.osc_primitive_bound();
    const double c = std::abs(s * (s + 1.0)) * beta / (sigma + 1.0);
    bound = [c, sigma, shift](double x) {
      return c * std::pow(shift + x, -sigma - 1.0);
    };
  } else {
    const double alpha = seq.partial_sum_bound();
    const double c = alpha * (1.0 + std::abs(s) / sigma);
    bound = [c, sigma, shift](double x) {
      return c * std::pow(shift + x, -sigma);
    };
  }
  X = 2 * period;
  while (X < max_terms && bound(static_cast<double>(X)) > eps) X *= 2;
  if (bound(static_cast<double>(X)) > eps) {
    X = (max_terms / period) * period;
    if (X < 2 * period) X = 2 * period;
  } else if (X > 4 * period) {
    // refine downwards, staying period-aligned
    std::uint64_t lo = X / 2, hi = X;
    while (lo + period < hi) {
      const std::uint64_t mid = ((lo + (hi - lo) / 2) / period) * period;
      if (mid <= lo) break;
      if (bound(static_cast<double>(mid)) <= eps)
        hi = mid;
      else
        lo = mid;
    }
    X = hi;
  }

  cplx acc = 0.0;
  std::vector<cplx> blocks;
  blocks.reserve(X / 4096 + 1);
  for (std::uint64_t n = 1; n <= X; ++n) {
    const cplx a = seq.value(n);
    if (a != cplx(0.0)) acc += a * pow_pos(shift + static_cast<double>(n), -s);
    if ((n & 4095) == 0) {
      blocks.push_back(acc);
      acc = 0.0;
    }
  }
  blocks.push_back(acc);
  out.value = pairwise_sum(std::move(blocks));
  if (seq.periodic())
    out.value += seq.mean() * pow_pos(shift + static_cast<double>(X), -s);
  out.bound = bound(static_cast<double>(X));
  out.horizon = X;
  return out;
}

// ---------------------------------------------------------------------------
// Direct nested summation (absolute region)

namespace {

struct DirectContext {
  const std::vector<BoundedSequence>* seqs;
  const SPoint* p;
  int r;
  std::vector<double> sup;       // sup |a_i|
  std::vector<double> suffix;    // sigma_i + ... + sigma_r
  std::vector<double> level_c;   // prod_{u>=i} sup_u / (suffix_u - (r-u+1))
};

DirectContext make_context(const std::vector<BoundedSequence>& seqs,
                           const SPoint& p) {
  DirectContext ctx;
  ctx.seqs = &seqs;
  ctx.p = &p;
  ctx.r = p.rank();
  for (const auto& s : seqs) {
    const double sup = s.sup_norm();
    if (!(sup >= 0.0) || (sup == 0.0 && !s.periodic()))
      throw std::invalid_argument(
          "evaluate_direct: sequence carries no absolute majorant");
    ctx.sup.push_back(sup);
  }
  ctx.suffix.resize(ctx.r);
  double acc = 0.0;
  for (int i = ctx.r - 1; i >= 0; --i) {
    acc += p.sigma[i];
    ctx.suffix[i] = acc;
  }
  ctx.level_c.assign(ctx.r, 1.0);
  for (int i = ctx.r - 1; i >= 0; --i) {
    const double margin = ctx.suffix[i] - (ctx.r - i); // > 0 strictly in D0
    ctx.level_c[i] = ctx.sup[i] / margin;
    if (i + 1 < ctx.r) ctx.level_c[i] *= ctx.level_c[i + 1];
  }
  return ctx;
}

/// Horizon making the certified block tail at prefix base x fall below
/// target.
std::uint64_t horizon_for(const DirectContext& ctx, int i, double x,
                          double target) {
  // tail = level_c[i] * (x+N)^{(count)-suffix_i}, count = r-i (0-based i)
  const double count = static_cast<double>(ctx.r - i);
  const double expo = ctx.suffix[i] - count; // > 0
  if (target <= 0.0) target = 1e-300;
  const double base = std::pow(ctx.level_c[i] / target, 1.0 / expo);
  double N = base - x;
  if (!(N >= 1.0)) N = 1.0;
  if (N > 4e18) N = 4e18;
  return static_cast<std::uint64_t>(std::ceil(N));
}

double tail_value(const DirectContext& ctx, int i, double x, double N) {
  const double count = static_cast<double>(ctx.r - i);
  return ctx.level_c[i] * std::pow(x + N, count - ctx.suffix[i]);
}

/// Upper estimate of sum_{n=1..N} (n0+n)^{-c}.
double power_sum_upper(double n0, double N, double c) {
  if (c <= 0.0) return N * std::pow(n0 + N, -c);
  double s = std::pow(n0 + 1.0, -c);
  if (c == 1.0) return s + std::log((n0 + N) / (n0 + 1.0));
  return s + (std::pow(n0 + N, 1.0 - c) - std::pow(n0 + 1.0, 1.0 - c)) /
                 (1.0 - c);
}

/// Second-level horizon rule balancing inner cost against the tol/4 error
/// share: (x1 + N2) = K * w1^{1/(m+1)}, which equalises marginal cost per
/// unit of certified error across the outer index.
struct InnerPlan {
  double K = 0.0;
  double m = 0.0;
  double inv_m1 = 0.0; // 1/(m+1)
  std::uint64_t at(const DirectContext& ctx, double x1) const {
    const double w1 = ctx.sup[0] * std::pow(x1, -ctx.p->sigma[0]);
    double N = K * std::pow(w1, inv_m1) - x1;
    if (!(N >= 1.0)) N = 1.0;
    if (N > 4e18) N = 4e18;
    return static_cast<std::uint64_t>(std::ceil(N));
  }
};

InnerPlan make_inner_plan(const DirectContext& ctx, double n0,
                          std::uint64_t N1, double tol_share) {
  InnerPlan plan;
  plan.m = ctx.suffix[1] - static_cast<double>(ctx.r - 1); // > 0 in D0
  plan.inv_m1 = 1.0 / (plan.m + 1.0);
  const double c2 = ctx.level_c[1];
  const double W =
      std::pow(ctx.sup[0], plan.inv_m1) *
      power_sum_upper(n0, static_cast<double>(N1),
                      ctx.p->sigma[0] * plan.inv_m1);
  plan.K = std::pow(c2 * W / tol_share, 1.0 / plan.m);
  return plan;
}

/// Innermost-level rule for r = 3, rebalanced per outer index n1:
/// (x2 + N3) = K3(n1) * w2hat^{1/(m3+1)} with the hat weights
/// w2hat = sup1 sup2 x1^{-sigma1} x2^{-sigma2}.
struct InnermostPlan {
  double K = 0.0;
  double m = 0.0;
  double inv_m1 = 0.0;
  double w1hat = 0.0;
  double sup2 = 0.0;
  double sigma2 = 0.0;
  std::uint64_t at(double x2) const {
    const double w2 = w1hat * sup2 * std::pow(x2, -sigma2);
    double N = K * std::pow(w2, inv_m1) - x2;
    if (!(N >= 1.0)) N = 1.0;
    if (N > 4e18) N = 4e18;
    return static_cast<std::uint64_t>(std::ceil(N));
  }
};

InnermostPlan make_innermost_plan(const DirectContext& ctx, double x1,
                                  std::uint64_t N2, double eps) {
  InnermostPlan plan;
  plan.m = ctx.suffix[2] - static_cast<double>(ctx.r - 2);
  plan.inv_m1 = 1.0 / (plan.m + 1.0);
  plan.w1hat = ctx.sup[0] * std::pow(x1, -ctx.p->sigma[0]);
  plan.sup2 = ctx.sup[1];
  plan.sigma2 = ctx.p->sigma[1];
  const double c3 = ctx.level_c[2];
  const double W3 = std::pow(plan.w1hat * plan.sup2, plan.inv_m1) *
                    power_sum_upper(x1, static_cast<double>(N2),
                                    plan.sigma2 * plan.inv_m1);
  plan.K = std::pow(c3 * W3 / eps, 1.0 / plan.m);
  return plan;
}

/// Cost proxy for the innermost level at one outer index.
double innermost_cost(const DirectContext& ctx, double x1, std::uint64_t N2,
                      double eps) {
  const InnermostPlan plan = make_innermost_plan(ctx, x1, N2, eps);
  const double W3 = std::pow(plan.w1hat * plan.sup2, plan.inv_m1) *
                    power_sum_upper(x1, static_cast<double>(N2),
                                    plan.sigma2 * plan.inv_m1);
  return plan.K * W3;
}

} // namespace

SummationReport evaluate_direct(const std::vector<BoundedSequence>& seqs,
                                const SPoint& p, double tol,
                                std::uint64_t max_terms, Parallel par) {
  const auto t0 = clock_type::now();
  const int r = p.rank();
  if (r > 3)
    throw unsupported_error("evaluate_direct: supports rank <= 3");
  if (static_cast<int>(seqs.size()) != r)
    throw std::invalid_argument("evaluate_direct: need one sequence per axis");
  if (!(tol > 0.0))
    throw std::invalid_argument("evaluate_direct: tolerance must be > 0");
  if (!in_domain_D0(p))
    throw region_error(
        "evaluate_direct: argument outside the absolute-convergence region");

  DirectContext ctx = make_context(seqs, p);
  const double n0 = static_cast<double>(p.n0);
  const bool parallel = (par == Parallel::on);

  // degrade the working tolerance until the estimated term count fits the
  // budget; a degraded run is reported through budget_error
  double work_tol = tol;
  auto estimate_terms = [&](double wt) -> double {
    const std::uint64_t n1 = horizon_for(ctx, 0, n0, wt * 0.5);
    if (r == 1) return static_cast<double>(n1);
    const InnerPlan inner = make_inner_plan(ctx, n0, n1, wt * 0.25);
    const double W = std::pow(ctx.sup[0], inner.inv_m1) *
                     power_sum_upper(n0, static_cast<double>(n1),
                                     p.sigma[0] * inner.inv_m1);
    double total = static_cast<double>(n1) + inner.K * W;
    if (r == 3) {
      // trapezoid over log-spaced outer indices of the innermost cost
      const double eps23 = wt / (8.0 * static_cast<double>(n1));
      double inner3 = 0.0;
      std::uint64_t prev = 0;
      for (std::uint64_t a = 1; a <= n1;
           a = std::max(a + 1, a + a / 4)) {
        const double x1 = n0 + static_cast<double>(a);
        const std::uint64_t n2 = inner.at(ctx, x1);
        inner3 += innermost_cost(ctx, x1, n2, eps23) *
                  static_cast<double>(a - prev);
        prev = a;
      }
      total += inner3;
    }
    return total;
  };
  while (estimate_terms(work_tol) > static_cast<double>(max_terms))
    work_tol *= 4.0;
  const std::uint64_t N1 = horizon_for(ctx, 0, n0, work_tol * 0.5);

  double tail_total = tail_value(ctx, 0, n0, static_cast<double>(N1));
  cplx value = 0.0;
  double inner_bound = 0.0;
  std::uint64_t rep_n2 = 0, rep_n3 = 0; // horizons at the first index values

  if (r == 1) {
    chunked_sum(
        1, N1, parallel,
        [&](std::uint64_t n, cplx* acc, double*) {
          const cplx a = seqs[0].value(n);
          if (a != cplx(0.0))
            *acc += a * pow_pos(n0 + static_cast<double>(n), -p.s[0]);
        },
        &value, &inner_bound);
  } else {
    const InnerPlan inner_plan = make_inner_plan(ctx, n0, N1, work_tol * 0.25);
    const double eps23 = work_tol / (8.0 * static_cast<double>(N1));
    rep_n2 = inner_plan.at(ctx, n0 + 1.0);
    if (r == 3)
      rep_n3 =
          make_innermost_plan(ctx, n0 + 1.0, rep_n2, eps23).at(n0 + 2.0);
    chunked_sum(
        1, N1, parallel,
        [&](std::uint64_t n1, cplx* acc, double* bd) {
          const cplx a1 = seqs[0].value(n1);
          if (a1 == cplx(0.0)) return;
          const double x1 = n0 + static_cast<double>(n1);
          const cplx f1 = a1 * pow_pos(x1, -p.s[0]);
          const double w1 = std::abs(f1);
          const std::uint64_t N2 = inner_plan.at(ctx, x1);
          cplx inner2 = 0.0;
          if (r == 2) {
            for (std::uint64_t n2 = 1; n2 <= N2; ++n2) {
              const cplx a2 = seqs[1].value(n2);
              if (a2 != cplx(0.0))
                inner2 +=
                    a2 * pow_pos(x1 + static_cast<double>(n2), -p.s[1]);
            }
          } else {
            const InnermostPlan plan3 =
                make_innermost_plan(ctx, x1, N2, eps23);
            for (std::uint64_t n2 = 1; n2 <= N2; ++n2) {
              const cplx a2 = seqs[1].value(n2);
              if (a2 == cplx(0.0)) continue;
              const double x2 = x1 + static_cast<double>(n2);
              const cplx f2 = a2 * pow_pos(x2, -p.s[1]);
              const double w2 = w1 * std::abs(f2);
              const std::uint64_t N3 = plan3.at(x2);
              cplx inner3 = 0.0;
              for (std::uint64_t n3 = 1; n3 <= N3; ++n3) {
                const cplx a3 = seqs[2].value(n3);
                if (a3 != cplx(0.0))
                  inner3 +=
                      a3 * pow_pos(x2 + static_cast<double>(n3), -p.s[2]);
              }
              inner2 += f2 * inner3;
              *bd += w2 * tail_value(ctx, 2, x2, static_cast<double>(N3));
            }
          }
          *acc += f1 * inner2;
          *bd += w1 * tail_value(ctx, 1, x1, static_cast<double>(N2));
        },
        &value, &inner_bound);
  }
  tail_total += inner_bound;

  SummationReport out;
  out.value = value;
  out.mode = Method::direct;
  out.horizons = {N1};
  if (r >= 2) out.horizons.push_back(rep_n2);
  if (r >= 3) out.horizons.push_back(rep_n3);
  out.spread = tail_total;
  out.wall_time_s = seconds_since(t0);
  if (work_tol > tol)
    throw budget_error(
        "evaluate_direct: tolerance unachievable within the term budget "
        "(achieved " + std::to_string(tail_total) + ")",
        out.value, out.spread);
  return out;
}

// ---------------------------------------------------------------------------
// Iterated-Abel conditional evaluator

SummationReport
evaluate_iterated_abel(const std::vector<BoundedSequence>& seqs,
                       const SPoint& p, double tol,
                       std::uint64_t max_outer_terms, Parallel par) {
  const auto t0 = clock_type::now();
  const int r = p.rank();
  if (r > 2)
    throw unsupported_error("evaluate_iterated_abel: supports rank <= 2");
  if (static_cast<int>(seqs.size()) != r)
    throw std::invalid_argument(
        "evaluate_iterated_abel: need one sequence per axis");
  if (!(tol > 0.0))
    throw std::invalid_argument("evaluate_iterated_abel: tolerance must be > 0");
  if (!in_domain_D(p))
    throw region_error(
        "evaluate_iterated_abel: argument outside the conditional-convergence "
        "region");
  for (const auto& seq : seqs) (void)seq.partial_sum_bound();

  SummationReport out;
  out.mode = Method::iterated_abel;
  const double n0 = static_cast<double>(p.n0);

  if (r == 1) {
    // period-aligned, mean-corrected Abel partial sums; certified remainder
    // plus a doubled-horizon stability check
    LineSum coarse = accelerated_line_sum(seqs[0], p.s[0], n0, tol * 0.5,
                                          max_outer_terms);
    LineSum fine = accelerated_line_sum(seqs[0], p.s[0], n0, tol * 0.125,
                                        max_outer_terms);
    out.value = fine.value;
    out.horizons = {fine.horizon};
    out.spread = fine.bound + std::abs(fine.value - coarse.value);
    out.wall_time_s = seconds_since(t0);
    if (fine.bound > tol)
      throw budget_error(
          "evaluate_iterated_abel: horizon budget exhausted before reaching "
          "the tolerance",
          out.value, out.spread);
    return out;
  }

  // r == 2: inner index through the shifted line sum, outer index summed to
  // period-aligned horizons with a mean correction and Cesaro smoothing.
  if (!(p.sigma[1] > 0.0))
    throw region_error("evaluate_iterated_abel: inner exponent needs "
                       "positive real part");
  const std::uint64_t q1 = seqs[0].periodic() ? seqs[0].period() : 1;
  const double zeta_11 = 10.584448464950803; // sum n^{-1.1}
  auto inner_eps = [&](std::uint64_t n1) {
    return tol / (8.0 * zeta_11) * std::pow(n0 + static_cast<double>(n1),
                                            p.sigma[0]) *
           std::pow(static_cast<double>(n1), -1.1);
  };
  auto outer_term = [&](std::uint64_t n1, cplx* acc, double* bd) {
    const cplx a1 = seqs[0].value(n1);
    if (a1 == cplx(0.0)) return;
    const double shift = n0 + static_cast<double>(n1);
    LineSum inner =
        accelerated_line_sum(seqs[1], p.s[1], shift, inner_eps(n1));
    *acc += a1 * pow_pos(shift, -p.s[0]) * inner.value;
    *bd += std::abs(a1) * std::pow(shift, -p.sigma[0]) * inner.bound;
  };
  auto h_at = [&](std::uint64_t n1) {
    const double shift = n0 + static_cast<double>(n1);
    LineSum inner =
        accelerated_line_sum(seqs[1], p.s[1], shift, inner_eps(n1));
    return pow_pos(shift, -p.s[0]) * inner.value;
  };

  const bool parallel = (par == Parallel::on);
  const int window = 4; // Cesaro window, in aligned horizons
  cplx A = 0.0;         // running outer partial sum
  double inner_bounds = 0.0;
  std::uint64_t covered = 0;
  cplx prev_C = 0.0;
  bool have_prev = false;
  double spread = 0.0;
  std::uint64_t X = 8 * q1 * static_cast<std::uint64_t>(window);

  while (true) {
    if (X > max_outer_terms) {
      out.value = have_prev ? prev_C : A;
      out.horizons = {covered};
      out.spread = std::max(spread, tol);
      out.wall_time_s = seconds_since(t0);
      throw budget_error(
          "evaluate_iterated_abel: outer horizon budget exhausted before the "
          "Cesaro averages stabilised",
          out.value, out.spread);
    }
    // bulk of the segment in parallel, the last `window` aligned horizons
    // serially so the snapshots are cheap
    const std::uint64_t snap_from = X - static_cast<std::uint64_t>(window - 1) * q1;
    if (snap_from > covered + 1) {
      cplx seg = 0.0;
      double segb = 0.0;
      chunked_sum(covered + 1, snap_from - 1, parallel, outer_term, &seg,
                  &segb);
      A += seg;
      inner_bounds += segb;
      covered = snap_from - 1;
    }
    cplx cesaro = 0.0;
    for (int w = 0; w < window; ++w) {
      const std::uint64_t target = snap_from + static_cast<std::uint64_t>(w) * q1;
      for (std::uint64_t n1 = covered + 1; n1 <= target; ++n1) {
        cplx v = 0.0;
        double bd = 0.0;
        outer_term(n1, &v, &bd);
        A += v;
        inner_bounds += bd;
      }
      covered = target;
      cesaro += A + seqs[0].mean() * h_at(target + 1); // mean-corrected
    }
    cesaro /= static_cast<double>(window);
    if (have_prev) {
      const double delta = std::abs(cesaro - prev_C);
      spread = 2.0 * delta + inner_bounds;
      if (delta <= tol * 0.5) {
        out.value = cesaro;
        out.horizons = {covered};
        out.spread = spread;
        out.wall_time_s = seconds_since(t0);
        return out;
      }
    }
    prev_C = cesaro;
    have_prev = true;
    X *= 2;
  }
}

// ---------------------------------------------------------------------------
// Trajectories

std::vector<cplx>
partial_sum_trajectory(const std::vector<BoundedSequence>& seqs,
                       const SPoint& p, std::uint64_t X) {
  const int r = p.rank();
  if (r > 2)
    throw unsupported_error("partial_sum_trajectory: supports rank <= 2");
  if (static_cast<int>(seqs.size()) != r)
    throw std::invalid_argument(
        "partial_sum_trajectory: need one sequence per axis");
  const double n0 = static_cast<double>(p.n0);
  std::vector<cplx> out;
  out.reserve(X);
  cplx acc = 0.0;
  if (r == 1) {
    for (std::uint64_t n = 1; n <= X; ++n) {
      const cplx a = seqs[0].value(n);
      if (a != cplx(0.0))
        acc += a * pow_pos(n0 + static_cast<double>(n), -p.s[0]);
      out.push_back(acc);
    }
    return out;
  }
  if (!(p.sigma[1] > 0.0))
    throw region_error(
        "partial_sum_trajectory: inner exponent needs positive real part");
  for (std::uint64_t n1 = 1; n1 <= X; ++n1) {
    const cplx a1 = seqs[0].value(n1);
    if (a1 != cplx(0.0)) {
      const double shift = n0 + static_cast<double>(n1);
      LineSum inner = accelerated_line_sum(seqs[1], p.s[1], shift, 1e-6);
      acc += a1 * pow_pos(shift, -p.s[0]) * inner.value;
    }
    out.push_back(acc);
  }
  return out;
}

} // namespace mdl

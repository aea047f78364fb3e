#include "mdl/characters.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "mdl/errors.hpp"

namespace mdl {

namespace {

constexpr double kTau = 6.283185307179586476925286766559;

std::uint64_t pow_mod(std::uint64_t base, std::uint64_t exp,
                      std::uint64_t mod) {
  if (mod == 1) return 0;
  __uint128_t acc = 1, b = base % mod;
  while (exp) {
    if (exp & 1) acc = acc * b % mod;
    b = b * b % mod;
    exp >>= 1;
  }
  return static_cast<std::uint64_t>(acc);
}

std::vector<std::pair<std::uint64_t, unsigned>> factorize(std::uint64_t n) {
  std::vector<std::pair<std::uint64_t, unsigned>> out;
  for (std::uint64_t p = 2; p * p <= n; p += (p == 2 ? 1 : 2)) {
    if (n % p) continue;
    unsigned e = 0;
    while (n % p == 0) { n /= p; ++e; }
    out.emplace_back(p, e);
  }
  if (n > 1) out.emplace_back(n, 1);
  return out;
}

std::vector<std::uint64_t> prime_factors(std::uint64_t n) {
  std::vector<std::uint64_t> out;
  for (auto& [p, e] : factorize(n)) out.push_back(p);
  return out;
}

/// Smallest primitive root mod the odd prime power p^e.
std::uint64_t primitive_root(std::uint64_t p, unsigned e) {
  const std::uint64_t group = p - 1;
  const auto qs = prime_factors(group);
  std::uint64_t g = 0;
  for (std::uint64_t c = 2; c < p; ++c) {
    bool ok = true;
    for (auto q : qs)
      if (pow_mod(c, group / q, p) == 1) { ok = false; break; }
    if (ok) { g = c; break; }
  }
  if (e == 1) return g;
  // lift: g stays primitive mod p^e unless g^{p-1} = 1 mod p^2
  std::uint64_t p2 = p * p;
  if (pow_mod(g, p - 1, p2) == 1) g += p;
  return g;
}

std::uint64_t crt_lift(std::uint64_t residue, std::uint64_t m,
                       std::uint64_t q) {
  // value = residue mod m, = 1 mod q/m  (gcd(m, q/m) = 1)
  const std::uint64_t other = q / m;
  if (other == 1) return residue % q;
  for (std::uint64_t x = residue % m; x <= q + m; x += m)
    if (x % other == 1) return x % q;
  throw std::logic_error("crt lift failed");
}

std::int64_t gcd_ll(std::int64_t a, std::int64_t b) {
  while (b) { auto t = a % b; a = b; b = t; }
  return a < 0 ? -a : a;
}

} // namespace

std::uint64_t euler_phi(std::uint64_t q) {
  std::uint64_t out = 1;
  for (auto& [p, e] : factorize(q)) {
    std::uint64_t pe = 1;
    for (unsigned i = 1; i < e; ++i) pe *= p;
    out *= pe * (p - 1);
  }
  return out;
}

UnitGroup unit_group(std::uint64_t q) {
  if (q < 1) throw std::invalid_argument("unit_group: modulus must be >= 1");
  UnitGroup ug;
  ug.modulus = q;
  ug.phi = euler_phi(q);
  if (q > 1) {
    auto factors = factorize(q);
    // 2-power factor first, then odd primes increasing (factorize returns
    // primes in increasing order already).
    for (auto& [p, e] : factors) {
      if (p == 2) {
        if (e == 1) continue; // (Z/2)^* trivial
        if (e == 2) {
          ug.generators.push_back(crt_lift(3, 4, q));
          ug.orders.push_back(2);
        } else {
          const std::uint64_t m = 1ull << e;
          ug.generators.push_back(crt_lift(m - 1, m, q)); // -1
          ug.orders.push_back(2);
          ug.generators.push_back(crt_lift(5, m, q));
          ug.orders.push_back(m / 4); // 2^{e-2}
        }
      } else {
        std::uint64_t pe = 1;
        for (unsigned i = 0; i < e; ++i) pe *= p;
        ug.generators.push_back(crt_lift(primitive_root(p, e), pe, q));
        ug.orders.push_back(pe / p * (p - 1));
      }
    }
  }
  // discrete logs by walking the full product group
  ug.dlog.assign(q == 1 ? 1 : q, {});
  const std::size_t n_gen = ug.generators.size();
  std::vector<std::uint32_t> exps(n_gen, 0);
  std::uint64_t residue = 1 % q;
  if (q == 1) {
    ug.dlog[0] = {};
  } else {
    while (true) {
      ug.dlog[residue] = exps;
      // mixed-radix increment, multiplying the residue as we go
      std::size_t j = 0;
      for (; j < n_gen; ++j) {
        ++exps[j];
        residue = static_cast<std::uint64_t>(
            (__uint128_t)residue * ug.generators[j] % q);
        if (exps[j] < ug.orders[j]) break;
        exps[j] = 0; // residue has wrapped g_j^{d_j} = 1
      }
      if (j == n_gen) break;
    }
  }
  return ug;
}

RootOfUnity RootOfUnity::make(std::int64_t num, std::int64_t den) {
  if (den <= 0) throw std::invalid_argument("root of unity: den must be > 0");
  num %= den;
  if (num < 0) num += den;
  const auto g = gcd_ll(num == 0 ? den : num, den);
  return RootOfUnity{num / g, den / g, false};
}

RootOfUnity RootOfUnity::times(const RootOfUnity& other) const {
  if (zero || other.zero) return zero_value();
  const std::int64_t d = den / gcd_ll(den, other.den) * other.den;
  return make(num * (d / den) + other.num * (d / other.den), d);
}

RootOfUnity RootOfUnity::conj() const {
  if (zero) return zero_value();
  return make(-num, den);
}

cplx RootOfUnity::value() const {
  if (zero) return 0.0;
  if (num == 0) return 1.0;
  if (2 * num == den) return -1.0;
  const double theta = kTau * static_cast<double>(num) / static_cast<double>(den);
  return {std::cos(theta), std::sin(theta)};
}

DirichletCharacter::DirichletCharacter(std::uint64_t q,
                                       std::vector<std::uint32_t> exponents)
    : q_(q), exponents_(std::move(exponents)) {
  const UnitGroup ug = unit_group(q);
  if (exponents_.size() != ug.generators.size())
    throw std::invalid_argument(
        "make_character: exponent vector length does not match the unit "
        "group of q");
  for (std::size_t j = 0; j < exponents_.size(); ++j)
    if (exponents_[j] >= ug.orders[j])
      throw std::invalid_argument(
          "make_character: exponent out of range for generator order");
  principal_ =
      std::all_of(exponents_.begin(), exponents_.end(),
                  [](std::uint32_t e) { return e == 0; });

  values_.assign(q_ == 1 ? 1 : q_, RootOfUnity::zero_value());
  if (q_ == 1) {
    values_[0] = RootOfUnity::one();
  } else {
    // common denominator: lcm of orders
    std::int64_t den = 1;
    for (auto d : ug.orders)
      den = den / gcd_ll(den, static_cast<std::int64_t>(d)) *
            static_cast<std::int64_t>(d);
    for (std::uint64_t n = 1; n < q_; ++n) {
      if (std::gcd(n, q_) != 1) continue; // non-unit stays zero
      std::int64_t num = 0;
      for (std::size_t j = 0; j < exponents_.size(); ++j)
        num += static_cast<std::int64_t>(exponents_[j]) * ug.dlog[n][j] *
               (den / static_cast<std::int64_t>(ug.orders[j]));
      values_[n] = RootOfUnity::make(num, den);
    }
  }

  prefix_.assign(q_ + 1, 0.0);
  for (std::uint64_t t = 1; t <= q_; ++t)
    prefix_[t] = prefix_[t - 1] + values_[t % q_].value();
  // the full-period sum vanishes exactly for non-principal characters;
  // pin it so long partial sums cannot accumulate rounding drift
  if (!principal_) prefix_[q_] = 0.0;
}

cplx DirichletCharacter::partial_sum(double t) const {
  if (t < 1.0) return 0.0;
  const auto n = static_cast<std::uint64_t>(std::floor(t));
  const std::uint64_t full = n / q_, rem = n % q_;
  return static_cast<double>(full) * prefix_[q_] + prefix_[rem];
}

DirichletCharacter DirichletCharacter::conj() const {
  const UnitGroup ug = unit_group(q_);
  std::vector<std::uint32_t> e(exponents_.size());
  for (std::size_t j = 0; j < e.size(); ++j)
    e[j] = exponents_[j] == 0
               ? 0
               : static_cast<std::uint32_t>(ug.orders[j] - exponents_[j]);
  return DirichletCharacter(q_, std::move(e));
}

std::vector<DirichletCharacter> enumerate_characters(std::uint64_t q) {
  const UnitGroup ug = unit_group(q);
  std::vector<DirichletCharacter> out;
  out.reserve(ug.phi);
  std::vector<std::uint32_t> exps(ug.generators.size(), 0);
  while (true) {
    out.emplace_back(q, exps);
    std::size_t j = 0;
    for (; j < exps.size(); ++j) {
      if (++exps[j] < ug.orders[j]) break;
      exps[j] = 0;
    }
    if (j == exps.size()) break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// BoundedSequence

void BoundedSequence::finish_periodic() {
  const std::uint64_t p = period_;
  prefix_.assign(p + 1, 0.0);
  for (std::uint64_t t = 1; t <= p; ++t)
    prefix_[t] = prefix_[t - 1] + values_[t - 1];
  period_sum_ = prefix_[p];
  sup_ = 0.0;
  for (auto& v : values_) sup_ = std::max(sup_, std::abs(v));

  if (std::abs(period_sum_) < 1e-12 * std::max(1.0, sup_) * p) {
    // zero-sum period: pin it, certify the bound as the max prefix magnitude
    period_sum_ = 0.0;
    prefix_[p] = 0.0;
    double alpha = 0.0;
    for (auto& s : prefix_) alpha = std::max(alpha, std::abs(s));
    if (!bound_) bound_ = alpha;
    // mean of S over one period, and the extreme of its centred primitive
    cplx mu = 0.0;
    for (std::uint64_t j = 0; j < p; ++j) mu += prefix_[j];
    mean_ = mu / static_cast<double>(p);
    cplx osc = 0.0;
    osc_bound_ = 0.0;
    for (std::uint64_t j = 0; j < p; ++j) {
      osc += prefix_[j] - mean_;
      osc_bound_ = std::max(osc_bound_, std::abs(osc));
    }
  } else {
    bound_.reset(); // partial sums grow linearly
    mean_ = 0.0;
    osc_bound_ = 0.0;
  }
}

BoundedSequence BoundedSequence::character(const DirichletCharacter& chi) {
  BoundedSequence seq;
  seq.provenance_ = Provenance::character;
  seq.period_ = chi.modulus();
  seq.principal_ = chi.principal();
  seq.values_.resize(seq.period_);
  for (std::uint64_t n = 1; n <= seq.period_; ++n)
    seq.values_[n - 1] = chi.value_c(n);
  seq.label_ = "char:" + std::to_string(chi.modulus()) + ":";
  for (std::size_t j = 0; j < chi.exponents().size(); ++j)
    seq.label_ += (j ? "," : "") + std::to_string(chi.exponents()[j]);
  seq.finish_periodic();
  if (!seq.principal_ && seq.bound_)
    seq.bound_ = static_cast<double>(chi.modulus()); // the certified bound
  return seq;
}

BoundedSequence BoundedSequence::alternating() {
  BoundedSequence seq;
  seq.provenance_ = Provenance::alternating;
  seq.period_ = 2;
  seq.values_ = {1.0, -1.0};
  seq.label_ = "alt";
  seq.finish_periodic(); // alpha = 1
  return seq;
}

BoundedSequence BoundedSequence::periodic_table(std::vector<cplx> values) {
  if (values.empty())
    throw std::invalid_argument("periodic sequence: empty period");
  BoundedSequence seq;
  seq.provenance_ = Provenance::periodic_table;
  seq.period_ = values.size();
  seq.values_ = std::move(values);
  seq.label_ = "periodic:" + std::to_string(seq.period_);
  cplx sum = 0.0;
  for (auto& v : seq.values_) sum += v;
  double sup = 0.0;
  for (auto& v : seq.values_) sup = std::max(sup, std::abs(v));
  if (std::abs(sum) > 1e-9 * std::max(1.0, sup) * seq.period_)
    throw std::invalid_argument(
        "periodic sequence: period sum must vanish (got |sum| = " +
        std::to_string(std::abs(sum)) + ")");
  seq.finish_periodic();
  return seq;
}

BoundedSequence BoundedSequence::custom(
    std::function<cplx(std::uint64_t)> eval,
    std::optional<double> certified_bound) {
  BoundedSequence seq;
  seq.provenance_ = Provenance::custom;
  seq.eval_ = std::move(eval);
  seq.bound_ = certified_bound;
  seq.label_ = "custom";
  seq.sup_ = certified_bound ? *certified_bound * 2.0 : 0.0;
  return seq;
}

cplx BoundedSequence::value(std::uint64_t n) const {
  if (n == 0) return 0.0;
  if (period_) return values_[(n - 1) % period_];
  return eval_(n);
}

cplx BoundedSequence::partial_sum(double t) const {
  if (t < 1.0) return 0.0;
  const auto n = static_cast<std::uint64_t>(std::floor(t));
  if (period_) {
    const std::uint64_t full = n / period_, rem = n % period_;
    return static_cast<double>(full) * period_sum_ + prefix_[rem];
  }
  cplx acc = 0.0;
  for (std::uint64_t m = 1; m <= n; ++m) acc += eval_(m);
  return acc;
}

bool BoundedSequence::has_partial_sum_bound() const {
  return bound_.has_value();
}

double BoundedSequence::partial_sum_bound() const {
  if (principal_)
    throw region_error(
        "principal character: partial sums grow without bound, no certified "
        "bound exists (only the absolute-region direct evaluator accepts "
        "principal characters)");
  if (!bound_)
    throw region_error("sequence carries no certified partial-sum bound");
  return *bound_;
}

BoundedSequence BoundedSequence::conj() const {
  BoundedSequence seq = *this;
  for (auto& v : seq.values_) v = std::conj(v);
  for (auto& s : seq.prefix_) s = std::conj(s);
  seq.period_sum_ = std::conj(seq.period_sum_);
  seq.mean_ = std::conj(seq.mean_);
  if (eval_) {
    auto inner = eval_;
    seq.eval_ = [inner](std::uint64_t n) { return std::conj(inner(n)); };
  }
  return seq;
}

cplx partial_sum(const BoundedSequence& seq, double t) {
  return seq.partial_sum(t);
}

double partial_sum_bound(const BoundedSequence& seq) {
  return seq.partial_sum_bound();
}

} // namespace mdl

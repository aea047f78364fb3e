#include <doctest.h>

#include <cstring>
#include <fstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <json.hpp>

#include "mdl/characters.hpp"
#include "mdl/errors.hpp"
#include "mdl/integrator.hpp"
#include "mdl/oracle.hpp"

using namespace mdl;

namespace {

BoundedSequence chi(std::uint64_t q, std::vector<std::uint32_t> e) {
  return BoundedSequence::character(DirichletCharacter(q, std::move(e)));
}

bool bit_equal(cplx a, cplx b) { return std::memcmp(&a, &b, sizeof(cplx)) == 0; }

} // namespace

TEST_CASE("tail bound formula") {
  SUBCASE("r=1 pinned value") {
    const SPoint p({cplx(1.0, 0.0)});
    CHECK(tail_bound(p, {4.0}, 100.0) == doctest::Approx(0.04).epsilon(1e-14));
  }
  SUBCASE("r=2 golden value") {
    std::ifstream in(std::string(MDL_GOLDEN_DIR) + "/reference_values.json");
    REQUIRE(in.good());
    const auto golden = nlohmann::json::parse(in);
    const SPoint p({cplx(2.0, 0.0), cplx(2.0, 0.0)});
    CHECK(tail_bound(p, {4.0, 4.0}, 50.0) ==
          doctest::Approx(golden["tail_bound_r2"]["value"].get<double>())
              .epsilon(1e-12));
  }
  SUBCASE("monotone decay in T") {
    const SPoint p({cplx(0.6, 0.5), cplx(1.1, -0.3)}, 2);
    double prev = tail_bound(p, {3.0, 4.0}, 10.0);
    for (double T : {100.0, 1000.0}) {
      const double b = tail_bound(p, {3.0, 4.0}, T);
      CHECK(b < prev);
      prev = b;
    }
  }
  SUBCASE("region gate") {
    const SPoint p({cplx(0.5, 0.0), cplx(-0.2, 0.0)});
    CHECK_THROWS_AS(tail_bound(p, {4.0, 4.0}, 10.0), region_error);
  }
  SUBCASE("per-axis variant is at least as sharp on the first axis") {
    const SPoint p({cplx(0.5, 0.0), cplx(0.7, 0.0)});
    for (double T : {16.0, 64.0, 256.0}) {
      CHECK(axis_tail_bound(p, {4.0, 4.0}, 1, T) <=
            tail_bound(p, {4.0, 4.0}, T) * (1.0 + 1e-12));
      CHECK(axis_tail_bound(p, {4.0, 4.0}, 2, T) > 0.0);
    }
  }
}

TEST_CASE("cell integration: serial and parallel reductions agree bitwise") {
  const auto c4 = chi(4, {1});
  const SPoint p({cplx(0.5, 0.2), cplx(0.9, -0.4)}, 1);
  TruncationPlan plan;
  plan.cutoffs = {40, 80};
  plan.gauss_nodes = 6;
  const cplx serial = integrate_cells({c4, c4}, p, plan, Parallel::off);
#ifdef _OPENMP
  for (int threads : {1, 2, 3, 7}) {
    omp_set_num_threads(threads);
    const cplx par = integrate_cells({c4, c4}, p, plan, Parallel::on);
    CHECK(bit_equal(serial, par));
  }
  omp_set_num_threads(omp_get_num_procs());
#else
  CHECK(bit_equal(serial, integrate_cells({c4, c4}, p, plan, Parallel::on)));
#endif
}

TEST_CASE("cell integration argument checks") {
  const auto c4 = chi(4, {1});
  TruncationPlan plan;
  plan.cutoffs = {8, 8, 8, 8};
  const SPoint p4({cplx(2, 0), cplx(2, 0), cplx(2, 0), cplx(2, 0)});
  CHECK_THROWS_AS(integrate_cells({c4, c4, c4, c4}, p4, plan),
                  unsupported_error);
  TruncationPlan bad;
  bad.cutoffs = {1};
  CHECK_THROWS_AS(integrate_cells({c4}, SPoint({cplx(1, 0)}), bad),
                  std::invalid_argument);
  TruncationPlan ok;
  ok.cutoffs = {8};
  CHECK_THROWS_AS(integrate_cells({chi(4, {0})}, SPoint({cplx(1, 0)}), ok),
                  region_error);
}

TEST_CASE("r=1 integral representation recovers the classical value") {
  const auto c4 = chi(4, {1});
  const SPoint p({cplx(1.0, 0.0)});
  const auto res = evaluate_integral({c4}, p, 1e-9);
  CHECK(std::abs(res.value - cplx(0.78539816339744831, 0.0)) < 5e-9);
  CHECK(res.error_estimate <= 1e-9);
  CHECK(res.in_D);
  CHECK(!res.in_D0);
  CHECK(res.method == Method::integral);
}

TEST_CASE("region and argument gates") {
  const auto c4 = chi(4, {1});
  SUBCASE("outside D") {
    const SPoint p({cplx(0.5, 0.0), cplx(-0.2, 0.0)});
    CHECK_THROWS_AS(evaluate_integral({c4, c4}, p, 1e-4), region_error);
  }
  SUBCASE("principal character") {
    const SPoint p({cplx(1.0, 0.0)});
    CHECK_THROWS_AS(evaluate_integral({chi(4, {0})}, p, 1e-4), region_error);
  }
  SUBCASE("bad tolerance") {
    const SPoint p({cplx(1.0, 0.0)});
    CHECK_THROWS_AS(evaluate_integral({c4}, p, 0.0), std::invalid_argument);
  }
}

TEST_CASE("budget exhaustion carries the best value") {
  const auto c4 = chi(4, {1});
  const SPoint p({cplx(0.5, 0.0), cplx(0.7, 0.0)});
  try {
    evaluate_integral({c4, c4}, p, 1e-6, /*max_cells=*/64);
    FAIL("expected budget_error");
  } catch (const budget_error& e) {
    CHECK(e.estimate > 1e-6);
    CHECK(std::abs(e.value) < 10.0); // a finite, sane best effort
  }
}

TEST_CASE("increasing the first-axis cutoff moves the box less than the tail bound") {
  const auto c4 = chi(4, {1});
  SUBCASE("r=1") {
    const SPoint p({cplx(0.8, 0.3)});
    TruncationPlan small, large;
    small.cutoffs = {200};
    large.cutoffs = {1600};
    small.gauss_nodes = large.gauss_nodes = 8;
    const cplx a = integrate_cells({c4}, p, small);
    const cplx b = integrate_cells({c4}, p, large);
    CHECK(std::abs(a - b) <= tail_bound(p, {4.0}, 200.0));
  }
  SUBCASE("r=2") {
    const SPoint p({cplx(1.1, 0.0), cplx(1.3, 0.0)});
    TruncationPlan small, large;
    small.cutoffs = {100, 400};
    large.cutoffs = {800, 400};
    small.gauss_nodes = large.gauss_nodes = 8;
    const cplx a = integrate_cells({c4, c4}, p, small);
    const cplx b = integrate_cells({c4, c4}, p, large);
    CHECK(std::abs(a - b) <= tail_bound(p, {4.0, 4.0}, 100.0));
  }
}

TEST_CASE("a-posteriori checks on the reported estimates") {
  const auto c4 = chi(4, {1});
  const SPoint p({cplx(1.5, 0.0), cplx(1.5, 0.0)});
  const auto res = evaluate_integral({c4, c4}, p, 1e-7);
  SUBCASE("doubling G at fixed cutoffs stays inside the quadrature estimate") {
    TruncationPlan base = res.plan;
    TruncationPlan doubled = res.plan;
    doubled.gauss_nodes = 2 * base.gauss_nodes;
    const cplx vG = integrate_cells({c4, c4}, p, base);
    const cplx v2G = integrate_cells({c4, c4}, p, doubled);
    CHECK(std::abs(vG - v2G) <= res.plan.quadrature_estimate);
  }
  SUBCASE("growing the box stays inside the tail bound") {
    TruncationPlan grown = res.plan;
    for (auto& T : grown.cutoffs) T *= 2;
    const cplx a = integrate_cells({c4, c4}, p, res.plan);
    const cplx b = integrate_cells({c4, c4}, p, grown);
    // box growth is covered by the certified truncation remainder plus the
    // mean corrections the evaluator adds on top of the box
    CHECK(std::abs(a - b) <=
          res.plan.tail_bound + 2.0 * std::abs(res.value) * 1e-10 +
              2.0 * tail_bound(p, {4.0, 4.0},
                               static_cast<double>(res.plan.cutoffs[0])));
  }
}

TEST_CASE("conjugation symmetry of the integral evaluation") {
  const auto c5 = chi(5, {1});
  const auto c5bar = c5.conj();
  const SPoint p({cplx(0.9, 0.3)});
  const SPoint pbar({std::conj(cplx(0.9, 0.3))});
  const auto a = evaluate_integral({c5}, p, 1e-8);
  const auto b = evaluate_integral({c5bar}, pbar, 1e-8);
  CHECK(std::abs(b.value - std::conj(a.value)) <=
        1e-12 * (1.0 + std::abs(a.value)));
}

TEST_CASE("n0 shift matches the shifted series (r=1)") {
  const auto c4 = chi(4, {1});
  for (std::uint64_t m : {0ull, 1ull, 5ull}) {
    const SPoint p({cplx(0.9, 0.0)}, m);
    const auto integral = evaluate_integral({c4}, p, 1e-8);
    const auto series = accelerated_line_sum(c4, cplx(0.9, 0.0),
                                             static_cast<double>(m), 1e-10);
    CHECK(std::abs(integral.value - series.value) < 2e-8);
  }
}

TEST_CASE("alternating sequences run through the same evaluator") {
  const auto alt = BoundedSequence::alternating();
  const SPoint p({cplx(1.0, 0.0)});
  const auto res = evaluate_integral({alt}, p, 1e-9);
  CHECK(std::abs(res.value - cplx(std::log(2.0), 0.0)) < 5e-9);
}

TEST_CASE("plain box approaches the classical value as the box grows") {
  const auto c4 = chi(4, {1});
  SUBCASE("r=1: period-aligned boxes close in on pi/4") {
    const SPoint p({cplx(1.0, 0.0)});
    const double pi4 = 0.78539816339744830962;
    TruncationPlan plan;
    plan.gauss_nodes = 8;
    double prev_err = 1.0;
    for (std::uint64_t T : {401u, 4001u, 40001u}) {
      plan.cutoffs = {T};
      const double err =
          std::abs(integrate_cells({c4}, p, plan) - cplx(pi4, 0.0));
      CHECK(err <= tail_bound(p, {4.0}, static_cast<double>(T)));
      CHECK(err < prev_err);
      prev_err = err;
    }
  }
  SUBCASE("r=2 box matches the reference double sum within 1e-6") {
    std::ifstream in(std::string(MDL_GOLDEN_DIR) + "/reference_values.json");
    REQUIRE(in.good());
    const auto golden = nlohmann::json::parse(in);
    const auto& g = golden["direct_r2_s22_chi4_chi4"];
    const cplx W(g["value_re"].get<double>(), g["value_im"].get<double>());
    const SPoint p({cplx(2.0, 0.0), cplx(2.0, 0.0)});
    TruncationPlan plan;
    plan.cutoffs = {200, 2000};
    plan.gauss_nodes = 8;
    CHECK(std::abs(integrate_cells({c4, c4}, p, plan) - W) <= 1e-6);
  }
}

TEST_CASE("growing one later axis stays inside its certified axis tail") {
  const auto c4 = chi(4, {1});
  const SPoint p({cplx(0.8, 0.0), cplx(1.1, 0.0)});
  TruncationPlan small, large;
  small.cutoffs = {64, 256};
  large.cutoffs = {64, 4096};
  small.gauss_nodes = large.gauss_nodes = 8;
  const cplx a = integrate_cells({c4, c4}, p, small);
  const cplx b = integrate_cells({c4, c4}, p, large);
  CHECK(std::abs(a - b) <= axis_tail_bound(p, {4.0, 4.0}, 2, 256.0));
}

TEST_CASE("integral agrees with the direct sum on an absolute-region grid") {
  const auto c4 = chi(4, {1});
  const auto c3 = chi(3, {1});
  SUBCASE("r=1 grid") {
    for (double sig : {2.0, 2.5, 3.0, 4.0}) {
      for (double tau : {0.0, 0.6}) {
        const SPoint p({cplx(sig, tau)});
        const auto integral = evaluate_integral({c4}, p, 1e-7);
        const auto direct = evaluate_direct({c4}, p, 1e-6);
        CHECK(std::abs(integral.value - direct.value) <= 1e-7 + 1e-6);
      }
    }
  }
  SUBCASE("r=2 grid") {
    for (double s1 : {1.2, 2.0, 2.8}) {
      for (double s2 : {2.4, 2.8}) {
        for (double tau : {0.0, 0.5}) {
          const SPoint p({cplx(s1, tau), cplx(s2, -tau)});
          const auto integral = evaluate_integral({c4, c3}, p, 3e-5);
          const auto direct = evaluate_direct({c4, c3}, p, 3e-5);
          CHECK(std::abs(integral.value - direct.value) <= 6e-5);
        }
      }
    }
  }
}

TEST_CASE("r=3 box evaluation agrees with the direct sum at modest tolerance") {
  const auto c4 = chi(4, {1});
  const auto c3 = chi(3, {1});
  const SPoint p({cplx(2.0, 0.0), cplx(2.0, 0.0), cplx(2.5, 0.0)});
  const auto integral = evaluate_integral({c4, c3, c4}, p, 5e-4);
  const auto direct = evaluate_direct({c4, c3, c4}, p, 3e-6);
  CHECK(std::abs(integral.value - direct.value) <=
        integral.error_estimate + direct.spread);
}

TEST_CASE("json periodic sequence integrates in the conditional region") {
  const auto seq =
      load_periodic_sequence(std::string(MDL_TEST_DATA_DIR) + "/period6.json");
  const SPoint p({cplx(0.9, 0.0)});
  const auto res = evaluate_integral({seq}, p, 1e-7);
  const auto oracle = accelerated_line_sum(seq, cplx(0.9, 0.0), 0.0, 1e-9);
  CHECK(std::abs(res.value - oracle.value) < 2e-7);
}

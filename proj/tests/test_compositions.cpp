#include <doctest.h>

#include <fstream>

#include <json.hpp>

#include "mdl/compositions.hpp"

using namespace mdl;

namespace {

// independent brute-force filter over {0..r}^r
std::vector<CompositionTerm> brute_force(int r) {
  std::vector<CompositionTerm> out;
  std::vector<int> v(r, 0);
  while (true) {
    int sum = 0;
    bool ok = true;
    for (int i = 0; i < r && ok; ++i) {
      if (v[i] > i + 1) ok = false;
      sum += v[i];
      if (sum > i + 1) ok = false;
    }
    if (ok && sum == r) {
      std::uint64_t c = binomial(1, v[0]);
      int prefix = v[0];
      for (int i = 2; i <= r; ++i) {
        c *= binomial(i - prefix, v[i - 1]);
        prefix += v[i - 1];
      }
      out.push_back({v, c});
    }
    int pos = r - 1;
    while (pos >= 0) {
      if (++v[pos] <= r) break;
      v[pos] = 0;
      --pos;
    }
    if (pos < 0) break;
  }
  return out;
}

bool same_terms_any_order(std::vector<CompositionTerm> a,
                          std::vector<CompositionTerm> b) {
  auto lt = [](const CompositionTerm& x, const CompositionTerm& y) {
    return x.k < y.k;
  };
  std::sort(a.begin(), a.end(), lt);
  std::sort(b.begin(), b.end(), lt);
  return a == b;
}

} // namespace

TEST_CASE("binomial convention") {
  CHECK(binomial(2, -1) == 0);
  CHECK(binomial(2, 3) == 0);
  CHECK(binomial(0, 0) == 1);
  CHECK(binomial(5, 2) == 10);
  CHECK(binomial(12, 6) == 924);
}

TEST_CASE("pinned small tables") {
  SUBCASE("r=1") {
    const auto& terms = enumerate_compositions(1);
    REQUIRE(terms.size() == 1);
    CHECK(terms[0].k == std::vector<int>{1});
    CHECK(terms[0].coeff == 1);
  }
  SUBCASE("r=2 matches the closed two-term kernel") {
    const auto& terms = enumerate_compositions(2);
    REQUIRE(terms.size() == 2);
    CHECK(terms[0].k == std::vector<int>{1, 1});
    CHECK(terms[0].coeff == 1);
    CHECK(terms[1].k == std::vector<int>{0, 2});
    CHECK(terms[1].coeff == 1);
  }
  SUBCASE("r=3 five terms in decreasing lexicographic order") {
    const auto& terms = enumerate_compositions(3);
    REQUIRE(terms.size() == 5);
    const std::vector<std::vector<int>> expect_k = {
        {1, 1, 1}, {1, 0, 2}, {0, 2, 1}, {0, 1, 2}, {0, 0, 3}};
    const std::vector<std::uint64_t> expect_c = {1, 1, 1, 2, 1};
    for (std::size_t i = 0; i < 5; ++i) {
      CHECK(terms[i].k == expect_k[i]);
      CHECK(terms[i].coeff == expect_c[i]);
    }
  }
}

TEST_CASE("coefficient examples and constraint rejection") {
  CHECK(composition_coefficient({0, 1, 2}) == 2);
  CHECK(composition_coefficient({1, 1}) == 1);
  CHECK(composition_coefficient({0, 2}) == 1);
  CHECK_THROWS_AS(composition_coefficient({2, 0}), std::invalid_argument);
  CHECK_THROWS_AS(composition_coefficient({1, 0}), std::invalid_argument);
  CHECK_THROWS_AS(composition_coefficient({0, 3}), std::invalid_argument);
}

TEST_CASE("enumerator equals brute force through r=8") {
  for (int r = 1; r <= 8; ++r)
    CHECK(same_terms_any_order(enumerate_compositions(r), brute_force(r)));
}

TEST_CASE("per-term invariants") {
  for (int r = 1; r <= 8; ++r) {
    for (const auto& term : enumerate_compositions(r)) {
      CHECK((term.k[0] == 0 || term.k[0] == 1));
      CHECK(term.coeff >= 1);
      // suffix sums over the last i+1 entries reach at least i+1
      int suffix = 0;
      for (int i = 0; i < r; ++i) {
        suffix += term.k[r - 1 - i];
        CHECK(suffix >= i + 1);
      }
    }
  }
}

TEST_CASE("golden empirical totals (recorded, no closed form asserted)") {
  std::ifstream in(std::string(MDL_GOLDEN_DIR) + "/reference_values.json");
  REQUIRE(in.good());
  const auto golden = nlohmann::json::parse(in);
  const auto& counts = golden["composition_table"]["term_counts"];
  const auto& totals = golden["composition_table"]["coeff_totals"];
  for (int r = 1; r <= 8; ++r) {
    const auto terms = brute_force(r);
    std::uint64_t total = 0;
    for (const auto& t : terms) total += t.coeff;
    CHECK(counts[r - 1].get<std::uint64_t>() == terms.size());
    CHECK(totals[r - 1].get<std::uint64_t>() == total);
  }
}

TEST_CASE("rank guard") {
  CHECK_THROWS_AS(enumerate_compositions(0), std::invalid_argument);
  CHECK_THROWS_AS(enumerate_compositions(13), std::invalid_argument);
}

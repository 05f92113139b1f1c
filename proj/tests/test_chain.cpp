#include <doctest.h>

#include <cmath>
#include <map>

#include "bmc/chain.hpp"

using namespace bmc;

namespace {

// Random irreducible stochastic matrix: random nonnegative rows plus a
// guaranteed cycle, normalized.
std::vector<std::vector<double>> random_stochastic(Rng& rng, int n) {
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(n));
  for (auto& row : rows) row.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    double sum = 0.0;
    for (int j = 0; j < n; ++j) {
      double v = rng.next_double() < 0.4 ? 0.0 : rng.next_double();
      rows[std::size_t(i)][std::size_t(j)] = v;
      sum += v;
    }
    rows[std::size_t(i)][std::size_t((i + 1) % n)] += 0.25;
    sum += 0.25;
    for (int j = 0; j < n; ++j) rows[std::size_t(i)][std::size_t(j)] /= sum;
  }
  return rows;
}

}  // namespace

TEST_CASE("make_biased_walk accepts probabilities and flags endpoints") {
  CHECK_FALSE(make_biased_walk(0.5).degenerate());
  CHECK_FALSE(make_biased_walk(0.3).degenerate());
  CHECK(make_biased_walk(1.0).degenerate());
  CHECK(make_biased_walk(0.0).degenerate());
  CHECK(make_biased_walk(0.3).biased().p == 0.3);

  CHECK_THROWS_AS(make_biased_walk(-0.1), InvalidChain);
  CHECK_THROWS_AS(make_biased_walk(1.5), InvalidChain);
  CHECK_THROWS_AS(make_biased_walk(std::nan("")), InvalidChain);
}

TEST_CASE("make_simple_walk dimension range") {
  CHECK(make_simple_walk(1).lattice().d == 1);
  CHECK(make_simple_walk(4).lattice().d == 4);
  CHECK_THROWS_AS(make_simple_walk(0), InvalidChain);
  CHECK_THROWS_AS(make_simple_walk(5), InvalidChain);
}

TEST_CASE("simple walk d=1 has the same step law as the fair biased walk") {
  const ChainSpec a = make_simple_walk(1);
  const ChainSpec b = make_biased_walk(0.5);
  const State origin = a.origin();
  const auto da = step_distribution(a, origin);
  const auto db = step_distribution(b, origin);
  REQUIRE(da.size() == db.size());
  for (std::size_t i = 0; i < da.size(); ++i) {
    CHECK(da[i].first == db[i].first);
    CHECK(da[i].second == doctest::Approx(db[i].second).epsilon(1e-15));
  }
}

TEST_CASE("make_finite validation") {
  SUBCASE("self-loop") {
    const ChainSpec c = make_finite({{1.0}}, 0);
    CHECK(c.finite().n_states == 1);
  }
  SUBCASE("period-2 chain") {
    const ChainSpec c = make_finite({{0.0, 1.0}, {1.0, 0.0}}, 0);
    CHECK(c.finite().n_states == 2);
  }
  SUBCASE("absorbing state is rejected") {
    CHECK_THROWS_AS(make_finite({{0.5, 0.5}, {0.0, 1.0}}, 0), NotIrreducible);
  }
  SUBCASE("row sum off by more than 1e-12") {
    CHECK_THROWS_AS(make_finite({{0.5, 0.5 + 1e-9}, {1.0, 0.0}}, 0),
                    RowSumError);
  }
  SUBCASE("negative entry") {
    CHECK_THROWS_AS(make_finite({{1.2, -0.2}, {1.0, 0.0}}, 0), NegativeEntry);
  }
  SUBCASE("origin out of range") {
    CHECK_THROWS_AS(make_finite({{1.0}}, 1), InvalidChain);
  }
  SUBCASE("non-square") {
    CHECK_THROWS_AS(make_finite({{0.5, 0.5}}, 0), InvalidChain);
  }
}

TEST_CASE("irreducibility accepted iff strongly connected") {
  // connected ring
  CHECK_NOTHROW(
      make_finite({{0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}, {1.0, 0.0, 0.0}}, 0));
  // state 2 absorbing: reachable but cannot return
  CHECK_THROWS_AS(
      make_finite({{0.5, 0.5, 0.0}, {0.5, 0.0, 0.5}, {0.0, 0.0, 1.0}}, 0),
      NotIrreducible);
}

TEST_CASE("step_distribution examples") {
  SUBCASE("biased walk at x=5") {
    const ChainSpec c = make_biased_walk(0.3);
    const auto d = step_distribution(c, State{5});
    REQUIRE(d.size() == 2);
    CHECK(d[0].first == State{4});
    CHECK(d[0].second == doctest::Approx(0.7));
    CHECK(d[1].first == State{6});
    CHECK(d[1].second == doctest::Approx(0.3));
  }
  SUBCASE("Z^2 origin: four neighbours at 1/4, sorted") {
    const ChainSpec c = make_simple_walk(2);
    const auto d = step_distribution(c, State{0, 0});
    REQUIRE(d.size() == 4);
    CHECK(d[0].first == State{-1, 0});
    CHECK(d[1].first == State{0, -1});
    CHECK(d[2].first == State{0, 1});
    CHECK(d[3].first == State{1, 0});
    for (const auto& [s, w] : d) CHECK(w == doctest::Approx(0.25));
  }
  SUBCASE("self-loop") {
    const ChainSpec c = make_finite({{1.0}}, 0);
    const auto d = step_distribution(c, State::index(0));
    REQUIRE(d.size() == 1);
    CHECK(d[0].first == State::index(0));
    CHECK(d[0].second == 1.0);
  }
  SUBCASE("monotone walk drops the zero-probability move") {
    const ChainSpec c = make_biased_walk(1.0);
    const auto d = step_distribution(c, State{0});
    REQUIRE(d.size() == 1);
    CHECK(d[0].first == State{1});
  }
  SUBCASE("invalid state") {
    CHECK_THROWS_AS(step_distribution(make_simple_walk(2), State{0}),
                    InvalidState);
    CHECK_THROWS_AS(
        step_distribution(make_finite({{1.0}}, 0), State::index(3)),
        InvalidState);
  }
}

TEST_CASE("step_distribution masses sum to 1 on random chains and states") {
  Rng rng(2024);
  for (int rep = 0; rep < 30; ++rep) {
    const int n = 2 + int(rng.next_double() * 5);
    const ChainSpec c = make_finite(random_stochastic(rng, n), 0);
    for (int x = 0; x < n; ++x) {
      double sum = 0.0;
      for (const auto& [s, w] : step_distribution(c, State::index(x))) {
        CHECK(w >= 0.0);
        sum += w;
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  for (int d = 1; d <= 4; ++d) {
    const ChainSpec c = make_simple_walk(d);
    State s = State::zeros(d);
    for (int i = 0; i < d; ++i) s[i] = int(rng.next_double() * 10) - 5;
    double sum = 0.0;
    for (const auto& [t, w] : step_distribution(c, s)) sum += w;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("step_sample on deterministic chains") {
  Rng rng(7);
  const ChainSpec loop = make_finite({{1.0}}, 0);
  CHECK(step_sample(loop, State::index(0), rng) == State::index(0));

  const ChainSpec flip = make_finite({{0.0, 1.0}, {1.0, 0.0}}, 0);
  CHECK(step_sample(flip, State::index(0), rng) == State::index(1));
  CHECK(step_sample(flip, State::index(1), rng) == State::index(0));
}

TEST_CASE("step_sample frequencies match the step law (binomial error)") {
  SUBCASE("fair walk, 1e6 draws, +1 fraction = 0.5 +- 0.002") {
    const ChainSpec c = make_biased_walk(0.5);
    Rng rng(11);
    const State origin = c.origin();
    long long right = 0;
    const long long n = 1'000'000;
    for (long long i = 0; i < n; ++i)
      if (step_sample(c, origin, rng)[0] == 1) ++right;
    // 0.002 is 4 sigma of sqrt(0.25/n)
    CHECK(std::abs(double(right) / double(n) - 0.5) < 0.002);
  }
  SUBCASE("three-state chain, each outcome within 4 sigma at 1e5 draws") {
    Rng rng(13);
    const ChainSpec c = make_finite(random_stochastic(rng, 3), 0);
    const auto law = step_distribution(c, State::index(1));
    std::map<std::int32_t, long long> counts;
    const long long n = 100'000;
    for (long long i = 0; i < n; ++i)
      ++counts[step_sample(c, State::index(1), rng)[0]];
    for (const auto& [s, q] : law) {
      const double freq = double(counts[s[0]]) / double(n);
      const double tol = 4.0 * std::sqrt(q * (1.0 - q) / double(n)) + 1e-9;
      CHECK(std::abs(freq - q) < tol);
    }
  }
  SUBCASE("Z^3 direction frequencies") {
    const ChainSpec c = make_simple_walk(3);
    Rng rng(17);
    std::map<State, long long> counts;
    const long long n = 60'000;
    for (long long i = 0; i < n; ++i) ++counts[step_sample(c, c.origin(), rng)];
    CHECK(counts.size() == 6);
    for (const auto& [s, k] : counts) {
      const double tol = 4.0 * std::sqrt((1.0 / 6) * (5.0 / 6) / double(n));
      CHECK(std::abs(double(k) / double(n) - 1.0 / 6) < tol);
    }
  }
}

TEST_CASE("exact_return_beta") {
  CHECK(*exact_return_beta(make_biased_walk(0.5)) == doctest::Approx(1.0));
  CHECK(*exact_return_beta(make_biased_walk(0.25)) == doctest::Approx(0.5));
  CHECK(*exact_return_beta(make_biased_walk(1.0)) == doctest::Approx(0.0));
  CHECK(*exact_return_beta(make_simple_walk(1)) == 1.0);
  CHECK(*exact_return_beta(make_simple_walk(2)) == 1.0);
  CHECK_FALSE(exact_return_beta(make_simple_walk(3)).has_value());
  CHECK_FALSE(exact_return_beta(make_simple_walk(4)).has_value());
  CHECK(*exact_return_beta(make_finite({{1.0}}, 0)) == 1.0);

  // symmetry under p <-> 1-p
  for (double p = 0.0; p <= 0.5 + 1e-9; p += 0.05) {
    const double a = *exact_return_beta(make_biased_walk(p));
    const double b = *exact_return_beta(make_biased_walk(1.0 - p));
    CHECK(a == doctest::Approx(b).epsilon(1e-15));
  }
}

TEST_CASE("lattice states keep coordinate-sum parity equal to step parity") {
  Rng rng(23);
  for (int d = 1; d <= 3; ++d) {
    const ChainSpec c = make_simple_walk(d);
    State s = c.origin();
    for (int n = 1; n <= 50; ++n) {
      s = step_sample(c, s, rng);
      int sum = 0;
      for (int i = 0; i < d; ++i) sum += s[i];
      CHECK(((sum % 2) + 2) % 2 == n % 2);
    }
  }
}

TEST_CASE("chain JSON round trip and rejection") {
  SUBCASE("biased walk") {
    const ChainSpec c = chain_from_json(R"({"kind":"biased_walk_z","p":0.3})");
    CHECK(c.kind() == ChainKind::biased_walk_z);
    CHECK(c.biased().p == 0.3);
    const ChainSpec back = chain_from_json(chain_to_json(c));
    CHECK(back.biased().p == 0.3);
  }
  SUBCASE("lattice walk") {
    const ChainSpec c = chain_from_json(R"({"kind":"simple_walk_zd","d":3})");
    CHECK(c.lattice().d == 3);
  }
  SUBCASE("finite chain") {
    const ChainSpec c = chain_from_json(
        R"({"kind":"finite","rows":[[0.0,1.0],[1.0,0.0]],"origin":1})");
    CHECK(c.finite().origin == 1);
    const ChainSpec back = chain_from_json(chain_to_json(c));
    CHECK(back.finite().at(0, 1) == 1.0);
  }
  SUBCASE("rejects") {
    CHECK_THROWS_AS(chain_from_json("not json"), InvalidChain);
    CHECK_THROWS_AS(chain_from_json(R"({"p":0.5})"), InvalidChain);
    CHECK_THROWS_AS(chain_from_json(R"({"kind":"mystery"})"), InvalidChain);
    CHECK_THROWS_AS(chain_from_json(R"({"kind":"biased_walk_z","p":7})"),
                    InvalidChain);
    CHECK_THROWS_AS(chain_from_json(R"({"kind":"simple_walk_zd","d":9})"),
                    InvalidChain);
  }
}

TEST_CASE("state ordering is lexicographic") {
  CHECK(State{-1, 0} < State{0, -1});
  CHECK(State{0, -1} < State{0, 1});
  CHECK(State{0, 1} < State{1, 0});
  CHECK(State{2} < State{3});
}

#include <random>
#include <thread>

#include "doctest.h"
#include "hmmdiag/evaluators.hpp"
#include "oracle.hpp"

using namespace hmmdiag;
using oracle::rel_err;

namespace {

const std::vector<Method> kAllMethods = {Method::direct, Method::forward, Method::chain,
                                         Method::diag_power};

EvaluationResult run(Method method, const HmmModel& m, const ObservationSequence& obs) {
  OpCounter c;
  return evaluate(method, m, obs, c);
}

HmmModel unit_emitter() {
  return {1, 2, Matrix{{1.0}}, Matrix{{0.5, 0.5}}, {1.0}};
}

}  // namespace

TEST_CASE("build_scaled_set: column scaling examples") {
  const HmmModel m{2, 2, Matrix{{0.7, 0.3}, {0.4, 0.6}}, Matrix{{0.9, 0.1}, {0.2, 0.8}},
                   {0.6, 0.4}};
  const ScaledMatrixSet set = build_scaled_set(m);
  REQUIRE(set.n_symbols() == 2);
  CHECK(max_abs_diff(set.matrices[0], Matrix{{0.63, 0.06}, {0.36, 0.12}}) < 1e-15);
  CHECK(set.construction_cost == OpCount{8, 0});
  CHECK(set.factorizations[0].has_value());

  const HmmModel single = gen_random_model(4, 1, 3);
  CHECK(build_scaled_set(single).matrices[0] == single.transition);
}

TEST_CASE("build_scaled_set: matrices sum to the transition matrix") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const HmmModel m = gen_random_model(1 + seed % 8, 1 + seed % 6, seed);
    const ScaledMatrixSet set = build_scaled_set(m);
    Matrix sum(m.n_states, m.n_states);
    for (const Matrix& a : set.matrices)
      for (std::size_t i = 0; i < m.n_states; ++i)
        for (std::size_t j = 0; j < m.n_states; ++j) sum(i, j) += a(i, j);
    CHECK(max_abs_diff(sum, m.transition) < 1e-12);
  }
}

TEST_CASE("initial_vector examples") {
  const HmmModel m = oracle::two_state_model();
  OpCounter c;
  const auto v = initial_vector(m, 0, c);
  CHECK(v[0] == doctest::Approx(0.54).epsilon(1e-15));
  CHECK(v[1] == doctest::Approx(0.08).epsilon(1e-15));
  CHECK(c.count() == OpCount{2, 0});

  const HmmModel ones{3, 1, Matrix::identity(3), Matrix(3, 1, 1.0), {0.2, 0.3, 0.5}};
  CHECK(initial_vector(ones, 0, c) == ones.initial);

  HmmModel peaked = gen_random_model(3, 2, 5);
  peaked.initial = {1.0, 0.0, 0.0};
  CHECK(initial_vector(peaked, 1, c) == std::vector<double>{peaked.emission(0, 1), 0.0, 0.0});
}

TEST_CASE("every method reproduces the hand-checked examples") {
  const ObservationSequence o011({0, 1, 1});
  const HmmModel forced{2, 1, Matrix{{0.5, 0.5}, {0.5, 0.5}}, Matrix{{1.0}, {1.0}}, {0.6, 0.4}};
  const HmmModel two = oracle::two_state_model();
  for (Method m : kAllMethods) {
    CAPTURE(method_name(m));
    CHECK(rel_err(run(m, unit_emitter(), o011).probability, 0.125) < 1e-15);
    CHECK(rel_err(run(m, forced, ObservationSequence({0})).probability, 1.0) < 1e-15);
    const double tol = m == Method::diag_power ? 1e-9 : 1e-12;
    CHECK(rel_err(run(m, two, ObservationSequence({0, 0, 1})).probability,
                  oracle::kTwoStateO001) < tol);
    CHECK(rel_err(run(m, two, ObservationSequence({0, 1, 0})).probability,
                  oracle::kTwoStateO010) < tol);
  }
  CHECK(rel_err(oracle::brute_force_likelihood(two, {0, 0, 1}), oracle::kTwoStateO001) < 1e-15);
}

TEST_CASE("eval_direct counter law") {
  for (std::size_t n = 1; n <= 3; ++n) {
    for (std::size_t t = 1; t <= 5; ++t) {
      const HmmModel m = gen_random_model(n, 2, n * 10 + t);
      OpCounter c;
      const auto r = eval_direct(m, gen_random_sequence(2, t, t), c);
      std::uint64_t paths = 1;
      for (std::size_t i = 0; i < t; ++i) paths *= n;
      CHECK(r.counts == OpCount{(2 * t - 1) * paths, paths - 1});
      CHECK(c.count() == r.counts);
    }
  }
}

TEST_CASE("eval_direct refuses enumerations beyond the cap") {
  const HmmModel m = gen_random_model(4, 2, 1);
  OpCounter c;
  try {
    eval_direct(m, gen_random_sequence(2, 20, 1), c);
    FAIL("expected CapExceededError");
  } catch (const CapExceededError& e) {
    CHECK(e.required() == doctest::Approx(std::pow(4.0, 20) * 20));
  }
  CHECK(c.count() == OpCount{});
  // 2^3 * 3 = 24 steps
  CHECK_THROWS_AS(eval_direct(m, ObservationSequence({0, 1, 0}), c, 23), CapExceededError);
  const HmmModel two = oracle::two_state_model();
  CHECK_NOTHROW(eval_direct(two, ObservationSequence({0, 1, 0}), c, 24));
}

TEST_CASE("evaluators reject out-of-range symbols") {
  const HmmModel m = oracle::two_state_model();
  for (Method method : kAllMethods) {
    CHECK_THROWS_AS(run(method, m, ObservationSequence({0, 2})), DimensionError);
    CHECK_THROWS_AS(run(method, m, ObservationSequence()), DimensionError);
  }
}

TEST_CASE("eval_forward stays finite on long sequences") {
  const HmmModel m = gen_random_model(5, 4, 77);
  const ObservationSequence obs = gen_random_sequence(4, 1000, 77);
  OpCounter c;
  const auto r = eval_forward(m, obs, c);
  CHECK(std::isfinite(r.log_probability));
  CHECK(r.log_probability < 0.0);
  CHECK(r.probability >= 0.0);
  CHECK_FALSE(std::isnan(r.probability));

  // 5000 steps with probability ~ 0.5 each: far below the normal range
  const HmmModel coin = unit_emitter();
  const auto u = eval_forward(coin, gen_random_sequence(2, 5000, 1), c);
  CHECK(u.diagnostics.underflow);
  CHECK(u.probability == 0.0);
  CHECK(u.log_probability == doctest::Approx(5000 * std::log(0.5)).epsilon(1e-12));
}

TEST_CASE("single-state chains multiply emissions") {
  const HmmModel m{1, 3, Matrix{{1.0}}, Matrix{{0.2, 0.3, 0.5}}, {1.0}};
  const ObservationSequence obs({2, 0, 1, 1, 2});
  const double expected = 0.5 * 0.2 * 0.3 * 0.3 * 0.5;
  for (Method method : kAllMethods) {
    CHECK(rel_err(run(method, m, obs).probability, expected) < 1e-14);
  }
}

TEST_CASE("eval_chain and eval_diag_power with T = 1 sum the initial vector") {
  const HmmModel m = gen_random_model(3, 3, 11);
  const double expected = m.initial[0] * m.emission(0, 2) + m.initial[1] * m.emission(1, 2) +
                          m.initial[2] * m.emission(2, 2);
  OpCounter c;
  CHECK(rel_err(eval_chain(m, ObservationSequence({2}), c).probability, expected) < 1e-15);
  CHECK(rel_err(run(Method::diag_power, m, ObservationSequence({2})).probability, expected) <
        1e-15);
}

TEST_CASE("eval_diag_power closed form for diagonal transitions") {
  const HmmModel m{3, 2, Matrix::identity(3), Matrix{{0.9, 0.1}, {0.5, 0.5}, {0.3, 0.7}},
                   {0.2, 0.3, 0.5}};
  double expected = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    expected += m.initial[i] * m.emission(i, 0) * std::pow(m.emission(i, 0), 3);
  }
  const auto r = run(Method::diag_power, m, ObservationSequence({0, 0, 0, 0}));
  CHECK(rel_err(r.probability, expected) < 1e-12);
  CHECK(r.diagnostics.fallbacks_used.empty());
}

TEST_CASE("eval_diag_power tallies: initial vector, run powers, chain, final reduction") {
  const HmmModel m = gen_random_model(3, 2, 5);
  const ScaledMatrixSet set = build_scaled_set(m);
  REQUIRE(set.factorizations[0]);
  REQUIRE(set.factorizations[1]);
  // runs over o2..o5: (0, 3), (1, 1)
  OpCounter c;
  const auto r = eval_diag_power(m, ObservationSequence({1, 0, 0, 0, 1}), c, set);
  const std::uint64_t n = 3;
  const std::uint64_t mults = n                         // initial vector
                              + n * 2 + 2 * n * n * n   // A_0^3
                              + 2 * n * n * n           // A_1^1
                              + n * n * n               // chain product
                              + n * n;                  // row weighting
  const std::uint64_t adds = 4 * n * n * (n - 1) + n * n * (n - 1) + n * n - 1;
  CHECK(r.counts.multiplications == mults);
  CHECK(r.counts.additions == adds);
}

TEST_CASE("run lengths over o2..oT cover T-1 steps") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t t = 1 + rng() % 300;
    const ObservationSequence obs = gen_random_sequence(3, t, rng());
    const auto runs = run_length_encode(std::span<const Symbol>(obs.symbols()).subspan(1));
    CHECK(runs.total_length() == t - 1);
  }
}

TEST_CASE("all four methods agree on small random problems") {
  std::mt19937_64 rng(123);
  for (int trial = 0; trial < 120; ++trial) {
    const std::size_t n = 1 + rng() % 6, m = 1 + rng() % 4, t = 1 + rng() % 8;
    const HmmModel model = gen_random_model(n, m, rng());
    const ObservationSequence obs = gen_random_sequence(m, t, rng());
    const double reference = run(Method::direct, model, obs).probability;
    REQUIRE(rel_err(reference, oracle::brute_force_likelihood(model, obs.symbols())) < 1e-12);
    CHECK(rel_err(run(Method::forward, model, obs).probability, reference) < 1e-10);
    CHECK(rel_err(run(Method::chain, model, obs).probability, reference) < 1e-10);
    CHECK(rel_err(run(Method::diag_power, model, obs).probability, reference) < 1e-9);
  }
}

TEST_CASE("probabilities over all sequences of length 5 sum to one") {
  const HmmModel m = gen_random_model(3, 2, 7);
  for (Method method : kAllMethods) {
    double total = 0.0;
    for (unsigned bits = 0; bits < 32; ++bits) {
      std::vector<Symbol> s(5);
      for (int k = 0; k < 5; ++k) s[k] = (bits >> k) & 1u;
      const auto r = run(method, m, ObservationSequence(s));
      CHECK(r.probability >= 0.0);
      CHECK(r.probability <= 1.0 + 1e-9);
      total += r.probability;
    }
    CHECK(std::abs(total - 1.0) < 1e-9);
  }
}

TEST_CASE("eval_diag_power matches forward on long run-heavy sequences") {
  std::mt19937_64 rng(2718);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng() % 5, m = 2 + rng() % 4;
    const HmmModel model = gen_random_model(n, m, rng());
    std::vector<Symbol> s;
    while (s.size() < 200) {
      const Symbol sym = static_cast<Symbol>(rng() % m);
      const std::size_t len = 1 + rng() % 19;
      for (std::size_t i = 0; i < len && s.size() < 200; ++i) s.push_back(sym);
    }
    const ObservationSequence obs(s);
    OpCounter c;
    const auto fwd = eval_forward(model, obs, c);
    REQUIRE(fwd.log_probability > std::log(1e-250));
    const auto diag = run(Method::diag_power, model, obs);
    CHECK(rel_err(diag.probability, fwd.probability) < 1e-9);
    CHECK(rel_err(run(Method::chain, model, obs).probability, fwd.probability) < 1e-10);
  }
}

TEST_CASE("defective operators fall back to repeated multiplication") {
  const HmmModel m = oracle::defective_model();
  REQUIRE(validate_model(m).ok());
  const ScaledMatrixSet set = build_scaled_set(m);
  CHECK(max_abs_diff(set.matrices[0], Matrix{{0.5, 0.25}, {0.0, 0.5}}) == 0.0);
  CHECK_FALSE(set.factorizations[0].has_value());
  CHECK(set.factorizations[1].has_value());

  const ObservationSequence obs({0, 0, 0, 0, 1, 0, 0, 1});
  OpCounter c;
  const auto r = eval_diag_power(m, obs, c, set);
  OpCounter cf;
  const auto fwd = eval_forward(m, obs, cf);
  CHECK(r.diagnostics.fallbacks_used == std::vector<Symbol>{0});
  CHECK(rel_err(r.probability, fwd.probability) < 1e-10);
  CHECK(rel_err(r.probability, oracle::brute_force_likelihood(m, obs.symbols())) < 1e-12);
}

TEST_CASE("zeroing a used emission entry cannot raise the probability") {
  std::mt19937_64 rng(55);
  for (int trial = 0; trial < 30; ++trial) {
    const HmmModel m = gen_random_model(3, 3, rng());
    const ObservationSequence obs = gen_random_sequence(3, 6, rng());
    HmmModel restricted = m;
    const std::size_t state = rng() % 3;
    const Symbol sym = obs[rng() % obs.size()];
    // move the mass to another symbol so the row stays stochastic
    const Symbol other = static_cast<Symbol>((sym + 1) % 3);
    restricted.emission(state, other) += restricted.emission(state, sym);
    restricted.emission(state, sym) = 0.0;
    std::vector<Symbol> s = obs.symbols();
    for (Symbol& x : s) if (x == other) x = sym;  // keep other unused
    const ObservationSequence probe(s);
    for (Method method : kAllMethods) {
      CHECK(run(method, restricted, probe).probability <=
            run(method, m, probe).probability * (1 + 1e-12));
    }
  }
}

TEST_CASE("concurrent evaluations share one scaled set") {
  const HmmModel m = gen_random_model(4, 3, 9);
  const ScaledMatrixSet set = build_scaled_set(m);
  const ObservationSequence obs = gen_random_sequence(3, 60, 9);
  OpCounter base;
  const auto expected = eval_diag_power(m, obs, base, set);

  std::vector<EvaluationResult> results(8);
  std::vector<OpCounter> counters(8);
  {
    std::vector<std::jthread> threads;
    for (std::size_t i = 0; i < results.size(); ++i) {
      threads.emplace_back([&, i] { results[i] = eval_diag_power(m, obs, counters[i], set); });
    }
  }
  OpCounter merged;
  for (std::size_t i = 0; i < results.size(); ++i) {
    CHECK(results[i].probability == expected.probability);
    CHECK(results[i].counts == expected.counts);
    merged += counters[i];
  }
  CHECK(merged.multiplications() == 8 * expected.counts.multiplications);
}

TEST_CASE("method names round-trip") {
  for (Method m : kAllMethods) CHECK(parse_method(method_name(m)) == m);
  CHECK_FALSE(parse_method("viterbi").has_value());
}

#include <atomic>
#include <cmath>

#include "doctest.h"
#include "prioqt/measures.hpp"
#include "prioqt/oracle.hpp"

using namespace prioqt;
using namespace prioqt::measures;

TEST_CASE("Euler inversion of elementary pairs") {
  InversionConfig cfg;
  for (double t : {0.01, 0.5, 1.0, 10.0, 250.0})
    CHECK(std::abs(invert([](Complex a) { return 1.0 / a; }, t, cfg) - 1.0) < 1e-9);
  CHECK(std::abs(invert([](Complex a) { return 1.0 / (a + 1.0); }, 1.0, cfg) - std::exp(-1.0)) < 1e-8);
  CHECK(std::abs(invert([](Complex a) { return 1.0 / ((a + 1.0) * (a + 1.0)); }, 2.0, cfg) -
                 2.0 * std::exp(-2.0)) < 1e-8);

  auto nodes = euler_nodes(2.0, cfg);
  REQUIRE(static_cast<int>(nodes.size()) == cfg.evaluations());
  CHECK(nodes[0].real() == doctest::Approx(cfg.abscissa() / 4.0));

  InversionConfig strict;
  strict.failure_threshold = 1e-300;
  CHECK_THROWS_AS(invert_detailed([](Complex a) { return 1.0 / (a + 1.0); }, 1.0, strict),
                  ConvergenceError);
}

TEST_CASE("inversion config validation") {
  InversionConfig bad;
  bad.terms = 5;
  bad.euler_average = 11;
  CHECK_THROWS_AS(bad.validate(), DomainError);
  InversionConfig zero;
  zero.target_error = 0.0;
  CHECK_THROWS_AS(zero.validate(), DomainError);
  InversionConfig neg;
  neg.time_grid = {1.0, -2.0};
  CHECK_THROWS_AS(neg.validate(), DomainError);
}

TEST_CASE("origin probability against uniformization") {
  auto p = ModelParams::from_loads(1, 0.25, 0.25);
  auto factory = default_factory(p);
  auto gen = oracle::build_truncated_generator(p, 60, 60);
  InversionConfig cfg;
  for (double t : {0.1, 1.0, 10.0}) {
    double got = invert([&](Complex a) { return factory(a).pi_origin(); }, t, cfg);
    double ref = oracle::transient_oracle(gen, t)(gen.index({0, 0}));
    CHECK(std::abs(got - ref) < 1e-6);
  }
}

TEST_CASE("class-1 marginal transforms") {
  auto p = ModelParams::from_loads(2, 1.0 / 3.0, 0.5);
  const Complex alpha(0.5, 0.5);
  auto f = engine::transform_field(p, alpha, inversion_engine_options());
  Complex total = 0.0;
  for (int i = 0; i <= f.box_levels(); ++i) total += marginal_class1_transform(i, f);
  CHECK(std::abs(total - 1.0 / alpha) < 1e-10);

  auto gen = oracle::build_truncated_generator(p, 70, 70);
  auto pi = oracle::transform_oracle(gen, alpha);
  for (int i = 0; i <= 6; ++i) {
    Complex row = 0.0;
    for (int j = 0; j <= gen.j_cap; ++j) row += pi(gen.index({i, j}));
    CHECK(std::abs(marginal_class1_transform(i, f) - row) < 1e-7);
  }

  ModelParams none{0.0, 1.2, 1.0, 1.0, 2};
  auto g = engine::transform_field(none, alpha);
  g.extend_to(4);
  CHECK(std::abs(marginal_class1_transform(0, g) - 1.0 / alpha) < 1e-10);
  for (int i = 1; i <= 4; ++i) CHECK(std::abs(marginal_class1_transform(i, g)) < 1e-14);
}

TEST_CASE("measures at small and large times") {
  auto p = ModelParams::from_loads(2, 1.0 / 3.0, 0.5);
  auto factory = default_factory(p);
  InversionConfig cfg;
  CHECK(std::abs(mean_low_priority(factory, 1e-4, cfg)) < 1e-3);
  CHECK(delay_probability(PriorityClass::high, factory, 1e-4, cfg) < 1e-3);
  CHECK(delay_probability(PriorityClass::low, factory, 1e-4, cfg) < 1e-3);
  for (double t : {0.5, 3.0, 20.0})
    CHECK(delay_probability(PriorityClass::low, factory, t, cfg) >=
          delay_probability(PriorityClass::high, factory, t, cfg) - 1e-9);

  CHECK(std::abs(delay_probability(PriorityClass::high, factory, 300.0, cfg) - erlang_c(2, 1.0)) < 1e-3);
  auto s = engine::stationary_field(p);
  CHECK(std::abs(mean_low_priority(factory, 400.0, cfg) - stationary_mean_low(s)) < 1e-3);

  ModelParams none{0.0, 1.2, 1.0, 1.0, 2};
  CHECK(std::abs(mean_low_priority(default_factory(none), 2.0, cfg)) < 1e-9);
}

TEST_CASE("series share fields and clip probabilities") {
  auto p = ModelParams::from_loads(2, 0.3, 0.4);
  InversionConfig cfg;
  cfg.time_grid = {0.5, 2.0, 8.0};
  std::vector<MeasureSpec> specs{{MeasureKind::transition_prob, {0, 0}, 0},
                                 {MeasureKind::mean_low, {}, 0},
                                 {MeasureKind::delay_high, {}, 0},
                                 {MeasureKind::marginal_class1, {}, 1}};
  auto series = compute_series(specs, default_factory(p), cfg);
  REQUIRE(series.size() == 4);
  auto gen = oracle::build_truncated_generator(p, 60, 60);
  for (std::size_t k = 0; k < 3; ++k) {
    for (const auto& s : series) {
      CHECK_FALSE(s.failed[k]);
      CHECK(std::isfinite(s.values[k]));
      if (s.measure.is_probability()) CHECK((s.values[k] >= 0.0 && s.values[k] <= 1.0));
    }
    auto pt = oracle::transient_oracle(gen, cfg.time_grid[k]);
    CHECK(std::abs(series[0].values[k] - pt(gen.index({0, 0}))) < 1e-6);
    double m1 = 0.0;
    for (int j = 0; j <= gen.j_cap; ++j) m1 += pt(gen.index({1, j}));
    CHECK(std::abs(series[3].values[k] - m1) < 1e-6);
  }
}

TEST_CASE("stationary measures and Erlang C") {
  CHECK(erlang_c(1, 0.5) == doctest::Approx(0.5));
  CHECK(erlang_c(2, 1.0) == doctest::Approx(1.0 / 3.0));
  ModelParams m{0.4, 0.0, 1.0, 1.0, 1};
  auto s = engine::stationary_field(m);
  CHECK(std::abs(stationary_mean_low(s) - 0.4 / 0.6) < 1e-10);
  auto p = ModelParams::from_loads(3, 0.2, 0.5);
  auto f = engine::stationary_field(p);
  CHECK(std::abs(stationary_delay(PriorityClass::high, f) - erlang_c(3, 1.5)) < 1e-10);
  CHECK(stationary_delay(PriorityClass::low, f) > stationary_delay(PriorityClass::high, f));
}

TEST_CASE("parallel_for visits every index once") {
  std::vector<std::atomic<int>> hits(257);
  parallel_for(hits.size(), [&](std::size_t k) { hits[k]++; });
  for (auto& h : hits) CHECK(h.load() == 1);
  CHECK(thread_cap() >= 1);
}

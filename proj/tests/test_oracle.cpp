#include <cmath>

#include "doctest.h"
#include "prioqt/oracle.hpp"

using namespace prioqt;

TEST_CASE("truncated generator structure") {
  ModelParams p{0.7, 0.9, 1.2, 0.8, 2};
  for (auto mode : {oracle::BoundaryMode::substochastic, oracle::BoundaryMode::conservative}) {
    auto gen = oracle::build_truncated_generator(p, 10, 12, mode);
    CHECK(gen.size() == 11 * 13);
    for (int idx = 0; idx < gen.size(); ++idx) {
      CHECK(gen.index(gen.state(idx)) == idx);
      double row = 0.0;
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(gen.Q, idx); it; ++it) {
        if (it.col() != idx) CHECK(it.value() >= 0.0);
        row += it.value();
      }
      State s = gen.state(idx);
      bool edge = s.level == gen.i_cap || s.phase == gen.j_cap;
      if (mode == oracle::BoundaryMode::conservative || !edge)
        CHECK(std::abs(row) < 1e-14);
      else
        CHECK(row < 0.0);
    }
  }
  auto gen = oracle::build_truncated_generator(p, 10, 12);
  CHECK(gen.rate({3, 0}, {2, 0}) == doctest::Approx(2 * 1.2));
  CHECK(gen.rate({3, 1}, {2, 1}) == doctest::Approx(1.2));
  CHECK(gen.rate({3, 2}, {2, 2}) == 0.0);
  CHECK(gen.rate({3, 5}, {3, 4}) == doctest::Approx(2 * 0.8));
  CHECK(gen.rate({0, 1}, {0, 0}) == doctest::Approx(0.8));
}

TEST_CASE("uniformization agrees with the matrix exponential") {
  ModelParams p{0.6, 0.5, 1.0, 1.3, 2};
  auto gen = oracle::build_truncated_generator(p, 9, 9);
  REQUIRE(gen.size() == 100);
  for (double t : {0.3, 2.0, 15.0}) {
    auto a = oracle::transient_oracle(gen, t);
    auto b = oracle::transient_expm(gen, t);
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("transform solve integrates the transient solution") {
  ModelParams p{0.6, 0.5, 1.0, 1.3, 2};
  auto gen = oracle::build_truncated_generator(p, 9, 9);
  const double alpha = 1.5;
  auto pi = oracle::transform_oracle(gen, alpha);
  // Composite Simpson on [0, 30].
  const int n = 2000;
  const double h = 30.0 / n;
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(gen.size());
  for (int k = 0; k <= n; ++k) {
    double t = k * h;
    double w = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    Eigen::VectorXd pt = t == 0.0 ? Eigen::VectorXd::Unit(gen.size(), gen.index({0, 0}))
                                  : oracle::transient_expm(gen, t);
    acc += w * std::exp(-alpha * t) * pt;
  }
  acc *= h / 3.0;
  CHECK((pi.real() - acc).cwiseAbs().maxCoeff() < 1e-7);
  CHECK(pi.imag().cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("stationary solve") {
  ModelParams m{0.5, 0.0, 1.0, 1.0, 1};
  auto gen = oracle::build_truncated_generator(m, 80, 3, oracle::BoundaryMode::conservative);
  auto st = oracle::stationary_oracle(gen);
  CHECK(std::abs(st.p.sum() - 1.0) < 1e-12);
  for (int i = 0; i <= 10; ++i) CHECK(std::abs(st.p(gen.index({i, 0})) - 0.5 * std::pow(0.5, i)) < 1e-12);
  CHECK(oracle::balance_residual(gen, st.p, 1) < 1e-14);
  CHECK_FALSE(st.tail_warning);

  auto coarse = oracle::build_truncated_generator(m, 8, 3, oracle::BoundaryMode::conservative);
  CHECK(oracle::stationary_oracle(coarse).tail_warning);
}

TEST_CASE("adaptive caps converge") {
  auto p = ModelParams::from_loads(2, 0.3, 0.3);
  std::vector<State> states{{0, 0}, {1, 2}, {3, 1}};
  auto r = oracle::adaptive_transform(p, Complex(0.5, 0.5), states, 10, 10, 1e-10);
  CHECK(r.last_change < 1e-10);
  auto big = oracle::build_truncated_generator(p, r.i_cap * 2, r.j_cap * 2);
  auto pi = oracle::transform_oracle(big, Complex(0.5, 0.5));
  for (std::size_t k = 0; k < states.size(); ++k)
    CHECK(std::abs(r.value(k) - pi(big.index(states[k]))) < 1e-9);
}

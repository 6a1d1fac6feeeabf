#include <cmath>

#include "doctest.h"
#include "oracle_helpers.hpp"
#include "prioqt/single_server.hpp"
#include "prioqt/transform_engine.hpp"

using namespace prioqt;

namespace {

// Busy-period transform from the lattice: first-passage transform to the
// origin, averaged over the class of the customer that opens the period.
Complex busy_period_by_oracle(const ModelParams& p, Complex alpha) {
  auto gen = oracle::build_truncated_generator(p, 70, 70);
  std::vector<int> local(static_cast<std::size_t>(gen.size()), -1);
  const int origin = gen.index({0, 0});
  int n = 0;
  for (int idx = 0; idx < gen.size(); ++idx)
    if (idx != origin) local[static_cast<std::size_t>(idx)] = n++;
  std::vector<Eigen::Triplet<Complex>> trips;
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n);
  for (int idx = 0; idx < gen.size(); ++idx) {
    if (idx == origin) continue;
    const int r = local[static_cast<std::size_t>(idx)];
    trips.emplace_back(r, r, alpha);
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(gen.Q, idx); it; ++it) {
      if (it.col() == origin) rhs(r) += it.value();
      else trips.emplace_back(r, local[static_cast<std::size_t>(it.col())], -it.value());
    }
  }
  Eigen::SparseMatrix<Complex> M(n, n);
  M.setFromTriplets(trips.begin(), trips.end());
  Eigen::SparseLU<Eigen::SparseMatrix<Complex>> lu(M);
  Eigen::VectorXcd h = lu.solve(rhs);
  const double lam = p.lambda();
  return (p.lambda1 * h(local[static_cast<std::size_t>(gen.index({1, 0}))]) +
          p.lambda2 * h(local[static_cast<std::size_t>(gen.index({0, 1}))])) / lam;
}

}  // namespace

TEST_CASE("Kendall busy period") {
  ModelParams p{0.3, 0.2, 1.0, 1.5, 1};
  CHECK(std::abs(single::kendall_phi(p, 0.0).varphi - 1.0) < 1e-10);

  ModelParams m{0.6, 0.0, 1.3, 1.0, 1};
  for (Complex a : {Complex(0.2, 0.0), Complex(1.0, 4.0)})
    CHECK(std::abs(single::kendall_phi(m, a).varphi - mm1::busy_period_lst(0.6, 1.3, a)) < 1e-13);

  ModelParams q{1.0, 1.0, 3.0, 4.0, 1};
  auto k = single::kendall_phi(q, 1.0);
  CHECK(single::kendall_residual(q, 1.0, k.varphi) < 1e-12);
  CHECK(std::abs(k.varphi - busy_period_by_oracle(q, 1.0)) < 1e-10);
  CHECK(std::abs(single::kendall_phi(q, Complex(0.4, 3.0)).varphi -
                 busy_period_by_oracle(q, Complex(0.4, 3.0))) < 1e-10);

  for (double re : {0.0, 0.01, 0.5, 5.0})
    for (double im : {0.0, 0.3, 10.0, 400.0}) {
      auto s = single::kendall_phi(q, Complex(re, im));
      CHECK(single::kendall_residual(q, Complex(re, im), s.varphi) < 1e-12);
      CHECK(std::abs(s.varphi) <= 1.0 + 1e-12);
    }
  CHECK_THROWS_AS(single::kendall_phi(q, 1.0, 1e-14, 2), ConvergenceError);
}

TEST_CASE("origin transform in closed form") {
  ModelParams m{0.4, 0.0, 1.0, 1.0, 1};
  Complex small(1e-7, 0.0);
  CHECK(std::abs(small * single::pi_origin_closed_form(m, small) - 0.6) < 1e-6);
  ModelParams q{0.3, 0.25, 1.0, 1.2, 1};
  Complex big(1e7, 0.0);
  CHECK(std::abs(big * single::pi_origin_closed_form(q, big) - 1.0) < 1e-6);
  for (Complex a : {Complex(0.5, 0.5), Complex(1.0, 0.0), Complex(0.05, 7.0)}) {
    auto f = engine::transform_field(q, a);
    CHECK(std::abs(f.pi_origin() - single::pi_origin_closed_form(q, a)) < 1e-8);
  }
}

TEST_CASE("scalar G and N") {
  ModelParams m{0.6, 0.0, 1.3, 1.0, 1};
  CHECK(std::abs(single::scalar_G(m, 0.7).G - mm1::busy_period_lst(0.6, 1.3, 0.7)) < 1e-13);
  ModelParams q{1.0, 1.0, 3.0, 4.0, 1};
  for (Complex a : {Complex(1.0, 0.0), Complex(0.1, 2.5)}) {
    auto g = single::scalar_G(q, a);
    CHECK(single::scalar_G_residual(q, a, g.G) < 1e-12);
    Complex phi2 = mm1::detail::busy_root(q.lambda2, q.mu2, q.lambda1 * (1.0 - g.G) + a);
    Complex n = single::scalar_N(q, a, g.G);
    CHECK(std::abs((a + q.lambda() + q.mu1 - q.lambda1 * g.G - q.lambda2 * phi2) * n - 1.0) < 1e-14);
  }
  Complex g = single::scalar_G(m, 0.7).G;
  CHECK(std::abs(single::scalar_N(m, 0.7, g) - 1.0 / (0.7 + 0.6 + 1.3 - 0.6 * g)) < 1e-15);
}

TEST_CASE("scalar horizontal recursion") {
  ModelParams m{0.6, 0.0, 1.3, 1.0, 1};
  auto bm = single::build_scalar_bundle(m, 0.8);
  auto hm = single::horizontal_scalar_recursion(bm, 0.25, 8);
  for (int i = 0; i < 8; ++i) CHECK(std::abs(hm[i + 1] - 0.6 * hm[i] * bm.N) < 1e-15);

  ModelParams q{1.0, 1.0, 3.0, 4.0, 1};
  const Complex alpha = 1.0;
  auto b = single::build_scalar_bundle(q, alpha);
  Complex origin = single::pi_origin_closed_form(q, alpha);
  auto h = single::horizontal_scalar_recursion(b, origin, 10);
  auto gen = oracle::build_truncated_generator(q, 70, 70);
  auto pi = oracle::transform_oracle(gen, alpha);
  for (int i = 0; i <= 10; ++i) CHECK(std::abs(h[i] - pi(gen.index({i, 0}))) < 1e-8);

  auto mb = boundary::build_matrix_bundle(q, alpha);
  CRowVector seed = CRowVector::Constant(1, 1.0);
  auto rows = engine::horizontal_recursion(seed, mb, q, 10);
  for (int i = 0; i <= 10; ++i) CHECK(std::abs(rows[i](0) * origin - h[i]) < 1e-12);
}

TEST_CASE("tails agree with direct summation") {
  ModelParams q{0.7, 0.9, 1.0, 1.4, 1};
  auto b = single::build_scalar_bundle(q, Complex(0.3, 1.0));
  for (std::size_t M = 0; M < b.tails.size(); M += 3) {
    Complex direct = 0.0, pow = 1.0;
    for (std::size_t m = M; m < b.w.size(); ++m) {
      direct += b.w[m] * pow;
      pow *= b.G;
    }
    CHECK(std::abs(b.tails[M] - direct) < 1e-11);
  }
}

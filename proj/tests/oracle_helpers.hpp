#ifndef PRIOQT_TESTS_ORACLE_HELPERS_HPP
#define PRIOQT_TESTS_ORACLE_HELPERS_HPP

#include <Eigen/SparseLU>
#include <vector>

#include "prioqt/oracle.hpp"

namespace testing_support {

using prioqt::CMatrix;
using prioqt::Complex;
using prioqt::State;

// Discounted occupancies of the truncated chain killed on entering any level
// below `floor`: occ(j, k) for start (start_level, j) and target
// (target_level, k), phases < c; hit(j, k) is the transform of the first entry
// into (floor - 1, k).
struct Taboo {
  CMatrix occ;
  CMatrix hit;
};

inline Taboo taboo(const prioqt::oracle::TruncatedGenerator& gen, Complex alpha, int floor,
                   int start_level, int target_level) {
  const int c = gen.params.servers;
  std::vector<int> local(static_cast<std::size_t>(gen.size()), -1);
  std::vector<int> global;
  for (int idx = 0; idx < gen.size(); ++idx)
    if (gen.state(idx).level >= floor) {
      local[static_cast<std::size_t>(idx)] = static_cast<int>(global.size());
      global.push_back(idx);
    }
  const int n = static_cast<int>(global.size());
  std::vector<Eigen::Triplet<Complex>> trips;
  Eigen::MatrixXcd rhs = Eigen::MatrixXcd::Zero(n, c);
  for (int r = 0; r < n; ++r) {
    trips.emplace_back(r, r, alpha);
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(gen.Q, global[r]); it; ++it) {
      const int to = static_cast<int>(it.col());
      const int lt = local[static_cast<std::size_t>(to)];
      if (lt >= 0) {
        trips.emplace_back(r, lt, -it.value());
      } else {
        const State s = gen.state(to);
        if (s.level == floor - 1 && s.phase < c) rhs(r, s.phase) += it.value();
      }
    }
  }
  Eigen::SparseMatrix<Complex> M(n, n);
  M.setFromTriplets(trips.begin(), trips.end());
  Eigen::SparseLU<Eigen::SparseMatrix<Complex>> lu(M);
  // Occupancy rows of M^{-1} come from the transposed system.
  Eigen::SparseMatrix<Complex> Mt = M.transpose();
  Eigen::SparseLU<Eigen::SparseMatrix<Complex>> lut(Mt);
  Eigen::MatrixXcd ecols = Eigen::MatrixXcd::Zero(n, c);
  for (int j = 0; j < c; ++j) ecols(local[static_cast<std::size_t>(gen.index({start_level, j}))], j) = 1.0;
  Eigen::MatrixXcd y = lut.solve(ecols);  // y(:, j) = row (start, j) of M^{-1}
  Eigen::MatrixXcd h = lu.solve(rhs);
  Taboo out{CMatrix(c, c), CMatrix(c, c)};
  for (int j = 0; j < c; ++j)
    for (int k = 0; k < c; ++k) {
      out.occ(j, k) = y(local[static_cast<std::size_t>(gen.index({target_level, k}))], j);
      out.hit(j, k) = h(local[static_cast<std::size_t>(gen.index({start_level, j}))], k);
    }
  return out;
}

}  // namespace testing_support

#endif  // PRIOQT_TESTS_ORACLE_HELPERS_HPP

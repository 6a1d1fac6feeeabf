#ifndef PRIOQT_INTERIOR_SOLVER_HPP
#define PRIOQT_INTERIOR_SOLVER_HPP

// Transforms for states with at least c high-priority customers, expressed
// through the phase-(c-1) boundary transforms pi_(k, c-1), k = 0..i.
//
// Phase offsets: "j" below always counts upward from phase c-1, so (i, j)
// here is lattice state (i, c-1+j) with j >= 1.

#include <span>
#include <vector>

#include "prioqt/mm1_kernels.hpp"

namespace prioqt::interior {

struct InteriorConstants {
  mm1::Mm1Triple triple;
  double lambda1 = 0.0;
  Complex w1;  ///< lambda1 * omega2 / (1 - r2 * phi2)
  Complex w2;  ///< r2 * phi2
};

InteriorConstants make_constants(const ModelParams& params, Complex alpha);

/// pi_(0, c-1+j) = pi_(0, c-1) * r2^j.
Complex vertical_boundary(int j, Complex pi_0_cm1, const InteriorConstants& consts);

/// lambda1 times the clearing-model occupancy of phase offset j starting from
/// offset k, in the closed two-branch form. Throws DomainError when j or k is 0.
Complex upsilon(int j, int k, const InteriorConstants& consts, double lambda1);

/// Lower-triangular table v_{i,j}, 0 <= j <= i, grown one level at a time.
class CoeffTable {
 public:
  explicit CoeffTable(const InteriorConstants& consts) : w1_(consts.w1), w2_(consts.w2) {}

  /// Appends level size() given pi_(size(), c-1).
  void append(Complex boundary_value);

  int levels() const noexcept { return static_cast<int>(rows_.size()); }
  const std::vector<Complex>& row(int i) const;
  Complex operator()(int i, int j) const;

 private:
  Complex w1_, w2_;
  std::vector<std::vector<Complex>> rows_;
};

/// Builds v_{i,j} for i = 0..boundary.size()-1 by the level recursion.
CoeffTable coeffs_recursive(std::span<const Complex> boundary, const InteriorConstants& consts);

/// Single coefficient v_{i,j} from its explicit binomial form; needs
/// boundary values for levels 0..i. Throws IndexError if j > i or i is not
/// covered.
Complex coeffs_explicit(int i, int j, std::span<const Complex> boundary,
                        const InteriorConstants& consts);

/// pi_(i, c-1+j) for j >= 1 from row i of the table.
Complex interior_transform(int i, int j, const CoeffTable& table, const InteriorConstants& consts);

/// sum_{j >= 1} pi_(i, c-1+j) in closed form. Throws ConvergenceError when
/// |r2| >= 1.
Complex upper_level_sum(int i, const CoeffTable& table, const InteriorConstants& consts);

}  // namespace prioqt::interior

#endif  // PRIOQT_INTERIOR_SOLVER_HPP

#ifndef PRIOQT_BOUNDARY_MATRICES_HPP
#define PRIOQT_BOUNDARY_MATRICES_HPP

// c x c blocks of the horizontal strip (phases 0..c-1) and the hitting /
// taboo-occupancy matrices G and N built from them for one transform point.

#include <span>
#include <vector>

#include "prioqt/mm1_kernels.hpp"

namespace prioqt::boundary {

using RMatrix = Eigen::MatrixXd;

/// Rate blocks of the lower levels. Level-dependent blocks are indexed by
/// level; levels >= c share the homogeneous blocks.
struct LevelMatrices {
  int servers = 1;
  RMatrix A1;   ///< lambda1 * I
  RMatrix A0;   ///< local block of levels >= c
  RMatrix Am1;  ///< diag(c mu1, (c-1) mu1, ..., mu1)

  /// A^{(i)}_{-1} = diag(min(i, c - j) mu1); i >= 1.
  RMatrix down(int level) const;
  /// A^{(i)}_0 = A0 + Am1 - A^{(i)}_{-1}, with A^{(0)}_0 = A0 + Am1.
  RMatrix local(int level) const;
};

LevelMatrices build_level_matrices(const ModelParams& params);

/// Entries lambda2 * w_m of the W_m(alpha) matrices, m = 0..kappa, where
/// kappa certifies the dropped tail below the requested tolerance.
struct WKernel {
  int servers = 1;
  int kappa = 0;
  std::vector<Complex> entries;

  Complex entry(int m) const {
    return m >= 0 && m <= kappa ? entries[static_cast<std::size_t>(m)] : Complex(0.0, 0.0);
  }
  /// Dense W_m(alpha); zero beyond kappa.
  CMatrix matrix(int m) const;
};

/// kappa is chosen by mm1::w_tail_cutoff at tail tolerance epsilon.
WKernel build_w_kernel(const ModelParams& params, Complex alpha, double epsilon = 1e-12);

/// Dense W_m(alpha) with its single (c-1, c-1) entry.
CMatrix build_W(int m, Complex alpha, const ModelParams& params);

/// H(alpha) = (alpha I - A0 - W0)^{-1}.
CMatrix invertibility_witness(const LevelMatrices& lm, const WKernel& w, Complex alpha);

struct GSolveResult {
  CMatrix G;
  int iterations = 0;
  double last_change = 0.0;
};

/// Successive substitution for G(alpha) = G_{c,c-1}(alpha) from Z(0) = 0,
/// stopping once the max-entry change drops below eps. Throws
/// ConvergenceError on the iteration cap or when an entry leaves the unit
/// disc, SingularMatrixError if H cannot be formed.
GSolveResult solve_G(const LevelMatrices& lm, const WKernel& w, Complex alpha, double eps,
                     int max_iterations = 100000);

/// Right-hand side of the fixed-point equation evaluated at Z.
CMatrix g_fixed_point_map(const LevelMatrices& lm, const WKernel& w, Complex alpha,
                          const CMatrix& Z);

/// max |G - map(G)|.
double g_fixed_point_residual(const LevelMatrices& lm, const WKernel& w, Complex alpha,
                              const CMatrix& G);

/// G_{i+1,i}(alpha) for every level, with the homogeneous G above c-1.
class GBundle {
 public:
  GBundle() = default;
  GBundle(CMatrix G, std::vector<CMatrix> below);

  int servers() const noexcept { return static_cast<int>(G_.rows()); }
  const CMatrix& G() const noexcept { return G_; }
  /// G_{i+1,i}; equals G for i >= c-1.
  const CMatrix& step(int i) const;
  /// G_{l,i} = G_{l,l-1} ... G_{i+1,i}; identity when l == i.
  CMatrix product(int l, int i) const;
  /// sum_m a[m] * e_{c-1}^T G_{i+m,i}: row c-1 of sum_m W_m G_{i+m,i} when
  /// a holds the W entries shifted as needed.
  CRowVector descent_row(int i, std::span<const Complex> a) const;

 private:
  CMatrix G_;
  std::vector<CMatrix> below_;  // below_[i] = G_{i+1,i}, i = 0..c-2
};

/// Level-dependent G_{i+1,i} for i = c-2 down to 0. Throws
/// SingularMatrixError carrying the level index.
GBundle solve_G_levels(const CMatrix& G, const LevelMatrices& lm, const WKernel& w, Complex alpha);

struct NBundle {
  std::vector<CMatrix> N;  ///< N[i] for 1 <= i <= c; N[0] unused (empty)
  CMatrix N0;              ///< [0,0]-minor inverse embedded in a c x c zero matrix

  /// N_i, with N_i = N_c for i >= c.
  const CMatrix& at(int i) const;
};

/// The matrix whose inverse is N_i (1 <= i <= c) or, for i = 0, the full
/// c x c matrix whose [0,0]-minor is inverted for N_0.
CMatrix n_defining_matrix(int i, const GBundle& g, const LevelMatrices& lm, const WKernel& w,
                          Complex alpha);

NBundle solve_N(const GBundle& g, const LevelMatrices& lm, const WKernel& w, Complex alpha);

/// Everything the horizontal recursion needs for one transform point.
struct MatrixBundle {
  Complex alpha;
  LevelMatrices levels;
  WKernel w;
  GBundle g;
  NBundle n;
  int g_iterations = 0;
};

struct BundleOptions {
  double w_epsilon = 1e-12;
  double g_epsilon = 1e-13;
  int g_max_iterations = 100000;
};

MatrixBundle build_matrix_bundle(const ModelParams& params, Complex alpha,
                                 const BundleOptions& options = {});

/// Solves M X = B by partial-pivot LU, throwing SingularMatrixError when M is
/// numerically singular.
CMatrix solve_checked(const CMatrix& M, const CMatrix& B, int level);

}  // namespace prioqt::boundary

#endif  // PRIOQT_BOUNDARY_MATRICES_HPP

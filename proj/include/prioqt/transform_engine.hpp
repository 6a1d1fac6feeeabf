#ifndef PRIOQT_TRANSFORM_ENGINE_HPP
#define PRIOQT_TRANSFORM_ENGINE_HPP

// Horizontal-boundary recursion, bounding-box normalization and state
// dispatch. psi values are transforms scaled so that psi at the origin is 1.

#include <memory>
#include <vector>

#include "prioqt/boundary_matrices.hpp"
#include "prioqt/interior_solver.hpp"
#include "prioqt/single_server.hpp"

namespace prioqt::engine {

struct EngineOptions {
  double eps = 1e-8;             ///< relative change of the box total that stops growth
  int k_max = 0;                 ///< 0 selects default_k_max(c)
  int consecutive = 2;           ///< successive levels that must meet eps
  bool single_server_fast_path = true;
  boundary::BundleOptions bundle;
};

int default_k_max(int servers);

/// Produces psi_n from psi_0..psi_{n-1}. Immutable once built.
class LevelStepper {
 public:
  virtual ~LevelStepper() = default;
  virtual CRowVector seed() const = 0;
  virtual CRowVector step(const std::vector<CRowVector>& rows) const = 0;
};

/// Stepper over a MatrixBundle. For levels >= c-1 the W/G sums are folded
/// into rows F_d = lambda2 w_d e + F_{d+1} G.
class MatrixStepper final : public LevelStepper {
 public:
  MatrixStepper(std::shared_ptr<const boundary::MatrixBundle> bundle, const ModelParams& params);
  CRowVector seed() const override;
  CRowVector step(const std::vector<CRowVector>& rows) const override;
  const boundary::MatrixBundle& bundle() const noexcept { return *bundle_; }

 private:
  std::shared_ptr<const boundary::MatrixBundle> bundle_;
  ModelParams params_;
  std::vector<CRowVector> folded_;  // folded_[d], d = 0..kappa+1
};

/// Stepper over the c = 1 scalars.
class ScalarStepper final : public LevelStepper {
 public:
  explicit ScalarStepper(single::ScalarBundle bundle) : bundle_(std::move(bundle)) {}
  CRowVector seed() const override;
  CRowVector step(const std::vector<CRowVector>& rows) const override;
  const single::ScalarBundle& bundle() const noexcept { return bundle_; }

 private:
  single::ScalarBundle bundle_;
};

/// psi_(0,j): 1 at the origin, the N_0 expression for 1 <= j <= c-1.
CRowVector seed_psi0(const boundary::MatrixBundle& bundle, const ModelParams& params);

/// psi_0..psi_{i_max} by the Ramaswami-like recursion.
std::vector<CRowVector> horizontal_recursion(const CRowVector& psi0,
                                             const boundary::MatrixBundle& bundle,
                                             const ModelParams& params, int i_max);

/// Growing set of psi rows with the interior coefficients and per-level totals.
class PsiField {
 public:
  /// alpha == 0 is admitted for the stationary pipeline. The scalar stepper
  /// is used when c == 1 and single_server_fast_path is set.
  PsiField(const ModelParams& params, Complex alpha, const boundary::BundleOptions& bundle = {},
           bool single_server_fast_path = true);

  const ModelParams& params() const noexcept { return params_; }
  Complex alpha() const noexcept { return alpha_; }
  int levels() const noexcept { return static_cast<int>(rows_.size()); }
  bool single_server_path() const noexcept { return scalar_path_; }

  /// Builds levels up to and including i.
  void extend_to(int i);

  const CRowVector& row(int i) const;
  /// psi at any state whose level is built.
  Complex at(State s) const;
  /// sum over all phases of psi at level i (upper phases in closed form).
  Complex level_total(int i) const;
  /// Psi_k = sum_{i <= k} level_total(i).
  Complex cumulative(int k) const;

  const interior::InteriorConstants& constants() const noexcept { return consts_; }
  const interior::CoeffTable& table() const noexcept { return table_; }
  const LevelStepper& stepper() const noexcept { return *stepper_; }

 private:
  ModelParams params_;
  Complex alpha_;
  bool scalar_path_ = false;
  std::shared_ptr<const LevelStepper> stepper_;
  interior::InteriorConstants consts_;
  interior::CoeffTable table_;
  std::vector<CRowVector> rows_;
  std::vector<Complex> totals_;
  std::vector<Complex> cumulative_;
};

/// Normalized transforms pi_x(alpha) = pi_origin * psi_x.
class TransformField {
 public:
  TransformField(PsiField psi, Complex pi_origin, int box_levels)
      : psi_(std::move(psi)), pi_origin_(pi_origin), box_(box_levels) {}

  Complex alpha() const noexcept { return psi_.alpha(); }
  const ModelParams& params() const noexcept { return psi_.params(); }
  Complex pi_origin() const noexcept { return pi_origin_; }
  /// Highest level of the converged box S_k.
  int box_levels() const noexcept { return box_; }
  const PsiField& psi() const noexcept { return psi_; }
  int levels() const noexcept { return psi_.levels(); }

  void extend_to(int i) { psi_.extend_to(i); }
  Complex transform_at(State s) const { return pi_origin_ * psi_.at(s); }
  /// sum_j pi_(i,j)(alpha).
  Complex marginal(int i) const { return pi_origin_ * psi_.level_total(i); }

 private:
  PsiField psi_;
  Complex pi_origin_;
  int box_;
};

/// Grows the box until |Psi_{k+1} - Psi_k| / |Psi_k| < eps on
/// options.consecutive successive levels, then sets pi_origin =
/// 1 / (alpha Psi_{k+1}). Requires Re(alpha) > 0; throws ConvergenceError
/// past k_max.
TransformField normalize(PsiField psi, const EngineOptions& options = {});

TransformField transform_field(const ModelParams& params, Complex alpha,
                               const EngineOptions& options = {});

Complex transform_at(State s, const TransformField& field);

struct StationaryOptions {
  double eps = 1e-13;
  int k_max = 20000;
  int consecutive = 3;
  bool single_server_fast_path = true;
  boundary::BundleOptions bundle{1e-14, 1e-14, 1000000};
};

/// Stationary probabilities from the alpha = 0 pipeline.
class StationaryField {
 public:
  StationaryField(PsiField psi, double p_origin, int box_levels)
      : psi_(std::move(psi)), p_origin_(p_origin), box_(box_levels) {}

  const ModelParams& params() const noexcept { return psi_.params(); }
  double p_origin() const noexcept { return p_origin_; }
  int box_levels() const noexcept { return box_; }
  int levels() const noexcept { return psi_.levels(); }
  const PsiField& psi() const noexcept { return psi_; }

  void extend_to(int i) { psi_.extend_to(i); }
  double probability(State s) const { return p_origin_ * psi_.at(s).real(); }
  /// P(X1 = i).
  double marginal(int i) const { return p_origin_ * psi_.level_total(i).real(); }
  /// sum_{j >= c} p_(i,j).
  double upper_mass(int i) const;

 private:
  PsiField psi_;
  double p_origin_;
  int box_;
};

/// Throws InstabilityError if rho >= 1 - 1e-9.
StationaryField stationary_field(const ModelParams& params, const StationaryOptions& options = {});

}  // namespace prioqt::engine

#endif  // PRIOQT_TRANSFORM_ENGINE_HPP

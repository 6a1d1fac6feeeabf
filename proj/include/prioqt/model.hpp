#ifndef PRIOQT_MODEL_HPP
#define PRIOQT_MODEL_HPP

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace prioqt {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CRowVector = Eigen::RowVectorXcd;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Invalid rates, server counts or evaluation points.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Index outside the range a table or field covers.
class IndexError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// An iterative scheme hit its cap, diverged, or a tail could not be certified.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A c x c linear solve failed. level() is the level index the matrix
/// belongs to, or -1 when it is not level-specific.
class SingularMatrixError : public std::runtime_error {
 public:
  SingularMatrixError(const std::string& what, int level)
      : std::runtime_error(what), level_(level) {}
  int level() const noexcept { return level_; }

 private:
  int level_;
};

/// Stationary quantities requested for a load rho >= 1.
class InstabilityError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

/// Rates of the two-class preemptive-priority M/M/c queue. Class 1 is the
/// low-priority class (the level coordinate), class 2 the high-priority
/// class (the phase coordinate).
struct ModelParams {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double mu1 = 1.0;
  double mu2 = 1.0;
  int servers = 1;

  double lambda() const noexcept { return lambda1 + lambda2; }
  double rho1() const noexcept { return lambda1 / (servers * mu1); }
  double rho2() const noexcept { return lambda2 / (servers * mu2); }
  double rho() const noexcept { return rho1() + rho2(); }

  /// Throws DomainError unless arrival rates are >= 0, service rates are
  /// > 0 and servers >= 1.
  void validate() const;

  /// Builds parameters from loads: lambda_n = rho_n * c * mu_n.
  static ModelParams from_loads(int servers, double rho1, double rho2,
                                double mu1 = 1.0, double mu2 = 1.0);
};

/// A lattice state (level, phase) = (#class-1, #class-2).
struct State {
  int level = 0;
  int phase = 0;
  friend bool operator==(const State&, const State&) = default;
};

std::string to_string(const State& s);

/// Throws DomainError unless Re(alpha) > 0, or Re(alpha) == 0 when allow_axis.
void require_transform_point(Complex alpha, bool allow_axis);

}  // namespace prioqt

#endif  // PRIOQT_MODEL_HPP

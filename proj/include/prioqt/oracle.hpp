#ifndef PRIOQT_ORACLE_HPP
#define PRIOQT_ORACLE_HPP

// Brute-force reference values on the truncated lattice
// {(i, j) : i <= i_cap, j <= j_cap}.

#include <Eigen/Sparse>
#include <vector>

#include "prioqt/model.hpp"

namespace prioqt::oracle {

/// substochastic: transitions leaving the box are dropped (row sums < 0 on
///   the box edge); used for transforms and transient probabilities.
/// conservative: transitions leaving the box are blocked (all row sums 0);
///   used for stationary solves.
enum class BoundaryMode { substochastic, conservative };

struct TruncatedGenerator {
  ModelParams params;
  int i_cap = 0;
  int j_cap = 0;
  BoundaryMode mode = BoundaryMode::substochastic;
  Eigen::SparseMatrix<double, Eigen::RowMajor> Q;

  int size() const noexcept { return (i_cap + 1) * (j_cap + 1); }
  int index(State s) const;
  State state(int idx) const;
  bool contains(State s) const noexcept {
    return s.level >= 0 && s.phase >= 0 && s.level <= i_cap && s.phase <= j_cap;
  }
  /// Q entry between two states of the box.
  double rate(State from, State to) const;
};

TruncatedGenerator build_truncated_generator(const ModelParams& params, int i_cap, int j_cap,
                                             BoundaryMode mode = BoundaryMode::substochastic);

/// Solves (alpha I - Q^T) pi = e_origin. Requires Re(alpha) > 0.
Eigen::VectorXcd transform_oracle(const TruncatedGenerator& gen, Complex alpha);

/// Uniformization with Poisson tail cut at tail_tolerance.
Eigen::VectorXd transient_oracle(const TruncatedGenerator& gen, double t,
                                 double tail_tolerance = 1e-12);

/// Dense exp(Q^T t) e_origin; intended for small boxes.
Eigen::VectorXd transient_expm(const TruncatedGenerator& gen, double t);

struct StationaryOracle {
  Eigen::VectorXd p;
  double tail_estimate = 0.0;  ///< geometric extrapolation of mass beyond the caps
  bool tail_warning = false;   ///< tail_estimate > 1e-8
};

/// Solves p^T Q = 0, sum p = 1. Expects a conservative generator.
StationaryOracle stationary_oracle(const TruncatedGenerator& gen);

/// max |(p^T Q)_x| over states at least `margin` away from the caps.
double balance_residual(const TruncatedGenerator& gen, const Eigen::VectorXd& p, int margin);

/// Oracle values at requested states with caps doubled until the largest
/// change is below tolerance.
struct AdaptiveResult {
  std::vector<double> re;
  std::vector<double> im;
  int i_cap = 0;
  int j_cap = 0;
  double last_change = 0.0;

  Complex value(std::size_t k) const { return {re[k], im[k]}; }
};

AdaptiveResult adaptive_transform(const ModelParams& params, Complex alpha,
                                  const std::vector<State>& states, int i_cap, int j_cap,
                                  double tolerance = 1e-10, int max_cap = 4000);
AdaptiveResult adaptive_transient(const ModelParams& params, double t,
                                  const std::vector<State>& states, int i_cap, int j_cap,
                                  double tolerance = 1e-10, int max_cap = 4000);
AdaptiveResult adaptive_stationary(const ModelParams& params, const std::vector<State>& states,
                                   int i_cap, int j_cap, double tolerance = 1e-10,
                                   int max_cap = 4000);

}  // namespace prioqt::oracle

#endif  // PRIOQT_ORACLE_HPP

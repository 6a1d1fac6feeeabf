#ifndef PRIOQT_SINGLE_SERVER_HPP
#define PRIOQT_SINGLE_SERVER_HPP

// Scalar path for c = 1: the busy period is that of an M/G/1 queue with a
// two-point exponential service mixture, and G, N collapse to scalars.

#include <vector>

#include "prioqt/model.hpp"

namespace prioqt::single {

struct KendallState {
  Complex varphi;
  int iterations = 0;
  double residual = 0.0;
};

/// Successive substitution of the Kendall equation from 0 until |delta| < eps.
/// With lambda == 0 there is no busy period to speak of; varphi is 1.
KendallState kendall_phi(const ModelParams& params, Complex alpha, double eps = 1e-14,
                         int max_iterations = 100000);

/// |varphi - RHS(varphi)|.
double kendall_residual(const ModelParams& params, Complex alpha, Complex varphi);

/// 1 / (lambda (1 - varphi(alpha)) + alpha); requires Re(alpha) > 0.
Complex pi_origin_closed_form(const ModelParams& params, Complex alpha);

/// phi_{lambda2, mu2}(lambda1 (1 - G) + alpha), the generating-function value
/// of the w sequence at z = G.
Complex w_generating_value(const ModelParams& params, Complex alpha, Complex G);

struct ScalarGResult {
  Complex G;
  int iterations = 0;
  double residual = 0.0;
};

/// Fixed point of (lambda + mu1 + alpha) G = mu1 + lambda1 G^2
/// + lambda2 G phi_{lambda2,mu2}(lambda1 (1 - G) + alpha) from G = 0.
ScalarGResult scalar_G(const ModelParams& params, Complex alpha, double eps = 1e-14,
                       int max_iterations = 100000);

double scalar_G_residual(const ModelParams& params, Complex alpha, Complex G);

Complex scalar_N(const ModelParams& params, Complex alpha, Complex G);

/// Precomputed scalars driving the level recursion.
struct ScalarBundle {
  Complex alpha;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  Complex G;
  Complex N;
  Complex gen_at_G;            ///< w generating function at z = G
  std::vector<Complex> w;      ///< w_{lambda2, mu2, lambda1}(m), m = 0..kappa
  std::vector<Complex> tails;  ///< tails[M] = sum_{m >= M} w_m G^{m-M}, M = 0..kappa+1
};

ScalarBundle build_scalar_bundle(const ModelParams& params, Complex alpha,
                                 double w_epsilon = 1e-12, double g_epsilon = 1e-14);

/// Next level value pi_{(n,0)} from pi_{(0,0)}, ..., pi_{(n-1,0)}.
Complex scalar_step(const ScalarBundle& b, const std::vector<Complex>& previous);

/// pi_{(i,0)} for i = 0..i_max starting from pi_origin.
std::vector<Complex> horizontal_scalar_recursion(const ScalarBundle& b, Complex pi_origin,
                                                 int i_max);

}  // namespace prioqt::single

#endif  // PRIOQT_SINGLE_SERVER_HPP

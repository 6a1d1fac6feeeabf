#ifndef PRIOQT_MM1_KERNELS_HPP
#define PRIOQT_MM1_KERNELS_HPP

// Scalar M/M/1 quantities: busy-period transforms, the clearing-model
// occupancy kernel, the w_i sequence (busy period jointly with the number of
// external Poisson points it covers) and the Catalan-weighted b_K polynomials.

#include <vector>

#include "prioqt/model.hpp"

namespace prioqt::mm1 {

/// Laplace-Stieltjes transform of an M/M/1 busy period started by one
/// customer, i.e. the root of lambda*phi^2 - (lambda+mu+alpha)*phi + mu = 0
/// of smaller modulus (|phi| <= 1). Requires lambda > 0, mu > 0 and
/// Re(alpha) >= 0.
Complex busy_period_lst(double lambda, double mu, Complex alpha);

namespace detail {
/// Same root as busy_period_lst but admits lambda == 0, where the busy period
/// is a single exponential service and the transform is mu / (mu + alpha).
/// Evaluated in the rationalised form 2*mu / (s + sqrt(s^2 - 4*lambda*mu)).
Complex busy_root(double lambda, double mu, Complex alpha);

/// exp(log_prefactor) * b_K(z), accumulated term by term with rescaling so
/// that neither the prefactor nor the polynomial over/underflows on its own.
Complex scaled_b_poly(int K, Complex z, Complex log_prefactor);
}  // namespace detail

/// The kernel triple shared by the interior and vertical-boundary formulas.
struct Mm1Triple {
  Complex phi2;    ///< busy-period LST of the (lambda2, c*mu2) queue at lambda1 + alpha
  Complex r2;      ///< rho2 * phi2
  Complex omega2;  ///< r2 / (lambda2 * (1 - r2 * phi2))
};

/// Requires Re(alpha) >= 0. lambda2 == 0 is admitted through the limit forms.
Mm1Triple kernel_triple(const ModelParams& params, Complex alpha);

/// Expected discounted time spent in state j, starting from k >= 1, before a
/// clearing M/M/1 model (arrivals lambda, service mu, clearings at rate
/// theta) first empties. Throws DomainError when j == 0 or k == 0.
Complex clearing_occupancy(double lambda, double mu, double theta, Complex alpha,
                           int j, int k);

/// w_i = E_1[exp(-alpha B) 1{Lambda_theta(B) = i}] for i = 0..i_max.
struct WSequence {
  double lambda = 0.0;
  double mu = 0.0;
  double theta = 0.0;
  Complex alpha;
  Complex phi;  ///< busy-period LST at theta + alpha (= values[0])
  Complex w1;   ///< geometric factor theta / (lambda(1 - 2 phi) + mu + theta + alpha)
  Complex w2;   ///< polynomial argument lambda*phi / (same denominator)
  std::vector<Complex> values;

  std::size_t size() const noexcept { return values.size(); }
  const Complex& operator[](std::size_t i) const { return values[i]; }
};

/// Closed form w_0 = phi, w_i = w1^i * phi * b_{i-1}(w2). Rates must satisfy
/// mu > 0, lambda >= 0, theta >= 0.
WSequence w_sequence(double lambda, double mu, double theta, Complex alpha, int i_max);

/// The same sequence from the busy-period first-step recursion. Kept as an
/// independent route for cross-checks.
std::vector<Complex> w_sequence_recursive(double lambda, double mu, double theta,
                                          Complex alpha, int i_max);

/// Least kappa such that sum_{l > kappa} |w_l| <= epsilon / lambda. The tail
/// is certified through the Catalan generating function applied to |w1| and
/// |w2|; when that modulus series diverges the real-part majorant
/// sum_l w_l(Re alpha) = phi(theta + Re alpha) is used instead. Throws
/// ConvergenceError if no kappa <= kappa_max certifies the bound.
int w_tail_cutoff(double lambda, double mu, double theta, Complex alpha,
                  double epsilon, int kappa_max = 100000);

/// Catalan number C_k as a double.
double catalan(int k);

/// b_K(z) = sum_{k=0..K} C_k binom(K+k, K-k) z^k.
Complex b_poly(int K, Complex z);

}  // namespace prioqt::mm1

#endif  // PRIOQT_MM1_KERNELS_HPP

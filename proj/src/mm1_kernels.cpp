#include "prioqt/mm1_kernels.hpp"

#include <cmath>
#include <limits>

namespace prioqt::mm1 {

namespace {

void require_rates(double lambda, double mu, double theta) {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw DomainError("service rate must be positive");
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw DomainError("arrival rate must be non-negative");
  if (!(theta >= 0.0) || !std::isfinite(theta))
    throw DomainError("clearing rate must be non-negative");
}

void require_half_plane(Complex alpha) {
  if (!(alpha.real() >= 0.0) || !std::isfinite(alpha.imag()))
    throw DomainError("transform argument must satisfy Re(alpha) >= 0");
}

}  // namespace

namespace detail {

Complex busy_root(double lambda, double mu, Complex alpha) {
  const Complex s = lambda + mu + alpha;
  Complex q = std::sqrt(s * s - 4.0 * lambda * mu);
  // Pick the sign making |s + q| the larger denominator: that is the root
  // of smaller modulus, the one bounded by 1.
  if ((s * std::conj(q)).real() < 0.0) q = -q;
  return 2.0 * mu / (s + q);
}

Complex scaled_b_poly(int K, Complex z, Complex log_prefactor) {
  constexpr double kBig = 1e200;
  const double log_big = std::log(kBig);
  Complex term(1.0, 0.0);
  Complex sum(1.0, 0.0);
  double scale_log = 0.0;
  for (int k = 0; k < K; ++k) {
    const double ratio = (static_cast<double>(K + k + 1) * (K - k)) /
                         (static_cast<double>(k + 2) * (k + 1));
    term *= ratio * z;
    sum += term;
    if (std::abs(term) > kBig || std::abs(sum) > kBig) {
      term /= kBig;
      sum /= kBig;
      scale_log += log_big;
    }
  }
  if (sum == Complex(0.0, 0.0)) return sum;
  const Complex total_log = log_prefactor + scale_log;
  if (std::abs(total_log.real()) < 600.0 && scale_log == 0.0)
    return std::exp(log_prefactor) * sum;
  return std::exp(total_log + std::log(sum));
}

}  // namespace detail

Complex busy_period_lst(double lambda, double mu, Complex alpha) {
  if (!(lambda > 0.0)) throw DomainError("busy_period_lst: lambda must be positive");
  if (!(mu > 0.0)) throw DomainError("busy_period_lst: mu must be positive");
  require_half_plane(alpha);
  return detail::busy_root(lambda, mu, alpha);
}

Mm1Triple kernel_triple(const ModelParams& params, Complex alpha) {
  params.validate();
  require_half_plane(alpha);
  const double service = params.servers * params.mu2;
  Mm1Triple t;
  t.phi2 = detail::busy_root(params.lambda2, service, params.lambda1 + alpha);
  t.r2 = params.rho2() * t.phi2;
  // r2 / lambda2 == phi2 / (c mu2), which stays finite at lambda2 == 0.
  t.omega2 = t.phi2 / (service * (1.0 - t.r2 * t.phi2));
  return t;
}

Complex clearing_occupancy(double lambda, double mu, double theta, Complex alpha,
                           int j, int k) {
  if (j < 1 || k < 1) throw DomainError("clearing_occupancy: j and k must be >= 1");
  require_rates(lambda, mu, theta);
  require_half_plane(alpha);
  const Complex phi = detail::busy_root(lambda, mu, theta + alpha);
  const Complex r = (lambda / mu) * phi;
  const Complex rphi = r * phi;
  const Complex scale = phi / (mu * (1.0 - rphi));
  if (k <= j - 1) return scale * std::pow(r, j - k) * (1.0 - std::pow(rphi, k));
  return scale * std::pow(phi, k - j) * (1.0 - std::pow(rphi, j));
}

WSequence w_sequence(double lambda, double mu, double theta, Complex alpha, int i_max) {
  require_rates(lambda, mu, theta);
  require_half_plane(alpha);
  if (i_max < 0) throw DomainError("w_sequence: i_max must be >= 0");
  WSequence seq;
  seq.lambda = lambda;
  seq.mu = mu;
  seq.theta = theta;
  seq.alpha = alpha;
  seq.phi = detail::busy_root(lambda, mu, theta + alpha);
  const Complex denom = lambda * (1.0 - 2.0 * seq.phi) + mu + theta + alpha;
  seq.w1 = theta / denom;
  seq.w2 = lambda * seq.phi / denom;
  seq.values.resize(static_cast<std::size_t>(i_max) + 1);
  seq.values[0] = seq.phi;
  if (seq.w1 == Complex(0.0, 0.0)) return seq;
  const Complex log_w1 = std::log(seq.w1);
  for (int i = 1; i <= i_max; ++i)
    seq.values[i] = seq.phi * detail::scaled_b_poly(i - 1, seq.w2, double(i) * log_w1);
  return seq;
}

std::vector<Complex> w_sequence_recursive(double lambda, double mu, double theta,
                                          Complex alpha, int i_max) {
  require_rates(lambda, mu, theta);
  require_half_plane(alpha);
  if (i_max < 0) throw DomainError("w_sequence_recursive: i_max must be >= 0");
  std::vector<Complex> w(static_cast<std::size_t>(i_max) + 1);
  w[0] = detail::busy_root(lambda, mu, theta + alpha);
  // The convolution contains w_0 w_i twice; move it to the left-hand side.
  const Complex lhs = lambda + mu + theta + alpha - 2.0 * lambda * w[0];
  for (int i = 1; i <= i_max; ++i) {
    Complex conv(0.0, 0.0);
    for (int k = 1; k <= i - 1; ++k) conv += w[i - k] * w[k];
    w[i] = (theta * w[i - 1] + lambda * conv) / lhs;
  }
  return w;
}

int w_tail_cutoff(double lambda, double mu, double theta, Complex alpha,
                  double epsilon, int kappa_max) {
  require_rates(lambda, mu, theta);
  require_half_plane(alpha);
  if (!(epsilon > 0.0)) throw DomainError("w_tail_cutoff: epsilon must be positive");
  if (lambda == 0.0 || theta == 0.0) return 0;  // w_l == 0 for l >= 1 or unweighted
  const double target = epsilon / lambda;

  const Complex phi = detail::busy_root(lambda, mu, theta + alpha);
  const Complex denom = lambda * (1.0 - 2.0 * phi) + mu + theta + alpha;
  const double x = std::abs(theta / denom);
  const double y = std::abs(lambda * phi / denom);
  const double u = x < 1.0 ? x * y / ((1.0 - x) * (1.0 - x)) : 0.0;

  if (x < 1.0 && u <= 0.25) {
    // sum_{K>=0} b_K(y) x^K = C(u) / (1 - x), C the Catalan generating function.
    const double catalan_gf = 2.0 / (1.0 + std::sqrt(1.0 - 4.0 * u));
    const double total = std::abs(phi) * x * catalan_gf / (1.0 - x);
    double partial = 0.0;
    const double log_x = std::log(x);
    for (int kappa = 0; kappa <= kappa_max; ++kappa) {
      if (kappa > 0)
        partial += std::abs(phi) *
                   detail::scaled_b_poly(kappa - 1, Complex(y, 0.0), kappa * log_x).real();
      if (total - partial <= target) return kappa;
    }
    throw ConvergenceError("w_tail_cutoff: modulus tail not certified within kappa_max");
  }

  // |w_l(alpha)| <= w_l(Re alpha), and those sum to phi(Re alpha).
  const double re_alpha = alpha.real();
  const double total = detail::busy_root(lambda, mu, Complex(re_alpha, 0.0)).real();
  const Complex phi_r = detail::busy_root(lambda, mu, Complex(theta + re_alpha, 0.0));
  const Complex denom_r = lambda * (1.0 - 2.0 * phi_r) + mu + theta + re_alpha;
  const Complex w1_r = theta / denom_r;
  const Complex w2_r = lambda * phi_r / denom_r;
  const Complex log_w1_r = std::log(w1_r);
  double partial = phi_r.real();
  for (int kappa = 0; kappa <= kappa_max; ++kappa) {
    if (kappa > 0)
      partial += (phi_r * detail::scaled_b_poly(kappa - 1, w2_r, double(kappa) * log_w1_r)).real();
    if (total - partial <= target) return kappa;
  }
  throw ConvergenceError("w_tail_cutoff: real-part majorant not certified within kappa_max");
}

double catalan(int k) {
  double c = 1.0;
  for (int n = 0; n < k; ++n) c *= 2.0 * (2.0 * n + 1.0) / (n + 2.0);
  return c;
}

Complex b_poly(int K, Complex z) {
  if (K < 0) throw DomainError("b_poly: K must be >= 0");
  return detail::scaled_b_poly(K, z, Complex(0.0, 0.0));
}

}  // namespace prioqt::mm1

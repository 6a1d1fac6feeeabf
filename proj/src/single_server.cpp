#include "prioqt/single_server.hpp"

#include <cmath>
#include <string>

#include "prioqt/mm1_kernels.hpp"

namespace prioqt::single {

namespace {

void require_single(const ModelParams& params) {
  params.validate();
  if (params.servers != 1) throw DomainError("single-server path requires c = 1");
}

Complex kendall_map(const ModelParams& p, Complex alpha, Complex phi) {
  const double lambda = p.lambda();
  const Complex idle = lambda * (1.0 - phi) + alpha;
  return (p.lambda1 / lambda) * p.mu1 / (p.mu1 + idle) +
         (p.lambda2 / lambda) * p.mu2 / (p.mu2 + idle);
}

Complex g_map_rhs(const ModelParams& p, Complex alpha, Complex G) {
  return p.mu1 + p.lambda1 * G * G + p.lambda2 * G * w_generating_value(p, alpha, G);
}

}  // namespace

KendallState kendall_phi(const ModelParams& params, Complex alpha, double eps,
                         int max_iterations) {
  require_single(params);
  require_transform_point(alpha, true);
  KendallState st;
  if (params.lambda() == 0.0) {
    st.varphi = 1.0;
    return st;
  }
  Complex phi(0.0, 0.0);
  for (int it = 1; it <= max_iterations; ++it) {
    const Complex next = kendall_map(params, alpha, phi);
    const double change = std::abs(next - phi);
    phi = next;
    if (change < eps) {
      st.varphi = phi;
      st.iterations = it;
      st.residual = kendall_residual(params, alpha, phi);
      return st;
    }
  }
  throw ConvergenceError("kendall_phi: no convergence within " +
                         std::to_string(max_iterations) + " iterations");
}

double kendall_residual(const ModelParams& params, Complex alpha, Complex varphi) {
  if (params.lambda() == 0.0) return 0.0;
  return std::abs(varphi - kendall_map(params, alpha, varphi));
}

Complex pi_origin_closed_form(const ModelParams& params, Complex alpha) {
  require_transform_point(alpha, false);
  const auto st = kendall_phi(params, alpha);
  return 1.0 / (params.lambda() * (1.0 - st.varphi) + alpha);
}

Complex w_generating_value(const ModelParams& params, Complex alpha, Complex G) {
  return mm1::detail::busy_root(params.lambda2, params.mu2, params.lambda1 * (1.0 - G) + alpha);
}

ScalarGResult scalar_G(const ModelParams& params, Complex alpha, double eps, int max_iterations) {
  require_single(params);
  require_transform_point(alpha, true);
  const Complex denom = params.lambda() + params.mu1 + alpha;
  Complex G(0.0, 0.0);
  for (int it = 1; it <= max_iterations; ++it) {
    const Complex next = g_map_rhs(params, alpha, G) / denom;
    const double change = std::abs(next - G);
    G = next;
    if (!std::isfinite(std::abs(G)) || std::abs(G) > 1.0 + 1e-6)
      throw ConvergenceError("scalar_G: iterate left the unit disc");
    if (change < eps) return {G, it, scalar_G_residual(params, alpha, G)};
  }
  throw ConvergenceError("scalar_G: no convergence within " + std::to_string(max_iterations) +
                         " iterations");
}

double scalar_G_residual(const ModelParams& params, Complex alpha, Complex G) {
  return std::abs((params.lambda() + params.mu1 + alpha) * G - g_map_rhs(params, alpha, G));
}

Complex scalar_N(const ModelParams& params, Complex alpha, Complex G) {
  require_single(params);
  const Complex d = alpha + params.lambda() + params.mu1 - params.lambda1 * G -
                    params.lambda2 * w_generating_value(params, alpha, G);
  if (d == Complex(0.0, 0.0)) throw SingularMatrixError("scalar_N: zero denominator", 1);
  return 1.0 / d;
}

ScalarBundle build_scalar_bundle(const ModelParams& params, Complex alpha, double w_epsilon,
                                 double g_epsilon) {
  require_single(params);
  ScalarBundle b;
  b.alpha = alpha;
  b.lambda1 = params.lambda1;
  b.lambda2 = params.lambda2;
  b.G = scalar_G(params, alpha, g_epsilon).G;
  b.N = scalar_N(params, alpha, b.G);
  b.gen_at_G = w_generating_value(params, alpha, b.G);
  const int kappa =
      mm1::w_tail_cutoff(params.lambda2, params.mu2, params.lambda1, alpha, w_epsilon);
  b.w = mm1::w_sequence(params.lambda2, params.mu2, params.lambda1, alpha, kappa).values;

  // Tail identity: sum_{m >= M} w_m G^{m-M} = G^{-M} (gen(G) - sum_{m<M} w_m G^m).
  // The subtraction loses |G|^M relative accuracy, so switch to the direct
  // backward sum once |G|^M drops below 1e-2.
  const std::size_t n = b.w.size();
  b.tails.assign(n + 1, Complex(0.0, 0.0));
  for (std::size_t M = n; M-- > 0;) b.tails[M] = b.w[M] + b.G * b.tails[M + 1];
  Complex head(0.0, 0.0), gpow(1.0, 0.0);
  for (std::size_t M = 0; M <= n; ++M) {
    if (std::abs(gpow) < 1e-2) break;
    b.tails[M] = (b.gen_at_G - head) / gpow;
    if (M < n) {
      head += b.w[M] * gpow;
      gpow *= b.G;
    }
  }
  return b;
}

Complex scalar_step(const ScalarBundle& b, const std::vector<Complex>& previous) {
  const std::size_t n = previous.size();
  if (n == 0) throw DomainError("scalar_step: need pi_(0,0)");
  Complex high(0.0, 0.0);
  if (b.lambda2 != 0.0) {
    const std::size_t last = b.tails.size() - 1;
    for (std::size_t k = n > last ? n - last : 0; k < n; ++k) high += previous[k] * b.tails[n - k];
  }
  return (b.lambda1 * previous[n - 1] + b.lambda2 * high) * b.N;
}

std::vector<Complex> horizontal_scalar_recursion(const ScalarBundle& b, Complex pi_origin,
                                                 int i_max) {
  if (i_max < 0) throw DomainError("horizontal_scalar_recursion: i_max must be >= 0");
  std::vector<Complex> pi{pi_origin};
  pi.reserve(static_cast<std::size_t>(i_max) + 1);
  for (int i = 1; i <= i_max; ++i) pi.push_back(scalar_step(b, pi));
  return pi;
}

}  // namespace prioqt::single

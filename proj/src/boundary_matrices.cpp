#include "prioqt/boundary_matrices.hpp"

#include <Eigen/LU>
#include <cmath>
#include <string>

namespace prioqt::boundary {

namespace {

CMatrix complex_of(const RMatrix& m) { return m.cast<Complex>(); }

CRowVector last_unit_row(int c) {
  CRowVector e = CRowVector::Zero(c);
  e(c - 1) = 1.0;
  return e;
}

// Row c-1 of sum_m W_m Z^{m+1} for m = 1..kappa: Horner over row vectors.
CRowVector w_power_row(const WKernel& w, const CMatrix& Z) {
  const int c = static_cast<int>(Z.rows());
  const CRowVector e = last_unit_row(c);
  if (w.kappa < 1) return CRowVector::Zero(c);
  CRowVector acc = w.entry(w.kappa) * e;
  for (int l = w.kappa - 1; l >= 1; --l) acc = acc * Z + w.entry(l) * e;
  return acc * Z * Z;
}

double max_abs(const CMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace

RMatrix LevelMatrices::down(int level) const {
  if (level < 1) throw DomainError("LevelMatrices::down: level must be >= 1");
  const int c = servers;
  RMatrix d = RMatrix::Zero(c, c);
  const double mu1 = Am1(c - 1, c - 1);  // phase c-1 leaves one server: rate mu1
  for (int j = 0; j < c; ++j) d(j, j) = std::min(level, c - j) * mu1;
  return d;
}

RMatrix LevelMatrices::local(int level) const {
  if (level < 0) throw DomainError("LevelMatrices::local: level must be >= 0");
  if (level >= servers) return A0;
  if (level == 0) return A0 + Am1;
  return A0 + Am1 - down(level);
}

LevelMatrices build_level_matrices(const ModelParams& params) {
  params.validate();
  const int c = params.servers;
  LevelMatrices lm;
  lm.servers = c;
  lm.A1 = params.lambda1 * RMatrix::Identity(c, c);
  lm.Am1 = RMatrix::Zero(c, c);
  for (int j = 0; j < c; ++j) lm.Am1(j, j) = (c - j) * params.mu1;
  RMatrix T = RMatrix::Zero(c, c);
  for (int j = 0; j < c; ++j) {
    if (j + 1 < c) T(j, j + 1) = params.lambda2;
    if (j > 0) T(j, j - 1) = j * params.mu2;
    T(j, j) = -(params.lambda2 + j * params.mu2);
  }
  lm.A0 = T - lm.A1 - lm.Am1;
  return lm;
}

CMatrix WKernel::matrix(int m) const {
  CMatrix W = CMatrix::Zero(servers, servers);
  W(servers - 1, servers - 1) = entry(m);
  return W;
}

WKernel build_w_kernel(const ModelParams& params, Complex alpha, double epsilon) {
  params.validate();
  require_transform_point(alpha, true);
  const int c = params.servers;
  const double service = c * params.mu2;
  WKernel w;
  w.servers = c;
  w.kappa = mm1::w_tail_cutoff(params.lambda2, service, params.lambda1, alpha, epsilon);
  const auto seq = mm1::w_sequence(params.lambda2, service, params.lambda1, alpha, w.kappa);
  w.entries.resize(seq.size());
  for (std::size_t m = 0; m < seq.size(); ++m) w.entries[m] = params.lambda2 * seq[m];
  return w;
}

CMatrix build_W(int m, Complex alpha, const ModelParams& params) {
  if (m < 0) throw DomainError("build_W: m must be >= 0");
  params.validate();
  require_transform_point(alpha, true);
  const int c = params.servers;
  const auto seq = mm1::w_sequence(params.lambda2, c * params.mu2, params.lambda1, alpha, m);
  CMatrix W = CMatrix::Zero(c, c);
  W(c - 1, c - 1) = params.lambda2 * seq[static_cast<std::size_t>(m)];
  return W;
}

CMatrix solve_checked(const CMatrix& M, const CMatrix& B, int level) {
  Eigen::PartialPivLU<CMatrix> lu(M);
  const double rc = lu.rcond();
  if (!(rc > 1e-14))
    throw SingularMatrixError("singular block matrix at level " + std::to_string(level), level);
  CMatrix X = lu.solve(B);
  if (!X.allFinite())
    throw SingularMatrixError("non-finite solve at level " + std::to_string(level), level);
  return X;
}

CMatrix invertibility_witness(const LevelMatrices& lm, const WKernel& w, Complex alpha) {
  const int c = lm.servers;
  CMatrix M = alpha * CMatrix::Identity(c, c) - complex_of(lm.A0) - w.matrix(0);
  return solve_checked(M, CMatrix::Identity(c, c), c);
}

CMatrix g_fixed_point_map(const LevelMatrices& lm, const WKernel& w, Complex alpha,
                          const CMatrix& Z) {
  const CMatrix H = invertibility_witness(lm, w, alpha);
  const int c = lm.servers;
  CMatrix inner = complex_of(lm.Am1) + lm.A1(0, 0) * (Z * Z);
  inner.row(c - 1) += w_power_row(w, Z);
  return H * inner;
}

double g_fixed_point_residual(const LevelMatrices& lm, const WKernel& w, Complex alpha,
                              const CMatrix& G) {
  return max_abs(G - g_fixed_point_map(lm, w, alpha, G));
}

GSolveResult solve_G(const LevelMatrices& lm, const WKernel& w, Complex alpha, double eps,
                     int max_iterations) {
  if (!(eps > 0.0)) throw DomainError("solve_G: eps must be positive");
  const int c = lm.servers;
  const CMatrix H = invertibility_witness(lm, w, alpha);
  const CMatrix base = H * complex_of(lm.Am1);
  const Complex lambda1 = lm.A1(0, 0);
  const CMatrix H_last = H.col(c - 1);  // H * e_{c-1}

  GSolveResult out;
  CMatrix Z = CMatrix::Zero(c, c);
  for (int it = 1; it <= max_iterations; ++it) {
    CMatrix next = base + lambda1 * (H * (Z * Z));
    if (w.kappa >= 1) next += H_last * w_power_row(w, Z);
    const double change = max_abs(next - Z);
    Z = std::move(next);
    if (!Z.allFinite() || max_abs(Z) > 1.0 + 1e-6)
      throw ConvergenceError("solve_G: iterate left the unit disc at iteration " +
                             std::to_string(it));
    if (change < eps) {
      out.G = std::move(Z);
      out.iterations = it;
      out.last_change = change;
      return out;
    }
  }
  throw ConvergenceError("solve_G: no convergence within " + std::to_string(max_iterations) +
                         " iterations");
}

GBundle::GBundle(CMatrix G, std::vector<CMatrix> below)
    : G_(std::move(G)), below_(std::move(below)) {}

const CMatrix& GBundle::step(int i) const {
  if (i < 0) throw IndexError("GBundle::step: level must be >= 0");
  if (static_cast<std::size_t>(i) < below_.size()) return below_[i];
  return G_;
}

CMatrix GBundle::product(int l, int i) const {
  if (l < i || i < 0) throw IndexError("GBundle::product: need 0 <= i <= l");
  const int c = servers();
  CMatrix P = CMatrix::Identity(c, c);
  for (int p = l; p > i; --p) P = P * step(p - 1);
  return P;
}

CRowVector GBundle::descent_row(int i, std::span<const Complex> a) const {
  const int c = servers();
  const CRowVector e = last_unit_row(c);
  if (a.empty()) return CRowVector::Zero(c);
  const int top = static_cast<int>(a.size()) - 1;
  CRowVector acc = a[top] * e;
  for (int m = top - 1; m >= 0; --m) acc = acc * step(i + m) + a[m] * e;
  return acc;
}

namespace {

// Entries lambda2 w_{m + shift}, m = 0.., truncated at kappa.
std::vector<Complex> shifted_entries(const WKernel& w, int shift) {
  std::vector<Complex> a;
  for (int m = 0; m + shift <= w.kappa; ++m) a.push_back(w.entry(m + shift));
  return a;
}

// alpha I - A^{(i)}_0 - A1 G_{i+1,i} - sum_{m>=0} W_m G_{i+m,i}.
CMatrix level_operator(int i, const GBundle& g, const LevelMatrices& lm, const WKernel& w,
                       Complex alpha) {
  const int c = lm.servers;
  CMatrix M = alpha * CMatrix::Identity(c, c) - complex_of(lm.local(i)) -
              lm.A1(0, 0) * g.step(i);
  const auto a = shifted_entries(w, 0);
  M.row(c - 1) -= g.descent_row(i, a);
  return M;
}

}  // namespace

GBundle solve_G_levels(const CMatrix& G, const LevelMatrices& lm, const WKernel& w,
                       Complex alpha) {
  const int c = lm.servers;
  std::vector<CMatrix> below(static_cast<std::size_t>(std::max(c - 1, 0)));
  GBundle bundle(G, below);
  for (int i = c - 2; i >= 0; --i) {
    const CMatrix M = level_operator(i + 1, bundle, lm, w, alpha);
    below[i] = solve_checked(M, complex_of(lm.down(i + 1)), i + 1);
    bundle = GBundle(G, below);
  }
  return bundle;
}

const CMatrix& NBundle::at(int i) const {
  if (i < 0) throw IndexError("NBundle::at: level must be >= 0");
  if (i == 0) return N0;
  const int c = static_cast<int>(N.size()) - 1;
  return N[static_cast<std::size_t>(std::min(i, c))];
}

CMatrix n_defining_matrix(int i, const GBundle& g, const LevelMatrices& lm, const WKernel& w,
                          Complex alpha) {
  if (i < 0 || i > lm.servers) throw IndexError("n_defining_matrix: need 0 <= i <= c");
  return level_operator(i, g, lm, w, alpha);
}

NBundle solve_N(const GBundle& g, const LevelMatrices& lm, const WKernel& w, Complex alpha) {
  const int c = lm.servers;
  NBundle nb;
  nb.N.resize(static_cast<std::size_t>(c) + 1);
  for (int i = 1; i <= c; ++i)
    nb.N[i] = solve_checked(n_defining_matrix(i, g, lm, w, alpha), CMatrix::Identity(c, c), i);
  nb.N0 = CMatrix::Zero(c, c);
  if (c > 1) {
    const CMatrix M0 = n_defining_matrix(0, g, lm, w, alpha);
    const CMatrix minor = M0.bottomRightCorner(c - 1, c - 1);
    nb.N0.bottomRightCorner(c - 1, c - 1) =
        solve_checked(minor, CMatrix::Identity(c - 1, c - 1), 0);
  }
  return nb;
}

MatrixBundle build_matrix_bundle(const ModelParams& params, Complex alpha,
                                 const BundleOptions& options) {
  MatrixBundle mb;
  mb.alpha = alpha;
  mb.levels = build_level_matrices(params);
  mb.w = build_w_kernel(params, alpha, options.w_epsilon);
  const auto gs = solve_G(mb.levels, mb.w, alpha, options.g_epsilon, options.g_max_iterations);
  mb.g_iterations = gs.iterations;
  mb.g = solve_G_levels(gs.G, mb.levels, mb.w, alpha);
  mb.n = solve_N(mb.g, mb.levels, mb.w, alpha);
  return mb;
}

}  // namespace prioqt::boundary

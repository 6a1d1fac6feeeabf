#include "prioqt/transform_engine.hpp"

#include <cmath>
#include <string>

namespace prioqt::engine {

int default_k_max(int servers) { return 10 * servers + 200; }

MatrixStepper::MatrixStepper(std::shared_ptr<const boundary::MatrixBundle> bundle,
                             const ModelParams& params)
    : bundle_(std::move(bundle)), params_(params) {
  const auto& b = *bundle_;
  const int c = params_.servers;
  const int kappa = b.w.kappa;
  CRowVector e = CRowVector::Zero(c);
  e(c - 1) = 1.0;
  folded_.assign(static_cast<std::size_t>(kappa) + 2, CRowVector::Zero(c));
  for (int d = kappa; d >= 1; --d) folded_[d] = b.w.entry(d) * e + folded_[d + 1] * b.g.G();
}

CRowVector MatrixStepper::seed() const { return seed_psi0(*bundle_, params_); }

CRowVector MatrixStepper::step(const std::vector<CRowVector>& rows) const {
  const int n = static_cast<int>(rows.size());
  if (n == 0) throw DomainError("MatrixStepper::step: need psi_0");
  const auto& b = *bundle_;
  const int c = params_.servers;
  const int kappa = b.w.kappa;
  CRowVector acc = params_.lambda1 * rows[n - 1];
  if (params_.lambda2 != 0.0 && kappa >= 1) {
    if (n >= c - 1) {
      for (int d = 1; d <= std::min(n, kappa); ++d) acc += rows[n - d](c - 1) * folded_[d];
    } else {
      // a_m = sum_k psi_k[c-1] lambda2 w_{m+n-k}, weighted against G_{n+m,n}.
      std::vector<Complex> a(static_cast<std::size_t>(kappa), Complex(0.0, 0.0));
      for (int k = 0; k < n; ++k) {
        const Complex v = rows[k](c - 1);
        for (int m = 0; m + n - k <= kappa; ++m) a[m] += v * b.w.entry(m + n - k);
      }
      acc += b.g.descent_row(n, a);
    }
  }
  return acc * b.n.at(n);
}

CRowVector ScalarStepper::seed() const {
  CRowVector r(1);
  r(0) = 1.0;
  return r;
}

CRowVector ScalarStepper::step(const std::vector<CRowVector>& rows) const {
  const std::size_t n = rows.size();
  if (n == 0) throw DomainError("ScalarStepper::step: need psi_0");
  const auto& b = bundle_;
  Complex high(0.0, 0.0);
  if (b.lambda2 != 0.0) {
    const std::size_t last = b.tails.size() - 1;
    for (std::size_t k = n > last ? n - last : 0; k < n; ++k) high += rows[k](0) * b.tails[n - k];
  }
  CRowVector r(1);
  r(0) = (b.lambda1 * rows[n - 1](0) + b.lambda2 * high) * b.N;
  return r;
}

CRowVector seed_psi0(const boundary::MatrixBundle& bundle, const ModelParams& params) {
  const int c = params.servers;
  CRowVector psi = CRowVector::Zero(c);
  if (c > 1) {
    CRowVector entry = params.lambda1 * bundle.g.step(0).row(0);
    entry(1) += params.lambda2;
    psi = entry * bundle.n.N0;
  }
  psi(0) = 1.0;
  return psi;
}

std::vector<CRowVector> horizontal_recursion(const CRowVector& psi0,
                                             const boundary::MatrixBundle& bundle,
                                             const ModelParams& params, int i_max) {
  if (i_max < 0) throw DomainError("horizontal_recursion: i_max must be >= 0");
  if (psi0.size() != params.servers) throw DomainError("horizontal_recursion: psi0 has wrong size");
  const MatrixStepper stepper(
      std::shared_ptr<const boundary::MatrixBundle>(&bundle, [](const boundary::MatrixBundle*) {}),
      params);
  std::vector<CRowVector> rows{psi0};
  for (int i = 1; i <= i_max; ++i) rows.push_back(stepper.step(rows));
  return rows;
}

PsiField::PsiField(const ModelParams& params, Complex alpha, const boundary::BundleOptions& bundle,
                   bool single_server_fast_path)
    : params_(params),
      alpha_(alpha),
      consts_((params.validate(), require_transform_point(alpha, true),
               interior::make_constants(params, alpha))),
      table_(consts_) {
  scalar_path_ = params.servers == 1 && single_server_fast_path;
  if (scalar_path_) {
    stepper_ = std::make_shared<ScalarStepper>(
        single::build_scalar_bundle(params, alpha, bundle.w_epsilon, bundle.g_epsilon));
  } else {
    auto mb = std::make_shared<const boundary::MatrixBundle>(
        boundary::build_matrix_bundle(params, alpha, bundle));
    stepper_ = std::make_shared<MatrixStepper>(std::move(mb), params);
  }
  extend_to(0);
}

void PsiField::extend_to(int i) {
  const int c = params_.servers;
  while (levels() <= i) {
    rows_.push_back(rows_.empty() ? stepper_->seed() : stepper_->step(rows_));
    const int level = levels() - 1;
    table_.append(rows_.back()(c - 1));
    const Complex total = rows_.back().sum() + interior::upper_level_sum(level, table_, consts_);
    totals_.push_back(total);
    cumulative_.push_back(cumulative_.empty() ? total : cumulative_.back() + total);
  }
}

const CRowVector& PsiField::row(int i) const {
  if (i < 0 || i >= levels())
    throw IndexError("PsiField: level " + std::to_string(i) + " not built");
  return rows_[i];
}

Complex PsiField::at(State s) const {
  if (s.phase < 0) throw IndexError("PsiField: negative phase");
  const int c = params_.servers;
  const auto& r = row(s.level);
  if (s.phase < c) return r(s.phase);
  return interior::interior_transform(s.level, s.phase - (c - 1), table_, consts_);
}

Complex PsiField::level_total(int i) const {
  row(i);
  return totals_[i];
}

Complex PsiField::cumulative(int k) const {
  row(k);
  return cumulative_[k];
}

namespace {

// Grows psi until `consecutive` successive levels each change the running
// total by less than eps relative. Returns the final level.
int grow_box(PsiField& psi, double eps, int k_max, int consecutive) {
  if (!(eps > 0.0)) throw DomainError("normalize: eps must be positive");
  int hits = 0;
  for (int k = 0;; ++k) {
    if (k + 1 > k_max)
      throw ConvergenceError("normalize: box did not converge within k_max = " +
                             std::to_string(k_max) + " levels");
    psi.extend_to(k + 1);
    const Complex prev = psi.cumulative(k);
    const Complex next = psi.cumulative(k + 1);
    if (!std::isfinite(std::abs(next)))
      throw ConvergenceError("normalize: non-finite box total at level " + std::to_string(k + 1));
    hits = std::abs(next - prev) < eps * std::abs(prev) ? hits + 1 : 0;
    if (hits >= consecutive) return k + 1;
  }
}

}  // namespace

TransformField normalize(PsiField psi, const EngineOptions& options) {
  require_transform_point(psi.alpha(), false);
  const int k_max = options.k_max > 0 ? options.k_max : default_k_max(psi.params().servers);
  const int k = grow_box(psi, options.eps, k_max, std::max(options.consecutive, 1));
  const Complex pi_origin = 1.0 / (psi.alpha() * psi.cumulative(k));
  return TransformField(std::move(psi), pi_origin, k);
}

TransformField transform_field(const ModelParams& params, Complex alpha,
                               const EngineOptions& options) {
  require_transform_point(alpha, false);
  return normalize(PsiField(params, alpha, options.bundle, options.single_server_fast_path),
                   options);
}

Complex transform_at(State s, const TransformField& field) {
  if (s.level < 0 || s.phase < 0) throw IndexError("transform_at: negative index");
  return field.transform_at(s);
}

double StationaryField::upper_mass(int i) const {
  return p_origin_ * interior::upper_level_sum(i, psi_.table(), psi_.constants()).real();
}

StationaryField stationary_field(const ModelParams& params, const StationaryOptions& options) {
  params.validate();
  if (params.rho() >= 1.0 - 1e-9)
    throw InstabilityError("stationary_field: load rho = " + std::to_string(params.rho()) +
                           " is not below 1");
  PsiField psi(params, Complex(0.0, 0.0), options.bundle, options.single_server_fast_path);
  const int k = grow_box(psi, options.eps, options.k_max, std::max(options.consecutive, 1));
  const double p_origin = 1.0 / psi.cumulative(k).real();
  return StationaryField(std::move(psi), p_origin, k);
}

}  // namespace prioqt::engine

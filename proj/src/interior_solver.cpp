#include "prioqt/interior_solver.hpp"

#include <string>

namespace prioqt::interior {

InteriorConstants make_constants(const ModelParams& params, Complex alpha) {
  InteriorConstants c;
  c.triple = mm1::kernel_triple(params, alpha);
  c.lambda1 = params.lambda1;
  c.w2 = c.triple.r2 * c.triple.phi2;
  c.w1 = params.lambda1 * c.triple.omega2 / (1.0 - c.w2);
  return c;
}

Complex vertical_boundary(int j, Complex pi_0_cm1, const InteriorConstants& consts) {
  if (j < 1) throw DomainError("vertical_boundary: phase offset must be >= 1");
  return pi_0_cm1 * std::pow(consts.triple.r2, j);
}

Complex upsilon(int j, int k, const InteriorConstants& consts, double lambda1) {
  if (j < 1 || k < 1) throw DomainError("upsilon: j and k must be >= 1");
  const auto& t = consts.triple;
  const Complex scale = lambda1 * t.omega2;
  const Complex rphi = t.r2 * t.phi2;
  if (k <= j - 1) return scale * std::pow(t.r2, j - k) * (1.0 - std::pow(rphi, k));
  return scale * std::pow(t.phi2, k - j) * (1.0 - std::pow(rphi, j));
}

void CoeffTable::append(Complex boundary_value) {
  if (rows_.empty()) {
    rows_.push_back({boundary_value});
    return;
  }
  const auto& prev = rows_.back();
  const int i = static_cast<int>(prev.size()) - 1;
  std::vector<Complex> next(static_cast<std::size_t>(i) + 2);
  next[0] = boundary_value;
  // suffix = sum_{k=j..i} v_{i,k}
  Complex suffix(0.0, 0.0);
  for (int j = i + 1; j >= 1; --j) {
    if (j <= i) suffix += prev[j];
    next[j] = w1_ * (prev[j - 1] + w2_ * suffix);
  }
  rows_.push_back(std::move(next));
}

const std::vector<Complex>& CoeffTable::row(int i) const {
  if (i < 0 || i >= levels())
    throw IndexError("CoeffTable: level " + std::to_string(i) + " not built");
  return rows_[i];
}

Complex CoeffTable::operator()(int i, int j) const {
  const auto& r = row(i);
  if (j < 0 || j > i) throw IndexError("CoeffTable: need 0 <= j <= i");
  return r[j];
}

CoeffTable coeffs_recursive(std::span<const Complex> boundary, const InteriorConstants& consts) {
  CoeffTable table(consts);
  for (const Complex& b : boundary) table.append(b);
  return table;
}

Complex coeffs_explicit(int i, int j, std::span<const Complex> boundary,
                        const InteriorConstants& consts) {
  if (j < 0 || j > i) throw IndexError("coeffs_explicit: need 0 <= j <= i");
  if (static_cast<std::size_t>(i) >= boundary.size())
    throw IndexError("coeffs_explicit: boundary does not cover level " + std::to_string(i));
  const Complex w1 = consts.w1, w2 = consts.w2;
  Complex value = std::pow(w1, j) * boundary[i - j];
  if (j == 0) return value;
  Complex w1_pow = std::pow(w1, j);
  for (int k = j + 1; k <= i; ++k) {
    w1_pow *= w1;
    const int n = k - j;
    // l = 1 term of (j/n) binom(n,l) binom(k-1,l-1) w2^l is j * w2.
    Complex term = double(j) * w2;
    Complex inner = term;
    for (int l = 1; l < n; ++l) {
      term *= (double(n - l) / (l + 1)) * (double(k - l) / l) * w2;
      inner += term;
    }
    value += w1_pow * boundary[i - k] * inner;
  }
  return value;
}

Complex interior_transform(int i, int j, const CoeffTable& table, const InteriorConstants& consts) {
  if (j < 1) throw DomainError("interior_transform: phase offset must be >= 1");
  const auto& v = table.row(i);
  const Complex damp = 1.0 - consts.w2;
  Complex weight(1.0, 0.0);  // (1 - w2)^k binom(j-1+k, k)
  Complex sum(0.0, 0.0);
  for (int k = 0; k <= i; ++k) {
    if (k > 0) weight *= damp * (double(j - 1 + k) / k);
    sum += v[k] * weight;
  }
  return sum * std::pow(consts.triple.r2, j);
}

Complex upper_level_sum(int i, const CoeffTable& table, const InteriorConstants& consts) {
  const Complex r2 = consts.triple.r2;
  if (std::abs(r2) >= 1.0) throw ConvergenceError("upper_level_sum: |r2| >= 1, series diverges");
  const auto& v = table.row(i);
  const Complex ratio = (1.0 - consts.w2) / (1.0 - r2);
  Complex weight = r2 / (1.0 - r2);  // (1 - w2)^k r2 / (1 - r2)^(k+1)
  Complex sum(0.0, 0.0);
  for (int k = 0; k <= i; ++k) {
    if (k > 0) weight *= ratio;
    sum += v[k] * weight;
  }
  return sum;
}

}  // namespace prioqt::interior

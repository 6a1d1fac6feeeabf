#include "prioqt/oracle.hpp"

#include <Eigen/SparseLU>
#include <unsupported/Eigen/MatrixFunctions>
#include <algorithm>
#include <cmath>
#include <string>

namespace prioqt::oracle {

int TruncatedGenerator::index(State s) const {
  if (!contains(s)) throw IndexError("TruncatedGenerator: state " + to_string(s) + " outside box");
  return s.level * (j_cap + 1) + s.phase;
}

State TruncatedGenerator::state(int idx) const {
  if (idx < 0 || idx >= size()) throw IndexError("TruncatedGenerator: index out of range");
  return {idx / (j_cap + 1), idx % (j_cap + 1)};
}

double TruncatedGenerator::rate(State from, State to) const {
  return Q.coeff(index(from), index(to));
}

TruncatedGenerator build_truncated_generator(const ModelParams& params, int i_cap, int j_cap,
                                             BoundaryMode mode) {
  params.validate();
  if (i_cap < 0 || j_cap < 0) throw DomainError("build_truncated_generator: negative cap");
  TruncatedGenerator gen;
  gen.params = params;
  gen.i_cap = i_cap;
  gen.j_cap = j_cap;
  gen.mode = mode;
  const int c = params.servers;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(gen.size()) * 5);
  for (int i = 0; i <= i_cap; ++i) {
    for (int j = 0; j <= j_cap; ++j) {
      const int from = gen.index({i, j});
      double out = 0.0;
      auto add = [&](State to, double r) {
        if (r <= 0.0) return;
        if (gen.contains(to)) {
          trip.emplace_back(from, gen.index(to), r);
          out += r;
        } else if (mode == BoundaryMode::substochastic) {
          out += r;
        }
      };
      add({i + 1, j}, params.lambda1);
      add({i, j + 1}, params.lambda2);
      add({i - 1, j}, std::max(std::min(i, c - j), 0) * params.mu1);
      add({i, j - 1}, std::min(c, j) * params.mu2);
      trip.emplace_back(from, from, -out);
    }
  }
  gen.Q.resize(gen.size(), gen.size());
  gen.Q.setFromTriplets(trip.begin(), trip.end());
  return gen;
}

Eigen::VectorXcd transform_oracle(const TruncatedGenerator& gen, Complex alpha) {
  require_transform_point(alpha, false);
  const int n = gen.size();
  Eigen::SparseMatrix<Complex> M = -Eigen::SparseMatrix<Complex>(gen.Q.cast<Complex>().transpose());
  for (int k = 0; k < n; ++k) M.coeffRef(k, k) += alpha;
  M.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<Complex>> lu;
  lu.compute(M);
  if (lu.info() != Eigen::Success) throw SingularMatrixError("transform_oracle: LU failed", -1);
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n);
  rhs(gen.index({0, 0})) = 1.0;
  Eigen::VectorXcd x = lu.solve(rhs);
  if (lu.info() != Eigen::Success) throw SingularMatrixError("transform_oracle: solve failed", -1);
  return x;
}

Eigen::VectorXd transient_oracle(const TruncatedGenerator& gen, double t, double tail_tolerance) {
  if (!(t >= 0.0)) throw DomainError("transient_oracle: t must be >= 0");
  const int n = gen.size();
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  v(gen.index({0, 0})) = 1.0;
  if (t == 0.0) return v;
  double rate = 0.0;
  for (int k = 0; k < n; ++k) rate = std::max(rate, -gen.Q.coeff(k, k));
  if (rate == 0.0) return v;
  const Eigen::SparseMatrix<double> QT = gen.Q.transpose();
  const double lt = rate * t;
  Eigen::VectorXd result = Eigen::VectorXd::Zero(n);
  double mass = 0.0;
  for (long k = 0;; ++k) {
    const double weight = std::exp(-lt + k * std::log(lt) - std::lgamma(k + 1.0));
    result += weight * v;
    mass += weight;
    if (k > lt && 1.0 - mass < tail_tolerance) break;
    if (k > 10 * static_cast<long>(lt) + 1000)
      throw ConvergenceError("transient_oracle: Poisson tail not reached");
    v += (QT * v) / rate;
  }
  return result;
}

Eigen::VectorXd transient_expm(const TruncatedGenerator& gen, double t) {
  const Eigen::MatrixXd QT = Eigen::MatrixXd(gen.Q).transpose() * t;
  const Eigen::MatrixXd E = QT.exp();
  return E.col(gen.index({0, 0}));
}

namespace {

// Mass beyond the last row/column extrapolated from the geometric ratio of
// the last two marginals.
double geometric_tail(const std::vector<double>& marginal) {
  const std::size_t n = marginal.size();
  if (n < 2) return 0.0;
  const double last = marginal[n - 1], prev = marginal[n - 2];
  if (!(prev > 0.0)) return 0.0;
  const double q = last / prev;
  if (q >= 1.0) return 1.0;
  return last * q / (1.0 - q);
}

}  // namespace

StationaryOracle stationary_oracle(const TruncatedGenerator& gen) {
  const int n = gen.size();
  Eigen::SparseMatrix<double> A = gen.Q.transpose();
  const int pivot = gen.index({0, 0});
  // Replace the origin's balance equation with the normalization.
  for (int col = 0; col < A.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, col); it; ++it)
      if (it.row() == pivot) it.valueRef() = 0.0;
  for (int col = 0; col < n; ++col) A.coeffRef(pivot, col) = 1.0;
  A.prune(0.0);
  A.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) throw SingularMatrixError("stationary_oracle: LU failed", -1);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(pivot) = 1.0;
  StationaryOracle out;
  out.p = lu.solve(rhs);
  std::vector<double> by_level(gen.i_cap + 1, 0.0), by_phase(gen.j_cap + 1, 0.0);
  for (int k = 0; k < n; ++k) {
    const State s = gen.state(k);
    by_level[s.level] += out.p(k);
    by_phase[s.phase] += out.p(k);
  }
  out.tail_estimate = geometric_tail(by_level) + geometric_tail(by_phase);
  out.tail_warning = out.tail_estimate > 1e-8;
  return out;
}

double balance_residual(const TruncatedGenerator& gen, const Eigen::VectorXd& p, int margin) {
  const Eigen::VectorXd r = gen.Q.transpose() * p;
  double worst = 0.0;
  for (int k = 0; k < gen.size(); ++k) {
    const State s = gen.state(k);
    if (s.level + margin > gen.i_cap || s.phase + margin > gen.j_cap) continue;
    worst = std::max(worst, std::abs(r(k)));
  }
  return worst;
}

namespace {

template <class Solve>
AdaptiveResult adaptive(const ModelParams& params, const std::vector<State>& states, int i_cap,
                        int j_cap, double tolerance, int max_cap, BoundaryMode mode,
                        Solve&& solve) {
  AdaptiveResult prev;
  bool have_prev = false;
  for (;;) {
    const auto gen = build_truncated_generator(params, i_cap, j_cap, mode);
    const Eigen::VectorXcd x = solve(gen);
    AdaptiveResult cur;
    cur.i_cap = i_cap;
    cur.j_cap = j_cap;
    for (const State& s : states) {
      const Complex v = gen.contains(s) ? x(gen.index(s)) : Complex(0.0, 0.0);
      cur.re.push_back(v.real());
      cur.im.push_back(v.imag());
    }
    if (have_prev) {
      double change = 0.0;
      for (std::size_t k = 0; k < states.size(); ++k)
        change = std::max(change, std::abs(cur.value(k) - prev.value(k)));
      cur.last_change = change;
      if (change < tolerance) return cur;
    }
    if (2 * std::max(i_cap, j_cap) > max_cap)
      throw ConvergenceError("oracle: caps exceeded " + std::to_string(max_cap) +
                             " before truncation change fell below tolerance");
    prev = std::move(cur);
    have_prev = true;
    i_cap *= 2;
    j_cap *= 2;
  }
}

}  // namespace

AdaptiveResult adaptive_transform(const ModelParams& params, Complex alpha,
                                  const std::vector<State>& states, int i_cap, int j_cap,
                                  double tolerance, int max_cap) {
  return adaptive(params, states, i_cap, j_cap, tolerance, max_cap, BoundaryMode::substochastic,
                  [&](const TruncatedGenerator& g) { return transform_oracle(g, alpha); });
}

AdaptiveResult adaptive_transient(const ModelParams& params, double t,
                                  const std::vector<State>& states, int i_cap, int j_cap,
                                  double tolerance, int max_cap) {
  return adaptive(params, states, i_cap, j_cap, tolerance, max_cap, BoundaryMode::substochastic,
                  [&](const TruncatedGenerator& g) -> Eigen::VectorXcd {
                    return transient_oracle(g, t).cast<Complex>();
                  });
}

AdaptiveResult adaptive_stationary(const ModelParams& params, const std::vector<State>& states,
                                   int i_cap, int j_cap, double tolerance, int max_cap) {
  return adaptive(params, states, i_cap, j_cap, tolerance, max_cap, BoundaryMode::conservative,
                  [&](const TruncatedGenerator& g) -> Eigen::VectorXcd {
                    return stationary_oracle(g).p.cast<Complex>();
                  });
}

}  // namespace prioqt::oracle

#include "prioqt/measures.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numbers>
#include <thread>

namespace prioqt::measures {

void InversionConfig::validate() const {
  if (terms < 1 || euler_average < 0) throw DomainError("InversionConfig: invalid term counts");
  if (terms < euler_average) throw DomainError("InversionConfig: terms must be >= euler_average");
  if (!(target_error > 0.0 && target_error < 1.0))
    throw DomainError("InversionConfig: target_error must lie in (0, 1)");
  for (double t : time_grid)
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("InversionConfig: times must be > 0");
}

double InversionConfig::abscissa() const { return std::log(1.0 / target_error); }

std::vector<Complex> euler_nodes(double t, const InversionConfig& cfg) {
  cfg.validate();
  if (!(t > 0.0)) throw DomainError("euler_nodes: t must be > 0");
  const double A = cfg.abscissa();
  std::vector<Complex> nodes;
  for (int k = 0; k < cfg.evaluations(); ++k)
    nodes.emplace_back(A / (2.0 * t), std::numbers::pi * k / t);
  return nodes;
}

InversionResult euler_combine(const std::vector<Complex>& values, double t,
                              const InversionConfig& cfg) {
  const int n = cfg.terms, m = cfg.euler_average;
  if (static_cast<int>(values.size()) != cfg.evaluations())
    throw DomainError("euler_combine: expected one value per Euler node");
  const double A = cfg.abscissa();
  const double pre = std::exp(A / 2.0) / t;
  std::vector<double> partial(values.size());
  double s = pre * values[0].real() / 2.0;
  partial[0] = s;
  for (std::size_t k = 1; k < values.size(); ++k) {
    s += (k % 2 ? -pre : pre) * values[k].real();
    partial[k] = s;
  }
  auto average = [&](int start) {
    double acc = 0.0, binom = 1.0;
    for (int j = 0; j <= m; ++j) {
      acc += binom * partial[start + j];
      binom = binom * (m - j) / (j + 1);
    }
    return acc / std::ldexp(1.0, m);
  };
  InversionResult r;
  r.value = average(n);
  r.error_estimate = std::abs(r.value - average(n - 1));
  return r;
}

int thread_cap() {
  if (const char* env = std::getenv("PRIOQT_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  return std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& job) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(thread_cap()), count);
  if (workers <= 1) {
    for (std::size_t k = 0; k < count; ++k) job(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto run = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < count;) {
      try {
        job(k);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

InversionResult invert_detailed(const Evaluator& f, double t, const InversionConfig& cfg) {
  const auto nodes = euler_nodes(t, cfg);
  std::vector<Complex> values(nodes.size());
  parallel_for(nodes.size(), [&](std::size_t k) { values[k] = f(nodes[k]); });
  const auto r = euler_combine(values, t, cfg);
  if (!std::isfinite(r.value) || r.error_estimate > cfg.failure_threshold)
    throw ConvergenceError("invert: Euler average did not settle (estimate " +
                           std::to_string(r.error_estimate) + ")");
  return r;
}

double invert(const Evaluator& f, double t, const InversionConfig& cfg) {
  return invert_detailed(f, t, cfg).value;
}

std::string MeasureSpec::name() const {
  switch (kind) {
    case MeasureKind::transition_prob:
      return "p" + to_string(state);
    case MeasureKind::mean_low:
      return "mean_low";
    case MeasureKind::delay_high:
      return "delay_high";
    case MeasureKind::delay_low:
      return "delay_low";
    case MeasureKind::marginal_class1:
      return "marginal_class1(" + std::to_string(level) + ")";
  }
  return "unknown";
}

engine::EngineOptions inversion_engine_options() {
  engine::EngineOptions o;
  o.eps = 1e-14;
  o.consecutive = 3;
  o.k_max = 200000;
  o.bundle.w_epsilon = 1e-14;
  o.bundle.g_epsilon = 1e-14;
  return o;
}

FieldFactory default_factory(const ModelParams& params, const engine::EngineOptions& options) {
  return [params, options](Complex alpha) { return engine::transform_field(params, alpha, options); };
}

Complex marginal_class1_transform(int i, const engine::TransformField& field) {
  return field.marginal(i);
}

namespace {

// Sums contribution(i) over levels until `consecutive` successive levels
// are below tolerance after scaling by `scale`.
template <class T, class Field, class Contribution>
T level_sweep(Field& field, double scale, const TruncationRule& rule, Contribution&& contribution) {
  T sum{};
  int hits = 0;
  for (int i = 0;; ++i) {
    if (i >= rule.max_levels)
      throw ConvergenceError("level tail did not fall below tolerance within " +
                             std::to_string(rule.max_levels) + " levels");
    field.extend_to(i);
    const T term = contribution(i);
    sum += term;
    hits = std::abs(term) * scale < rule.tolerance ? hits + 1 : 0;
    if (hits >= rule.consecutive) return sum;
  }
}

Complex lower_row_sum(const engine::TransformField& field, int i) {
  return field.pi_origin() * field.psi().row(i).sum();
}

}  // namespace

Complex measure_transform(const MeasureSpec& spec, engine::TransformField& field,
                          const TruncationRule& rule) {
  const Complex alpha = field.alpha();
  const double scale = std::abs(alpha);
  const int c = field.params().servers;
  switch (spec.kind) {
    case MeasureKind::transition_prob:
      if (spec.state.level < 0 || spec.state.phase < 0)
        throw IndexError("measure_transform: negative state index");
      field.extend_to(spec.state.level);
      return field.transform_at(spec.state);
    case MeasureKind::marginal_class1:
      if (spec.level < 0) throw IndexError("measure_transform: negative level");
      field.extend_to(spec.level);
      return field.marginal(spec.level);
    case MeasureKind::mean_low:
      return level_sweep<Complex>(field, scale, rule,
                                  [&](int i) { return double(i) * field.marginal(i); });
    case MeasureKind::delay_high:
      return level_sweep<Complex>(field, scale, rule, [&](int i) {
        return field.marginal(i) - lower_row_sum(field, i);
      });
    case MeasureKind::delay_low: {
      field.extend_to(c);
      Complex idle(0.0, 0.0);
      for (int i = 0; i < c; ++i)
        for (int j = 0; i + j < c; ++j) idle += field.transform_at({i, j});
      return 1.0 / alpha - idle;
    }
  }
  throw DomainError("measure_transform: unknown measure");
}

namespace {

double invert_measure(const MeasureSpec& spec, const FieldFactory& factory, double t,
                      const InversionConfig& cfg) {
  return invert(
      [&](Complex alpha) {
        auto field = factory(alpha);
        return measure_transform(spec, field);
      },
      t, cfg);
}

}  // namespace

double mean_low_priority(const FieldFactory& factory, double t, const InversionConfig& cfg) {
  return invert_measure({MeasureKind::mean_low, {}, 0}, factory, t, cfg);
}

double delay_probability(PriorityClass cls, const FieldFactory& factory, double t,
                         const InversionConfig& cfg) {
  const auto kind = cls == PriorityClass::high ? MeasureKind::delay_high : MeasureKind::delay_low;
  return std::clamp(invert_measure({kind, {}, 0}, factory, t, cfg), 0.0, 1.0);
}

std::vector<MeasureSeries> compute_series(const std::vector<MeasureSpec>& specs,
                                          const FieldFactory& factory, const InversionConfig& cfg,
                                          const TruncationRule& rule) {
  cfg.validate();
  const std::size_t nt = cfg.time_grid.size();
  const std::size_t nodes = static_cast<std::size_t>(cfg.evaluations());
  // values[t][node][measure]; failures are recorded per time point.
  std::vector<std::vector<std::vector<Complex>>> values(
      nt, std::vector<std::vector<Complex>>(nodes, std::vector<Complex>(specs.size())));
  std::vector<char> point_failed(nt, 0);
  parallel_for(nt * nodes, [&](std::size_t job) {
    const std::size_t ti = job / nodes, k = job % nodes;
    try {
      const Complex alpha = euler_nodes(cfg.time_grid[ti], cfg)[k];
      auto field = factory(alpha);
      for (std::size_t s = 0; s < specs.size(); ++s)
        values[ti][k][s] = measure_transform(specs[s], field, rule);
    } catch (const std::exception&) {
      point_failed[ti] = 1;
    }
  });

  std::vector<MeasureSeries> out(specs.size());
  for (std::size_t s = 0; s < specs.size(); ++s) {
    auto& series = out[s];
    series.measure = specs[s];
    for (std::size_t ti = 0; ti < nt; ++ti) {
      const double t = cfg.time_grid[ti];
      series.times.push_back(t);
      bool failed = point_failed[ti] != 0;
      InversionResult r;
      if (!failed) {
        std::vector<Complex> v(nodes);
        for (std::size_t k = 0; k < nodes; ++k) v[k] = values[ti][k][s];
        r = euler_combine(v, t, cfg);
        failed = !std::isfinite(r.value) || r.error_estimate > cfg.failure_threshold;
      }
      double value = failed ? std::nan("") : r.value;
      series.raw_values.push_back(value);
      if (!failed && specs[s].is_probability()) {
        const double clipped = std::clamp(value, 0.0, 1.0);
        if (clipped != value) ++series.clipped;
        value = clipped;
      }
      series.values.push_back(value);
      series.error_estimates.push_back(failed ? std::nan("") : r.error_estimate);
      series.failed.push_back(failed);
    }
  }
  return out;
}

double stationary_mean_low(engine::StationaryField& field, const TruncationRule& rule) {
  return level_sweep<double>(field, 1.0, rule, [&](int i) { return i * field.marginal(i); });
}

double stationary_delay(PriorityClass cls, engine::StationaryField& field,
                        const TruncationRule& rule) {
  const int c = field.params().servers;
  if (cls == PriorityClass::high)
    return level_sweep<double>(field, 1.0, rule, [&](int i) { return field.upper_mass(i); });
  field.extend_to(c);
  double idle = 0.0;
  for (int i = 0; i < c; ++i)
    for (int j = 0; i + j < c; ++j) idle += field.probability({i, j});
  return 1.0 - idle;
}

double erlang_c(int servers, double a) {
  if (servers < 1 || !(a > 0.0) || a >= servers)
    throw DomainError("erlang_c: need servers >= 1 and 0 < a < servers");
  // Erlang-B by the stable recursion, then C = B / (1 - (a / c)(1 - B)).
  double b = 1.0;
  for (int k = 1; k <= servers; ++k) b = a * b / (k + a * b);
  const double rho = a / servers;
  return b / (1.0 - rho * (1.0 - b));
}

}  // namespace prioqt::measures

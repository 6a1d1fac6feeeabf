#ifndef PRIOQT_MEASURES_HPP
#define PRIOQT_MEASURES_HPP

// Euler-summation Laplace inversion and the time-dependent measures built on
// transform fields.

#include <functional>
#include <string>
#include <vector>

#include "prioqt/transform_engine.hpp"

namespace prioqt::measures {

struct InversionConfig {
  int terms = 38;
  int euler_average = 11;
  double target_error = 1e-10;      ///< sets the contour abscissa A = ln(1 / target_error)
  double failure_threshold = 1e-5;  ///< error estimate above this raises ConvergenceError
  std::vector<double> time_grid;

  void validate() const;
  double abscissa() const;
  int evaluations() const { return terms + euler_average + 1; }
};

/// Contour points alpha_k = (A + 2 pi i k) / (2 t), k = 0..terms+euler_average.
std::vector<Complex> euler_nodes(double t, const InversionConfig& cfg);

struct InversionResult {
  double value = 0.0;
  double error_estimate = 0.0;  ///< |E(n) - E(n-1)| of successive Euler averages
};

/// Combines transform values at euler_nodes(t) into the inverse at t.
InversionResult euler_combine(const std::vector<Complex>& values, double t,
                              const InversionConfig& cfg);

using Evaluator = std::function<Complex(Complex)>;

/// Throws ConvergenceError when the error estimate exceeds
/// cfg.failure_threshold.
InversionResult invert_detailed(const Evaluator& f, double t, const InversionConfig& cfg);
double invert(const Evaluator& f, double t, const InversionConfig& cfg);

/// Worker count: PRIOQT_THREADS if set, else hardware concurrency, at least 1.
int thread_cap();

/// Runs job(k) for k = 0..count-1 on up to thread_cap() threads.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& job);

enum class MeasureKind { transition_prob, mean_low, delay_high, delay_low, marginal_class1 };

struct MeasureSpec {
  MeasureKind kind = MeasureKind::transition_prob;
  State state;    ///< transition_prob
  int level = 0;  ///< marginal_class1

  std::string name() const;
  bool is_probability() const { return kind != MeasureKind::mean_low; }
};

using FieldFactory = std::function<engine::TransformField(Complex)>;

/// Engine settings used inside inversion: the e^{A/2} / t prefactor
/// amplifies transform errors, so the box tolerance is tight.
engine::EngineOptions inversion_engine_options();
FieldFactory default_factory(const ModelParams& params,
                             const engine::EngineOptions& options = inversion_engine_options());

struct TruncationRule {
  double tolerance = 1e-12;  ///< on |alpha * contribution| of a level
  int consecutive = 3;
  int max_levels = 200000;
};

/// sum_{j<c} pi_(i,j) plus the closed-form upper-phase sum.
Complex marginal_class1_transform(int i, const engine::TransformField& field);

/// Transform of the measure. Grows the field as far as the truncation rule
/// requires; throws ConvergenceError when max_levels is reached first.
Complex measure_transform(const MeasureSpec& spec, engine::TransformField& field,
                          const TruncationRule& rule = {});

double mean_low_priority(const FieldFactory& factory, double t, const InversionConfig& cfg);

enum class PriorityClass { high, low };
double delay_probability(PriorityClass cls, const FieldFactory& factory, double t,
                         const InversionConfig& cfg);

struct MeasureSeries {
  MeasureSpec measure;
  std::vector<double> times;
  std::vector<double> values;       ///< clipped to [0, 1] for probabilities
  std::vector<double> raw_values;
  std::vector<double> error_estimates;
  std::vector<bool> failed;         ///< point could not be computed
  int clipped = 0;                  ///< probabilities moved by clipping
};

/// Inverts every measure on cfg.time_grid; one field per contour point is
/// shared by all measures.
std::vector<MeasureSeries> compute_series(const std::vector<MeasureSpec>& specs,
                                          const FieldFactory& factory,
                                          const InversionConfig& cfg,
                                          const TruncationRule& rule = {});

/// Stationary counterparts from the alpha = 0 pipeline; the field is grown
/// until the level contributions fall below rule.tolerance.
double stationary_mean_low(engine::StationaryField& field, const TruncationRule& rule = {});
double stationary_delay(PriorityClass cls, engine::StationaryField& field,
                        const TruncationRule& rule = {});

/// Erlang-C delay probability of M/M/c with offered load a < c.
double erlang_c(int servers, double offered_load);

}  // namespace prioqt::measures

#endif  // PRIOQT_MEASURES_HPP

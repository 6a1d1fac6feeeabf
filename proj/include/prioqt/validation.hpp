#ifndef PRIOQT_VALIDATION_HPP
#define PRIOQT_VALIDATION_HPP

// Acceptance checks shared by the test suite and the `validate` command.

#include <functional>
#include <string>
#include <vector>

namespace prioqt::validation {

struct CheckResult {
  std::string name;
  bool passed = false;
  double max_dev = 0.0;
  double tol = 0.0;
  std::string detail;
};

struct ValidationOptions {
  /// Added to every entry of G before it is certified; nonzero values make
  /// the G/N check fail.
  double corrupt_G = 0.0;
};

CheckResult check_transform_oracle();        // 1
CheckResult check_stationary_oracle();       // 2
CheckResult check_coefficients();            // 3
CheckResult check_w_sequence();              // 4
CheckResult check_combinatorial();           // 5
CheckResult check_g_n(const ValidationOptions& options = {});  // 6
CheckResult check_time_domain();             // 7
CheckResult check_delay_asymptote();         // 8
CheckResult check_normalization();           // 9
CheckResult check_mean_plateau();            // 10

/// Exact-arithmetic identities; each returns the number of failing cases.
int binomial_vandermonde_failures(int limit = 12);
int binomial_upper_index_failures(int limit = 12);
int b_poly_recursion_failures(int k_max = 25);

/// Runs checks 1..10 in order, reporting each as it completes.
std::vector<CheckResult> run_acceptance(const ValidationOptions& options = {},
                                        const std::function<void(const CheckResult&)>& report = {});

std::string format_line(const CheckResult& r);

}  // namespace prioqt::validation

#endif  // PRIOQT_VALIDATION_HPP

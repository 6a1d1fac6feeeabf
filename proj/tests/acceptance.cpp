#include <iostream>

#include "prioqt/validation.hpp"

int main() {
  using namespace prioqt::validation;
  int failures = 0;
  run_acceptance({}, [&](const CheckResult& r) {
    std::cout << format_line(r) << std::endl;
    if (!r.passed) ++failures;
  });
  std::cout << (failures == 0 ? "all criteria passed" : "criteria failed: " + std::to_string(failures))
            << std::endl;
  return failures == 0 ? 0 : 1;
}

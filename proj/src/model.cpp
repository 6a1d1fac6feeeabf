#include "prioqt/model.hpp"

#include <cmath>

namespace prioqt {

void ModelParams::validate() const {
  if (servers < 1) throw DomainError("servers must be >= 1");
  if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0) || !std::isfinite(lambda1) ||
      !std::isfinite(lambda2))
    throw DomainError("arrival rates must be finite and non-negative");
  if (!(mu1 > 0.0) || !(mu2 > 0.0) || !std::isfinite(mu1) || !std::isfinite(mu2))
    throw DomainError("service rates must be finite and positive");
}

ModelParams ModelParams::from_loads(int servers, double rho1, double rho2,
                                    double mu1, double mu2) {
  ModelParams p;
  p.servers = servers;
  p.mu1 = mu1;
  p.mu2 = mu2;
  p.lambda1 = rho1 * servers * mu1;
  p.lambda2 = rho2 * servers * mu2;
  p.validate();
  return p;
}

std::string to_string(const State& s) {
  return "(" + std::to_string(s.level) + "," + std::to_string(s.phase) + ")";
}

void require_transform_point(Complex alpha, bool allow_axis) {
  if (!std::isfinite(alpha.real()) || !std::isfinite(alpha.imag()))
    throw DomainError("transform point must be finite");
  if (alpha.real() > 0.0) return;
  if (allow_axis && alpha.real() == 0.0) return;
  throw DomainError(allow_axis ? "transform point must have a nonnegative real part"
                               : "transform point must have a positive real part");
}

}  // namespace prioqt

#include "minerva/support_theory.hpp"

#include <cmath>
#include <string>

#include "minerva/error.hpp"

namespace minerva {

namespace {

void require(bool ok, const char* param, const char* constraint) {
  if (!ok) throw DomainError(std::string(param) + " must satisfy " + constraint);
}

}  // namespace

double detect_threshold(std::size_t k, double zeta) {
  require(k >= 1, "k", "k >= 1");
  require(zeta > 0.0 && zeta < 1.0, "zeta", "0 < zeta < 1");
  return -std::log(zeta) / static_cast<double>(k);
}

double miss_probability(double p, std::size_t k) {
  require(p >= 0.0 && p <= 1.0, "p", "0 <= p <= 1");
  require(k >= 1, "k", "k >= 1");
  return std::pow(1.0 - p, static_cast<double>(k));
}

bool detectability_bound_holds(double p, std::size_t k, double zeta) {
  if (p < detect_threshold(k, zeta)) return true;
  return miss_probability(p, k) <= zeta;
}

std::uint64_t cycles_to_threshold(double p0, double eps, double delta) {
  require(p0 > 0.0 && p0 <= 1.0, "p0", "0 < p0 <= 1");
  require(eps > 0.0 && eps <= 1.0, "eps", "0 < eps <= 1");
  require(delta > 0.0 && std::isfinite(delta), "delta", "delta > 0");
  if (p0 >= eps) return 0;
  return static_cast<std::uint64_t>(std::ceil((std::log(eps) - std::log(p0)) / delta));
}

double expected_acr_attempts(double n, double alpha) {
  require(n >= 0.0, "N", "N >= 0");
  require(alpha > 0.0 && alpha <= 1.0, "alpha", "0 < alpha <= 1");
  return n / alpha;
}

}  // namespace minerva

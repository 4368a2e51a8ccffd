#pragma once

// Detectability threshold, miss probability, distillation-cycle count and
// expected answer-conditioned attempts. Natural logarithms throughout.

#include <cstddef>
#include <cstdint>

namespace minerva {

/// -ln(zeta) / k. Requires k >= 1 and 0 < zeta < 1.
double detect_threshold(std::size_t k, double zeta);

/// (1 - p)^k. Requires 0 <= p <= 1 and k >= 1.
double miss_probability(double p, std::size_t k);

/// Whether p >= eps_{k,zeta} implies a miss probability of at most zeta for
/// this triple (vacuously true when p is below the threshold).
bool detectability_bound_holds(double p, std::size_t k, double zeta);

/// ceil((ln eps - ln p0) / delta); 0 once p0 >= eps. Requires p0 > 0,
/// 0 < eps <= 1 and delta > 0.
std::uint64_t cycles_to_threshold(double p0, double eps, double delta);

/// n / alpha. Requires alpha in (0, 1].
double expected_acr_attempts(double n, double alpha);

}  // namespace minerva

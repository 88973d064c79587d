#pragma once

#include <cstdint>
#include <vector>

namespace ldiverted {

// Utility threshold pair: the real solution of 1/(l' * eps^2 * t_e) = t_f^2
// plus its round-to-nearest integer (the conventional way these thresholds
// are reported). Consistency checks should use ceil(t_f_real), the safe
// integer.
struct UtilityThreshold {
  double t_f_real = 0.0;
  std::int64_t t_f_reported = 0;
};

UtilityThreshold utility_threshold(std::uint32_t l_prime, double varepsilon,
                                   double t_e);

// Closed-form error bound min(1, 1/(l' * eps^2 * f^2)) reported alongside the
// thresholds above; by construction error_bound(l', eps, T_f) = T_E.
// Note: for small eps*f this closed form understates the exact binomial tail
// (see chebyshev_tail_bound for the bound the variance actually yields).
double error_bound(std::uint32_t l_prime, double varepsilon, std::uint64_t f_s);

// Chebyshev bound from the exact published-count variance f*(1 - 1/l'):
// min(1, (1 - 1/l')/(eps^2 * f)). Always dominates the true tail.
double chebyshev_tail_bound(std::uint32_t l_prime, double varepsilon,
                            std::uint64_t f_s);

// Probability mass of the published count within the relative-error window
// [(1-eps)*f, (1+eps)*f]: sum over x in [ceil((1-eps)f), floor((1+eps)f)] of
// Binomial(l'*f, 1/l') at x. Computed in log space with compensated
// summation.
double privacy_in_range_mass(std::uint64_t f_s, std::uint32_t l_prime,
                             double varepsilon);

// Privacy tail T_P = 1 - privacy_in_range_mass: the probability that the
// published count misses the original by more than eps relatively.
double privacy_tail(std::uint64_t f_s, std::uint32_t l_prime, double varepsilon);

// Parameter bundle tying the utility thresholds together
// (1/(l' eps^2 T_E) = T_f^2 holds by construction).
struct GuaranteeParams {
  std::uint32_t l_prime = 0;
  double varepsilon = 0.0;
  double t_e = 0.0;
  double t_f_real = 0.0;
  std::int64_t t_f_reported = 0;
};

GuaranteeParams guarantee_params(std::uint32_t l_prime, double varepsilon,
                                 double t_e);

// One row per frequency: the closed-form bound and the exact binomial tail.
// CSV-ready data behind the two analytic curves.
struct GuaranteeRow {
  std::uint64_t f_s;
  double chebyshev_bound;  // error_bound(l', eps, f_s)
  double exact_tail;       // privacy_tail(f_s, l', eps)
};

std::vector<GuaranteeRow> guarantee_tables(std::uint32_t l_prime, double varepsilon,
                                           std::uint64_t f_min, std::uint64_t f_max);

}  // namespace ldiverted

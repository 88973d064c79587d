#include "ldiverted/guarantees.hpp"

#include <algorithm>
#include <cmath>

#include "ldiverted/errors.hpp"

namespace ldiverted {

UtilityThreshold utility_threshold(std::uint32_t l_prime, double varepsilon,
                                   double t_e) {
  if (l_prime < 1) throw DataError("l_prime must be at least 1");
  if (varepsilon <= 0) throw DataError("varepsilon must be positive");
  if (t_e <= 0 || t_e > 1) throw DataError("t_e must be in (0, 1]");
  UtilityThreshold t;
  t.t_f_real = std::sqrt(1.0 / (l_prime * varepsilon * varepsilon * t_e));
  t.t_f_reported = std::llround(t.t_f_real);
  return t;
}

double error_bound(std::uint32_t l_prime, double varepsilon, std::uint64_t f_s) {
  if (l_prime < 1) throw DataError("l_prime must be at least 1");
  if (varepsilon <= 0) throw DataError("varepsilon must be positive");
  if (f_s < 1) throw DataError("frequency must be at least 1");
  double f = static_cast<double>(f_s);
  return std::min(1.0, 1.0 / (l_prime * varepsilon * varepsilon * f * f));
}

double chebyshev_tail_bound(std::uint32_t l_prime, double varepsilon,
                            std::uint64_t f_s) {
  if (l_prime < 1) throw DataError("l_prime must be at least 1");
  if (varepsilon <= 0) throw DataError("varepsilon must be positive");
  if (f_s < 1) throw DataError("frequency must be at least 1");
  double f = static_cast<double>(f_s);
  double variance = f * (1.0 - 1.0 / l_prime);
  return std::min(1.0, variance / (varepsilon * varepsilon * f * f));
}

double privacy_in_range_mass(std::uint64_t f_s, std::uint32_t l_prime,
                             double varepsilon) {
  if (f_s < 1) throw DataError("frequency must be at least 1");
  if (l_prime < 1) throw DataError("l_prime must be at least 1");
  if (varepsilon < 0) throw DataError("varepsilon must be non-negative");
  if (l_prime == 1) return 1.0;  // degenerate channel, the count is exact

  double f = static_cast<double>(f_s);
  std::uint64_t n = static_cast<std::uint64_t>(f_s) * l_prime;
  // 1e-9 nudge keeps the integer window's edges stable under rounding of
  // (1 +- eps) * f.
  std::int64_t lo =
      std::max<std::int64_t>(0, static_cast<std::int64_t>(
                                    std::ceil((1.0 - varepsilon) * f - 1e-9)));
  std::int64_t hi = std::min<std::int64_t>(
      static_cast<std::int64_t>(n),
      static_cast<std::int64_t>(std::floor((1.0 + varepsilon) * f + 1e-9)));
  if (lo > hi) return 0.0;

  double log_p = -std::log(static_cast<double>(l_prime));
  double log_q = std::log1p(-1.0 / l_prime);
  double log_n_fact = std::lgamma(static_cast<double>(n) + 1.0);

  double sum = 0.0, comp = 0.0;  // Kahan
  for (std::int64_t x = lo; x <= hi; ++x) {
    double log_term = log_n_fact - std::lgamma(static_cast<double>(x) + 1.0) -
                      std::lgamma(static_cast<double>(n - x) + 1.0) +
                      x * log_p + (n - x) * log_q;
    double term = std::exp(log_term);
    double t = sum + term;
    if (std::abs(sum) >= std::abs(term)) {
      comp += (sum - t) + term;
    } else {
      comp += (term - t) + sum;
    }
    sum = t;
  }
  return std::clamp(sum + comp, 0.0, 1.0);
}

double privacy_tail(std::uint64_t f_s, std::uint32_t l_prime, double varepsilon) {
  return std::clamp(1.0 - privacy_in_range_mass(f_s, l_prime, varepsilon), 0.0, 1.0);
}

GuaranteeParams guarantee_params(std::uint32_t l_prime, double varepsilon,
                                 double t_e) {
  UtilityThreshold t = utility_threshold(l_prime, varepsilon, t_e);
  return {l_prime, varepsilon, t_e, t.t_f_real, t.t_f_reported};
}

std::vector<GuaranteeRow> guarantee_tables(std::uint32_t l_prime, double varepsilon,
                                           std::uint64_t f_min, std::uint64_t f_max) {
  if (f_min < 1 || f_min > f_max) throw DataError("invalid frequency range");
  std::vector<GuaranteeRow> rows;
  rows.reserve(f_max - f_min + 1);
  for (std::uint64_t f = f_min; f <= f_max; ++f) {
    rows.push_back({f, error_bound(l_prime, varepsilon, f),
                    privacy_tail(f, l_prime, varepsilon)});
  }
  return rows;
}

}  // namespace ldiverted

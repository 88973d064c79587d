// Test-side oracles, kept independent of the library implementations they
// check: exact big-rational binomial sums and tiny enumeration fixtures.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "ldiverted/dataset.hpp"
#include "ldiverted/mechanism.hpp"

namespace oracles {

using BigInt = boost::multiprecision::cpp_int;
using BigRat = boost::multiprecision::cpp_rational;

inline BigInt binomial_coefficient(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  if (k > n - k) k = n - k;
  BigInt c = 1;
  for (std::uint64_t i = 0; i < k; ++i) {
    c *= static_cast<std::uint64_t>(n - i);
    c /= static_cast<std::uint64_t>(i + 1);
  }
  return c;
}

// Exact Binomial(n, p) probability mass over [lo, hi].
inline BigRat binomial_range_mass(std::uint64_t n, const BigRat& p, std::int64_t lo,
                                  std::int64_t hi) {
  if (lo < 0) lo = 0;
  if (hi > static_cast<std::int64_t>(n)) hi = static_cast<std::int64_t>(n);
  BigRat q = BigRat(1) - p;
  BigRat mass = 0;
  for (std::int64_t x = lo; x <= hi; ++x) {
    BigRat term(binomial_coefficient(n, static_cast<std::uint64_t>(x)));
    for (std::int64_t i = 0; i < x; ++i) term *= p;
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n) - x; ++i) term *= q;
    mass += term;
  }
  return mass;
}

// Exact in-range mass of the published count of a value with frequency f
// under group size l_prime, window [(1-eps)f, (1+eps)f] with eps = num/den.
inline BigRat published_count_in_range_mass(std::uint64_t f, std::uint32_t l_prime,
                                            std::int64_t eps_num, std::int64_t eps_den) {
  std::uint64_t n = f * l_prime;
  // lo = ceil((1 - eps) f), hi = floor((1 + eps) f), in exact arithmetic.
  BigInt lo_num = BigInt(eps_den - eps_num) * f;
  BigInt lo = lo_num / eps_den + (lo_num % eps_den == 0 ? 0 : 1);
  BigInt hi = BigInt(eps_den + eps_num) * f / eps_den;
  return binomial_range_mass(n, BigRat(1, l_prime), static_cast<std::int64_t>(lo),
                             static_cast<std::int64_t>(hi));
}

inline double to_double(const BigRat& r) { return r.convert_to<double>(); }

}  // namespace oracles

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ldiverted/dataset.hpp"
#include "ldiverted/estimator.hpp"

namespace ldiverted {

struct QueryPool {
  std::vector<CountQuery> queries;
  std::uint64_t seed = 0;
  std::uint32_t pool_size = 0;
};

// Deterministic pool of count queries: random NSA conjunctions (1..3
// attributes, values drawn from the dataset's empirical marginals) each
// crossed with every value of the sensitive domain until pool_size queries
// exist. With no NSA attributes the pool degenerates to pure sensitive-value
// queries.
QueryPool generate_pool(const Schema& schema, const Dataset& d,
                        std::uint32_t pool_size, std::uint64_t seed);

// Count of rows of d matching the full conjunction.
std::int64_t actual_count(const Dataset& d, const CountQuery& q);

// actual_count / N, evaluated on the original dataset.
double selectivity(const Dataset& d, const CountQuery& q);

struct BenchConfig {
  std::vector<std::string> mechanisms{"a_prime", "anatomy", "global_a", "laplace"};
  std::vector<std::uint32_t> l_prime_grid{2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::uint32_t anatomy_l = 5;
  double global_p = 0.2;
  std::vector<double> laplace_epsilons{0.01, 0.05};
  std::vector<std::uint32_t> laplace_budgets{100};
  std::vector<double> selectivity_buckets{0.005, 0.01, 0.02, 0.03, 0.04, 0.05};
  std::uint32_t small_count_max = 10;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::uint32_t pool_size = 5000;
  std::uint64_t pool_seed = 7;
  double tol = 0.01;
  std::uint32_t max_iter = 10000;
};

struct BenchRow {
  std::string mechanism;
  std::string param;
  std::string bucket;
  double avg_rel_error = 0.0;  // NaN when the bucket is empty
  std::uint32_t n_queries = 0;
  double anonymize_ms = 0.0;
  double estimate_ms_avg = 0.0;
  double iters_median = 0.0;
  double iters_mean = 0.0;
};

struct BenchReport {
  std::vector<BenchRow> rows;

  std::string to_csv() const;
  // First row matching the triple, or nullptr.
  const BenchRow* find(const std::string& mechanism, const std::string& param,
                       const std::string& bucket) const;
};

// Runs the configured mechanisms over the query pool and aggregates relative
// errors per selectivity bucket. Ground-truth counts and bucket membership
// come from the original dataset; each mechanism estimates from its own
// published artifacts only. Laplace answers the true count plus seeded
// Lap(m/epsilon) noise.
BenchReport run_benchmark(const Dataset& d, const BenchConfig& cfg);

}  // namespace ldiverted
